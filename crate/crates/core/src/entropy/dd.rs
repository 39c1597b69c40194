//! Minimal double-double arithmetic (about 32 significant digits), enough to
//! evaluate the generic divided-difference sum without cancellation loss.

use std::ops::{Add, Div, Mul, Neg, Sub};

const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd {
        hi: s,
        lo: b - (s - a),
    }
}

impl Dd {
    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn powi(self, n: u32) -> Self {
        let mut out = Dd::from_f64(1.0);
        let mut base = self;
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                out = out * base;
            }
            base = base * base;
            k >>= 1;
        }
        out
    }

    fn scale(self, s: f64) -> Self {
        Dd {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    /// `exp(y)` for a finite `y` of moderate size.
    pub fn exp(y: f64) -> Self {
        let k = (y / LN2.hi).round();
        let r = (Dd::from_f64(y) - LN2.scale(k)).scale(1.0 / 512.0);
        let mut term = Dd::from_f64(1.0);
        let mut sum = Dd::from_f64(1.0);
        for j in 1..=14 {
            term = term * r / Dd::from_f64(j as f64);
            sum = sum + term;
        }
        for _ in 0..9 {
            sum = sum * sum;
        }
        sum.scale(2f64.powi(k as i32))
    }

    /// Natural log of a positive finite `x`, one Newton step from `f64::ln`.
    pub fn ln(x: f64) -> Self {
        let y0 = x.ln();
        let e = Dd::exp(y0);
        Dd::from_f64(y0) + (Dd::from_f64(x) - e) / e
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let r = quick_two_sum(s, e + t);
        quick_two_sum(r.hi, r.lo + f)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        quick_two_sum(p, e + (self.hi * o.lo + self.lo * o.hi))
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::from_f64(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::from_f64(q2);
        let q3 = r.hi / o.hi;
        quick_two_sum(q1, q2) + Dd::from_f64(q3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_two_matches_constant() {
        let l = Dd::ln(2.0);
        assert!((l - LN2).to_f64().abs() < 1e-31);
    }

    #[test]
    fn exp_one_matches_constant() {
        let e = Dd::exp(1.0);
        let exact = Dd {
            hi: std::f64::consts::E,
            lo: 1.445_646_891_729_250_2e-16,
        };
        let err = (e - exact).to_f64().abs();
        assert!(err < 1e-28, "{err:e}");
    }

    #[test]
    fn exact_small_operations() {
        let third = Dd::from_f64(1.0) / Dd::from_f64(3.0);
        let back = third * Dd::from_f64(3.0) - Dd::from_f64(1.0);
        assert!(back.to_f64().abs() < 1e-31);
        // 0.1 + 0.2 in double-double keeps the low bits f64 addition drops.
        let s = Dd::from_f64(0.1) + Dd::from_f64(0.2);
        assert_eq!(s.hi, 0.1 + 0.2);
        assert!(s.lo != 0.0);
        assert_eq!(Dd::from_f64(1.5).powi(3).to_f64(), 3.375);
    }

    #[test]
    fn ln_of_small_values_round_trips() {
        for &x in &[1e-12, 3.7e-5, 0.15, 0.9999] {
            let l = Dd::ln(x);
            let back = Dd::exp(l.hi) * Dd::exp(l.lo) - Dd::from_f64(x);
            assert!(back.to_f64().abs() < 1e-28 * x, "{x}");
        }
    }
}
