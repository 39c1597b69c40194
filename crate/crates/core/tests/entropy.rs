use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use subentropy::entropy::divided::{
    subentropy_divided_difference, subentropy_generic, DEFAULT_CLUSTER_TOL,
};
use subentropy::entropy::{
    audenaert_subentropy_bound, fannes_subentropy_bound, harmonic_tail, max_relative_entropy,
    min_entropy, quantum_relative_entropy, shannon_entropy, subentropy, subentropy_gradient,
    subentropy_of_probs, subentropy_of_spectrum, von_neumann_entropy, ProbVector, UNIVERSAL_BOUND,
};
use subentropy::spectra::{
    haar_unitary_with, random_density_with, random_doubly_stochastic_with, random_simplex_with,
    trace_distance, DensityMatrix, RngSeed, Spectrum,
};

const TOL: f64 = 1e-9;

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let rank = rng.random_range(1..=n);
    random_density_with(n, rank, rng).unwrap()
}

fn q_of(values: &[f64]) -> f64 {
    subentropy_of_spectrum(&Spectrum::from_unsorted(values.to_vec()).unwrap()).unwrap()
}

#[test]
fn two_level_closed_form_oracle() {
    // Q(a, b) = -(a^2 ln a - b^2 ln b) / (a - b), evaluated directly.
    for &(a, b) in &[(0.75, 0.25), (0.9, 0.1), (0.6, 0.4), (0.999, 0.001)] {
        let f = |x: f64| x * x * x.ln();
        let exact = -(f(a) - f(b)) / (a - b);
        assert!((q_of(&[a, b]) - exact).abs() < 1e-13, "({a}, {b})");
    }
    assert!((q_of(&[0.75, 0.25]) - 0.150_355_5).abs() < 1e-7);
}

#[test]
fn maximally_mixed_closed_form() {
    for n in 1..=64 {
        let exact = (n as f64).ln() - harmonic_tail(n).unwrap();
        assert!(
            (subentropy(&DensityMatrix::maximally_mixed(n).unwrap()) - exact).abs() < 1e-12,
            "n = {n}"
        );
        assert!(exact <= UNIVERSAL_BOUND);
    }
}

proptest! {
    #[test]
    fn zero_padding_and_permutation_invariance(seed: u64, n in 1usize..=8, extra in 1usize..=4) {
        let mut rng = RngSeed(seed).rng();
        let p = random_simplex_with(n, &mut rng);
        let q = q_of(&p);
        let mut padded = p.clone();
        padded.extend(std::iter::repeat_n(0.0, extra));
        prop_assert!((q_of(&padded) - q).abs() < TOL);
        let mut shuffled = padded.clone();
        shuffled.shuffle(&mut rng);
        prop_assert!((subentropy_of_probs(&ProbVector::new(shuffled).unwrap()) - q).abs() < TOL);
    }

    #[test]
    fn integral_and_divided_difference_routes_agree(seed: u64, n in 1usize..=8) {
        let p = random_simplex_with(n, &mut RngSeed(seed).rng());
        prop_assert!((q_of(&p) - subentropy_divided_difference(&p, DEFAULT_CLUSTER_TOL)).abs() < 1e-8);
    }

    #[test]
    fn generic_formula_matches_on_separated_values(seed: u64, n in 2usize..=6) {
        let mut rng = RngSeed(seed).rng();
        // Evenly spaced values with jitter keep the gaps well away from zero.
        let raw: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 + 0.3 * rng.random::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        let p: Vec<f64> = raw.iter().map(|x| x / total).collect();
        prop_assert!((q_of(&p) - subentropy_generic(&p).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn ordering_chain(seed: u64, n in 2usize..=8) {
        let rho = random_state(n, &mut RngSeed(seed).rng());
        let q = subentropy(&rho);
        let h = min_entropy(&rho);
        let s = von_neumann_entropy(&rho);
        prop_assert!(q >= -TOL);
        prop_assert!(q <= h + TOL);
        prop_assert!(h <= s + TOL);
        prop_assert!(q <= UNIVERSAL_BOUND + TOL);
        prop_assert!(q <= (n as f64).ln() - harmonic_tail(n).unwrap() + TOL);
    }

    #[test]
    fn unitary_invariance(seed: u64, n in 1usize..=6) {
        let mut rng = RngSeed(seed).rng();
        let rho = random_state(n, &mut rng);
        let u = haar_unitary_with(n, &mut rng);
        prop_assert!((subentropy(&rho.conjugated(&u).unwrap()) - subentropy(&rho)).abs() < TOL);
    }

    #[test]
    fn concavity(seed: u64, n in 2usize..=6, q in 0.01f64..0.99) {
        let mut rng = RngSeed(seed).rng();
        let a = random_state(n, &mut rng);
        let b = random_state(n, &mut rng);
        let mix = DensityMatrix::mixture(&[(q, &a), (1.0 - q, &b)]).unwrap();
        prop_assert!(subentropy(&mix) >= q * subentropy(&a) + (1.0 - q) * subentropy(&b) - TOL);
    }

    #[test]
    fn mixing_enhancing_maps_do_not_decrease(seed: u64, n in 2usize..=6, k in 2usize..=4) {
        let mut rng = RngSeed(seed).rng();
        let rho = random_state(n, &mut rng);
        let w = random_simplex_with(k, &mut rng);
        let parts: Vec<DensityMatrix> = (0..k)
            .map(|_| rho.conjugated(&haar_unitary_with(n, &mut rng)).unwrap())
            .collect();
        let refs: Vec<(f64, &DensityMatrix)> = w.iter().copied().zip(parts.iter()).collect();
        let mixed = DensityMatrix::mixture(&refs).unwrap();
        prop_assert!(subentropy(&mixed) >= subentropy(&rho) - TOL);
    }

    #[test]
    fn schur_concavity(seed: u64, n in 2usize..=8, terms in 1usize..=4) {
        let mut rng = RngSeed(seed).rng();
        let mu = random_simplex_with(n, &mut rng);
        let d = random_doubly_stochastic_with(n, terms, &mut rng);
        let lambda: Vec<f64> = d.iter().map(|row| row.iter().zip(&mu).map(|(a, b)| a * b).sum()).collect();
        prop_assert!(q_of(&lambda) >= q_of(&mu) - TOL);
    }

    #[test]
    fn continuity_bounds_hold(seed: u64, n in 2usize..=8, eps in 0.0f64..1.0) {
        let mut rng = RngSeed(seed).rng();
        let rho = random_state(n, &mut rng);
        let tau = random_state(n, &mut rng);
        let sigma = DensityMatrix::mixture(&[(1.0 - eps, &rho), (eps, &tau)]).unwrap();
        let t = trace_distance(&rho, &sigma).unwrap();
        prop_assume!(t <= 1.0 / (2.0 * std::f64::consts::E));
        let bound = fannes_subentropy_bound(t, n).unwrap().min(audenaert_subentropy_bound(t, n).unwrap());
        prop_assert!((subentropy(&rho) - subentropy(&sigma)).abs() <= bound + TOL);
    }

    #[test]
    fn max_relative_entropy_dominates(seed: u64, n in 1usize..=6, commuting: bool) {
        let mut rng = RngSeed(seed).rng();
        let (rho, sigma) = if commuting {
            let a = random_simplex_with(n, &mut rng);
            let b = random_simplex_with(n, &mut rng);
            (DensityMatrix::diagonal(&a).unwrap(), DensityMatrix::diagonal(&b).unwrap())
        } else {
            // Full-rank sigma keeps both quantities finite.
            (random_state(n, &mut rng), random_density_with(n, n, &mut rng).unwrap())
        };
        let d = quantum_relative_entropy(&rho, sigma.hermitian()).unwrap();
        let dmax = max_relative_entropy(&rho, sigma.hermitian()).unwrap();
        prop_assert!(d >= -TOL);
        prop_assert!(dmax >= d - TOL);
        prop_assert!(quantum_relative_entropy(&rho, rho.hermitian()).unwrap().abs() < 1e-8);
    }

    #[test]
    fn gradient_matches_finite_differences(seed: u64, n in 2usize..=6) {
        let mut rng = RngSeed(seed).rng();
        let raw: Vec<f64> = (0..n).map(|_| 0.2 + rng.random::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        let p: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let g = subentropy_gradient(&ProbVector::new(p.clone()).unwrap());
        let h = 1e-5;
        for i in 1..n {
            // Directional derivative along e_i - e_0 stays on the simplex.
            let (mut up, mut down) = (p.clone(), p.clone());
            up[i] += h;
            up[0] -= h;
            down[i] -= h;
            down[0] += h;
            let fd = (q_of(&up) - q_of(&down)) / (2.0 * h);
            prop_assert!((fd - (g[i] - g[0])).abs() < 1e-6, "i = {i}: {fd} vs {}", g[i] - g[0]);
        }
    }

    #[test]
    fn shannon_of_spectrum_is_von_neumann(seed: u64, n in 1usize..=6) {
        let rho = random_state(n, &mut RngSeed(seed).rng());
        let p = ProbVector::new(rho.spectrum().values().to_vec()).unwrap();
        prop_assert!((shannon_entropy(&p) - von_neumann_entropy(&rho)).abs() < 1e-12);
    }
}
