use proptest::prelude::*;
use rand::Rng;
use subentropy::entropy::eta;
use subentropy::spectra::{
    haar_unitary_with, majorizes, partial_trace, random_density_with,
    random_doubly_stochastic_with, random_simplex_with, trace_distance, CMatrix, DensityMatrix,
    HermitianMatrix, RngSeed, Subsystem, C64,
};

fn random_hermitian(n: usize, rng: &mut impl Rng) -> HermitianMatrix {
    let g = CMatrix::from_fn(n, |_, _| {
        C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    HermitianMatrix::symmetrized(&(&g + &g.adjoint()))
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn eigendecomposition_reconstructs(seed: u64, n in 1usize..=16) {
        let h = random_hermitian(n, &mut RngSeed(seed).rng());
        let e = h.eigen();
        prop_assert!(e.reconstruct().max_abs_diff(h.matrix()) < 1e-9);
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }
}

proptest! {
    #[test]
    fn trace_distance_is_a_metric(seed: u64, n in 1usize..=6) {
        let mut rng = RngSeed(seed).rng();
        let r1 = rng.random_range(1..=n);
        let r2 = rng.random_range(1..=n);
        let r3 = rng.random_range(1..=n);
        let a = random_density_with(n, r1, &mut rng).unwrap();
        let b = random_density_with(n, r2, &mut rng).unwrap();
        let c = random_density_with(n, r3, &mut rng).unwrap();
        let ab = trace_distance(&a, &b).unwrap();
        prop_assert!((ab - trace_distance(&b, &a).unwrap()).abs() < 1e-10);
        prop_assert!(ab <= trace_distance(&a, &c).unwrap() + trace_distance(&c, &b).unwrap() + 1e-10);
        prop_assert!(trace_distance(&a, &a).unwrap().abs() < 1e-10);
        prop_assert!((-1e-10..=1.0 + 1e-10).contains(&ab));
    }

    #[test]
    fn partial_trace_preserves_trace_and_positivity(seed: u64, a in 1usize..=4, b in 1usize..=4) {
        let mut rng = RngSeed(seed).rng();
        let rank = rng.random_range(1..=a * b);
        let rho = random_density_with(a * b, rank, &mut rng).unwrap();
        for (which, dim) in [(Subsystem::A, a), (Subsystem::B, b)] {
            let r = partial_trace(&rho, a, b, which).unwrap();
            prop_assert_eq!(r.dim(), dim);
            prop_assert!((r.matrix().trace().re - 1.0).abs() < 1e-10);
            prop_assert!(r.eigen().min_value() >= -1e-10);
        }
    }

    #[test]
    fn product_states_reduce_to_factors(seed: u64, a in 1usize..=3, b in 1usize..=3) {
        let mut rng = RngSeed(seed).rng();
        let ra = random_density_with(a, a, &mut rng).unwrap();
        let rb = random_density_with(b, b, &mut rng).unwrap();
        let ab = ra.tensor(&rb).unwrap();
        prop_assert!(partial_trace(&ab, a, b, Subsystem::A).unwrap().matrix().max_abs_diff(ra.matrix()) < 1e-12);
        prop_assert!(partial_trace(&ab, a, b, Subsystem::B).unwrap().matrix().max_abs_diff(rb.matrix()) < 1e-12);
    }

    #[test]
    fn mutual_majorization_means_equal(seed: u64, n in 1usize..=8) {
        let mut rng = RngSeed(seed).rng();
        let mu = sorted_desc(random_simplex_with(n, &mut rng));
        prop_assert!(majorizes(&mu, &mu).unwrap());
        let candidates = [
            sorted_desc(random_simplex_with(n, &mut rng)),
            sorted_desc(mu.iter().map(|x| x + 1e-13 * (rng.random::<f64>() - 0.5)).collect()),
        ];
        for other in candidates {
            if majorizes(&mu, &other).unwrap() && majorizes(&other, &mu).unwrap() {
                for (p, q) in mu.iter().zip(&other) {
                    prop_assert!((p - q).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn doubly_stochastic_images_are_majorized(seed: u64, n in 1usize..=8, terms in 1usize..=5) {
        let mut rng = RngSeed(seed).rng();
        let mu = sorted_desc(random_simplex_with(n, &mut rng));
        let d = random_doubly_stochastic_with(n, terms, &mut rng);
        let lambda: Vec<f64> = d.iter().map(|row| row.iter().zip(&mu).map(|(a, b)| a * b).sum()).collect();
        prop_assert!(majorizes(&mu, &sorted_desc(lambda)).unwrap());
        prop_assert!(majorizes(&mu, &vec![1.0 / n as f64; n]).unwrap());
        let mut delta = vec![0.0; n];
        delta[0] = 1.0;
        prop_assert!(majorizes(&delta, &mu).unwrap());
    }

    #[test]
    fn haar_unitaries_are_unitary(seed: u64, n in 1usize..=10) {
        let u = haar_unitary_with(n, &mut RngSeed(seed).rng());
        prop_assert!((&u * &u.adjoint()).max_abs_diff(&CMatrix::identity(n)) < 1e-12);
    }

    #[test]
    fn random_states_are_valid(seed: u64, n in 1usize..=8) {
        let mut rng = RngSeed(seed).rng();
        let rank = rng.random_range(1..=n);
        let rho = random_density_with(n, rank, &mut rng).unwrap();
        let values = rho.spectrum().values();
        prop_assert!((values.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        prop_assert!(values.iter().all(|&x| x >= 0.0));
        prop_assert!(values.iter().filter(|&&x| x > 1e-9).count() <= rank);
        let u = haar_unitary_with(n, &mut rng);
        let conj = rho.conjugated(&u).unwrap();
        for (x, y) in conj.spectrum().values().iter().zip(values) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }
}

#[test]
fn haar_first_entry_second_moment() {
    // E|U_11|^2 = 1/n.
    let mut rng = RngSeed(101).rng();
    let xs: Vec<f64> = (0..100_000)
        .map(|_| haar_unitary_with(2, &mut rng)[(0, 0)].norm_sqr())
        .collect();
    let (m, se) = mean_and_se(&xs);
    assert!((m - 0.5).abs() < 3.0 * se, "{m} +/- {se}");
}

#[test]
fn simplex_marginals_are_uniform() {
    let mut rng = RngSeed(102).rng();
    for n in [2usize, 3, 5] {
        let pts: Vec<Vec<f64>> = (0..100_000)
            .map(|_| random_simplex_with(n, &mut rng))
            .collect();
        for i in 0..n {
            let xs: Vec<f64> = pts.iter().map(|p| p[i]).collect();
            let (m, se) = mean_and_se(&xs);
            assert!(
                (m - 1.0 / n as f64).abs() < 3.0 * se,
                "n={n} i={i}: {m} +/- {se}"
            );
        }
    }
}

#[test]
fn simplex_eta_average() {
    // E[-x_1 ln x_1] over the uniform 3-simplex is C_3 / 3 = 5/18.
    let mut rng = RngSeed(103).rng();
    let xs: Vec<f64> = (0..100_000)
        .map(|_| eta(random_simplex_with(3, &mut rng)[0]).unwrap())
        .collect();
    let (m, se) = mean_and_se(&xs);
    assert!((m - 5.0 / 18.0).abs() < 3.0 * se, "{m} +/- {se}");
}

#[test]
fn pure_states_have_rank_one() {
    let mut rng = RngSeed(104).rng();
    for n in 1..=8 {
        let rho = random_density_with(n, 1, &mut rng).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        assert!((rho.spectrum().values()[0] - 1.0).abs() < 1e-12);
        assert!(
            (DensityMatrix::maximally_mixed(n).unwrap().purity() - 1.0 / n as f64).abs() < 1e-12
        );
    }
}
