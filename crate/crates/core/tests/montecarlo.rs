use proptest::prelude::*;
use rand::Rng;
use subentropy::entropy::{harmonic_tail, subentropy};
use subentropy::montecarlo::{
    eigen_decomposition, estimate_q_via_haar, estimate_q_via_haar_vector, estimate_q_via_relent,
    estimate_q_via_simplex, verify_integral_identity,
};
use subentropy::spectra::{random_density_with, DensityMatrix, RngSeed};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn estimates_are_bitwise_reproducible(seed: u64, n in 1usize..=4) {
        let mut rng = RngSeed(seed).rng();
        let rank = rng.random_range(1..=n);
        let rho = random_density_with(n, rank, &mut rng).unwrap();
        let s = RngSeed(seed ^ 0x5eed);
        let a = estimate_q_via_haar(&rho, 500, s).unwrap();
        let b = estimate_q_via_haar(&rho, 500, s).unwrap();
        prop_assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
        let a = estimate_q_via_simplex(rho.spectrum(), 500, s).unwrap();
        let b = estimate_q_via_simplex(rho.spectrum(), 500, s).unwrap();
        prop_assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
        prop_assert!(a.std_error >= 0.0);
        prop_assert_eq!(a.samples, 500);
    }

    #[test]
    fn pure_decomposition_has_zero_relative_entropy(seed: u64, n in 1usize..=5) {
        let rho = random_density_with(n, 1, &mut RngSeed(seed).rng()).unwrap();
        let r = estimate_q_via_relent(&rho, &[(1.0, rho.clone())], 200, RngSeed(seed)).unwrap();
        prop_assert!(r.estimate.abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_haar_vector_is_exact(seed: u64, n in 1usize..=6) {
        // <psi| I/n |psi> = 1/n for every psi, so each sample equals the mean.
        let rho = DensityMatrix::maximally_mixed(n).unwrap();
        let r = estimate_q_via_haar_vector(&rho, 100, RngSeed(seed)).unwrap();
        let exact = (n as f64).ln() - harmonic_tail(n).unwrap();
        prop_assert!((r.estimate - exact).abs() < 1e-12);
        prop_assert!(r.std_error < 1e-12);
    }
}

#[test]
fn representations_agree_on_fixed_states() {
    let mut rng = RngSeed(401).rng();
    for n in [2usize, 3, 5] {
        let rho = random_density_with(n, n, &mut rng).unwrap();
        let exact = subentropy(&rho);
        let decomposition = eigen_decomposition(&rho).unwrap();
        let estimates = [
            estimate_q_via_haar(&rho, 100_000, RngSeed(410 + n as u64)).unwrap(),
            estimate_q_via_haar_vector(&rho, 100_000, RngSeed(420 + n as u64)).unwrap(),
            estimate_q_via_simplex(rho.spectrum(), 100_000, RngSeed(430 + n as u64)).unwrap(),
            estimate_q_via_relent(&rho, &decomposition, 100_000, RngSeed(440 + n as u64)).unwrap(),
        ];
        for (k, r) in estimates.iter().enumerate() {
            assert!(
                r.within_sigma(exact, 3.0),
                "n={n} estimator {k}: z = {}",
                r.z_score(exact)
            );
        }
    }
}

#[test]
fn integral_identity_holds() {
    for (n, seed) in [(2usize, 501u64), (3, 502), (6, 503)] {
        let r = verify_integral_identity(n, 100_000, RngSeed(seed)).unwrap();
        let exact = harmonic_tail(n).unwrap();
        assert!(
            r.within_sigma(exact, 3.0),
            "n={n}: {} vs {exact}",
            r.estimate
        );
    }
}
