//! Property tests over randomly generated matrices, measures and means.

use proptest::prelude::*;

use kam_core::hermitian::{loewner_leq, spectral_apply, HermitianMatrix, TolerancePolicy};
use kam_core::means::{
    mean_quadrature, mean_spectral, parallel_sum, EpsLadder, MeanDescriptor,
};
use kam_core::monotone::{h_decomposition, probe_grid, HPart, RepresentingFunction};
use kam_core::sampling::{self, SampleRng};

fn pol() -> TolerancePolicy {
    TolerancePolicy::default()
}

fn catalog_index() -> impl Strategy<Value = usize> {
    0usize..5
}

fn mean_by_index(i: usize) -> MeanDescriptor {
    MeanDescriptor::catalog().into_iter().nth(i).expect("catalog has five entries")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eig_reconstructs_and_is_orthonormal(seed in any::<u64>(), n in 2usize..7) {
        let mut rng = SampleRng::seed_from_u64(seed);
        let a = sampling::random_hermitian(n, 1.0, &mut rng);
        let dec = a.eig();
        let rebuilt = dec.map_eigenvalues(Some).unwrap();
        prop_assert!(a.sub(&rebuilt).operator_norm() <= 1e-10 * (1.0 + a.operator_norm()));
        for w in dec.eigenvalues.windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn parallel_sum_sits_below_both_arguments(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = SampleRng::seed_from_u64(seed);
        let a = sampling::random_pd(n, &mut rng);
        let b = sampling::random_pd(n, &mut rng);
        let ps = parallel_sum(&a, &b, &pol()).unwrap();
        prop_assert!(loewner_leq(&ps, &a, &pol()).unwrap());
        prop_assert!(loewner_leq(&ps, &b, &pol()).unwrap());
        // harmonic-arithmetic bridge: 2(A:B) <= (A+B)/2  fails in general,
        // but A:B <= (A+B)/4 holds by the AM-HM inequality
        let quarter = a.add(&b).scale(0.25);
        prop_assert!(loewner_leq(&ps, &quarter, &pol()).unwrap());
    }

    #[test]
    fn means_are_monotone_and_fix_the_diagonal(seed in any::<u64>(), n in 2usize..5, which in catalog_index()) {
        let sigma = mean_by_index(which);
        let mut rng = SampleRng::seed_from_u64(seed);
        let (a, c) = sampling::ordered_pd_pair(n, &mut rng);
        let (b, d) = sampling::ordered_pd_pair(n, &mut rng);
        let ab = mean_spectral(&sigma, &a, &b, &pol()).unwrap();
        let cd = mean_spectral(&sigma, &c, &d, &pol()).unwrap();
        prop_assert!(loewner_leq(&ab, &cd, &pol()).unwrap(), "{} monotonicity", sigma.label());

        let aa = mean_spectral(&sigma, &a, &a, &pol()).unwrap();
        prop_assert!(aa.sub(&a).operator_norm() <= 1e-8 * (1.0 + a.operator_norm()));
    }

    #[test]
    fn symmetric_means_commute_in_their_arguments(seed in any::<u64>(), n in 2usize..5, which in catalog_index()) {
        let sigma = mean_by_index(which);
        let mut rng = SampleRng::seed_from_u64(seed);
        let a = sampling::random_pd(n, &mut rng);
        let b = sampling::random_pd(n, &mut rng);
        let ab = mean_spectral(&sigma, &a, &b, &pol()).unwrap();
        let ba = mean_spectral(&sigma, &b, &a, &pol()).unwrap();
        prop_assert!(ab.sub(&ba).operator_norm() <= 1e-9 * (1.0 + ab.operator_norm()));
    }

    #[test]
    fn measure_routes_agree(seed in any::<u64>(), n in 2usize..5) {
        let mut rng = SampleRng::seed_from_u64(seed);
        let measure = sampling::random_measure(5, &mut rng);
        let sigma = MeanDescriptor::from_measure(measure, "random");
        let a = sampling::random_pd(n, &mut rng);
        let b = sampling::random_pd(n, &mut rng);
        let spectral = mean_spectral(&sigma, &a, &b, &pol()).unwrap();
        let quadrature = mean_quadrature(&sigma, &a, &b, &pol()).unwrap();
        let dev = spectral.sub(&quadrature).operator_norm()
            / (1.0 + a.operator_norm() + b.operator_norm());
        prop_assert!(dev <= 1e-8, "route deviation {dev}");
    }

    #[test]
    fn transpose_is_involutive_and_swaps_boundaries(seed in any::<u64>()) {
        let mut rng = SampleRng::seed_from_u64(seed);
        let f = RepresentingFunction::from_measure(sampling::random_measure(5, &mut rng));
        let tt = f.transpose().transpose();
        for &x in &probe_grid() {
            let a = f.eval(x).unwrap();
            let b = tt.eval(x).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
        prop_assert!((f.transpose().f_at_0() - f.fo_at_0()).abs() <= 1e-15);
    }

    #[test]
    fn h_part_rebuilds_the_function(seed in any::<u64>()) {
        let mut rng = SampleRng::seed_from_u64(seed);
        let f = RepresentingFunction::from_measure(sampling::random_measure(5, &mut rng));
        let h = h_decomposition(&f);
        for &x in &probe_grid() {
            let fx = f.eval(x).unwrap();
            let hx = match &h {
                HPart::NonAffine(h) => h.eval(x).unwrap(),
                HPart::Affine => 0.0,
            };
            let rebuilt = f.f_at_0() + f.fo_at_0() * x + hx;
            prop_assert!((fx - rebuilt).abs() <= 1e-12 * (1.0 + fx));
        }
    }

    #[test]
    fn boundary_ladder_stays_monotone(seed in any::<u64>(), n in 2usize..5, which in catalog_index()) {
        let sigma = mean_by_index(which);
        let mut rng = SampleRng::seed_from_u64(seed);
        let a = sampling::random_psd(n, 1 + (seed as usize) % n, &mut rng);
        let b = sampling::random_psd(n, 1 + (seed as usize / 7) % n, &mut rng);
        // mean_psd_limit itself asserts the monotone descent
        let result = kam_core::means::mean_psd_limit(
            &sigma, &a, &b, &EpsLadder::default(), &pol(),
        ).unwrap();
        prop_assert!(result.convergence_estimate.is_finite());
        prop_assert!(result.value.min_eigenvalue() >= -1e-9 * (1.0 + result.value.operator_norm()));
    }

    #[test]
    fn squaring_respects_spectral_calculus(seed in any::<u64>(), n in 2usize..6) {
        let mut rng = SampleRng::seed_from_u64(seed);
        let a = sampling::random_hermitian(n, 1.0, &mut rng);
        let squared = spectral_apply(|l| Some(l * l), &a).unwrap();
        let product = HermitianMatrix::new(a.as_matrix() * a.as_matrix()).unwrap();
        let scale = 1.0 + a.operator_norm() * a.operator_norm();
        prop_assert!(squared.sub(&product).operator_norm() <= 1e-10 * scale);
    }
}
