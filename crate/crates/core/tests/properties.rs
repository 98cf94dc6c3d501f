use nalgebra::{Complex, ComplexField};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rispr_core::beamforming::{combiners, mr_combiner, ul_sinr, zf_combiner, CombinerSet, Scheme};
use rispr_core::channel::{effective_correlation, Association, CorrelationSet};
use rispr_core::estimation::{assign_pilots, estimate_all, simulate_pilot_phase};
use rispr_core::geometry::{
    bs_array_response, bs_ue_correlation, complex_gaussian_mat, complex_gaussian_vec,
    ris_array_response, ris_correlation_kernel, ArrayGeometry,
};
use rispr_core::linalg::{
    hermitian_part, max_eigenvalue_hermitian, min_eigenvalue_hermitian, trace,
};
use rispr_core::phase_opt::{
    build_quadratic, objective, random_phases, riemannian_ascent, AscentOptions,
};
use rispr_core::placement::{
    build_angle_grid, normalized_interference, steering_inner_product_magnitude,
};
use rispr_core::{CMat, CVec};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_psd(m: usize, rank: usize, r: &mut ChaCha8Rng) -> CMat<f64> {
    let a: CMat<f64> = complex_gaussian_mat(m, rank, r);
    hermitian_part(&(&a * a.adjoint()))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn hermitian_err(a: &CMat<f64>) -> f64 {
    (a - a.adjoint()).norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn array_responses_have_unit_modulus(
        m in 1usize..64, aoa in -4.0f64..4.0, az in -4.0f64..4.0, el in -1.5f64..1.5,
        nv in 1usize..9, nh in 1usize..9, spacing in 0.1f64..2.0,
    ) {
        let g = ArrayGeometry::new(m, spacing, nv, nh, spacing, 1.0).unwrap();
        for z in bs_array_response(aoa, &g).iter() {
            prop_assert!((z.modulus() - 1.0).abs() < 1e-12);
        }
        let a = ris_array_response(az, el, &g);
        prop_assert_eq!(a.len(), nv * nh);
        for z in a.iter() {
            prop_assert!((z.modulus() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ris_kernel_symmetric_unit_diagonal_bounded(
        nv in 1usize..7, nh in 1usize..7, spacing in 0.1f64..1.0,
    ) {
        let g = ArrayGeometry::new(4, 0.5, nv, nh, spacing, 1.0).unwrap();
        let k = ris_correlation_kernel(&g);
        let n = nv * nh;
        prop_assert!((&k - k.transpose()).norm() == 0.0);
        for i in 0..n {
            prop_assert!((k[(i, i)] - 1.0).abs() < 1e-15);
        }
        let eig = k.symmetric_eigen().eigenvalues;
        let radius = eig.iter().fold(0.0f64, |a, e| a.max(e.abs()));
        prop_assert!(radius <= n as f64 * (1.0 + 1e-12));
    }

    #[test]
    fn bs_ue_correlation_is_hermitian_psd(
        m in 1usize..48, beta in 1e-14f64..1.0, zeta in 0.0f64..0.99, aoa in -4.0f64..4.0,
    ) {
        let r = bs_ue_correlation(beta, zeta, aoa, m).unwrap();
        let scale = trace(&r) / m as f64;
        prop_assert!(hermitian_err(&r) <= 1e-12 * scale);
        prop_assert!(min_eigenvalue_hermitian(&r) >= -1e-9 * scale);
    }

    #[test]
    fn effective_correlation_is_hermitian_psd(seed in any::<u64>(), m in 2usize..16, side in 1usize..4) {
        let mut r = rng(seed);
        let g = ArrayGeometry::new(m, 0.5, side, side + 1, 0.5, 1.0).unwrap();
        let n = g.ris_elements();
        let h: CMat<f64> = complex_gaussian_mat(m, n, &mut r);
        let phases: CVec<f64> = random_phases(n, &mut r);
        let assoc = Association::new(vec![Some(0), None], 1).unwrap();
        let set = CorrelationSet::new(
            vec![bs_ue_correlation(1e-3, 0.5, 0.4, m).unwrap(), bs_ue_correlation(1e-2, 0.5, 1.1, m).unwrap()],
            vec![Some(0.3), None],
            ris_correlation_kernel(&g),
        ).unwrap();
        for k in 0..2 {
            let rk = effective_correlation(k, &assoc, &set, &h, &phases).unwrap();
            let scale = trace(&rk) / m as f64;
            prop_assert!(hermitian_err(&rk) <= 1e-10 * scale);
            prop_assert!(min_eigenvalue_hermitian(&rk) >= -1e-9 * scale);
        }
    }

    #[test]
    fn inner_product_closed_form_matches_sum(
        m in 1usize..129, a in -1.5f64..1.5, b in -1.5f64..1.5, spacing in 0.25f64..1.0,
    ) {
        let g = ArrayGeometry::new(m, spacing, 1, 1, 0.5, 1.0).unwrap();
        let direct = bs_array_response(a, &g).dotc(&bs_array_response(b, &g)).modulus();
        let closed = steering_inner_product_magnitude(a, b, m, spacing, 1.0);
        let x = spacing * (a.sin() - b.sin());
        // away from the removable singularity only
        prop_assume!((x - x.round()).abs() > 1e-6);
        prop_assert!((direct - closed).abs() <= 1e-9 * closed.max(1.0), "{direct} vs {closed}");
    }

    #[test]
    fn power_split_and_estimate_psd(seed in any::<u64>(), m in 2usize..12, k in 1usize..4, tau in 1usize..3) {
        let mut r = rng(seed);
        let assoc = Association::new((0..k * tau).map(|i| (i / tau).checked_sub(1)).collect(), k.saturating_sub(1)).unwrap();
        let assign = assign_pilots(&assoc, tau).unwrap();
        let corr: Vec<CMat<f64>> = (0..k * tau).map(|_| random_psd(m, 1 + seed as usize % m, &mut r)).collect();
        let h: Vec<CVec<f64>> = (0..k * tau).map(|_| complex_gaussian_vec(m, &mut r)).collect();
        let y = simulate_pilot_phase(&h, &assign, 10.0, &mut r).unwrap();
        let est = estimate_all(y, &corr, &assign, 10.0).unwrap();
        for i in 0..k * tau {
            let tr = trace(&corr[i]);
            let split = trace(&est.estimate_cov[i]) + trace(&est.error_cov[i]);
            prop_assert!(rel(split, tr) < 1e-10);
            let phi = &est.estimate_cov[i];
            prop_assert!(hermitian_err(phi) <= 1e-9 * tr);
            prop_assert!(min_eigenvalue_hermitian(phi) >= -1e-9 * tr);
            prop_assert!(min_eigenvalue_hermitian(&est.error_cov[i]) >= -1e-9 * tr);
        }
    }

    #[test]
    fn contaminated_estimates_are_proportional(seed in any::<u64>(), m in 2usize..10) {
        let mut r = rng(seed);
        let assoc = Association::new(vec![None, Some(0)], 1).unwrap();
        let assign = assign_pilots(&assoc, 1).unwrap();
        let corr: Vec<CMat<f64>> = (0..2).map(|_| random_psd(m, 2 * m, &mut r)).collect();
        let h: Vec<CVec<f64>> = (0..2).map(|_| complex_gaussian_vec(m, &mut r)).collect();
        let y = simulate_pilot_phase(&h, &assign, 3.0, &mut r).unwrap();
        let est = estimate_all(y, &corr, &assign, 3.0).unwrap();
        let rk_inv = corr[0].clone().try_inverse().unwrap();
        let predicted = &corr[1] * rk_inv * &est.estimates[0];
        let err = (&predicted - &est.estimates[1]).norm();
        prop_assert!(err <= 1e-9 * est.estimates[1].norm().max(1e-300), "{err}");
    }

    #[test]
    fn pilot_schedule_always_holds(groups in prop::collection::vec(0usize..5, 1..5), extra in 0usize..3) {
        // group sizes per association set; K_0 may be empty
        let r = groups.len() - 1;
        let ris_of: Vec<Option<usize>> = groups
            .iter()
            .enumerate()
            .flat_map(|(g, &n)| std::iter::repeat(g.checked_sub(1)).take(n))
            .collect();
        prop_assume!(!ris_of.is_empty());
        let assoc = Association::new(ris_of, r).unwrap();
        let tau = groups.iter().copied().max().unwrap() + extra;
        let a = assign_pilots(&assoc, tau.max(1)).unwrap();
        prop_assert!(a.satisfies_schedule(&assoc));
        let total: usize = a.share_sets.iter().map(Vec::len).sum();
        prop_assert_eq!(total, assoc.num_ues());
    }

    #[test]
    fn zf_nulls_and_sinr_scale_invariance(seed in any::<u64>(), m in 4usize..24, k in 1usize..4) {
        let mut r = rng(seed);
        let est: Vec<CVec<f64>> = (0..k).map(|_| complex_gaussian_vec(m, &mut r)).collect();
        let zf = zf_combiner(&est).unwrap();
        for (i, v) in zf.vectors.iter().enumerate() {
            for (j, h) in est.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((v.dotc(h) - Complex::new(want, 0.0)).modulus() < 1e-9);
            }
        }
        let assoc = Association::new((0..k).map(|i| i.checked_sub(1)).collect(), k.saturating_sub(1)).unwrap();
        let assign = assign_pilots(&assoc, 1).unwrap();
        let errs: Vec<CMat<f64>> = (0..k).map(|_| random_psd(m, 2, &mut r) * Complex::new(0.1, 0.0)).collect();
        let h: Vec<CVec<f64>> = (0..k).map(|_| complex_gaussian_vec(m, &mut r)).collect();
        for scheme in Scheme::ALL {
            let set = combiners(scheme, &est, &errs, 5.0).unwrap();
            let (g0, d) = ul_sinr(0, &set, &h, &errs, &assign, 5.0).unwrap();
            prop_assert!(rel(d.ds / (d.ipr + d.iop + d.ee + 1.0), g0) < 1e-12);
            for alpha in [0.1, 10.0] {
                let scaled = CombinerSet {
                    vectors: set.vectors.iter().map(|v| v * Complex::new(alpha, 0.0)).collect(),
                    scheme,
                };
                let (g, _) = ul_sinr(0, &scaled, &h, &errs, &assign, 5.0).unwrap();
                prop_assert!(rel(g, g0) < 1e-10);
            }
        }
        let _ = mr_combiner(&est);
    }

    #[test]
    fn quadratic_identity_holds(seed in any::<u64>(), m in 1usize..10, side in 1usize..5) {
        let mut r = rng(seed);
        let g = ArrayGeometry::new(m, 0.5, side, side, 0.5, 1.0).unwrap();
        let n = g.ris_elements();
        let h: CMat<f64> = complex_gaussian_mat(m, n, &mut r);
        let k = ris_correlation_kernel(&g);
        let phi: CVec<f64> = random_phases(n, &mut r);
        let lhs = rispr_core::phase_opt::reflected_trace_dense(&h, &phi, &k);
        let rhs = objective(&phi, &build_quadratic(&h, &k).unwrap()).unwrap();
        prop_assert!(rel(rhs, lhs) < 1e-9);
    }

    #[test]
    fn ascent_is_monotone_and_bounded(seed in any::<u64>(), m in 1usize..8, n in 2usize..24) {
        let mut r = rng(seed);
        let h: CMat<f64> = complex_gaussian_mat(m, n, &mut r);
        let g = ArrayGeometry::new(m, 0.5, 1, n, 0.5, 1.0).unwrap();
        let form = build_quadratic(&h, &ris_correlation_kernel(&g)).unwrap();
        let init: CVec<f64> = random_phases(n, &mut r);
        let rep = riemannian_ascent(&form, &init, &AscentOptions::default()).unwrap();
        for w in rep.objective_trace.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-9 * w[0].abs());
        }
        let bound = n as f64 * max_eigenvalue_hermitian(&form.d);
        prop_assert!(rep.objective() <= bound * (1.0 + 1e-9));
        for z in rep.phases.iter() {
            prop_assert!((z.modulus() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn normalized_interference_symmetric_and_scale_free(seed in any::<u64>(), m in 1usize..12, a in 1e-3f64..1e3, b in 1e-3f64..1e3) {
        let mut r = rng(seed);
        let x = random_psd(m, m, &mut r);
        let y = random_psd(m, m, &mut r);
        let v = normalized_interference(&x, &y).unwrap();
        prop_assert!(rel(normalized_interference(&y, &x).unwrap(), v) < 1e-12);
        let xs = &x * Complex::new(a, 0.0);
        let ys = &y * Complex::new(b, 0.0);
        prop_assert!(rel(normalized_interference(&xs, &ys).unwrap(), v) < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn grid_pairs_are_orthogonal(m in prop::sample::select(vec![4usize, 8, 16, 32, 64, 128])) {
        let grid = build_angle_grid(m, 0.5, 1.0).unwrap();
        prop_assert_eq!(grid.len(), 4 * m / 2);
        let angles = grid.angles();
        for i in 0..angles.len() {
            for j in (i + 1)..angles.len() {
                let x = 0.5 * (angles[i].sin() - angles[j].sin());
                // pairs whose lattice offset is a multiple of M are excluded
                if (x - x.round()).abs() < 1e-9 {
                    continue;
                }
                let v = steering_inner_product_magnitude(angles[i], angles[j], m, 0.5, 1.0);
                prop_assert!(v < 1e-6 * m as f64, "{} {} -> {v}", angles[i], angles[j]);
            }
        }
    }
}
