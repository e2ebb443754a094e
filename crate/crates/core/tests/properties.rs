use dtd_moments_core::descriptors::{order_parameter, symmetry_axis};
use dtd_moments_core::encoding::{signal_cumulant, signal_dtd, signal_gamma};
use dtd_moments_core::experiments::{add_rician, run_realization, summarize, Fitter, Phantom};
use dtd_moments_core::fit::{fit_covariance, gamma_descriptors, MvGammaParams};
use dtd_moments_core::tensor::euler_from_rotation;
use dtd_moments_core::*;
use nalgebra::Matrix3;
use proptest::prelude::*;

fn scheme() -> AcqScheme {
    generate_scheme(&SchemeSpec::default_scheme()).unwrap()
}

fn sym() -> impl Strategy<Value = SymTensor3> {
    prop::array::uniform6(-2.0..2.0f64).prop_map(SymTensor3::from_components)
}

fn angles() -> impl Strategy<Value = (f64, f64, f64)> {
    (-3.1..3.1f64, 0.0..3.1f64, -3.1..3.1f64)
}

fn pd(lo: f64, hi: f64) -> impl Strategy<Value = SymTensor3> {
    (prop::array::uniform3(lo..hi), angles())
        .prop_map(|(e, (a, b, c))| SymTensor3::from_eigen(e, &euler_rotation(a, b, c)))
}

/// Random valid nc-mv-Gamma with its shared eigenframe.
fn gamma_with_frame() -> impl Strategy<Value = (NcMvGamma, Matrix3<f64>)> {
    (1.1..10.0f64, prop::array::uniform3(0.05..1.5f64), prop::array::uniform3(0.0..1.0f64), angles())
        .prop_map(|(kappa, psi, t, (a, b, c))| {
            let r = euler_rotation(a, b, c);
            let theta = t.map(|u| -kappa + 0.05 + u * (5.0 + kappa - 0.05));
            let p = NcMvGamma::new(kappa, SymTensor3::from_eigen(psi, &r), SymTensor3::from_eigen(theta, &r))
                .unwrap();
            (p, r)
        })
}

fn gamma() -> impl Strategy<Value = NcMvGamma> {
    gamma_with_frame().prop_map(|(p, _)| p)
}

fn axisym_dtd(max: usize) -> impl Strategy<Value = DiscreteDtd> {
    prop::collection::vec((0.05..1.0f64, 0.0..3.0f64, 0.0..3.0f64, 0.0..3.2f64, -3.2..3.2f64), 1..max)
        .prop_map(|parts| {
            DiscreteDtd::from_weights(
                parts
                    .into_iter()
                    .map(|(w, dp, dr, t, p)| (w, axisym_tensor(&AxisymSpec::new(dp, dr, t, p).unwrap())))
                    .collect(),
            )
            .unwrap()
        })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn mandel_preserves_frobenius(a in sym(), b in sym()) {
        let f = frobenius(&a, &b);
        let d = mandel_vec(&a).dot(&mandel_vec(&b));
        prop_assert!((f - d).abs() <= 1e-13 * (a.frobenius_norm() * b.frobenius_norm()).max(1e-300));
    }

    #[test]
    fn mandel_round_trip(a in sym()) {
        // √2 scaling and unscaling can differ from the input by one ulp
        let back = mandel_vec(&a).to_tensor();
        for (x, y) in back.components().iter().zip(a.components()) {
            prop_assert!((x - y).abs() <= f64::EPSILON * y.abs());
        }
    }

    #[test]
    fn modulus_decomposition(x in sym()) {
        let xx = mandel_outer(&x, &x);
        let lhs = contract6(&xx, &Tensor6::e_bulk()) + contract6(&xx, &Tensor6::e_shear());
        let rhs = contract6(&xx, &Tensor6::e_iso());
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
        prop_assert!((contract6(&xx, &Tensor6::e_bulk()) - (x.trace() / 3.0).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn nearest_psd_projection(m in prop::collection::vec(-1.0..1.0f64, 36), p in prop::collection::vec(-1.0..1.0f64, 36)) {
        let c = Tensor6::from_fn(|i, j| m[6 * i.min(j) + i.max(j)]);
        let out = nearest_psd(&c);
        prop_assert!(out.is_positive_semidefinite());
        prop_assert!((nearest_psd(&out) - out).max_abs() < 1e-12);
        // any PSD competitor is at least as far from c
        let g = Tensor6::from_fn(|i, j| p[6 * i + j]);
        let psd = g.matmul(&g.transpose());
        prop_assert!((out - c).frobenius_norm() <= (psd - c).frobenius_norm() + 1e-12);
    }

    #[test]
    fn euler_rotations_are_proper((a, b, c) in angles()) {
        let r = euler_rotation(a, b, c);
        prop_assert!((r * r.transpose() - Matrix3::identity()).norm() < 1e-13);
        prop_assert!((r.determinant() - 1.0).abs() < 1e-13);
        let (x, y, z) = euler_from_rotation(&r);
        prop_assert!((euler_rotation(x, y, z) - r).norm() < 1e-9);
    }

    #[test]
    fn signal_equals_mgf_at_minus_b(p in gamma(), b in pd(0.0, 3.0)) {
        let s = p.attenuation(&b);
        let m = mgf_gamma(&p, &(-b)).unwrap();
        prop_assert!(rel(s, m) <= 1e-12);
    }

    #[test]
    fn gamma_cov_is_block_in_eigenbasis((p, r) in gamma_with_frame()) {
        let c = cov_gamma(&p).rotated(&r.transpose());
        for i in 0..6 {
            for j in 0..6 {
                if i >= 3 || j >= 3 {
                    prop_assert!(c[(i, j)].abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn repaired_gamma_descriptors_are_non_negative(p in gamma()) {
        let d = descriptors_from_moments(&p.moments().psd_repaired()).unwrap();
        prop_assert!(d.v_iso >= -1e-12);
        prop_assert!(d.e_aniso2 >= -1e-12);
        prop_assert!((0.0..=1.0).contains(&d.fa));
    }

    #[test]
    fn gaussian_log_mgf_is_quadratic(m in sym(), s in pd(0.1, 1.0), q in pd(0.1, 1.0), z0 in sym(), dz in sym()) {
        let g = MvGaussian::new(m, s, q).unwrap();
        let h = 1e-2;
        let second = |base: &SymTensor3| {
            let f = |t: f64| g.log_mgf(&(*base + dz.scaled(t)).to_matrix()).unwrap();
            (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h)
        };
        let (a, b) = (second(&SymTensor3::ZERO), second(&z0));
        prop_assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn finite_differences_match_closed_forms(p in gamma()) {
        let mean = fd_mean(&p, 1e-5).unwrap();
        prop_assert!((mean - mean_gamma(&p)).frobenius_norm() <= 1e-6 * mean_gamma(&p).frobenius_norm());
        let cov = fd_cov(&p, 1e-5, DerivativeLayout::Outer).unwrap();
        let exact = cov_gamma(&p);
        prop_assert!((cov - exact).frobenius_norm() <= 1e-5 * exact.frobenius_norm());
    }

    #[test]
    fn gauge_relabeling_leaves_signal_unchanged(p in gamma(), s0 in 0.5..2.0f64) {
        let eig = p.psi().eigen();
        let r = eig.vectors;
        let theta = p.theta().to_matrix();
        let h: [f64; 3] = core::array::from_fn(|k| {
            let v = r.column(k);
            1.0 / ((v.transpose() * theta * v)[(0, 0)] + p.kappa())
        });
        prop_assume!(h.iter().all(|x| *x > 0.0 && x.is_finite()));
        let (a, b, c) = euler_from_rotation(&r);
        let params = MvGammaParams { s0, kappa: p.kappa(), psi_eigs: eig.values, h_eigs: h, euler: [a, b, c] };
        // cyclic relabeling keeps a proper rotation
        let perm = Matrix3::new(0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0);
        let (x, y, z) = euler_from_rotation(&(r * perm));
        let idx = |k: usize| [1, 2, 0][k];
        let relabeled = MvGammaParams {
            psi_eigs: core::array::from_fn(|k| eig.values[idx(k)]),
            h_eigs: core::array::from_fn(|k| h[idx(k)]),
            euler: [x, y, z],
            ..params
        };
        let s1 = params.signal(&scheme());
        let s2 = relabeled.signal(&scheme());
        for (u, v) in s1.iter().zip(&s2) {
            prop_assert!((u - v).abs() <= 1e-12 * u.abs().max(1e-12));
        }
        let d1 = gamma_descriptors(&params.distribution().unwrap()).unwrap();
        let d2 = gamma_descriptors(&relabeled.distribution().unwrap()).unwrap();
        prop_assert!(rel(d1.v_iso, d2.v_iso) < 1e-9 && rel(d1.e_aniso2 + 1e-300, d2.e_aniso2 + 1e-300) < 1e-6);
        prop_assert!(rel(d1.e_iso, d2.e_iso) < 1e-12);
    }

    #[test]
    fn covariance_fit_is_exact_on_cumulant_data(dtd in axisym_dtd(6), s0 in 0.5..2.0f64) {
        let m = moments_from_components(&dtd.scaled(0.5));
        let s = signal_cumulant(&m, s0, &scheme());
        let fit = fit_covariance(&s, &scheme()).unwrap();
        prop_assert!((fit.s0 - s0).abs() <= 1e-8 * s0);
        prop_assert!((fit.mean - m.mean).frobenius_norm() <= 1e-8 * m.mean.frobenius_norm().max(1e-3));
        prop_assert!((fit.raw_cov - m.cov).frobenius_norm() <= 1e-8 * m.mean.frobenius_norm().powi(2).max(1e-3));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn discrete_dtd_descriptor_identities(dtd in axisym_dtd(12)) {
        let m = moments_from_components(&dtd);
        prop_assert!(contract6(&m.cov, &Tensor6::e_bulk()) >= -1e-12);
        prop_assert!(contract6(&m.second_moment(), &Tensor6::e_shear()) >= -1e-12);
        prop_assume!(m.mean.trace() > 1e-6);
        let d = descriptors_from_moments(&m).unwrap();
        let iso: Vec<(f64, f64)> = dtd.components().iter().map(|(f, t)| (*f, t.trace() / 3.0)).collect();
        let e_iso: f64 = iso.iter().map(|(f, x)| f * x).sum();
        let v_iso: f64 = iso.iter().map(|(f, x)| f * x * x).sum::<f64>() - e_iso * e_iso;
        prop_assert!((d.e_iso - e_iso).abs() <= 1e-12 * e_iso.max(1.0));
        prop_assert!((d.v_iso - v_iso).abs() <= 1e-11 * e_iso.max(1.0).powi(2));
        // holds for dispersed as well as coherent axisymmetric mixtures
        let direct: f64 = dtd.components().iter().map(|(f, t)| {
            let e = t.eigenvalues();
            let (par, perp) = if e[0] - e[1] > e[1] - e[2] { (e[0], e[1]) } else { (e[2], e[1]) };
            f * ((par - perp) / 3.0).powi(2)
        }).sum();
        prop_assert!((d.e_aniso2 - direct).abs() <= 1e-11 * e_iso.max(1.0).powi(2));
    }

    #[test]
    fn descriptors_rotation_invariant(dtd in axisym_dtd(8), (a, b, c) in angles()) {
        let m = moments_from_components(&dtd);
        prop_assume!(m.mean.trace() > 1e-3);
        let d1 = descriptors_from_moments(&m).unwrap();
        let d2 = descriptors_from_moments(&moments_from_components(&dtd.rotated(&euler_rotation(a, b, c)))).unwrap();
        let scale = d1.e_iso.max(1.0);
        prop_assert!((d1.e_iso - d2.e_iso).abs() <= 1e-12 * scale);
        prop_assert!((d1.v_iso - d2.v_iso).abs() <= 1e-12 * scale * scale);
        prop_assert!((d1.e_aniso2 - d2.e_aniso2).abs() <= 1e-12 * scale * scale);
        prop_assert!((d1.fa - d2.fa).abs() <= 1e-9);
    }

    #[test]
    fn descriptors_scale_equivariant(dtd in axisym_dtd(8), s in 0.1..10.0f64) {
        let m = moments_from_components(&dtd);
        prop_assume!(m.mean.trace() > 1e-3);
        let d1 = descriptors_from_moments(&m).unwrap();
        let scaled = dtd.scaled(s);
        let d2 = descriptors_from_moments(&moments_from_components(&scaled)).unwrap();
        prop_assert!(rel(d2.e_iso, s * d1.e_iso) < 1e-12);
        prop_assert!((d2.v_iso - s * s * d1.v_iso).abs() <= 1e-11 * (s * d1.e_iso).powi(2));
        prop_assert!((d2.e_aniso2 - s * s * d1.e_aniso2).abs() <= 1e-11 * (s * d1.e_iso).powi(2));
        prop_assert!((d2.e_aniso2_norm - d1.e_aniso2_norm).abs() <= 1e-10);
        prop_assert!((d2.fa - d1.fa).abs() <= 1e-9);
        if dtd.components().iter().any(|(_, t)| symmetry_axis(t).is_some()) {
            let (o1, o2) = (order_parameter(&dtd).unwrap(), order_parameter(&scaled).unwrap());
            prop_assert!((o1 - o2).abs() < 1e-9);
            prop_assert!((-0.5..=1.0).contains(&o1));
        }
    }

    #[test]
    fn signals_are_bounded_and_rotation_covariant(dtd in axisym_dtd(6), (a, b, c) in angles()) {
        let sc = scheme();
        let s = signal_dtd(&dtd, &sc);
        prop_assert!(s.iter().all(|v| *v > 0.0 && *v <= 1.0));
        let r = euler_rotation(a, b, c);
        let t = signal_dtd(&dtd.rotated(&r), &sc.rotated(&r));
        for (x, y) in s.iter().zip(&t) {
            prop_assert!((x - y).abs() <= 1e-13);
        }
    }

    #[test]
    fn gamma_signals_are_positive(p in gamma()) {
        prop_assert!(signal_gamma(&p, 1.0, &scheme()).iter().all(|v| *v > 0.0 && v.is_finite()));
    }

    #[test]
    fn rician_is_seeded_and_keyed(seed in any::<u64>(), snr in 5.0..100.0f64) {
        let s = vec![0.8, 0.3, 0.05];
        prop_assert_eq!(add_rician(&s, snr, seed), add_rician(&s, snr, seed));
        prop_assert_eq!(add_rician(&s, f64::INFINITY, seed), s);
    }
}

#[test]
fn monte_carlo_order_independent() {
    let dtd = DiscreteDtd::new(vec![
        (0.5, SymTensor3::isotropic(2.0)),
        (0.5, SymTensor3::diag(1.6, 0.3, 0.3)),
    ])
    .unwrap();
    let phantom = Phantom::new("pair", dtd).unwrap();
    let sc = scheme();
    let clean = signal_dtd(&phantom.dtd, &sc);
    let fitter = Fitter::Covariance;
    let forward: Vec<_> = (0..12).map(|i| run_realization(&clean, &sc, &fitter, 30.0, 9, i)).collect();
    let mut backward: Vec<_> = (0..12).rev().map(|i| run_realization(&clean, &sc, &fitter, 30.0, 9, i)).collect();
    let a = summarize(&phantom, &fitter, 30.0, 9, &forward);
    let b = summarize(&phantom, &fitter, 30.0, 9, &backward);
    assert_eq!(a, b);
    backward.reverse();
    assert_eq!(forward, backward);
}
