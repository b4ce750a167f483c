use nalgebra::Matrix3;
use proptest::prelude::*;

use yamabe_core::conformal_energy::{rayleigh_quotient, QuotientInput};
use yamabe_core::criterion::{
    berger_classify, berger_path, corollary_path_check, theorem1_check, volume_ratio, BergerClass,
    Verdict,
};
use yamabe_core::lie_curvature::{
    berger_curvature, berger_ricci_closed, berger_scalar_closed, curvature_report,
    metric_compatibility_residual, levi_civita, su2_structure_constants, torsion_residual,
    BergerParams, FrameMetric,
};
use yamabe_core::su2_chart::{chart_metric, HopfGrid, ScalarField};
use yamabe_core::trial::{random_trial, TrialFamily};
use yamabe_core::yamabe_estimator::{estimate, EstimatorOptions};

/// Positive definite `A Aᵀ + εI` from nine entries.
fn spd() -> impl Strategy<Value = FrameMetric> {
    (prop::array::uniform9(-1.0f64..1.0), 0.2f64..1.0).prop_map(|(a, eps)| {
        let m = Matrix3::from_row_slice(&a);
        let g = m * m.transpose() + Matrix3::identity() * eps;
        FrameMetric::new((g + g.transpose()) * 0.5).unwrap()
    })
}

fn berger_params() -> impl Strategy<Value = BergerParams> {
    (1.0f64..4.0, 0.0f64..4.0).prop_map(|(s, dt)| BergerParams::new(s, s + dt).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn connection_is_torsion_free_and_compatible(g in spd()) {
        let frame = su2_structure_constants().unwrap();
        let gamma = levi_civita(&frame, &g);
        prop_assert!(torsion_residual(&frame, &gamma) < 1e-10);
        prop_assert!(metric_compatibility_residual(&g, &gamma) < 1e-10);
    }

    #[test]
    fn ricci_traces_to_scalar(g in spd()) {
        let frame = su2_structure_constants().unwrap();
        let rep = curvature_report(&frame, &g);
        prop_assert!(rep.trace_residual(&g) < 1e-9 * rep.scalar.abs().max(1.0));
        prop_assert!(rep.ricci_symmetry_residual() < 1e-9);
        prop_assert!(rep.riemann_symmetry_residual(&g) < 1e-8);
    }

    #[test]
    fn curvature_scales_inversely(g in spd(), lambda in 0.1f64..10.0) {
        let frame = su2_structure_constants().unwrap();
        let a = curvature_report(&frame, &g);
        let b = curvature_report(&frame, &g.scaled(lambda).unwrap());
        prop_assert!((b.scalar * lambda - a.scalar).abs() < 1e-9 * a.scalar.abs().max(1.0));
        prop_assert!(
            (b.einstein_deviation * lambda - a.einstein_deviation).abs()
                < 1e-9 * a.einstein_deviation.max(1.0)
        );
    }

    #[test]
    fn engine_matches_closed_forms(p in berger_params()) {
        let rep = berger_curvature(p).unwrap();
        let r = berger_scalar_closed(p);
        prop_assert!((rep.scalar - r).abs() <= 1e-10 * r.abs().max(1.0));
        let want = berger_ricci_closed(p);
        let got = rep.ricci_unit_diagonal(&p.frame_metric());
        for i in 0..3 {
            prop_assert!((got[i] - want[i]).abs() <= 1e-10 * want[i].abs().max(1.0));
        }
    }

    #[test]
    fn metric_against_itself_is_boundary(g in spd(), r in 0.1f64..20.0) {
        let rep = theorem1_check(&g, r, &g, r).unwrap();
        prop_assert_eq!(rep.verdict, Verdict::AppliesBoundary);
        prop_assert!(rep.min_eig.abs() < 1e-10 * r);
        prop_assert!((rep.gamma - 1.0).abs() < 1e-12);
    }

    #[test]
    fn verdict_is_scale_invariant(
        g in spd(),
        h in spd(),
        r_g in 0.5f64..10.0,
        r_h in 0.5f64..10.0,
        lambda in 0.2f64..5.0,
        mu in 0.2f64..5.0,
    ) {
        let a = theorem1_check(&g, r_g, &h, r_h).unwrap();
        let b = theorem1_check(&g.scaled(lambda).unwrap(), r_g / lambda, &h.scaled(mu).unwrap(), r_h / mu)
            .unwrap();
        // spectrum of I - (R_h/R_g) L⁻¹HL⁻ᵀ, the pencil divided by R_g
        for i in 0..3 {
            let x = a.eigenvalues[i] / r_g;
            let y = b.eigenvalues[i] / (r_g / lambda);
            prop_assert!((x - y).abs() < 1e-12 * x.abs().max(1.0), "{} vs {}", x, y);
        }
        if a.strict_margin.abs() > 1e-9 {
            prop_assert_eq!(a.verdict, b.verdict);
        }
    }

    #[test]
    fn volume_ratio_of_berger(p in berger_params()) {
        let gamma = volume_ratio(&FrameMetric::identity(), &p.frame_metric());
        prop_assert!((gamma - (p.s() * p.t()).sqrt()).abs() < 1e-12 * gamma);
    }

    #[test]
    fn classification_follows_the_curves(p in berger_params()) {
        let (s, t) = (p.s(), p.t());
        let criterion = s + s.sqrt() + 1.0;
        let sign = (1.0 + s.sqrt()).powi(2);
        prop_assume!((t - criterion).abs() > 1e-6 && (t - sign).abs() > 1e-6);
        prop_assume!(!(s == 1.0 && t == 1.0));
        let want = if t > sign {
            BergerClass::AutoYamabeNonpositive
        } else if t > criterion {
            BergerClass::Theorem1Strict
        } else {
            BergerClass::PositiveScalarUnresolved
        };
        prop_assert_eq!(berger_classify(p).unwrap().class, want);
    }

    #[test]
    fn path_delta_is_within_the_interval(start in 3.0f64..3.99, steps in 1usize..40) {
        let rep = corollary_path_check(berger_path(1.0), start, 4.0, steps).unwrap();
        prop_assert!(rep.delta >= 0.0 && rep.delta <= 4.0 - start + 1e-12);
        prop_assert!(rep.samples.windows(2).all(|w| w[0].t < w[1].t));
        prop_assert_eq!(rep.samples.len(), steps + 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn quotient_is_homogeneous(seed in any::<u64>(), c in prop_oneof![-5.0f64..-0.2, 0.2f64..5.0]) {
        let grid = HopfGrid::cubic(6).unwrap();
        let m = chart_metric(&grid, BergerParams::new(1.0, 2.0).unwrap()).unwrap();
        let r = ScalarField::constant(&grid, 4.0);
        let f = random_trial(&grid, TrialFamily::Bump, seed, 1);
        let q = |f: &ScalarField| rayleigh_quotient(&QuotientInput::new(f, &m, &r).unwrap()).unwrap();
        let base = q(&f);
        prop_assert!((q(&f.map(|v| c * v)) - base).abs() < 1e-12 * base.abs());
    }

    #[test]
    fn estimator_never_exceeds_constant(p in berger_params(), seed in any::<u64>()) {
        let grid = HopfGrid::cubic(5).unwrap();
        let m = chart_metric(&grid, p).unwrap();
        let r = ScalarField::constant(&grid, berger_scalar_closed(p));
        let opts = EstimatorOptions { max_iters: 20, restarts: 2, seed, ..Default::default() };
        let est = estimate(&m, &r, &opts).unwrap();
        let one = ScalarField::constant(&grid, 1.0);
        let q1 = rayleigh_quotient(&QuotientInput::new(&one, &m, &r).unwrap()).unwrap();
        prop_assert!(est.value <= q1 + 1e-12 * q1.abs().max(1.0));
        prop_assert!(est.trace.windows(2).all(|w| w[1] <= w[0]));
    }
}
