use mide_core::estimates::trials::{modulated_jump, run_trials, TrialConfig, TrialKind};
use mide_core::estimates::*;
use mide_core::field::ScalarField;
use mide_core::grid::{Block, Geometry, GridFunction};
use mide_core::levy::{JumpFunction, LevyKernel};
use mide_core::operators::OperatorQuadrature;
use mide_core::quadrature::QuadratureConfig;
use proptest::prelude::*;
use std::f64::consts::PI;

fn sine(n: usize, k: f64) -> GridFunction {
    GridFunction::from_fn(Geometry::new(1, 0, n).unwrap(), |x| (2.0 * PI * k * x[0]).sin())
}

#[test]
fn tail_term_of_beta_one() {
    let u = sine(128, 3.0);
    let phi = TestFunctionPhi::holder(4.0, 0.5, 0.45).unwrap();
    let mp = locate_max(&u, &u, &phi).unwrap();
    assert!(!mp.degenerate);
    let geom = DoublingGeometry::new(mp.a.clone(), 0.2, 0.2).unwrap();
    let k = LevyKernel::fractional(1, 1.0).unwrap();
    let s = concave_estimate_sides(&k, &u, &u, &phi, &geom, &mp, &OperatorQuadrature::default()).unwrap();
    assert!((s.term("tail").unwrap() - 16.0).abs() < 1e-8);
    assert_eq!(s.term("ring").unwrap(), 0.0);
    assert_eq!(s.term("off_cone").unwrap(), 0.0);
    assert_eq!(s.s_grid, 33);
}

#[test]
fn maximum_condition_makes_lhs_nonpositive() {
    let u = sine(256, 3.0).zip_with(&sine(256, 1.0), |a, b| a + 0.3 * b).unwrap();
    let phi = TestFunctionPhi::holder(4.0, 0.5, 0.45).unwrap();
    let mp = locate_max(&u, &u, &phi).unwrap();
    assert!(!mp.degenerate);
    let geom = DoublingGeometry::new(mp.a.clone(), 0.2, 0.1).unwrap();
    let k = LevyKernel::fractional(1, 1.5).unwrap();
    let s = concave_estimate_sides(&k, &u, &u, &phi, &geom, &mp, &OperatorQuadrature::default()).unwrap();
    assert!(s.lhs <= 0.0, "{s:?}");
    assert!(s.holds(), "{s:?}");
}

#[test]
fn degenerate_maximum_is_refused() {
    let u = sine(64, 1.0);
    let phi = TestFunctionPhi::linear(10.0).unwrap();
    let mp = locate_max(&u, &u, &phi).unwrap();
    assert!(mp.degenerate);
    let geom = DoublingGeometry::new(vec![0.1], 0.2, 0.1).unwrap();
    let k = LevyKernel::fractional(1, 1.0).unwrap();
    let r = concave_estimate_sides(&k, &u, &u, &phi, &geom, &mp, &OperatorQuadrature::default());
    assert!(matches!(r, Err(mide_core::Error::Degenerate(_))));
}

#[test]
fn randomized_concave_trials() {
    let rows = run_trials(TrialKind::Concave, 11, 32, &TrialConfig::default());
    let run: Vec<_> = rows.iter().filter(|r| r.status != "skipped").collect();
    assert!(run.len() >= 28, "{} of 32 trials ran", run.len());
    for r in &run {
        assert_eq!(r.status, "pass", "{r:?}");
    }
}

#[test]
fn randomized_levy_ito_trials() {
    let rows = run_trials(TrialKind::LevyIto, 12, 16, &TrialConfig::default());
    let run: Vec<_> = rows.iter().filter(|r| r.status != "skipped").collect();
    assert!(run.len() >= 12, "{} of 16 trials ran", run.len());
    for r in &run {
        assert_eq!(r.status, "pass", "{r:?}");
    }
}

#[test]
fn randomized_quadratic_trials() {
    let rows = run_trials(TrialKind::Quadratic, 13, 16, &TrialConfig::default());
    for r in &rows {
        assert_eq!(r.status, "pass", "{r:?}");
    }
}

#[test]
fn levy_ito_identity_jump_has_no_difference_terms() {
    let u = sine(256, 3.0);
    let phi = TestFunctionPhi::holder(3.0, 0.7, 0.3).unwrap();
    let mp = locate_max(&u, &u, &phi).unwrap();
    assert!(!mp.degenerate);
    let geom = DoublingGeometry::new(mp.a.clone(), 0.5, 0.1).unwrap();
    let k = LevyKernel::fractional(1, 1.5).unwrap();
    let s = levy_ito_concave_sides(&JumpFunction::identity(1), &k, &u, &u, &phi, &geom, &mp, &OperatorQuadrature::default())
        .unwrap();
    assert_eq!(s.term("ring").unwrap(), 0.0);
    assert_eq!(s.term("off_cone").unwrap(), 0.0);
    assert!(s.holds());
}

#[test]
fn middle_cone_lies_in_both_cones() {
    let g = Geometry::new(2, 0, 32).unwrap();
    let u = GridFunction::from_fn(g, |x| (2.0 * PI * 3.0 * x[0]).sin() + 0.5 * (2.0 * PI * x[1]).cos());
    let phi = TestFunctionPhi::holder(3.0, 0.7, 0.3).unwrap();
    let mp = locate_max(&u, &u, &phi).unwrap();
    assert!(!mp.degenerate);
    let jump = modulated_jump(2);
    for eta in [0.4, 0.6] {
        let geom = DoublingGeometry::new(mp.a.clone(), eta, 0.2).unwrap();
        let c = middle_cone_inclusion(&jump, &geom, &mp, 64).unwrap();
        assert!(c.inside > 0);
        assert_eq!(c.violations, 0);
    }
}

#[test]
fn smallness_condition_is_enforced() {
    let u = sine(64, 1.0);
    let phi = TestFunctionPhi::holder(0.5, 0.5, 0.45).unwrap();
    let mp = locate_max(&u, &u, &phi).unwrap();
    assert!(mp.norm_a() > 0.3);
    let geom = DoublingGeometry::new(mp.a.clone(), 0.1, 0.1).unwrap();
    let k = LevyKernel::fractional(1, 1.0).unwrap();
    let r = levy_ito_concave_sides(&modulated_jump(1), &k, &u, &u, &phi, &geom, &mp, &OperatorQuadrature::default());
    assert!(matches!(r, Err(mide_core::Error::InvalidInput(_))));
}

#[test]
fn partial_maximization_gap_shrinks() {
    let g = Geometry::new(1, 1, 32).unwrap();
    let u = GridFunction::from_fn(g, |x| (2.0 * PI * x[0]).sin() + 0.1 * (2.0 * PI * x[1]).sin());
    let phi = TestFunctionPhi::linear(1.0).unwrap();
    let mut last = (f64::INFINITY, f64::INFINITY);
    for eps in [0.2, 0.1, 0.05] {
        let mp = partial_locate_max(&u, Block::One, &phi, eps).unwrap();
        assert!(mp.penalization_gap <= last.0 + 1e-15 && mp.value <= last.1 + 1e-15);
        last = (mp.penalization_gap, mp.value);
    }
    assert!(last.0 < 1e-12);
    let loose = partial_locate_max(&u, Block::One, &phi, 1e3).unwrap();
    let u1 = GridFunction::from_fn(Geometry::new(1, 0, 32).unwrap(), |x| (2.0 * PI * x[0]).sin());
    let m1 = locate_max(&u1, &u1, &phi).unwrap().value;
    assert!((loose.value - (m1 + 0.2)).abs() < 1e-6, "{} vs {}", loose.value, m1 + 0.2);

    let w = GridFunction::from_fn(g, |x| (2.0 * PI * x[0]).sin());
    for eps in [0.2, 0.05] {
        assert_eq!(partial_locate_max(&w, Block::One, &phi, eps).unwrap().penalization_gap, 0.0);
    }
}

fn constants(kernel: &LevyKernel) -> MeasureConstants {
    MeasureConstants::measure(kernel, &QuadratureConfig::default()).unwrap()
}

#[test]
fn holder_bound_for_translation_invariant_kernel() {
    let k = LevyKernel::fractional(1, 1.0).unwrap();
    let c = constants(&k);
    assert_eq!((c.c_ball, c.c_ring), (0.0, 0.0));
    let phi = TestFunctionPhi::holder(4.0, 0.5, 0.45).unwrap();
    let geom = DoublingGeometry::new(vec![0.05], 0.05, 0.05).unwrap();
    let r = holder_bound(&k, &phi, &geom, (1.0, 1.0), &c, &QuadratureConfig::default()).unwrap();
    assert_eq!(r.o_term, 0.0);
    let expect = -4.0 * 0.5 * r.c_mu * 0.05f64.powf(-0.5) + 4.0 * c.c_tilde;
    assert!((r.bound - expect).abs() < 1e-9 * expect.abs());
    let t = r.threshold.expect("negative below some scale");
    let tiny = DoublingGeometry::new(vec![t / 2.0], 0.05, 0.05).unwrap();
    assert!(holder_bound(&k, &phi, &tiny, (1.0, 1.0), &c, &QuadratureConfig::default()).unwrap().bound < 0.0);
    let low = TestFunctionPhi::holder(2.0, 0.5, 0.45).unwrap();
    assert!(holder_bound(&k, &low, &geom, (1.0, 1.0), &c, &QuadratureConfig::default()).is_err());
}

#[test]
fn holder_bound_with_modulated_kernel() {
    let coef = ScalarField::func(|x: &[f64]| 1.0 + 0.3 * (2.0 * PI * x[0]).sin());
    let k = LevyKernel::x_modulated(1, 1.0, coef, 1.0).unwrap();
    let c = constants(&k);
    assert!(c.c_ring > 0.0 && c.c_ball > 0.0);
    let phi = TestFunctionPhi::holder(4.0, 0.5, 0.45).unwrap();
    let mut last = f64::INFINITY;
    for a in [0.2, 0.1, 0.05] {
        let geom = DoublingGeometry::new(vec![a], 0.05, 0.05).unwrap();
        let r = holder_bound(&k, &phi, &geom, (1.0, 1.0), &c, &QuadratureConfig::default()).unwrap();
        let lead = (r.bound - r.big_o) / (4.0 * a.powf(-0.5));
        assert!((lead + r.leading - r.o_term).abs() < 1e-9);
        assert!(r.o_term < last);
        last = r.o_term;
    }
}

#[test]
fn lipschitz_bound_scaling() {
    let k = LevyKernel::fractional(1, 1.5).unwrap();
    let c = constants(&k);
    let phi = TestFunctionPhi::lipschitz(1.0, 0.1, 20.0).unwrap();
    let cfg = QuadratureConfig::default();
    let r1 = lipschitz_bound(&k, &phi, &[0.02], 0.2, (0.0, 0.0), &c, &cfg).unwrap();
    let r2 = lipschitz_bound(&k, &phi, &[0.01], 0.2, (0.0, 0.0), &c, &cfg).unwrap();
    let e = r1.exponent;
    assert!((e - (-0.5 + 0.1 * 1.5)).abs() < 1e-12);
    let lead = |r: &BoundReport, a: f64| a.powf(r.exponent) * r.leading;
    let ratio = lead(&r2, 0.01) / lead(&r1, 0.02);
    assert!((ratio / 2f64.powf(-e) - 1.0).abs() < 0.05, "{ratio}");
    assert!(r1.leading > 0.0);
    let bad = TestFunctionPhi::lipschitz(1.0, 0.4, 10.0).unwrap();
    assert!(lipschitz_bound(&k, &bad, &[0.02], 0.2, (0.0, 0.0), &c, &cfg).is_err());
    let k1 = LevyKernel::fractional(1, 0.8).unwrap();
    assert!(lipschitz_bound(&k1, &phi, &[0.02], 0.2, (0.0, 0.0), &c, &cfg).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn holder_phi_is_increasing_concave(l in 0.1f64..10.0, alpha in 0.05f64..1.0, t0 in 0.01f64..1.0) {
        let phi = TestFunctionPhi::holder(l, alpha, t0).unwrap();
        prop_assert!(phi.check_shape(1000).is_ok());
        prop_assert!(phi.value(t0 * 0.5) < phi.value(t0));
    }

    #[test]
    fn lipschitz_phi_is_increasing_concave(alpha in 0.05f64..1.0, excess in 0.01f64..2.0) {
        let rho = (1.0 + excess) / (alpha * 2f64.powf(alpha - 1.0));
        let phi = TestFunctionPhi::lipschitz(1.0, alpha, rho).unwrap();
        prop_assert!(phi.check_shape(1000).is_ok());
    }

    #[test]
    fn eta_tilde_is_positive(eta in 0.01f64..0.98, d0 in 0.01f64..0.98) {
        match DoublingGeometry::new(vec![0.1, 0.2], eta, d0) {
            Ok(g) => prop_assert!(g.eta_tilde > 0.0 && g.eta_tilde < 1.0),
            Err(_) => prop_assert!(eta + d0 >= 1.0),
        }
    }

    #[test]
    fn located_maximum_dominates(seed in 0u64..1000, i in 0usize..64, j in 0usize..64) {
        let mut rng = mide_core::rng::trial_rng(seed, 0);
        let g = Geometry::new(1, 0, 64).unwrap();
        let u = mide_core::estimates::trials::random_field(&mut rng, g, 3);
        let phi = TestFunctionPhi::holder(1.0, 0.5, 0.4).unwrap();
        let mp = locate_max(&u, &u, &phi).unwrap();
        let psi = u.values[i] - u.values[j] - phi.value(Geometry::torus_dist(&g.coords(i), &g.coords(j)));
        prop_assert!(psi <= mp.value + 1e-14);
    }

    #[test]
    fn sign_thresholds_separate_signs(alpha in 0.05f64..0.95, t in 0.0f64..1.0) {
        let r = directional_sign_analysis(&[t], &[(1.0 - t * t).sqrt()], alpha, 1.0, 1.0).unwrap();
        if t * t > r.local_threshold + 1e-12 { prop_assert!(r.local_active) }
        if t * t < r.local_threshold - 1e-12 { prop_assert!(!r.local_active) }
        prop_assert!((r.local_threshold - r.local_threshold_bisected).abs() < 1e-6);
    }
}
