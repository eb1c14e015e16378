use mide_core::estimates::trials::random_field;
use mide_core::estimates::TestFunctionPhi;
use mide_core::grid::{Block, Geometry, GridFunction};
use mide_core::regularity::*;
use mide_core::rng::trial_rng;
use mide_core::solver::SolverOptions;
use mide_core::Error;
use proptest::prelude::*;
use std::f64::consts::PI;

fn line(n: usize, f: impl Fn(f64) -> f64 + Sync) -> GridFunction {
    GridFunction::from_fn(Geometry::new(1, 0, n).unwrap(), |x| f(x[0]))
}

fn cosine(n: usize) -> GridFunction {
    line(n, |x| (2.0 * PI * x).cos())
}

#[test]
fn cosine_modulus_at_quarter() {
    let r = modulus(&cosine(256), Block::Full).unwrap();
    assert_eq!(r.t.len(), 128);
    assert!((r.at(64) - 2f64.sqrt()).abs() < 1e-3, "{}", r.at(64));
    for (t, w) in r.t.iter().zip(&r.omega) {
        assert!((w - 2.0 * (PI * t).sin()).abs() < 1e-3);
    }
}

#[test]
fn constant_fields_have_zero_modulus() {
    let r = modulus(&line(64, |_| 3.5), Block::Full).unwrap();
    assert!(r.omega.iter().all(|w| *w == 0.0));
    assert!(matches!(fit_exponent(&r, 0.01, 0.1), Err(Error::UnfitTable(_))));
    let g = Geometry::new(1, 1, 32).unwrap();
    let u = GridFunction::from_fn(g, |x| (2.0 * PI * x[1]).cos());
    assert!(modulus(&u, Block::One).unwrap().omega.iter().all(|w| *w == 0.0));
    assert!(modulus(&u, Block::Two).unwrap().at(8) > 1.0);
}

#[test]
fn empty_block_is_rejected() {
    assert!(matches!(modulus(&cosine(16), Block::Two), Err(Error::GeometryMismatch(_))));
}

#[test]
fn pair_budget_guards_full_moduli() {
    let g = Geometry::new(1, 1, 256).unwrap();
    assert!(matches!(modulus(&GridFunction::zeros(g), Block::Full), Err(Error::InvalidInput(_))));
    assert!(modulus(&GridFunction::zeros(g), Block::One).is_ok());
}

#[test]
fn fitted_exponent_of_cosine() {
    let n = 512;
    let r = modulus(&cosine(n), Block::Full).unwrap();
    let fit = fit_exponent(&r, 2.0 / n as f64, 0.1).unwrap();
    assert!((fit.alpha - 1.0).abs() < 0.02, "{fit:?}");
    assert!((fit.l - 2.0 * PI).abs() < 0.1 * 2.0 * PI, "{fit:?}");
}

#[test]
fn fitted_exponent_of_square_root_cusp() {
    let n = 512;
    let r = modulus(&line(n, |x| (PI * x).sin().abs().sqrt()), Block::Full).unwrap();
    let (lo, hi) = r.default_window();
    assert_eq!(lo, 4.0 / n as f64);
    assert_eq!(hi, 0.1);
    let r = r.fitted(lo, hi).unwrap();
    let fit = r.fit.unwrap();
    assert!((fit.alpha - 0.5).abs() < 0.03, "{fit:?}");
}

#[test]
fn fit_needs_two_samples() {
    let r = modulus(&cosine(64), Block::Full).unwrap();
    assert!(matches!(fit_exponent(&r, 0.2, 0.2), Err(Error::UnfitTable(_))));
}

#[test]
fn certify_lipschitz_constant_of_cosine() {
    let c = certify_holder(&cosine(1024), 1.0, Block::Full).unwrap();
    assert!((c.l_min - 2.0 * PI).abs() < 0.02 * 2.0 * PI, "{c:?}");
    assert!(c.bisection_steps > 0 && c.refinement_steps > 0);
}

#[test]
fn certify_half_holder_constant_of_cosine() {
    let c = certify_holder(&cosine(1024), 0.5, Block::Full).unwrap();
    assert!((c.l_min - 3.017).abs() < 0.02 * 3.017, "{c:?}");
}

#[test]
fn half_holder_oracle_value() {
    let t: f64 = 0.3710;
    assert!(((PI * t).tan() - 2.0 * PI * t).abs() < 1e-2);
    assert!((2.0 * (PI * t).sin() / t.sqrt() - 3.017).abs() < 1e-3);
}

#[test]
fn certify_of_constant_is_zero() {
    let c = certify_holder(&line(32, |_| -1.0), 0.7, Block::Full).unwrap();
    assert_eq!(c.l_min, 0.0);
    assert!(c.pair.is_none());
}

#[test]
fn certify_matches_brute_force_on_random_fields() {
    for trial in 0..12 {
        let mut rng = trial_rng(7, trial);
        let (g, dir) = match trial % 3 {
            0 => (Geometry::new(1, 0, 64).unwrap(), Block::Full),
            1 => (Geometry::new(1, 1, 16).unwrap(), Block::Full),
            _ => (Geometry::new(1, 1, 16).unwrap(), Block::Two),
        };
        let u = random_field(&mut rng, g, 3);
        for alpha in [0.3, 0.75, 1.0] {
            let phi = TestFunctionPhi::holder(1.0, alpha, f64::INFINITY).unwrap();
            let c = certify(&u, &phi, dir).unwrap();
            let b = brute_force_seminorm(&u, &phi, dir).unwrap();
            assert_eq!(c.l_min, b, "trial {trial} alpha {alpha}");
        }
    }
}

#[test]
fn certify_matches_brute_force_for_regularized_family() {
    let mut rng = trial_rng(11, 0);
    let u = random_field(&mut rng, Geometry::new(1, 0, 64).unwrap(), 4);
    let phi = TestFunctionPhi::lipschitz(1.0, 0.5, 3.0).unwrap();
    let c = certify(&u, &phi, Block::Full).unwrap();
    assert_eq!(c.l_min, brute_force_seminorm(&u, &phi, Block::Full).unwrap());
}

#[test]
fn partial_certificate_ignores_the_other_block() {
    let g = Geometry::new(1, 1, 16).unwrap();
    let u = GridFunction::from_fn(g, |x| (2.0 * PI * x[1]).sin() * 5.0 + (2.0 * PI * x[0]).cos());
    let one = certify_holder(&u, 1.0, Block::One).unwrap();
    assert_eq!(one.l_min, brute_force_seminorm(&u, &TestFunctionPhi::linear(1.0).unwrap(), Block::One).unwrap());
    assert!(one.l_min < 2.0 * PI);
    assert!(certify_holder(&u, 1.0, Block::Full).unwrap().l_min > 5.0 * 2.0 * PI * 0.9);
}

#[test]
fn predictions_follow_the_exponents() {
    assert_eq!(Prediction::partial(1.5, 1.0).unwrap(), Prediction::Lipschitz);
    assert_eq!(Prediction::partial(1.0, 1.0).unwrap(), Prediction::Uncharacterized);
    assert_eq!(Prediction::partial(0.75, 0.5).unwrap(), Prediction::Holder { alpha_max: 0.5 });
    assert_eq!(Prediction::partial(0.75, 0.0).unwrap(), Prediction::Holder { alpha_max: 0.75 });
    assert!(Prediction::partial(0.75, 0.8).is_err());
    assert!(Prediction::partial(1.5, 1.6).is_err());
}

fn opts() -> SolverOptions {
    SolverOptions::default().with_tol(1e-8)
}

#[test]
fn toy_model_is_lipschitz_in_the_local_block() {
    let rec = toy_case(1.5, 32).unwrap().run(&opts()).unwrap();
    assert_eq!(rec.verdict, Verdict::Pass, "ratios {:?}", rec.lipschitz_ratio);
    assert!(rec.ratio_drift() <= RATIO_TOLERANCE);
    assert!(rec.lipschitz_ratio[0] > 0.0);
}

#[test]
fn advection_solution_is_holder() {
    let rec = advection_case(0.75, 0.5, 64).unwrap().run(&opts()).unwrap();
    let fit = rec.fit.clone().unwrap();
    assert!(fit.alpha >= 0.6, "{fit:?}");
    assert_eq!(rec.verdict, Verdict::Pass);
}

#[test]
fn degenerate_block_keeps_regularity_in_the_diffusive_block() {
    let case = degenerate_block_case(32).unwrap();
    let rec = case.run(&opts()).unwrap();
    assert_eq!(rec.verdict, Verdict::Pass, "ratios {:?}", rec.lipschitz_ratio);
    let across = modulus(&rec.fields[1], Block::Two).unwrap();
    let (lo, hi) = across.default_window();
    let fit = fit_exponent(&across, lo, hi).unwrap();
    assert!(fit.alpha < 0.8, "{fit:?}");
}

#[test]
fn critical_case_carries_no_verdict() {
    let case = toy_case(1.0, 16).unwrap();
    let build = &case.build;
    let rec = regularity_experiment(&**build, 16, Block::One, Prediction::partial(1.0, 1.0).unwrap(), &opts()).unwrap();
    assert_eq!(rec.verdict, Verdict::Uncharacterized);
    assert_eq!(rec.verdict.label(), "uncharacterized regime");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn modulus_is_monotone_shift_invariant_and_homogeneous(seed in 0u64..1000, shift in -5.0f64..5.0, scale in 0.1f64..4.0) {
        let g = Geometry::new(1, 1, 12).unwrap();
        let u = random_field(&mut trial_rng(seed, 0), g, 3);
        let base = modulus(&u, Block::Full).unwrap();
        prop_assert!(base.omega.windows(2).all(|w| w[0] <= w[1]));
        let shifted = modulus(&u.map(|v| v + shift), Block::Full).unwrap();
        for (a, b) in base.omega.iter().zip(&shifted.omega) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + shift.abs()));
        }
        let scaled = modulus(&u.map(|v| v * scale), Block::Full).unwrap();
        for (a, b) in base.omega.iter().zip(&scaled.omega) {
            prop_assert!((scale * a - b).abs() <= 1e-12 * (1.0 + scale * a));
        }
    }

    #[test]
    fn partial_modulus_below_full(seed in 0u64..1000) {
        let g = Geometry::new(1, 1, 12).unwrap();
        let u = random_field(&mut trial_rng(seed, 1), g, 3);
        let full = modulus(&u, Block::Full).unwrap();
        for block in [Block::One, Block::Two] {
            let part = modulus(&u, block).unwrap();
            for (p, f) in part.omega.iter().zip(&full.omega) {
                prop_assert!(p <= f);
            }
        }
    }

    #[test]
    fn holder_certificate_nondecreasing_in_alpha(seed in 0u64..1000, a in 0.1f64..0.9, gap in 0.01f64..0.1) {
        let u = random_field(&mut trial_rng(seed, 2), Geometry::new(1, 0, 32).unwrap(), 3);
        let s = u.sup_norm();
        let u = u.map(|v| v / s);
        let lo = certify_holder(&u, a, Block::Full).unwrap().l_min;
        let hi = certify_holder(&u, (a + gap).min(1.0), Block::Full).unwrap().l_min;
        prop_assert!(hi >= lo, "{lo} vs {hi}");
    }
}
