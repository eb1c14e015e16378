use mide_core::field::ScalarField;
use mide_core::grid::{Block, Geometry, GridFunction};
use mide_core::solver::*;
use std::f64::consts::PI;

fn cos2(g: Geometry) -> GridFunction {
    GridFunction::from_fn(g, |x| (2.0 * PI * x[0]).cos() * (2.0 * PI * x[1]).cos())
}

fn amplitude11(u: &GridFunction) -> f64 {
    let f = cos2(u.geometry);
    4.0 * u.values.iter().zip(&f.values).map(|(a, b)| a * b).sum::<f64>() / u.values.len() as f64
}

const TOY_AMPLITUDE: f64 = 1.0 / (4.0 * PI * PI + 2.0 * PI * PI);

fn toy_solution(n: usize) -> GridFunction {
    let g = Geometry::new(1, 1, n).unwrap();
    let spec = toy_model(g, 1.0, cos2(g)).unwrap();
    solve_stationary(&spec, &GridFunction::zeros(g), &SolverOptions::default().with_tol(1e-9)).unwrap().u
}

#[test]
fn toy_residual_of_fourier_solution() {
    let g = Geometry::new(1, 1, 64).unwrap();
    let f = cos2(g);
    let spec = toy_model(g, 1.0, f.clone()).unwrap();
    let exact = f.map(|v| TOY_AMPLITUDE * v);
    assert!(residual(&spec, &exact).unwrap().sup_norm() <= 0.05 * f.sup_norm());
    let r0 = residual(&spec, &GridFunction::zeros(g)).unwrap();
    for (a, b) in r0.values.iter().zip(&f.values) {
        assert_eq!(*a, -b);
    }
}

#[test]
fn zeroth_order_only_equation() {
    let g = Geometry::new(1, 0, 32).unwrap();
    let f = GridFunction::from_fn(g, |x| (2.0 * PI * x[0]).sin() + 0.5);
    let spec = EquationSpec::new("zeroth", g, vec![Term::ZerothOrder { c: 2.0 }, Term::Forcing { f: f.clone() }]).unwrap();
    assert!(residual(&spec, &f.map(|v| v / 2.0)).unwrap().sup_norm() < 1e-15);
    assert!(EquationSpec::new("none", g, vec![Term::Forcing { f }]).is_err());
}

#[test]
fn toy_amplitude_and_refinement() {
    let mut errors = vec![];
    for n in [32, 64, 128] {
        let u = toy_solution(n);
        let err = (amplitude11(&u) - TOY_AMPLITUDE).abs() / TOY_AMPLITUDE;
        errors.push(err);
        if n == 64 {
            assert!(err < 0.02, "amplitude error {err}");
        }
    }
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
}

#[test]
fn homogeneous_problem_decays_to_zero() {
    let g = Geometry::new(1, 1, 16).unwrap();
    let terms = vec![
        Term::LocalTrace { a: Diffusion::Scalar(1.0.into()), block: Block::One },
        Term::ZerothOrder { c: 1.0 },
        Term::Forcing { f: GridFunction::zeros(g) },
    ];
    let spec = EquationSpec::new("decay", g, terms).unwrap();
    let init = GridFunction::from_fn(g, |x| (2.0 * PI * x[1]).sin() + 0.3);
    let tol = 1e-8;
    let sol = solve_stationary(&spec, &init, &SolverOptions::default().with_tol(tol)).unwrap();
    assert!(sol.u.sup_norm() <= tol);
    assert_eq!(sol.history.last().unwrap().0, sol.steps);
}

#[test]
fn advection_fractional_respects_comparison_bound() {
    let g = Geometry::new(1, 0, 32).unwrap();
    let f = GridFunction::from_fn(g, |x| (2.0 * PI * x[0]).cos());
    let b = vec![ScalarField::func(|x: &[f64]| (2.0 * PI * x[0]).sin())];
    let spec = advection_fractional(g, 1.5, b, 1.0, f).unwrap();
    let tol = 1e-8;
    let sol = solve_stationary(&spec, &GridFunction::zeros(g), &SolverOptions::default().with_tol(tol)).unwrap();
    assert!(sol.residual <= tol);
    let bound = spec.comparison_bound().unwrap();
    assert_eq!(bound, 1.0);
    assert!(sol.u.sup_norm() <= bound);
}

#[test]
fn model_equation_respects_comparison_bound() {
    let g = Geometry::new(2, 0, 16).unwrap();
    let f = GridFunction::from_fn(g, |x| (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).cos() + 0.2);
    let p = ModelEquation {
        a: ScalarField::func(|x: &[f64]| 0.5 + 0.4 * (2.0 * PI * x[0]).cos()),
        c: 1.0.into(),
        kernel: mide_core::levy::LevyKernel::fractional(2, 1.5).unwrap(),
        b: ScalarField::func(|x: &[f64]| 0.3 * (2.0 * PI * x[1]).sin()),
        k: 1.0,
        r: 1.5,
        c0: 2.0,
    };
    let spec = model_equation(g, &p, f.clone()).unwrap();
    let sol = solve_stationary(&spec, &GridFunction::zeros(g), &SolverOptions::default().with_tol(1e-8)).unwrap();
    assert!(sol.u.sup_norm() <= spec.comparison_bound().unwrap());
    assert!((spec.comparison_bound().unwrap() - f.sup_norm() / 2.0).abs() < 1e-15);
}

#[test]
fn nonconvergence_reports_history() {
    let g = Geometry::new(1, 1, 16).unwrap();
    let spec = toy_model(g, 1.0, cos2(g)).unwrap();
    let opts = SolverOptions::default().with_tol(1e-12).with_max_steps(50);
    match solve_stationary(&spec, &GridFunction::zeros(g), &opts) {
        Err(mide_core::Error::NonConvergence { steps, history, .. }) => {
            assert_eq!(steps, 50);
            assert_eq!(history.last().unwrap().0, 50);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn pseudo_time_iteration_preserves_order() {
    let g = Geometry::new(1, 1, 32).unwrap();
    let spec = toy_model(g, 1.5, cos2(g)).unwrap();
    let c = CompiledSpec::new(&spec, &Discretization::default()).unwrap();
    let mut u = GridFunction::from_fn(g, |x| (2.0 * PI * x[0]).sin() * (4.0 * PI * x[1]).cos());
    let mut v = u.zip_with(&GridFunction::from_fn(g, |x| 0.1 + 0.05 * (2.0 * PI * x[1]).sin()), |a, b| a + b).unwrap();
    let dt = 0.5 / c.stiffness(&u);
    for _ in 0..100 {
        for w in [&mut u, &mut v] {
            let r = c.residual(w).unwrap().residual;
            for (x, ri) in w.values.iter_mut().zip(&r.values) {
                *x -= dt * ri;
            }
        }
        assert!(u.values.iter().zip(&v.values).all(|(a, b)| a <= b));
    }
}

#[test]
fn direct_quadrature_matches_spectral_residual() {
    let g = Geometry::new(1, 0, 64).unwrap();
    let spec = fractional_heat(g, 1.5, None).unwrap();
    let u = GridFunction::from_fn(g, |x| (2.0 * PI * x[0]).cos() + 0.3 * (4.0 * PI * x[0]).sin());
    let fast = CompiledSpec::new(&spec, &Discretization::default()).unwrap();
    let slow = CompiledSpec::new(&spec, &Discretization { fast_path: false, ..Default::default() }).unwrap();
    assert!(fast.is_spectral() && !slow.is_spectral());
    let a = fast.residual(&u).unwrap().residual;
    let b = slow.residual(&u).unwrap().residual;
    let scale = a.sup_norm();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((x - y).abs() < 0.01 * scale, "{x} vs {y}");
    }
}

#[test]
fn fractional_heat_decay() {
    let g = Geometry::new(1, 0, 128).unwrap();
    let spec = fractional_heat(g, 1.0, None).unwrap();
    let u0 = GridFunction::from_fn(g, |x| (2.0 * PI * x[0]).cos());
    let dt = cfl_limit(&spec, &u0, &Discretization::default()).unwrap();
    let tr = solve_parabolic(&spec, &u0, 0.01, dt, 4, &Discretization::default()).unwrap();
    assert!((tr.times.last().unwrap() - 0.01).abs() < 1e-15);
    let decay = (-2.0 * PI * PI * 0.01f64).exp();
    let u = tr.last();
    let amp = 2.0 * u.values.iter().zip(&u0.values).map(|(a, b)| a * b).sum::<f64>() / 128.0;
    assert!((amp - decay).abs() < 0.02 * decay, "{amp} vs {decay}");
    assert!(tr.max_principle_excess.unwrap() < 1e-12);
    assert!(solve_parabolic(&spec, &u0, 0.01, 2.0 * dt, 4, &Discretization::default()).is_err());
}

#[test]
fn constant_initial_data_is_stationary() {
    let g = Geometry::new(1, 1, 16).unwrap();
    let spec = toy_model(g, 0.8, GridFunction::zeros(g)).unwrap();
    let u0 = GridFunction::constant(g, 0.7);
    let tr = solve_parabolic(&spec, &u0, 0.01, 1e-4, 5, &Discretization::default()).unwrap();
    for s in &tr.snapshots {
        assert!(s.values.iter().all(|v| (v - 0.7).abs() < 1e-12));
    }
}

fn heat_1d(n: usize) -> (Geometry, GridFunction) {
    let g = Geometry::new(1, 0, n).unwrap();
    (g, GridFunction::from_fn(g, |x| 1.0 + (2.0 * PI * x[0]).cos() + 0.5 * (6.0 * PI * x[0]).sin()))
}

#[test]
fn singleton_controls_reduce_to_stationary() {
    let (g, f) = heat_1d(32);
    let lap = Term::LocalTrace { a: Diffusion::Scalar(1.0.into()), block: Block::Full };
    let grad = Term::GradientPower { b: 0.5.into(), exponent: 1.0, block: Block::Full, cutoff: None };
    let base = vec![Term::ZerothOrder { c: 1.0 }];
    let controls = Controls { gamma: vec![vec![lap.clone(), grad.clone()]], delta: vec![vec![Term::Forcing { f: f.clone() }]] };
    let ctrl = EquationSpec::controlled("ctrl", g, base.clone(), controls).unwrap();
    let flat = EquationSpec::new("flat", g, vec![base[0].clone(), lap, grad, Term::Forcing { f }]).unwrap();
    let opts = SolverOptions::default();
    let a = solve_isaacs(&ctrl, &GridFunction::zeros(g), &opts).unwrap();
    let b = solve_stationary(&flat, &GridFunction::zeros(g), &opts).unwrap();
    assert_eq!(a.solution, b);
    assert!(a.selection.iter().all(|s| *s == (0, 0)));
}

#[test]
fn isaacs_diffusion_family() {
    let (g, f) = heat_1d(32);
    let spec = isaacs_diffusion(g, &[1.0, 2.0], 4.0, f.clone()).unwrap();
    let tol = 1e-9;
    let opts = SolverOptions::default().with_tol(tol);
    let sol = solve_isaacs(&spec, &GridFunction::zeros(g), &opts).unwrap();
    let c = CompiledSpec::new(&spec, &Discretization::default()).unwrap();
    let r: Vec<GridFunction> = (0..2).map(|i| c.variant_residual(&sol.solution.u, i, 0).unwrap()).collect();
    for (k, (gi, _)) in sol.selection.iter().enumerate() {
        assert!(r[*gi].values[k].abs() <= tol);
        assert!(r[1 - gi].values[k] <= r[*gi].values[k]);
    }
    assert!(sol.selection.iter().any(|s| s.0 == 0) && sol.selection.iter().any(|s| s.0 == 1));
    for a in [1.0, 2.0] {
        let fixed = isaacs_diffusion(g, &[a], 4.0, f.clone()).unwrap();
        let v = solve_isaacs(&fixed, &GridFunction::zeros(g), &opts).unwrap().solution.u;
        assert!(sol.solution.u.values.iter().zip(&v.values).all(|(x, y)| *x <= y + 1e-8));
    }
}

#[test]
fn affine_controls_reduce_to_forcing_min_max() {
    let g = Geometry::new(1, 0, 32).unwrap();
    let fs = [
        GridFunction::from_fn(g, |x| (2.0 * PI * x[0]).cos()),
        GridFunction::from_fn(g, |x| (2.0 * PI * x[0]).sin()),
    ];
    let gs = [GridFunction::constant(g, 0.2), GridFunction::from_fn(g, |x| 0.5 * (4.0 * PI * x[0]).cos())];
    let forcing = |f: &GridFunction| vec![Term::Forcing { f: f.clone() }];
    let base = vec![Term::LocalTrace { a: Diffusion::Scalar(0.1.into()), block: Block::Full }, Term::ZerothOrder { c: 1.0 }];
    let controls = Controls { gamma: fs.iter().map(forcing).collect(), delta: gs.iter().map(forcing).collect() };
    let spec = EquationSpec::controlled("affine", g, base.clone(), controls).unwrap();
    let reduced = GridFunction::from_fn(g, |_| 0.0);
    let values: Vec<f64> = (0..g.len())
        .map(|i| {
            fs.iter()
                .map(|f| gs.iter().map(|h| f.values[i] + h.values[i]).fold(f64::NEG_INFINITY, f64::max))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let reduced = GridFunction::new(reduced.geometry, values).unwrap();
    let mut terms = base;
    terms.push(Term::Forcing { f: reduced });
    let plain = EquationSpec::new("plain", g, terms).unwrap();
    let opts = SolverOptions::default().with_tol(1e-10);
    let a = solve_isaacs(&spec, &GridFunction::zeros(g), &opts).unwrap().solution.u;
    let b = solve_stationary(&plain, &GridFunction::zeros(g), &opts).unwrap().u;
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((x - y).abs() < 1e-9);
    }
}

fn gradient_spec(g: Geometry, f: GridFunction) -> EquationSpec {
    let terms = vec![
        Term::LocalTrace { a: Diffusion::Scalar(0.2.into()), block: Block::Full },
        Term::GradientPower { b: 1.0.into(), exponent: 1.0, block: Block::Full, cutoff: None },
        Term::ZerothOrder { c: 1.0 },
        Term::Forcing { f },
    ];
    EquationSpec::new("linear-gradient", g, terms).unwrap()
}

#[test]
fn gradient_cutoff_cases() {
    let (g, f) = heat_1d(64);
    let spec = gradient_spec(g, f.clone());
    let u = GridFunction::from_fn(g, |x| (2.0 * PI * x[0]).sin());
    let same = gradient_cutoff(&spec, f64::INFINITY).unwrap();
    assert_eq!(residual(&same, &u).unwrap(), residual(&spec, &u).unwrap());
    let zero = gradient_cutoff(&spec, 0.0).unwrap();
    let mut no_grad = spec.clone();
    no_grad.terms.remove(1);
    assert_eq!(residual(&zero, &u).unwrap(), residual(&no_grad, &u).unwrap());
    assert!(gradient_cutoff(&spec, -1.0).is_err());

    let tol = 1e-9;
    let opts = SolverOptions::default().with_tol(tol);
    let full = solve_stationary(&spec, &GridFunction::zeros(g), &opts).unwrap().u;
    let h = g.h();
    let grad_max = (0..g.len())
        .map(|i| (full.values[g.neighbor(i, 0, 1)] - full.values[i]).abs() / h)
        .fold(0.0, f64::max);
    let clamped = gradient_cutoff(&spec, 1.5 * grad_max + 1.0).unwrap();
    let cut = solve_stationary(&clamped, &GridFunction::zeros(g), &opts).unwrap().u;
    for (x, y) in full.values.iter().zip(&cut.values) {
        assert!((x - y).abs() <= 2.0 * tol);
    }
}

#[test]
fn profile_and_validation() {
    let g = Geometry::new(1, 1, 16).unwrap();
    let spec = toy_model(g, 1.5, cos2(g)).unwrap();
    assert!(spec.profile_checked);
    let bad = EllipticityProfile::new(0.2.into(), 0.3.into(), 1.0, 0.0);
    assert!(spec.clone().with_profile(bad, false).is_err());
    let user = EquationSpec::new("user", g, spec.terms.clone()).unwrap();
    assert!(!user.profile_checked);
    let wrong_kernel = Term::Nonlocal {
        kernel: mide_core::levy::LevyKernel::fractional(2, 1.0).unwrap(),
        jump: None,
        coefficient: 1.0.into(),
        block: Block::Two,
        sign: 1.0,
    };
    assert!(EquationSpec::new("bad", g, vec![wrong_kernel]).is_err());
}
