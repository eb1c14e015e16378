//! One function per experiment kind, each returning its artifacts.

use crate::artifacts::{num, status, Outcome, Table};
use crate::config::*;
use crate::error::{CliError, CliResult};
use mide_core::estimates::trials::{run_trials, TrialConfig, TrialKind, TrialRow};
use mide_core::estimates::{directional_sign_analysis, quadratic_bound};
use mide_core::field::ScalarField;
use mide_core::grid::{Block, Geometry, GridFunction};
use mide_core::levy::{
    cone_constant_example, cone_mass, fractional_multiplier, verify_measure_conditions, ConeSpec, JumpFunction,
    LevyKernel, SamplePlan,
};
use mide_core::matrixcalc::*;
use mide_core::quadrature::QuadratureConfig;
use mide_core::regularity::{advection_case, degenerate_block_case, toy_case, ExperimentRecord, RegularityCase, Verdict};
use mide_core::rng::{trial_rng, uniform, unit_vector};
use mide_core::solver::*;
use rayon::prelude::*;

/// Settings shared by every experiment of a run.
#[derive(Debug, Clone, Copy)]
pub struct Context {
    pub seed: u64,
    /// Multiplies solver tolerances.
    pub tol_scale: f64,
}

pub fn run(cfg: &ExperimentConfig, ctx: &Context) -> CliResult<Outcome> {
    match &cfg.experiment {
        Experiment::Lemmas(c) => lemmas(c, ctx),
        Experiment::Estimates(c) => estimates(c, ctx),
        Experiment::Conditions(c) => conditions(c, ctx),
        Experiment::Solve(c) => solve(c, ctx),
        Experiment::Parabolic(c) => parabolic(c, ctx),
        Experiment::Isaacs(c) => isaacs(c, ctx),
        Experiment::Regularity(c) => regularity(c, ctx),
    }
}

fn config_err(what: &str) -> impl Fn(mide_core::Error) -> CliError + '_ {
    move |e| CliError::Config(format!("{what}: {e}"))
}

fn field(g: Geometry, what: &str, source: &str) -> CliResult<GridFunction> {
    let e = parse_expr(what, source)?;
    Ok(GridFunction::from_fn(g, |x| e.eval(x, &[])))
}

fn scalar(what: &str, source: &str) -> CliResult<ScalarField> {
    let e = parse_expr(what, source)?;
    Ok(match e.is_constant() {
        true => ScalarField::Const(e.eval(&[], &[])),
        false => ScalarField::Expr(e),
    })
}

pub fn build_kernel(k: &KernelConfig) -> CliResult<LevyKernel> {
    let err = config_err("kernel");
    match k {
        KernelConfig::Fractional { dim, beta, .. } => LevyKernel::fractional(*dim, *beta).map_err(err),
        KernelConfig::Directional { dim, beta, support, .. } => {
            LevyKernel::directional(*dim, *beta, support.clone()).map_err(err)
        }
        KernelConfig::XModulated { dim, beta, coefficient, holder_gamma, .. } => {
            LevyKernel::x_modulated(*dim, *beta, scalar("coefficient", coefficient)?, *holder_gamma).map_err(err)
        }
        KernelConfig::Custom { dim, beta, density, symmetric, .. } => {
            LevyKernel::custom(*dim, *beta, parse_expr("density", density)?, *symmetric).map_err(err)
        }
    }
}

pub fn build_equation(eq: &EquationConfig, g: Geometry) -> CliResult<EquationSpec> {
    let err = config_err("equation");
    match eq {
        EquationConfig::ToyModel { beta, forcing } => toy_model(g, *beta, field(g, "forcing", forcing)?).map_err(err),
        EquationConfig::AdvectionFractional { beta, drift, c, forcing } => {
            let b = drift.iter().map(|s| scalar("drift", s)).collect::<CliResult<Vec<_>>>()?;
            advection_fractional(g, *beta, b, *c, field(g, "forcing", forcing)?).map_err(err)
        }
        EquationConfig::ModelEquation { a, c, beta, b, k, r, c0, forcing } => {
            let p = ModelEquation {
                a: scalar("a", a)?,
                c: scalar("c", c)?,
                kernel: LevyKernel::fractional(g.d(), *beta).map_err(config_err("kernel"))?,
                b: scalar("b", b)?,
                k: *k,
                r: *r,
                c0: *c0,
            };
            model_equation(g, &p, field(g, "forcing", forcing)?).map_err(err)
        }
        EquationConfig::FractionalHeat { beta, forcing } => {
            let f = forcing.as_ref().map(|s| field(g, "forcing", s)).transpose()?;
            fractional_heat(g, *beta, f).map_err(err)
        }
    }
}

pub fn build_case(c: &CaseConfig) -> CliResult<RegularityCase> {
    let err = config_err("regularity case");
    match c {
        CaseConfig::ToyModel { beta, n } => toy_case(*beta, *n).map_err(err),
        CaseConfig::AdvectionFractional { beta, b_exponent, n } => advection_case(*beta, *b_exponent, *n).map_err(err),
        CaseConfig::DegenerateBlock { n } => degenerate_block_case(*n).map_err(err),
    }
}

/// Stream offsets keeping the random suites of one seed independent.
const STREAM: u64 = 1 << 32;

fn lemma_row(suite: &str, case: u64, dims: String, r: mide_core::Result<(f64, f64, bool)>) -> Vec<String> {
    match r {
        Ok((value, threshold, ok)) => vec![suite.into(), case.to_string(), dims, num(value), num(threshold), status(ok), String::new()],
        Err(e) => vec![suite.into(), case.to_string(), dims, "NaN".into(), "NaN".into(), status(false), e.to_string()],
    }
}

fn lemmas(c: &LemmasConfig, ctx: &Context) -> CliResult<Outcome> {
    let seed = ctx.seed;
    let mut t = Table::new("lemmas.csv", &["suite", "case", "dims", "value", "threshold", "status", "note"]);
    let rows: Vec<Vec<String>> = (0..c.triples)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let (d1, d2) = (1 + (i % 3) as usize, 1 + (i / 3 % 3) as usize);
            let tr = random_valid_triple(&mut rng, d1, d2, true);
            let r = extract_blocks(&tr).map(|e| {
                let m = e.blocks.iter().map(|b| b.1).fold(f64::INFINITY, f64::min);
                (m, -PSD_TOL, m >= -PSD_TOL && e.blocks.len() == 2)
            });
            lemma_row("extract_blocks", i, format!("{d1}+{d2}"), r)
        })
        .collect();
    rows.into_iter().for_each(|r| t.push(r));
    let rows: Vec<Vec<String>> = (0..c.convolutions)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, STREAM + i);
            let tr = random_valid_triple(&mut rng, 2, 1, i % 2 == 0);
            let eps = uniform(&mut rng, 0.01, 0.99) * epsilon0(&tr);
            let r = convolve_triple(&tr, eps).map(|cv| {
                let m = check_block_inequality(&cv);
                (m, -1e-9, m >= -1e-9)
            });
            lemma_row("convolution", i, "2+1".into(), r)
        })
        .collect();
    rows.into_iter().for_each(|r| t.push(r));
    let rows: Vec<Vec<String>> = (0..c.closed_form)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, 2 * STREAM + i);
            let d = 1 + (i % 6) as usize;
            let alpha = uniform(&mut rng, 0.1, 3.0);
            let omega = uniform(&mut rng, 0.0, 3.0);
            let axis = unit_vector(&mut rng, d);
            let r = (|| {
                let closed = conv_closed_form(alpha, omega, &axis)?;
                let z = quadratic_z(alpha, omega, &axis)?;
                let mut worst: f64 = 0.0;
                for _ in 0..3 {
                    let v = unit_vector(&mut rng, d);
                    let direct = sup_convolve_direct(&z, alpha / 2.0, &v)?;
                    let cf = closed.quad(&v);
                    worst = worst.max((direct - cf).abs() / (1.0 + cf.abs()));
                }
                Ok((worst, 1e-8, worst <= 1e-8))
            })();
            lemma_row("closed_form", i, d.to_string(), r)
        })
        .collect();
    rows.into_iter().for_each(|r| t.push(r));
    let rows: Vec<Vec<String>> = (0..c.trace_pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, 3 * STREAM + i);
            let d = 1 + (i % 4) as usize;
            let alpha = uniform(&mut rng, 0.2, 2.0);
            let omega = uniform(&mut rng, 1.0, 1.99);
            let axis = unit_vector(&mut rng, d);
            let r = conv_closed_form(alpha, omega, &axis).and_then(|zc| {
                let (x, y) = random_pair_for(&mut rng, &zc);
                trace_bound_check(&x, &y, alpha, omega, &axis).map(|tc| (tc.trace - tc.bound, PSD_TOL, tc.satisfied))
            });
            lemma_row("trace_bound", i, d.to_string(), r)
        })
        .collect();
    rows.into_iter().for_each(|r| t.push(r));
    let mut out = Outcome::default();
    for suite in ["extract_blocks", "convolution", "closed_form", "trace_bound"] {
        let rows: Vec<&Vec<String>> = t.rows.iter().filter(|r| r[0] == suite).collect();
        let fails = rows.iter().filter(|r| r[5] == "FAIL").count();
        out.notes.push(format!("{suite}: {} cases, {fails} violations", rows.len()));
    }
    out.tables.push(t);
    Ok(out)
}

fn trial_status(s: &str) -> String {
    match s {
        "pass" => "PASS".into(),
        "fail" => "FAIL".into(),
        other => other.to_uppercase(),
    }
}

fn push_trials(t: &mut Table, rows: &[TrialRow]) {
    for r in rows {
        t.push(vec![
            r.seed.to_string(),
            r.trial.to_string(),
            r.estimate.clone(),
            r.kernel.clone(),
            r.phi.clone(),
            num(r.a_norm),
            num(r.lhs),
            num(r.rhs),
            num(r.margin),
            trial_status(&r.status),
            r.note.clone(),
        ]);
    }
}

fn estimates(c: &EstimatesConfig, ctx: &Context) -> CliResult<Outcome> {
    let cfg = TrialConfig { n1: c.n1, n2: c.n2, ..TrialConfig::default() };
    let mut t = Table::new(
        "trials.csv",
        &["seed", "trial", "estimate", "kernel", "phi", "a_norm", "lhs", "rhs", "margin", "status", "note"],
    );
    let mut out = Outcome::default();
    for (kind, count) in [(TrialKind::Concave, c.concave), (TrialKind::LevyIto, c.levy_ito), (TrialKind::Quadratic, c.quadratic)] {
        let rows = run_trials(kind, ctx.seed, count, &cfg);
        let run = rows.iter().filter(|r| r.status != "skipped").count();
        let fails = rows.iter().filter(|r| r.status == "fail").count();
        out.notes.push(format!("{}: {count} trials, {run} evaluated, {fails} violations", kind.label()));
        push_trials(&mut t, &rows);
    }
    let qcfg = QuadratureConfig::default();
    let anchor = quadratic_bound(&JumpFunction::identity(1), &LevyKernel::fractional(1, 1.0)?, 1.0, &[0.1], 0.1, &qcfg)?;
    t.push(vec![
        ctx.seed.to_string(),
        "anchor".into(),
        "quadratic-anchor".into(),
        "fractional(d=1,beta=1)".into(),
        "quadratic(eps=1,delta=0.1)".into(),
        num(0.1),
        num(anchor),
        num(0.52),
        num(0.52 - anchor),
        status((anchor - 0.52).abs() <= 1e-6),
        "closed form 0.4 + 0.04 + 0.08".into(),
    ]);
    out.tables.push(t);
    let mut s = Table::new("sign.csv", &["alpha", "closed_form", "bisected", "abs_error", "status"]);
    for &alpha in &c.sign_alphas {
        let r = directional_sign_analysis(&[1.0], &[1.0], alpha, 1.0, 1.0)?;
        let err = (r.local_threshold_bisected - r.local_threshold).abs();
        s.push(vec![num(alpha), num(r.local_threshold), num(r.local_threshold_bisected), num(err), status(err <= 1e-6)]);
    }
    out.tables.push(s);
    Ok(out)
}

fn constants_text(c: &[(String, f64)]) -> String {
    c.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

fn conditions(c: &ConditionsConfig, ctx: &Context) -> CliResult<Outcome> {
    let qcfg = QuadratureConfig::default();
    let mut out = Outcome::default();
    let mut t = Table::new("conditions.csv", &["kernel", "condition", "pass", "constants", "note", "status"]);
    for kc in &c.kernels {
        let k = build_kernel(kc)?;
        let report = verify_measure_conditions(&k, &SamplePlan::standard(k.dim), &qcfg)?;
        for r in &report.results {
            t.push(vec![k.id(), r.condition.clone(), r.pass.to_string(), constants_text(&r.constants), r.note.clone(), "-".into()]);
        }
        let all = report.all_pass();
        let verdict = kc.expect().map_or("-".to_string(), |e| status(e == all));
        t.push(vec![k.id(), "all".into(), all.to_string(), String::new(), report.plan.clone(), verdict]);
        out.notes.push(format!("{}: conditions {}", k.id(), if all { "hold" } else { "fail" }));
    }
    out.tables.push(t);

    let mut cones = Table::new("cones.csv", &["eta", "delta", "beta", "axis", "cone_mass", "closed_form", "rel_error", "status"]);
    let rows: Vec<CliResult<Vec<String>>> = (0..c.cone_combos)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(ctx.seed, 4 * STREAM + i);
            let eta = uniform(&mut rng, 0.05, 0.95);
            let delta = uniform(&mut rng, 0.1, 1.0);
            let beta = uniform(&mut rng, 0.2, 1.8);
            let axis = unit_vector(&mut rng, 2);
            let m = cone_mass(&LevyKernel::fractional(2, beta)?, &ConeSpec::new(&axis, eta, delta)?)?;
            let exact = cone_constant_example(2, beta, eta, delta)?;
            let rel = (m.value - exact).abs() / exact;
            Ok(vec![
                num(eta),
                num(delta),
                num(beta),
                format!("({};{})", axis[0], axis[1]),
                num(m.value),
                num(exact),
                num(rel),
                status(rel <= 0.01),
            ])
        })
        .collect();
    for r in rows {
        cones.push(r?);
    }
    out.notes.push(format!("cone masses: {} of {} within 1%", cones.count("PASS"), c.cone_combos));
    out.tables.push(cones);

    if c.directional_check {
        let mut d = Table::new("directional.csv", &["axis", "cone_mass", "degenerate", "m2_pass", "c_mu", "expected", "status"]);
        let k = LevyKernel::directional(2, 1.0, vec![1])?;
        let report = verify_measure_conditions(&k, &SamplePlan::standard(2), &qcfg)?;
        for (axis, label, supported) in [([1.0, 0.0], "(1;0)", false), ([0.0, 1.0], "(0;1)", true)] {
            let m = cone_mass(&k, &ConeSpec::new(&axis, 0.5, 1.0)?)?;
            let m2 = report
                .get(&format!("M2[axis={label}]"))
                .ok_or_else(|| CliError::Core(mide_core::Error::InvalidInput(format!("no M2 entry for {label}"))))?;
            let c_mu = m2.constant("C_mu").unwrap_or(f64::NAN);
            let ok = if supported {
                !m.degenerate && m.value > 0.0 && m2.pass && c_mu > 0.0
            } else {
                m.degenerate && m.value == 0.0 && !m2.pass
            };
            let expected = if supported { "M2 holds, C_mu > 0" } else { "M2 fails, cone mass 0" };
            d.push(vec![
                label.into(),
                num(m.value),
                m.degenerate.to_string(),
                m2.pass.to_string(),
                num(c_mu),
                expected.into(),
                status(ok),
            ]);
        }
        out.tables.push(d);
    }
    Ok(out)
}

fn projection(u: &GridFunction, basis: &GridFunction) -> f64 {
    let num: f64 = u.values.iter().zip(&basis.values).map(|(a, b)| a * b).sum();
    let den: f64 = basis.values.iter().map(|b| b * b).sum();
    num / den
}

fn convergence_table(history: &[(usize, f64, f64)]) -> Table {
    let mut t = Table::new("convergence.csv", &["step", "residual", "dt"]);
    for (s, r, dt) in history {
        t.push(vec![s.to_string(), num(*r), num(*dt)]);
    }
    t
}

fn field_bytes(u: &GridFunction) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    u.write_binary(&mut buf)?;
    Ok(buf)
}

const CHECK_HEADER: &[&str] = &["check", "n", "value", "expected", "error", "tolerance", "status"];

fn solve(c: &SolveConfig, ctx: &Context) -> CliResult<Outcome> {
    let mut opts = SolverOptions::default().with_tol(c.tol * ctx.tol_scale).with_max_steps(c.max_steps);
    opts.disc.fast_path = c.fast_path;
    let mut out = Outcome::default();
    let mut checks = Table::new("checks.csv", CHECK_HEADER);
    let g = c.grid.geometry()?;
    let spec = build_equation(&c.equation, g)?;
    let sol = match solve_stationary(&spec, &GridFunction::zeros(g), &opts) {
        Ok(s) => s,
        Err(mide_core::Error::NonConvergence { steps, last_residual, history }) => {
            checks.push(vec!["converged".into(), g.n.to_string(), num(last_residual), "0".into(), num(last_residual), num(opts.tol), status(false)]);
            out.notes.push(format!("no convergence after {steps} steps"));
            out.tables.push(convergence_table(&history));
            out.tables.push(checks);
            return Ok(out);
        }
        Err(e) => return Err(e.into()),
    };
    checks.push(vec!["converged".into(), g.n.to_string(), num(sol.residual), "0".into(), num(sol.residual), num(opts.tol), status(true)]);
    out.notes.push(format!("{}: converged in {} steps, residual {:e}", spec.name, sol.steps, sol.residual));
    if !spec.profile_checked {
        out.notes.push("profile unchecked".into());
    }
    if let Some(pc) = &c.check {
        let amp = projection(&sol.u, &field(g, "basis", &pc.basis)?);
        let err = (amp - pc.expected).abs() / pc.expected.abs();
        checks.push(vec!["projection".into(), g.n.to_string(), num(amp), num(pc.expected), num(err), num(pc.rel_tol), status(err <= pc.rel_tol)]);
        out.notes.push(format!("projection at n = {}: {amp} (expected {}, error {err:e})", g.n, pc.expected));
        if !c.refine.is_empty() {
            let mut errors = Vec::new();
            for &n in &c.refine {
                let gn = c.grid.with_n(n)?;
                let s = solve_stationary(&build_equation(&c.equation, gn)?, &GridFunction::zeros(gn), &opts)?;
                let amp = projection(&s.u, &field(gn, "basis", &pc.basis)?);
                let err = (amp - pc.expected).abs() / pc.expected.abs();
                errors.push(err);
                checks.push(vec!["refinement".into(), n.to_string(), num(amp), num(pc.expected), num(err), "-".into(), "-".into()]);
            }
            let monotone = errors.windows(2).all(|w| w[1] < w[0]);
            checks.push(vec!["monotone".into(), "-".into(), monotone.to_string(), "true".into(), "-".into(), "-".into(), status(monotone)]);
        }
    }
    out.tables.push(convergence_table(&sol.history));
    out.tables.push(checks);
    out.binaries.push(("field.bin".into(), field_bytes(&sol.u)?));
    Ok(out)
}

fn parabolic(c: &ParabolicConfig, _ctx: &Context) -> CliResult<Outcome> {
    let g = c.grid.geometry()?;
    let f = c.forcing.as_ref().map(|s| field(g, "forcing", s)).transpose()?;
    let spec = fractional_heat(g, c.beta, f).map_err(config_err("equation"))?;
    let u0 = field(g, "initial", &c.initial)?;
    let disc = Discretization::default();
    let dt = match c.dt {
        Some(dt) => dt,
        None => 0.9 * cfl_limit(&spec, &u0, &disc)?,
    };
    let mut out = Outcome::default();
    let mut checks = Table::new("checks.csv", CHECK_HEADER);
    let traj = match solve_parabolic(&spec, &u0, c.t_final, dt, c.snapshots, &disc) {
        Ok(t) => t,
        Err(e @ (mide_core::Error::Instability { .. } | mide_core::Error::InvalidInput(_))) => {
            checks.push(vec!["stable".into(), g.n.to_string(), "false".into(), "true".into(), "-".into(), "-".into(), status(false)]);
            out.notes.push(e.to_string());
            out.tables.push(checks);
            return Ok(out);
        }
        Err(e) => return Err(e.into()),
    };
    let mut snaps = Table::new("snapshots.csv", &["time", "sup_norm", "min", "max"]);
    for (t, u) in traj.times.iter().zip(&traj.snapshots) {
        snaps.push(vec![num(*t), num(u.sup_norm()), num(u.min()), num(u.max())]);
    }
    checks.push(vec!["stable".into(), g.n.to_string(), "true".into(), "true".into(), "-".into(), num(traj.dt), status(true)]);
    if let Some(excess) = traj.max_principle_excess {
        checks.push(vec!["max_principle".into(), g.n.to_string(), num(excess), "0".into(), num(excess), "1e-12".into(), status(excess <= 1e-12)]);
    }
    if let Some(dc) = &c.decay_check {
        let amp = projection(traj.last(), &u0);
        let rate = fractional_multiplier(g.d(), c.beta, dc.wavenumber)?;
        let expected = (-rate * c.t_final).exp();
        let err = (amp - expected).abs() / expected;
        checks.push(vec!["decay".into(), g.n.to_string(), num(amp), num(expected), num(err), num(dc.rel_tol), status(err <= dc.rel_tol)]);
        out.notes.push(format!("decay factor {amp} vs exact {expected}"));
    }
    out.notes.push(format!("{} steps of dt = {:e}", traj.steps, traj.dt));
    out.tables.push(snaps);
    out.tables.push(checks);
    out.binaries.push(("final.bin".into(), field_bytes(traj.last())?));
    Ok(out)
}

fn isaacs(c: &IsaacsConfig, ctx: &Context) -> CliResult<Outcome> {
    let g = c.grid.geometry()?;
    let f = field(g, "forcing", &c.forcing)?;
    let opts = SolverOptions::default().with_tol(c.tol * ctx.tol_scale).with_max_steps(c.max_steps);
    let spec = isaacs_diffusion(g, &c.coefficients, c.c, f.clone()).map_err(config_err("equation"))?;
    let sol = solve_isaacs(&spec, &GridFunction::zeros(g), &opts)?;
    let mut out = Outcome::default();
    let mut checks = Table::new("checks.csv", CHECK_HEADER);
    let active = residual(&spec, &sol.solution.u)?.sup_norm();
    checks.push(vec!["residual".into(), g.n.to_string(), num(active), "0".into(), num(active), num(opts.tol), status(active <= opts.tol)]);
    for &a in &c.coefficients {
        let single = isaacs_diffusion(g, &[a], c.c, f.clone()).map_err(config_err("equation"))?;
        let ua = solve_stationary(&single, &GridFunction::zeros(g), &opts)?.u;
        let excess = sol.solution.u.values.iter().zip(&ua.values).map(|(u, v)| u - v).fold(f64::NEG_INFINITY, f64::max);
        let tol = 10.0 * opts.tol / c.c;
        checks.push(vec![format!("below_control[a={a}]"), g.n.to_string(), num(excess), "<= 0".into(), num(excess.max(0.0)), num(tol), status(excess <= tol)]);
    }
    let mut sel = Table::new("selection.csv", &["gamma", "coefficient", "points"]);
    for (i, a) in c.coefficients.iter().enumerate() {
        let count = sol.selection.iter().filter(|s| s.0 == i).count();
        sel.push(vec![i.to_string(), num(*a), count.to_string()]);
    }
    out.notes.push(format!("converged in {} steps, residual {:e}", sol.solution.steps, sol.solution.residual));
    out.tables.push(convergence_table(&sol.solution.history));
    out.tables.push(sel);
    out.tables.push(checks);
    out.binaries.push(("field.bin".into(), field_bytes(&sol.solution.u)?));
    Ok(out)
}

fn verdict_status(v: Verdict) -> String {
    match v {
        Verdict::Pass => "PASS".into(),
        Verdict::Fail => "FAIL".into(),
        Verdict::Uncharacterized => "UNCHARACTERIZED".into(),
    }
}

fn regularity(c: &RegularityConfig, ctx: &Context) -> CliResult<Outcome> {
    let opts = SolverOptions::default().with_tol(c.tol * ctx.tol_scale);
    let mut out = Outcome::default();
    let mut moduli = Table::new("modulus.csv", &["case", "direction", "n", "t", "omega"]);
    let mut verdicts = Table::new(
        "verdicts.csv",
        &[
            "case", "direction", "prediction", "n_coarse", "n_fine", "ratio_coarse", "ratio_fine", "ratio_drift",
            "alpha_hat", "l_hat", "fit_t_min", "fit_t_max", "fit_residual", "verdict", "status",
        ],
    );
    for cc in &c.cases {
        let case = build_case(cc)?;
        let rec: ExperimentRecord = case.run(&opts)?;
        for r in &rec.reports {
            for (t, w) in r.t.iter().zip(&r.omega) {
                moduli.push(vec![case.name.into(), rec.direction.label().into(), r.n.to_string(), num(*t), num(*w)]);
            }
        }
        let fit = rec.fit.as_ref();
        let opt = |v: Option<f64>| v.map_or("-".to_string(), num);
        verdicts.push(vec![
            case.name.into(),
            rec.direction.label().into(),
            rec.prediction.label(),
            rec.n[0].to_string(),
            rec.n[1].to_string(),
            num(rec.lipschitz_ratio[0]),
            num(rec.lipschitz_ratio[1]),
            num(rec.ratio_drift()),
            opt(fit.map(|f| f.alpha)),
            opt(fit.map(|f| f.l)),
            opt(fit.map(|f| f.t_min)),
            opt(fit.map(|f| f.t_max)),
            opt(fit.map(|f| f.residual)),
            rec.verdict.label().into(),
            verdict_status(rec.verdict),
        ]);
        out.notes.push(format!(
            "{} ({}): {}; ratio {} -> {}, alpha_hat {}",
            case.name,
            rec.prediction.label(),
            rec.verdict.label(),
            rec.lipschitz_ratio[0],
            rec.lipschitz_ratio[1],
            opt(fit.map(|f| f.alpha))
        ));
        if matches!(case.direction, Block::One | Block::Two) {
            let other = if case.direction == Block::One { Block::Two } else { Block::One };
            if let Ok(r) = mide_core::regularity::modulus(&rec.fields[1], other) {
                for (t, w) in r.t.iter().zip(&r.omega) {
                    moduli.push(vec![case.name.into(), other.label().into(), r.n.to_string(), num(*t), num(*w)]);
                }
            }
        }
    }
    out.tables.push(moduli);
    out.tables.push(verdicts);
    Ok(out)
}
