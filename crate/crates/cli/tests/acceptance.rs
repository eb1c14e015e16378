//! Acceptance suite: one PASS/FAIL line per criterion.

use mide_core::estimates::trials::random_field;
use mide_core::estimates::TestFunctionPhi;
use mide_core::grid::{Block, Geometry, GridFunction};
use mide_core::levy::LevyKernel;
use mide_core::operators::{eval_nonlocal, fractional_laplacian_spectral, OperatorQuadrature, SplitSpec};
use mide_core::regularity::{brute_force_seminorm, certify, certify_holder};
use mide_core::rng::trial_rng;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

type Row = BTreeMap<String, String>;

fn read_csv(path: &Path) -> Vec<Row> {
    let mut r = match csv::Reader::from_path(path) {
        Ok(r) => r,
        Err(_) => return Vec::new(),
    };
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    r.records().map(|rec| header.iter().cloned().zip(rec.unwrap().iter().map(String::from)).collect()).collect()
}

fn field<'a>(row: &'a Row, key: &str) -> &'a str {
    row.get(key).map(String::as_str).unwrap_or("")
}

fn value(row: &Row, key: &str) -> f64 {
    field(row, key).parse().unwrap_or(f64::NAN)
}

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, id: usize, title: &str, ok: bool, detail: String) {
        self.failed += usize::from(!ok);
        println!("[{}] {id}. {title}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn configs() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut v: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

/// Runs every shipped config through the binary; returns per-config wall time.
fn run_suite(out: &Path) -> BTreeMap<String, Duration> {
    let mut times = BTreeMap::new();
    for cfg in configs() {
        let start = Instant::now();
        let status = Command::new(env!("CARGO_BIN_EXE_mide"))
            .arg("run")
            .arg(&cfg)
            .arg("--out-dir")
            .arg(out)
            .env_remove("MIDE_OUT_DIR")
            .output()
            .unwrap();
        let name = cfg.file_stem().unwrap().to_string_lossy().into_owned();
        if !status.status.success() {
            eprintln!("{name}: exit {:?}\n{}", status.status.code(), String::from_utf8_lossy(&status.stderr));
        }
        times.insert(name, start.elapsed());
    }
    times
}

fn tree_bytes(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn operator_fidelity(rep: &mut Report) {
    let g = Geometry::new(1, 0, 512).unwrap();
    let u = GridFunction::from_fn(g, |x| (2.0 * PI * x[0]).cos());
    let oq = OperatorQuadrature::default();
    let mut worst: f64 = 0.0;
    let mut slowest = Duration::ZERO;
    let mut anchor = f64::NAN;
    for beta in [0.5, 1.0, 1.5] {
        let start = Instant::now();
        let k = LevyKernel::fractional(1, beta).unwrap();
        let s = fractional_laplacian_spectral(&u, beta, Block::Full).unwrap();
        let scale = s.sup_norm();
        for i in (0..g.n).step_by(8) {
            let d = eval_nonlocal(&k, &u, &g.coords(i), &SplitSpec::default(), &oq).unwrap();
            worst = worst.max((d + s.values[i]).abs() / scale);
            if i == 0 && beta == 1.0 {
                anchor = d;
            }
        }
        slowest = slowest.max(start.elapsed());
    }
    let anchor_err = (anchor + 2.0 * PI * PI).abs() / (2.0 * PI * PI);
    let ok = worst <= 0.01 && anchor_err <= 0.01 && slowest <= Duration::from_secs(10);
    rep.line(
        1,
        "operator fidelity",
        ok,
        format!("max rel error {worst:.2e} over 64 points x 3 betas; beta=1 at x=0 gives {anchor:.4} (rel {anchor_err:.1e}); slowest beta {slowest:.2?}"),
    );
}

fn toy_solve(rep: &mut Report, out: &Path) {
    let rows = read_csv(&out.join("toy-solve/checks.csv"));
    let proj = rows.iter().find(|r| field(r, "check") == "projection");
    let refine: Vec<(String, f64)> = rows
        .iter()
        .filter(|r| field(r, "check") == "refinement")
        .map(|r| (field(r, "n").to_string(), value(r, "error")))
        .collect();
    let monotone = refine.len() == 3 && refine.windows(2).all(|w| w[1].1 < w[0].1);
    let ok = proj.is_some_and(|p| value(p, "error") <= 0.02 && field(p, "status") == "PASS") && monotone;
    let amp = proj.map_or(f64::NAN, |p| value(p, "value"));
    rep.line(2, "toy-model solve", ok, format!("amplitude {amp:.6} vs {:.6}; errors over n {refine:?}", 1.0 / (6.0 * PI * PI)));
}

fn lemma_suites(rep: &mut Report, out: &Path, secs: f64) {
    let rows = read_csv(&out.join("lemmas/lemmas.csv"));
    let mut parts = Vec::new();
    let mut ok = secs <= 60.0;
    for (suite, want) in [("extract_blocks", 1000), ("convolution", 500), ("closed_form", 200), ("trace_bound", 1000)] {
        let cases: Vec<&Row> = rows.iter().filter(|r| field(r, "suite") == suite).collect();
        let bad = cases.iter().filter(|r| field(r, "status") != "PASS").count();
        ok &= cases.len() == want && bad == 0;
        parts.push(format!("{suite} {}/{want} cases, {bad} violations", cases.len()));
    }
    rep.line(3, "lemma suites", ok, format!("{}; {secs:.1} s", parts.join("; ")));
}

fn estimate_trials(rep: &mut Report, out: &Path) {
    let rows = read_csv(&out.join("estimates/trials.csv"));
    let of = |e: &str| rows.iter().filter(|r| field(r, "estimate") == e).collect::<Vec<_>>();
    let concave: Vec<&Row> = of("concave").into_iter().chain(of("levy-ito")).collect();
    let quad = of("quadratic");
    let passed = |v: &[&Row]| v.iter().filter(|r| field(r, "status") == "PASS").count();
    let anchor = rows.iter().find(|r| field(r, "estimate") == "quadratic-anchor");
    let mut betas: Vec<&str> = concave.iter().map(|r| field(r, "kernel")).collect();
    betas.sort();
    betas.dedup();
    let ok = concave.len() == 200
        && passed(&concave) == 200
        && quad.len() == 100
        && passed(&quad) == 100
        && anchor.is_some_and(|a| (value(a, "lhs") - 0.52).abs() <= 1e-6);
    rep.line(
        4,
        "estimate inequalities",
        ok,
        format!(
            "concave + levy-ito {}/{} hold across {} kernels, quadratic {}/{} hold, anchor {}",
            passed(&concave),
            concave.len(),
            betas.len(),
            passed(&quad),
            quad.len(),
            anchor.map_or("missing".into(), |a| field(a, "lhs").to_string())
        ),
    );
}

fn nondegeneracy(rep: &mut Report, out: &Path) {
    let dir = read_csv(&out.join("conditions/directional.csv"));
    let cones = read_csv(&out.join("conditions/cones.csv"));
    let orth = dir.iter().find(|r| field(r, "axis") == "(1;0)");
    let along = dir.iter().find(|r| field(r, "axis") == "(0;1)");
    let orth_ok = orth.is_some_and(|r| value(r, "cone_mass") == 0.0 && field(r, "m2_pass") == "false");
    let along_ok = along.is_some_and(|r| value(r, "c_mu") > 0.0 && field(r, "m2_pass") == "true");
    let worst = cones.iter().map(|r| value(r, "rel_error")).fold(0.0, f64::max);
    let ok = orth_ok && along_ok && cones.len() == 20 && worst <= 0.01;
    rep.line(
        5,
        "nondegeneracy detection",
        ok,
        format!(
            "orthogonal axis cone mass {} (M2 {}), support axis C_mu {}; {} cone masses, worst rel error {worst:.2e}",
            orth.map_or("-", |r| field(r, "cone_mass")),
            orth.map_or("-", |r| field(r, "m2_pass")),
            along.map_or("-", |r| field(r, "c_mu")),
            cones.len()
        ),
    );
}

fn certifier(rep: &mut Report) {
    let g = Geometry::new(1, 0, 1024).unwrap();
    let u = GridFunction::from_fn(g, |x| (2.0 * PI * x[0]).cos());
    let lip = certify_holder(&u, 1.0, Block::Full).unwrap().l_min;
    let half = certify_holder(&u, 0.5, Block::Full).unwrap().l_min;
    let lip_ok = (lip - 2.0 * PI).abs() <= 0.02 * 2.0 * PI;
    let half_ok = (half - 3.017).abs() <= 0.02 * 3.017;
    let mut mismatches = 0;
    for trial in 0..50u64 {
        let mut rng = trial_rng(2024, trial);
        let (geom, dir) = match trial % 4 {
            0 => (Geometry::new(1, 0, 64).unwrap(), Block::Full),
            1 => (Geometry::new(1, 0, 48).unwrap(), Block::Full),
            2 => (Geometry::new(1, 1, 16).unwrap(), Block::Full),
            _ => (Geometry::new(1, 1, 16).unwrap(), Block::One),
        };
        let f = random_field(&mut rng, geom, 3);
        let alpha = [0.25, 0.5, 0.75, 1.0][(trial / 4 % 4) as usize];
        let phi = TestFunctionPhi::holder(1.0, alpha, f64::INFINITY).unwrap();
        if certify(&f, &phi, dir).unwrap().l_min != brute_force_seminorm(&f, &phi, dir).unwrap() {
            mismatches += 1;
        }
    }
    rep.line(
        6,
        "certifier correctness",
        lip_ok && half_ok && mismatches == 0,
        format!("alpha=1 gives {lip:.4} (2pi = {:.4}); alpha=0.5 gives {half:.4}; {mismatches}/50 brute-force mismatches", 2.0 * PI),
    );
}

fn regularity(rep: &mut Report, out: &Path, secs: f64) {
    let rows = read_csv(&out.join("regularity/verdicts.csv"));
    let case = |name: &str| rows.iter().find(|r| field(r, "case") == name);
    let toy = case("toy-model");
    let adv = case("advection-fractional");
    let deg = case("degenerate-block");
    let pass = |r: Option<&Row>| r.is_some_and(|r| field(r, "verdict") == "PASS");
    let alpha = adv.map_or(f64::NAN, |r| value(r, "alpha_hat"));
    let ok = pass(toy) && toy.is_some_and(|r| value(r, "ratio_drift") <= 0.2) && pass(adv) && alpha >= 0.6 && pass(deg) && secs <= 300.0;
    rep.line(
        7,
        "predicted regularity",
        ok,
        format!(
            "(a) toy beta=1.5 {} drift {}; (b) advection beta=0.75 alpha_hat {alpha:.3} {}; (c) degenerate block {}; {secs:.1} s total",
            toy.map_or("-", |r| field(r, "verdict")),
            toy.map_or("-", |r| field(r, "ratio_drift")),
            adv.map_or("-", |r| field(r, "verdict")),
            deg.map_or("-", |r| field(r, "verdict")),
        ),
    );
}

fn sign_thresholds(rep: &mut Report, out: &Path) {
    let rows = read_csv(&out.join("estimates/sign.csv"));
    let worst = rows.iter().map(|r| value(r, "abs_error")).fold(0.0, f64::max);
    rep.line(8, "sign thresholds", !rows.is_empty() && worst <= 1e-6, format!("{} exponents, worst |bisected - 1/(2-alpha)| = {worst:.2e}", rows.len()));
}

fn determinism(rep: &mut Report, a: &Path, b: &Path) {
    let (ta, tb) = (tree_bytes(a), tree_bytes(b));
    let same = !ta.is_empty() && ta == tb;
    let differing: Vec<String> = ta
        .iter()
        .zip(&tb)
        .filter(|(x, y)| x != y)
        .map(|(x, _)| x.0.display().to_string())
        .collect();
    rep.line(9, "determinism", same, format!("{} files compared across two full runs; differing: {differing:?}", ta.len()));
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let times = run_suite(&a);
    run_suite(&b);
    let secs = |k: &str| times.get(k).map_or(f64::NAN, Duration::as_secs_f64);
    let mut rep = Report { failed: 0 };
    operator_fidelity(&mut rep);
    toy_solve(&mut rep, &a);
    lemma_suites(&mut rep, &a, secs("lemmas"));
    estimate_trials(&mut rep, &a);
    nondegeneracy(&mut rep, &a);
    certifier(&mut rep);
    regularity(&mut rep, &a, secs("regularity"));
    sign_thresholds(&mut rep, &a);
    determinism(&mut rep, &a, &b);
    println!("acceptance: {} of 9 criteria passed", 9 - rep.failed);
    if rep.failed > 0 {
        std::process::exit(1);
    }
}
