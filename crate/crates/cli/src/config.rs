//! Experiment configuration files (TOML). Unknown keys are rejected.

use crate::error::{CliError, CliResult};
use mide_core::expr::Expr;
use mide_core::grid::Geometry;
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    /// Used when neither --out-dir nor the environment names a directory.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub experiment: Experiment,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    Lemmas(LemmasConfig),
    Estimates(EstimatesConfig),
    Conditions(ConditionsConfig),
    Solve(SolveConfig),
    Parabolic(ParabolicConfig),
    Isaacs(IsaacsConfig),
    Regularity(RegularityConfig),
}

/// Experiment kinds with one-line descriptions.
pub const KINDS: &[(&str, &str)] = &[
    ("lemmas", "randomized block-matrix inequality, convolution and trace-bound suites"),
    ("estimates", "concave, Levy-Ito and quadratic estimate trials plus sign thresholds"),
    ("conditions", "measure conditions of Levy kernels, cone masses and directional degeneracy"),
    ("solve", "stationary solve of a catalogue equation with optional projection checks"),
    ("parabolic", "explicit time marching of the fractional heat equation"),
    ("isaacs", "sup over diffusion coefficients with per-control comparison"),
    ("regularity", "moduli of continuity and predicted-regularity verdicts under refinement"),
];

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Lemmas(_) => "lemmas",
            Experiment::Estimates(_) => "estimates",
            Experiment::Conditions(_) => "conditions",
            Experiment::Solve(_) => "solve",
            Experiment::Parabolic(_) => "parabolic",
            Experiment::Isaacs(_) => "isaacs",
            Experiment::Regularity(_) => "regularity",
        }
    }
}

fn default_triples() -> u64 {
    1000
}
fn default_convolutions() -> u64 {
    500
}
fn default_closed_form() -> u64 {
    200
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmasConfig {
    #[serde(default = "default_triples")]
    pub triples: u64,
    #[serde(default = "default_convolutions")]
    pub convolutions: u64,
    #[serde(default = "default_closed_form")]
    pub closed_form: u64,
    #[serde(default = "default_triples")]
    pub trace_pairs: u64,
}

fn default_trials() -> u64 {
    100
}
fn default_n1() -> usize {
    256
}
fn default_n2() -> usize {
    32
}
fn default_sign_alphas() -> Vec<f64> {
    vec![0.25, 0.5, 0.75]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatesConfig {
    #[serde(default = "default_trials")]
    pub concave: u64,
    #[serde(default = "default_trials")]
    pub levy_ito: u64,
    #[serde(default = "default_trials")]
    pub quadratic: u64,
    /// Lattice sizes of the trial fields in one and two dimensions.
    #[serde(default = "default_n1")]
    pub n1: usize,
    #[serde(default = "default_n2")]
    pub n2: usize,
    #[serde(default = "default_sign_alphas")]
    pub sign_alphas: Vec<f64>,
}

fn default_cone_combos() -> u64 {
    20
}
fn yes() -> bool {
    true
}
fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionsConfig {
    #[serde(default)]
    pub kernels: Vec<KernelConfig>,
    #[serde(default = "default_cone_combos")]
    pub cone_combos: u64,
    #[serde(default = "yes")]
    pub directional_check: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KernelConfig {
    Fractional {
        dim: usize,
        beta: f64,
        #[serde(default)]
        expect: Option<bool>,
    },
    Directional {
        dim: usize,
        beta: f64,
        support: Vec<usize>,
        #[serde(default)]
        expect: Option<bool>,
    },
    XModulated {
        dim: usize,
        beta: f64,
        coefficient: String,
        #[serde(default = "one")]
        holder_gamma: f64,
        #[serde(default)]
        expect: Option<bool>,
    },
    Custom {
        dim: usize,
        beta: f64,
        density: String,
        #[serde(default = "yes")]
        symmetric: bool,
        #[serde(default)]
        expect: Option<bool>,
    },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub d1: usize,
    #[serde(default)]
    pub d2: usize,
    pub n: usize,
}

impl GridConfig {
    pub fn geometry(&self) -> CliResult<Geometry> {
        self.with_n(self.n)
    }

    pub fn with_n(&self, n: usize) -> CliResult<Geometry> {
        Geometry::new(self.d1, self.d2, n).map_err(|e| CliError::Config(format!("grid: {e}")))
    }
}

fn default_tol() -> f64 {
    1e-8
}
fn default_max_steps() -> usize {
    200_000
}
fn unit_string() -> String {
    "1".into()
}
fn zero_string() -> String {
    "0".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EquationConfig {
    ToyModel {
        beta: f64,
        forcing: String,
    },
    AdvectionFractional {
        beta: f64,
        drift: Vec<String>,
        #[serde(default)]
        c: f64,
        forcing: String,
    },
    ModelEquation {
        #[serde(default = "unit_string")]
        a: String,
        #[serde(default = "unit_string")]
        c: String,
        beta: f64,
        #[serde(default = "zero_string")]
        b: String,
        #[serde(default = "one")]
        k: f64,
        #[serde(default = "one")]
        r: f64,
        c0: f64,
        forcing: String,
    },
    FractionalHeat {
        beta: f64,
        #[serde(default)]
        forcing: Option<String>,
    },
}

/// Amplitude of u along a basis function, ⟨u, φ⟩/⟨φ, φ⟩, against a value.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectionCheck {
    pub basis: String,
    pub expected: f64,
    pub rel_tol: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub grid: GridConfig,
    pub equation: EquationConfig,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default = "yes")]
    pub fast_path: bool,
    #[serde(default)]
    pub check: Option<ProjectionCheck>,
    /// Extra lattice sizes over which the projection error must decrease.
    #[serde(default)]
    pub refine: Vec<usize>,
}

fn default_snapshots() -> usize {
    10
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParabolicConfig {
    pub grid: GridConfig,
    pub beta: f64,
    pub initial: String,
    #[serde(default)]
    pub forcing: Option<String>,
    pub t_final: f64,
    /// Defaults to 0.9 of the stability limit.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_snapshots")]
    pub snapshots: usize,
    /// Checks the decay of the initial profile, assumed to be a Fourier mode
    /// with wavevector norm `wavenumber`, against the exact multiplier.
    #[serde(default)]
    pub decay_check: Option<DecayCheck>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayCheck {
    pub wavenumber: f64,
    pub rel_tol: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsaacsConfig {
    pub grid: GridConfig,
    pub coefficients: Vec<f64>,
    pub c: f64,
    pub forcing: String,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularityConfig {
    pub cases: Vec<CaseConfig>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "case", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CaseConfig {
    ToyModel { beta: f64, n: usize },
    AdvectionFractional { beta: f64, b_exponent: f64, n: usize },
    DegenerateBlock { n: usize },
}

pub fn parse_expr(what: &str, source: &str) -> CliResult<Expr> {
    Expr::parse(source).map_err(|e| CliError::Config(format!("{what}: {e}")))
}

fn require(ok: bool, msg: impl FnOnce() -> String) -> CliResult<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(msg()))
    }
}

fn check_beta(beta: f64) -> CliResult<()> {
    require(beta > 0.0 && beta < 2.0, || format!("beta = {beta} outside (0, 2)"))
}

fn check_tol(tol: f64, max_steps: usize) -> CliResult<()> {
    require(tol > 0.0 && max_steps > 0, || format!("tol = {tol} and max_steps = {max_steps} must be positive"))
}

impl EquationConfig {
    fn validate(&self) -> CliResult<()> {
        match self {
            EquationConfig::ToyModel { beta, forcing } => {
                check_beta(*beta)?;
                parse_expr("forcing", forcing)?;
            }
            EquationConfig::AdvectionFractional { beta, drift, forcing, .. } => {
                check_beta(*beta)?;
                for (i, b) in drift.iter().enumerate() {
                    parse_expr(&format!("drift[{i}]"), b)?;
                }
                parse_expr("forcing", forcing)?;
            }
            EquationConfig::ModelEquation { a, c, beta, b, k, r, forcing, .. } => {
                check_beta(*beta)?;
                require(*k >= 0.0 && *r >= 0.0, || format!("k = {k}, r = {r} must be nonnegative"))?;
                for (what, s) in [("a", a), ("c", c), ("b", b), ("forcing", forcing)] {
                    parse_expr(what, s)?;
                }
            }
            EquationConfig::FractionalHeat { beta, forcing } => {
                check_beta(*beta)?;
                if let Some(f) = forcing {
                    parse_expr("forcing", f)?;
                }
            }
        }
        Ok(())
    }
}

impl KernelConfig {
    pub fn expect(&self) -> Option<bool> {
        match self {
            KernelConfig::Fractional { expect, .. }
            | KernelConfig::Directional { expect, .. }
            | KernelConfig::XModulated { expect, .. }
            | KernelConfig::Custom { expect, .. } => *expect,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<ExperimentConfig> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<(ExperimentConfig, String)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Ok((Self::from_toml(&text)?, text))
    }

    /// Range checks and expression parsing; everything a run needs before it
    /// writes anything.
    pub fn validate(&self) -> CliResult<()> {
        require(
            !self.name.is_empty() && self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_'),
            || format!("name '{}' must be nonempty and use only [A-Za-z0-9_-]", self.name),
        )?;
        match &self.experiment {
            Experiment::Lemmas(_) => {}
            Experiment::Estimates(e) => {
                require(e.n1 >= 16 && e.n2 >= 8, || "n1 >= 16 and n2 >= 8 required".into())?;
                for a in &e.sign_alphas {
                    require(*a > 0.0 && *a < 1.0, || format!("sign alpha {a} outside (0, 1)"))?;
                }
            }
            Experiment::Conditions(c) => {
                for k in &c.kernels {
                    crate::experiments::build_kernel(k)?;
                }
            }
            Experiment::Solve(s) => {
                s.grid.geometry()?;
                check_tol(s.tol, s.max_steps)?;
                s.equation.validate()?;
                crate::experiments::build_equation(&s.equation, s.grid.geometry()?)?;
                if let Some(c) = &s.check {
                    parse_expr("check.basis", &c.basis)?;
                    require(c.rel_tol > 0.0, || "check.rel_tol must be positive".into())?;
                }
                for n in &s.refine {
                    s.grid.with_n(*n)?;
                }
                require(s.refine.is_empty() || s.check.is_some(), || "refine needs a check".into())?;
            }
            Experiment::Parabolic(p) => {
                p.grid.geometry()?;
                check_beta(p.beta)?;
                parse_expr("initial", &p.initial)?;
                if let Some(f) = &p.forcing {
                    parse_expr("forcing", f)?;
                }
                require(p.t_final > 0.0, || "t_final must be positive".into())?;
                require(p.dt.map_or(true, |d| d > 0.0), || "dt must be positive".into())?;
                require(p.decay_check.is_none() || p.forcing.is_none(), || "decay_check needs an unforced equation".into())?;
            }
            Experiment::Isaacs(i) => {
                i.grid.geometry()?;
                check_tol(i.tol, i.max_steps)?;
                require(!i.coefficients.is_empty() && i.coefficients.iter().all(|a| *a >= 0.0), || {
                    "coefficients must be a nonempty list of nonnegative numbers".into()
                })?;
                require(i.c > 0.0, || "c must be positive".into())?;
                parse_expr("forcing", &i.forcing)?;
            }
            Experiment::Regularity(r) => {
                require(!r.cases.is_empty(), || "at least one case is required".into())?;
                require(r.tol > 0.0, || "tol must be positive".into())?;
                for c in &r.cases {
                    let (n, beta) = match c {
                        CaseConfig::ToyModel { beta, n } => (*n, Some(*beta)),
                        CaseConfig::AdvectionFractional { beta, b_exponent, n } => {
                            require(*b_exponent > 0.0 && *b_exponent <= 1.0, || {
                                format!("b_exponent = {b_exponent} outside (0, 1]")
                            })?;
                            (*n, Some(*beta))
                        }
                        CaseConfig::DegenerateBlock { n } => (*n, None),
                    };
                    require(n >= 8, || format!("case lattice n = {n} must be at least 8"))?;
                    if let Some(b) = beta {
                        check_beta(b)?;
                    }
                }
            }
        }
        Ok(())
    }
}
