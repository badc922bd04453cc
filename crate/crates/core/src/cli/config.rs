//! TOML run configuration.
//!
//! ```toml
//! command = "eigen"
//!
//! [domain]
//! kind = "interval"        # interval | box | ball
//! extents = [1.0]          # length, side lengths, or radius
//! resolution = 256         # or one entry per axis for boxes
//!
//! [system]
//! m = 2
//! alpha = [2.0, 0.5]
//! weights = [1.0, "1 + x^2"]
//! operators = [{ preset = "laplacian" }]
//! ```

use serde::{Deserialize, Serialize};

use super::expr::Expr;
use crate::bounds::Embedding;
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::gle::{Exponents, GleSystem};
use crate::operators::{EllipticOperator, ScalarField};
use crate::polyharmonic::NavierProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Eigen,
    Navier,
    Bounds,
    Verify,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Eigen => "eigen",
            Command::Navier => "navier",
            Command::Bounds => "bounds",
            Command::Verify => "verify",
            Command::Sweep => "sweep",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "eigen" => Command::Eigen,
            "navier" => Command::Navier,
            "bounds" => Command::Bounds,
            "verify" => Command::Verify,
            "sweep" => Command::Sweep,
            other => return Err(Error::Config(format!("command: unknown command `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Resolution {
    Uniform(usize),
    PerAxis(Vec<usize>),
}

impl Resolution {
    fn as_vec(&self) -> Vec<usize> {
        match self {
            Resolution::Uniform(n) => vec![*n],
            Resolution::PerAxis(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub kind: String,
    pub extents: Vec<f64>,
    /// Required for balls; inferred for intervals and boxes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    pub resolution: Resolution,
}

impl DomainSpec {
    pub fn dim(&self) -> usize {
        self.dim.unwrap_or(match self.kind.as_str() {
            "box" => self.extents.len(),
            _ => 1,
        })
    }

    pub fn build(&self) -> Result<Domain<f64>> {
        Domain::from_parts(&self.kind, &self.extents, self.dim(), &self.resolution.as_vec())
    }
}

/// `𝓛u = a Δu + b·∇u + c u` with constant coefficients, or a named preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperatorSpec {
    Preset {
        preset: String,
    },
    Coefficients {
        #[serde(default = "one")]
        diffusion: f64,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        drift: Vec<f64>,
        #[serde(default)]
        potential: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl OperatorSpec {
    fn build(&self, dim: usize) -> Result<EllipticOperator<f64>> {
        match self {
            OperatorSpec::Preset { preset } if preset == "laplacian" => Ok(EllipticOperator::laplacian(dim)),
            OperatorSpec::Preset { preset } => Err(Error::Config(format!("unknown operator preset `{preset}`"))),
            OperatorSpec::Coefficients { diffusion, drift, potential } => {
                let b = if drift.is_empty() { vec![0.0; dim] } else { drift.clone() };
                if b.len() != dim {
                    return Err(Error::Config(format!("drift has {} entries, domain dimension is {dim}", b.len())));
                }
                if !(*diffusion > 0.0) {
                    return Err(Error::Config(format!("diffusion must be positive, got {diffusion}")));
                }
                Ok(EllipticOperator::isotropic(dim, *diffusion, b, *potential))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightSpec {
    Constant(f64),
    Expression(String),
}

impl WeightSpec {
    fn build(&self, dim: usize) -> Result<ScalarField<f64>> {
        match self {
            WeightSpec::Constant(c) => Ok(ScalarField::constant(*c)),
            WeightSpec::Expression(src) => Ok(Expr::parse(src, dim)?.to_field()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    #[serde(default = "two")]
    pub m: usize,
    /// Defaults to `(1, …, 1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    /// Integrability exponent of the weights; absent means bounded weights.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Empty means the Laplacian everywhere; a single entry is shared by every equation.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub operators: Vec<OperatorSpec>,
    /// Same sharing rule as `operators`; empty means `ρ_i ≡ 1`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub weights: Vec<WeightSpec>,
}

fn two() -> usize {
    2
}

impl Default for SystemSpec {
    fn default() -> Self {
        Self { m: 2, alpha: None, p: None, operators: Vec::new(), weights: Vec::new() }
    }
}

impl SystemSpec {
    pub fn exponents(&self) -> Result<Exponents<f64>> {
        match &self.alpha {
            None => Ok(Exponents::linear(self.m)),
            Some(a) => Exponents::new(a.clone()).map_err(|e| Error::Config(format!("system.alpha: {e}"))),
        }
    }

    pub fn p(&self) -> f64 {
        self.p.unwrap_or(f64::INFINITY)
    }

    fn pick<S>(list: &[S], i: usize) -> Option<&S> {
        match list.len() {
            0 => None,
            1 => list.first(),
            _ => list.get(i),
        }
    }

    pub fn operator(&self, i: usize, dim: usize) -> Result<EllipticOperator<f64>> {
        match Self::pick(&self.operators, i) {
            None => Ok(EllipticOperator::laplacian(dim)),
            Some(op) => op.build(dim).map_err(|e| field_error(&format!("system.operators[{i}]"), e)),
        }
    }

    pub fn weight(&self, i: usize, dim: usize) -> Result<ScalarField<f64>> {
        match Self::pick(&self.weights, i) {
            None => Ok(ScalarField::constant(1.0)),
            Some(w) => w.build(dim).map_err(|e| field_error(&format!("system.weights[{i}]"), e)),
        }
    }

    pub fn build(&self, dim: usize) -> Result<GleSystem<f64>> {
        let ops = (0..self.m).map(|i| self.operator(i, dim)).collect::<Result<Vec<_>>>()?;
        let ws = (0..self.m).map(|i| self.weight(i, dim)).collect::<Result<Vec<_>>>()?;
        GleSystem::new(ops, ws, self.exponents()?, self.p())
    }
}

fn field_error(field: &str, e: Error) -> Error {
    match e {
        Error::Expression { column, message } => Error::Expression { column, message: format!("{field}: {message}") },
        Error::Config(msg) => Error::Config(format!("{field}: {msg}")),
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_sweeps: Option<usize>,
    /// Worker threads for sweeps.
    #[serde(default = "default_threads")]
    pub threads: usize,
}

fn default_tol() -> f64 {
    1e-9
}

fn default_threads() -> usize {
    4
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self { tol: default_tol(), max_sweeps: None, threads: default_threads() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: String,
}

fn default_dir() -> String {
    "out".into()
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: default_dir() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    /// Radius of the inner ball for upper bounds (default `min(1, inradius)/2`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Weight floor for upper bounds (default: the smallest sampled weight).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cn: Option<f64>,
}

impl BoundsSpec {
    pub fn embedding(&self) -> Embedding {
        let d = Embedding::default();
        Embedding { c1: self.c1.unwrap_or(d.c1), c2: self.c2.unwrap_or(d.c2), cn: self.cn.or(d.cn) }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NavierSpec {
    /// `λ` for the maximum-principle verdict.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Factors applied to every domain extent.
    pub scales: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    /// Extra `Λ` to classify against the computed surface.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub domain: DomainSpec,
    #[serde(default)]
    pub system: SystemSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub bounds: BoundsSpec,
    #[serde(default)]
    pub navier: NavierSpec,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default)]
    pub verify: VerifySpec,
}

impl RunConfig {
    /// Parses and validates a configuration; TOML diagnostics keep their line and column.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let domain = self.domain.build().map_err(|e| Error::Config(format!("domain: {e}")))?;
        let dim = domain.dim();
        let sys = &self.system;
        if sys.m == 0 {
            return Err(Error::Config("system.m: must be at least 1".into()));
        }
        if let Some(a) = &sys.alpha {
            if a.len() != sys.m {
                return Err(Error::Config(format!("system.alpha: {} exponents for m = {}", a.len(), sys.m)));
            }
        }
        sys.exponents()?;
        for (what, len) in [("operators", sys.operators.len()), ("weights", sys.weights.len())] {
            if len > 1 && len != sys.m {
                return Err(Error::Config(format!("system.{what}: {len} entries for m = {}", sys.m)));
            }
        }
        for i in 0..sys.m {
            sys.operator(i, dim)?;
            sys.weight(i, dim)?;
        }
        if let Some(p) = sys.p {
            if !(p > dim as f64) {
                return Err(Error::Config(format!("system.p: need p > n = {dim}, got {p}")));
            }
        }
        if !(self.solver.tol > 0.0) {
            return Err(Error::Config(format!("solver.tol: must be positive, got {}", self.solver.tol)));
        }
        if self.solver.threads == 0 {
            return Err(Error::Config("solver.threads: must be at least 1".into()));
        }
        match self.command {
            Command::Eigen | Command::Bounds | Command::Verify | Command::Sweep if sys.m < 2 => {
                return Err(Error::Config(format!("system.m: `{}` needs m ≥ 2", self.command.name())));
            }
            Command::Sweep if self.sweep.scales.is_empty() => {
                return Err(Error::Config("sweep.scales: at least one scale is required".into()));
            }
            _ => {}
        }
        if let Some(s) = self.sweep.scales.iter().find(|s| !(**s > 0.0)) {
            return Err(Error::Config(format!("sweep.scales: scales must be positive, got {s}")));
        }
        if let Some(l) = self.navier.lambda {
            if !(l >= 0.0) {
                return Err(Error::Config(format!("navier.lambda: must be nonnegative, got {l}")));
            }
        }
        if let Some(p) = &self.verify.probe {
            if p.len() != sys.m {
                return Err(Error::Config(format!("verify.probe: {} entries for m = {}", p.len(), sys.m)));
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<Domain<f64>> {
        self.domain.build()
    }

    pub fn system(&self) -> Result<GleSystem<f64>> {
        self.system.build(self.domain.dim())
    }

    /// The Navier problem of order `system.m` with weight `system.weights[0]`.
    pub fn navier_problem(&self) -> Result<NavierProblem<f64>> {
        let dim = self.domain.dim();
        NavierProblem::new(self.system.m, self.domain()?, self.system.weight(0, dim)?, self.system.p())
    }

    /// Applies `--resolution`: every axis of the domain gets `n` cells.
    pub fn set_resolution(&mut self, n: usize) {
        self.domain.resolution = Resolution::Uniform(n);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
command = "sweep"

[domain]
kind = "ball"
extents = [1.0]
dim = 2
resolution = 64

[system]
m = 2
alpha = [2.0, 0.5]
p = 8.0
operators = [{ preset = "laplacian" }, { diffusion = 2.0, drift = [0.5, 0.0], potential = -1.0 }]
weights = [1, "1 + r^2"]

[solver]
tol = 1e-10
threads = 2

[bounds]
radius = 0.4
cn = 0.3

[sweep]
scales = [1.0, 0.5]
"#;

    #[test]
    fn full_config_round_trips() {
        let cfg = RunConfig::parse(FULL).unwrap();
        assert_eq!(cfg.system.weights[0], WeightSpec::Constant(1.0));
        let again = RunConfig::parse(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(again, cfg);
        let sys = cfg.system().unwrap();
        assert_eq!(sys.m(), 2);
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg =
            RunConfig::parse("command = \"eigen\"\n[domain]\nkind = \"interval\"\nextents = [1.0]\nresolution = 32\n")
                .unwrap();
        assert_eq!(cfg.system.m, 2);
        assert_eq!(cfg.solver.tol, 1e-9);
        assert_eq!(cfg.output.dir, "out");
        assert_eq!(RunConfig::parse(&cfg.to_toml().unwrap()).unwrap(), cfg);
    }

    #[test]
    fn exponent_product_checked_at_parse_time() {
        let text = FULL.replace("alpha = [2.0, 0.5]", "alpha = [2.0, 0.6]");
        match RunConfig::parse(&text) {
            Err(Error::Config(msg)) => assert!(msg.starts_with("system.alpha"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_errors_report_lines() {
        let text = "command = \"eigen\"\n[domain]\nkind = interval\n";
        match RunConfig::parse(text) {
            Err(Error::Config(msg)) => assert!(msg.contains("line 3"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_expression_reports_field_and_column() {
        let text = FULL.replace("\"1 + r^2\"", "\"1 + q\"");
        match RunConfig::parse(&text) {
            Err(Error::Expression { column, message }) => {
                assert_eq!(column, 5);
                assert!(message.starts_with("system.weights[1]"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_fields_and_commands_rejected() {
        assert!(RunConfig::parse(&FULL.replace("threads = 2", "threads = 2\nspeed = 1")).is_err());
        assert!(RunConfig::parse(&FULL.replace("\"sweep\"", "\"plot\"")).is_err());
        assert!(RunConfig::parse(&FULL.replace("scales = [1.0, 0.5]", "scales = []")).is_err());
    }
}
