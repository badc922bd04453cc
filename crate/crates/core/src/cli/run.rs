use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};

use super::config::{Command, RunConfig};
use crate::bounds::{certificate_ratio, linf_lower, lp_lower, upper, BoundReport, Embedding, SystemConstants};
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::gle::{principal_lambda_star_with, wmp_verdict, EigenResult, GleOptions, GleSystem};
use crate::operators::{Grid, GridFunction};
use crate::polyharmonic::{navier_eigen, poly_bounds, poly_smp_verdict, NavierProblem};
use crate::{fmt_float, round15};

/// Samples per ray for the certificate check in `verify`.
const CERTIFICATE_SAMPLES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Done,
    Pass,
    Fail,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    pub artifacts: Vec<PathBuf>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Fail => 1,
            _ => 0,
        }
    }
}

/// Executes `cfg.command`, writing its artifacts into `out_dir`.
pub fn run(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome> {
    cfg.validate()?;
    fs::create_dir_all(out_dir)?;
    let mut art = Artifacts { dir: out_dir.to_path_buf(), written: Vec::new() };
    let status = match cfg.command {
        Command::Eigen => eigen(cfg, &mut art)?,
        Command::Navier => navier(cfg, &mut art)?,
        Command::Bounds => bounds(cfg, &mut art)?,
        Command::Verify => verify(cfg, &mut art)?,
        Command::Sweep => sweep(cfg, &mut art)?,
    };
    Ok(Outcome { status, artifacts: art.written })
}

struct Artifacts {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Artifacts {
    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        let file = File::create(&path)?;
        self.written.push(path);
        Ok(BufWriter::new(file))
    }

    fn json(&mut self, name: &str, value: &Value) -> Result<()> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Io(e.to_string()))?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}

fn domain_json(d: &Domain<f64>) -> Value {
    json!({
        "kind": d.kind_name(),
        "extents": d.extents().iter().map(|&x| round15(x)).collect::<Vec<_>>(),
        "dim": d.dim(),
        "resolution": d.resolution(),
        "measure": round15(d.measure()),
    })
}

fn gle_options(cfg: &RunConfig) -> GleOptions<f64> {
    GleOptions { tol: cfg.solver.tol, max_sweeps: cfg.solver.max_sweeps, initial: None }
}

fn skipped(e: &Error) -> Value {
    json!({ "skipped": e.code(), "reason": e.to_string() })
}

/// The bounded-weight bound for linear systems with `p = ∞`, the `L^p` bound otherwise.
fn lower_report(sys: &GleSystem<f64>, d: &Domain<f64>, emb: &Embedding) -> Result<BoundReport<f64>> {
    let linear = sys.alpha().as_slice().iter().all(|&a| a == 1.0);
    if linear && sys.p().is_infinite() {
        linf_lower(sys, d)
    } else {
        lp_lower(sys, d, emb)
    }
}

fn default_radius(d: &Domain<f64>) -> f64 {
    0.5 * d.inradius().min(1.0)
}

fn upper_report(cfg: &RunConfig, sys: &GleSystem<f64>, d: &Domain<f64>) -> Result<BoundReport<f64>> {
    let radius = cfg.bounds.radius.unwrap_or_else(|| default_radius(d));
    let eps0 = match cfg.bounds.eps0 {
        Some(e) => e,
        None => SystemConstants::compute(sys, d)?.weight_inf.iter().copied().fold(f64::INFINITY, f64::min),
    };
    upper(sys, d, radius, eps0)
}

fn report_or_skip(r: &Result<BoundReport<f64>>) -> Result<Value> {
    match r {
        Ok(rep) => Ok(rep.to_json()),
        Err(e @ Error::Hypothesis(_)) => Ok(skipped(e)),
        Err(e) => Err(e.clone()),
    }
}

fn eigen(cfg: &RunConfig, art: &mut Artifacts) -> Result<Status> {
    let d = cfg.domain()?;
    let res = principal_lambda_star_with(&cfg.system()?, &d, &gle_options(cfg))?;
    art.json("eigen.json", &json!({ "command": "eigen", "domain": domain_json(&d), "eigen": res.to_json() }))?;
    let mut w = art.create("eigenfunctions.csv")?;
    res.write_csv(&mut w)?;
    w.flush()?;
    Ok(Status::Done)
}

fn navier(cfg: &RunConfig, art: &mut Artifacts) -> Result<Status> {
    let d = cfg.domain()?;
    let prob = cfg.navier_problem()?;
    let e = navier_eigen(&prob)?;
    let mut report = json!({ "command": "navier", "domain": domain_json(&d), "navier": e.to_json() });
    if let (true, Some(radius)) = (d.is_ball(), cfg.bounds.radius) {
        let eps0 = match cfg.bounds.eps0 {
            Some(e) => e,
            None => weight_min(&prob)?,
        };
        report["sandwich"] = match poly_bounds(prob.order(), &d, prob.weight(), radius, eps0) {
            Ok(sw) => {
                let mut v = sw.to_json();
                v["contains_lambda1"] = json!(sw.contains(e.lambda));
                v
            }
            Err(err @ Error::Hypothesis(_)) => skipped(&err),
            Err(err) => return Err(err),
        };
    }
    if let Some(lambda) = cfg.navier.lambda {
        report["smp"] = poly_smp_verdict(&prob, lambda, &cfg.bounds.embedding())?.to_json();
    }
    art.json("navier.json", &report)?;
    let mut w = art.create("chain.csv")?;
    e.write_csv(&mut w)?;
    w.flush()?;
    Ok(Status::Done)
}

/// Smallest sampled value of the Navier weight.
fn weight_min(prob: &NavierProblem<f64>) -> Result<f64> {
    Ok(GridFunction::from_field(Grid::new(prob.domain()), prob.weight())?.min())
}

fn bounds(cfg: &RunConfig, art: &mut Artifacts) -> Result<Status> {
    let d = cfg.domain()?;
    let sys = cfg.system()?;
    let lower = lower_report(&sys, &d, &cfg.bounds.embedding());
    let up = upper_report(cfg, &sys, &d);
    art.json(
        "bounds.json",
        &json!({
            "command": "bounds",
            "domain": domain_json(&d),
            "lower": report_or_skip(&lower)?,
            "upper": report_or_skip(&up)?,
        }),
    )?;
    Ok(Status::Done)
}

struct Check {
    name: String,
    outcome: Option<bool>,
    detail: Value,
}

impl Check {
    fn to_json(&self) -> Value {
        let status = match self.outcome {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "SKIP",
        };
        let mut v = json!({ "name": self.name, "status": status });
        if let (Value::Object(dst), Value::Object(src)) = (&mut v, &self.detail) {
            dst.extend(src.clone());
        }
        v
    }
}

fn verify(cfg: &RunConfig, art: &mut Artifacts) -> Result<Status> {
    let d = cfg.domain()?;
    let sys = cfg.system()?;
    let res = principal_lambda_star_with(&sys, &d, &gle_options(cfg))?;
    let ls = res.lambda_star;
    let mut checks = Vec::new();

    let lower = lower_report(&sys, &d, &cfg.bounds.embedding());
    checks.push(match &lower {
        Ok(rep) => {
            let sum: f64 = res.lambdas.iter().sum();
            let a = rep.lower.map(|l| l <= ls);
            let b = rep.sum_lower.map(|l| l <= sum);
            let outcome = match (a, b) {
                (None, None) => None,
                (x, y) => Some(x.unwrap_or(true) && y.unwrap_or(true)),
            };
            Check {
                name: "lower_bound".into(),
                outcome,
                detail: json!({
                    "bound": rep.bound,
                    "lower": rep.lower.map(round15),
                    "sum_lower": rep.sum_lower.map(round15),
                    "lambda_star": round15(ls),
                    "lambda_sum": round15(sum),
                }),
            }
        }
        Err(e @ Error::Hypothesis(_)) => Check { name: "lower_bound".into(), outcome: None, detail: skipped(e) },
        Err(e) => return Err(e.clone()),
    });

    let up = upper_report(cfg, &sys, &d);
    match &up {
        Ok(rep) => {
            checks.push(Check {
                name: "upper_bound".into(),
                outcome: rep.upper.map(|u| ls <= u),
                detail: json!({ "upper": rep.upper.map(round15), "lambda_star": round15(ls) }),
            });
            checks.push(certificate_check(&sys, &d, rep)?);
        }
        Err(e @ Error::Hypothesis(_)) => {
            checks.push(Check { name: "upper_bound".into(), outcome: None, detail: skipped(e) });
            checks.push(Check { name: "certificate".into(), outcome: None, detail: skipped(e) });
        }
        Err(e) => return Err(e.clone()),
    }

    checks.push(wmp_check("wmp_below_surface", &res, 0.5, true)?);
    checks.push(wmp_check("wmp_above_surface", &res, 2.0, false)?);

    let probe = match &cfg.verify.probe {
        Some(p) => {
            let mp = wmp_verdict(p, ls, sys.alpha())?;
            json!({ "lambda": p.iter().map(|&x| round15(x)).collect::<Vec<_>>(), "wmp": mp.wmp, "smp": mp.smp, "side": mp.side })
        }
        None => Value::Null,
    };

    let pass = checks.iter().all(|c| c.outcome != Some(false));
    let status = if pass { "PASS" } else { "FAIL" };
    art.json(
        "verify.json",
        &json!({
            "command": "verify",
            "domain": domain_json(&d),
            "lambda_star": round15(ls),
            "lambdas": res.lambdas.iter().map(|&x| round15(x)).collect::<Vec<_>>(),
            "checks": checks.iter().map(Check::to_json).collect::<Vec<_>>(),
            "probe": probe,
            "status": status,
        }),
    )?;
    Ok(if pass { Status::Pass } else { Status::Fail })
}

/// `sup (−𝓛_iτ)/(ρ_iτ^{α_i}) ≤ A_i / R^{4α_i − 2}` for every equation.
fn certificate_check(sys: &GleSystem<f64>, d: &Domain<f64>, rep: &BoundReport<f64>) -> Result<Check> {
    let radius = rep.constant("R").expect("upper report records R");
    let center = d.center();
    let mut rows = Vec::new();
    let mut ok = true;
    for (i, (op, &a)) in sys.operators().iter().zip(sys.alpha().as_slice()).enumerate() {
        let ratio = certificate_ratio(op, a, &sys.weights()[i], radius, &center, CERTIFICATE_SAMPLES)?;
        let ai = rep.constant(&format!("A_{}", i + 1)).expect("upper report records A_i");
        let bound = ai / radius.powf(4.0 * a - 2.0);
        ok &= ratio <= bound;
        rows.push(json!({ "equation": i + 1, "ratio": round15(ratio), "bound": round15(bound) }));
    }
    Ok(Check { name: "certificate".into(), outcome: Some(ok), detail: json!({ "equations": rows }) })
}

fn wmp_check(name: &str, res: &EigenResult<f64>, scale: f64, expect: bool) -> Result<Check> {
    let probe: Vec<f64> = res.lambdas.iter().map(|&l| l * scale).collect();
    let mp = wmp_verdict(&probe, res.lambda_star, &res.alpha)?;
    Ok(Check {
        name: name.into(),
        outcome: Some(mp.wmp == expect && mp.smp == expect),
        detail: json!({ "scale": scale, "wmp": mp.wmp, "expected": expect }),
    })
}

struct SweepRow {
    measure: f64,
    lambda_star: f64,
    lower: Option<f64>,
    upper: Option<f64>,
}

fn sweep(cfg: &RunConfig, art: &mut Artifacts) -> Result<Status> {
    let base = cfg.domain()?;
    let sys = cfg.system()?;
    let emb = cfg.bounds.embedding();
    let opts = gle_options(cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.solver.threads)
        .build()
        .map_err(|e| Error::Io(format!("worker pool: {e}")))?;
    let point = |scale: f64| -> Result<SweepRow> {
        let d = base.scaled(scale)?;
        let res = principal_lambda_star_with(&sys, &d, &opts)?;
        let lower = match lower_report(&sys, &d, &emb) {
            Ok(r) => r.lower,
            Err(Error::Hypothesis(_)) => None,
            Err(e) => return Err(e),
        };
        let radius = cfg.bounds.radius.map_or_else(|| default_radius(&d), |r| r * scale);
        let eps0 = match cfg.bounds.eps0 {
            Some(e) => e,
            None => SystemConstants::compute(&sys, &d)?.weight_inf.iter().copied().fold(f64::INFINITY, f64::min),
        };
        let upper = match upper(&sys, &d, radius, eps0) {
            Ok(r) => r.upper,
            Err(Error::Hypothesis(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(SweepRow { measure: d.measure(), lambda_star: res.lambda_star, lower, upper })
    };
    let rows: Vec<SweepRow> = pool.install(|| cfg.sweep.scales.par_iter().map(|&s| point(s)).collect::<Result<_>>())?;

    let mut w = art.create("sweep.csv")?;
    writeln!(w, "measure,lambda_star,lower,upper")?;
    let opt = |x: Option<f64>| x.map(fmt_float).unwrap_or_default();
    for r in &rows {
        writeln!(w, "{},{},{},{}", fmt_float(r.measure), fmt_float(r.lambda_star), opt(r.lower), opt(r.upper))?;
    }
    w.flush()?;
    Ok(Status::Done)
}
