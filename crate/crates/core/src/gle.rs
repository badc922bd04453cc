//! Generalized Lane-Emden systems
//!
//! ```text
//! −𝓛_i u_i = λ_i ρ_i S_{α_i}(u_{i+1}),   S_α(t) = |t|^{α−1} t,   i = 1..m (cyclic),
//! ```
//!
//! with `Π α_i = 1`. Their principal eigenvalues form the hypersurface
//! `{Λ > 0 : H(Λ) = λ*}`, `H(Λ) = λ_1 λ_2^{α_1} ⋯ λ_m^{α_1⋯α_{m−1}}`, and the weak (equivalently
//! strong) maximum principle holds exactly for `Λ ≥ 0` strictly below that surface.

use std::io::Write;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::operators::{
    assemble, check_smp_conditions, solve_dirichlet, write_columns_csv, DiscreteOperator, EllipticOperator,
    GridFunction, ScalarField,
};
use crate::round15;
use crate::scalar::Real;

/// Sweep cap of [`principal_lambda_star`] (raised tenfold for extreme exponents).
pub const MAX_SWEEPS: usize = 50_000;

/// Blow-up / collapse thresholds for a component norm before renormalization.
const BLOW_UP: f64 = 1e300;
const COLLAPSE: f64 = 1e-300;

/// Relative tolerance of [`classify`].
pub const SURFACE_TOL: f64 = 1e-9;

/// An exponent vector `α ∈ (0,∞)^m` with `Π α_i = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Exponents<T>(Vec<T>);

impl<T: Real> Exponents<T> {
    pub fn new(alpha: Vec<T>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::InvalidSystem("exponent vector is empty".into()));
        }
        if let Some(a) = alpha.iter().find(|a| !(a.is_finite() && **a > T::zero())) {
            return Err(Error::InvalidSystem(format!("exponents must be positive and finite, got {a}")));
        }
        let prod = alpha.iter().fold(T::one(), |p, &a| p * a);
        if (prod - T::one()).abs() > T::tol(1e-12) {
            return Err(Error::InvalidSystem(format!("product of exponents is {prod}, expected 1")));
        }
        Ok(Self(alpha))
    }

    /// `(1, …, 1)` of length `m`.
    pub fn linear(m: usize) -> Self {
        Self(vec![T::one(); m.max(1)])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    /// `P_j = Π_{i≤j} α_i` for `j = 1..m` (so `P_m = 1`).
    pub fn prefix_products(&self) -> Vec<T> {
        self.0
            .iter()
            .scan(T::one(), |p, &a| {
                *p = *p * a;
                Some(*p)
            })
            .collect()
    }

    /// `Σ_j Π_{i≤j} α_i`, the homogeneity degree of `H`.
    pub fn degree_sum(&self) -> T {
        self.prefix_products().into_iter().sum()
    }

    /// True when some `α_i < 0.05` or `α_i > 20`.
    pub fn is_extreme(&self) -> bool {
        self.0.iter().any(|&a| a < T::lit(0.05) || a > T::lit(20.0))
    }

    /// `(α_2, …, α_m, α_1)`.
    pub fn rotated(&self) -> Self {
        let mut v = self.0.clone();
        v.rotate_left(1);
        Self(v)
    }
}

/// `H(Λ) = λ_1 λ_2^{α_1} ⋯ λ_m^{α_1⋯α_{m−1}}`.
pub fn h_value<T: Real>(lambda: &[T], alpha: &Exponents<T>) -> Result<T> {
    if lambda.len() != alpha.len() {
        return Err(Error::Mismatch(format!("{} eigenvalues for {} exponents", lambda.len(), alpha.len())));
    }
    if let Some(l) = lambda.iter().find(|l| !(**l > T::zero())) {
        return Err(Error::InvalidSystem(format!("H needs positive entries, got {l}")));
    }
    let mut p = T::one();
    let mut h = T::one();
    for (&l, &a) in lambda.iter().zip(alpha.as_slice()) {
        h = h * l.powf(p);
        p = p * a;
    }
    Ok(h)
}

pub fn degree_sum<T: Real>(alpha: &Exponents<T>) -> T {
    alpha.degree_sum()
}

/// The scale `θ` with `H(θ·(1, σ)) = λ*`.
pub fn theta_star<T: Real>(sigma: &[T], lambda_star: T, alpha: &Exponents<T>) -> Result<T> {
    if sigma.len() + 1 != alpha.len() {
        return Err(Error::Mismatch(format!("direction has {} entries, expected {}", sigma.len(), alpha.len() - 1)));
    }
    if !(lambda_star > T::zero()) || sigma.iter().any(|s| !(*s > T::zero())) {
        return Err(Error::InvalidSystem("θ* needs a positive direction and λ*".into()));
    }
    let p = alpha.prefix_products();
    let denom = sigma.iter().zip(&p).fold(T::one(), |acc, (&s, &pj)| acc * s.powf(pj));
    Ok((lambda_star / denom).powf(alpha.degree_sum().recip()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceSide {
    BelowSurface,
    OnSurface,
    AboveSurface,
}

/// Position of a positive `Λ` relative to the principal hypersurface; ties go to `OnSurface`.
pub fn classify<T: Real>(lambda: &[T], lambda_star: T, alpha: &Exponents<T>) -> Result<SurfaceSide> {
    let h = h_value(lambda, alpha)?;
    let tol = T::tol(SURFACE_TOL) * h.abs().max(lambda_star.abs());
    Ok(if (h - lambda_star).abs() <= tol {
        SurfaceSide::OnSurface
    } else if h < lambda_star {
        SurfaceSide::BelowSurface
    } else {
        SurfaceSide::AboveSurface
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct MaximumPrinciple {
    pub wmp: bool,
    pub smp: bool,
    /// `None` when some component is zero or negative, so `H` is not evaluated.
    pub side: Option<SurfaceSide>,
}

/// Whether the maximum principle holds for `Λ`: all `λ_i ≥ 0` and either some `λ_i = 0` or
/// `Λ` lies strictly below the surface. The weak and strong forms agree.
pub fn wmp_verdict<T: Real>(lambda: &[T], lambda_star: T, alpha: &Exponents<T>) -> Result<MaximumPrinciple> {
    if lambda.len() != alpha.len() {
        return Err(Error::Mismatch(format!("{} eigenvalues for {} exponents", lambda.len(), alpha.len())));
    }
    let holds = |v: bool, side| MaximumPrinciple { wmp: v, smp: v, side };
    if lambda.iter().any(|&l| l < T::zero() || l.is_nan()) {
        return Ok(holds(false, None));
    }
    if lambda.iter().any(|&l| l == T::zero()) {
        return Ok(holds(true, None));
    }
    let side = classify(lambda, lambda_star, alpha)?;
    Ok(holds(side == SurfaceSide::BelowSurface, Some(side)))
}

/// `S_α(t) = |t|^{α−1} t`, written so that `S_α(0) = 0` for every `α > 0`.
#[inline]
fn s_alpha<T: Real>(t: T, alpha: T) -> T {
    if t == T::zero() {
        T::zero()
    } else {
        t.signum() * t.abs().powf(alpha)
    }
}

/// A GLE system: operators `𝓛_i`, positive weights `ρ_i`, exponents `α` and the integrability
/// exponent `p` of the weights (`∞` for bounded weights).
#[derive(Debug, Clone)]
pub struct GleSystem<T> {
    operators: Vec<EllipticOperator<T>>,
    weights: Vec<ScalarField<T>>,
    alpha: Exponents<T>,
    p: T,
}

impl<T: Real> GleSystem<T> {
    pub fn new(
        operators: Vec<EllipticOperator<T>>,
        weights: Vec<ScalarField<T>>,
        alpha: Exponents<T>,
        p: T,
    ) -> Result<Self> {
        let m = alpha.len();
        if m < 2 {
            return Err(Error::InvalidSystem(format!("a system needs m ≥ 2 equations, got {m}")));
        }
        if operators.len() != m || weights.len() != m {
            return Err(Error::Mismatch(format!(
                "{} operators and {} weights for {m} exponents",
                operators.len(),
                weights.len()
            )));
        }
        let dim = operators[0].dim();
        if operators.iter().any(|op| op.dim() != dim) {
            return Err(Error::Mismatch("operators act in different dimensions".into()));
        }
        if !(p > T::zero()) {
            return Err(Error::InvalidSystem(format!("integrability exponent must be positive, got {p}")));
        }
        for w in &weights {
            if let Some(c) = w.as_constant() {
                if !(c > T::zero()) {
                    return Err(Error::InvalidSystem(format!("weights must be positive, got {c}")));
                }
            }
        }
        Ok(Self { operators, weights, alpha, p })
    }

    /// A single scalar equation, for the bound evaluators only (`m = 1` is not a system).
    pub(crate) fn single(op: EllipticOperator<T>, weight: ScalarField<T>, p: T) -> Self {
        Self { operators: vec![op], weights: vec![weight], alpha: Exponents::linear(1), p }
    }

    /// `𝓛_i = Δ` and `ρ_i = 1` for every equation.
    pub fn laplacian(dim: usize, alpha: Exponents<T>) -> Result<Self> {
        let m = alpha.len();
        Self::new(
            vec![EllipticOperator::laplacian(dim); m],
            vec![ScalarField::constant(T::one()); m],
            alpha,
            T::infinity(),
        )
    }

    pub fn m(&self) -> usize {
        self.alpha.len()
    }

    pub fn dim(&self) -> usize {
        self.operators[0].dim()
    }

    pub fn operators(&self) -> &[EllipticOperator<T>] {
        &self.operators
    }

    pub fn weights(&self) -> &[ScalarField<T>] {
        &self.weights
    }

    pub fn alpha(&self) -> &Exponents<T> {
        &self.alpha
    }

    pub fn p(&self) -> T {
        self.p
    }

    /// Replaces weight `i`.
    pub fn with_weight(mut self, i: usize, w: ScalarField<T>) -> Self {
        self.weights[i] = w;
        self
    }

    /// The same system with equation `i + 1` relabelled as equation `i`.
    ///
    /// Its principal surface parameter is `λ*^{1/α_1}`: the rotated `H` is the original one
    /// raised to the power `α_2⋯α_m = 1/α_1`.
    pub fn rotated(&self) -> Self {
        let mut operators = self.operators.clone();
        let mut weights = self.weights.clone();
        operators.rotate_left(1);
        weights.rotate_left(1);
        Self { operators, weights, alpha: self.alpha.rotated(), p: self.p }
    }

    /// Assembles every `−𝓛_i` and samples every `ρ_i` on the grid of `d`.
    pub fn discretize(&self, d: &Domain<T>) -> Result<DiscreteSystem<T>> {
        if d.dim() != self.dim() {
            return Err(Error::Mismatch(format!(
                "system in dimension {} on a domain of dimension {}",
                self.dim(),
                d.dim()
            )));
        }
        let ops = self.operators.iter().map(|op| assemble(op, d)).collect::<Result<Vec<_>>>()?;
        let grid = ops[0].grid().clone();
        let weights =
            self.weights.iter().map(|w| GridFunction::from_field(grid.clone(), w)).collect::<Result<Vec<_>>>()?;
        DiscreteSystem::new(ops, weights, self.alpha.clone())
    }
}

/// Assembled operators and sampled weights on one grid.
#[derive(Debug, Clone)]
pub struct DiscreteSystem<T> {
    ops: Vec<DiscreteOperator<T>>,
    weights: Vec<GridFunction<T>>,
    alpha: Exponents<T>,
}

#[derive(Debug, Clone)]
pub struct GleOptions<T> {
    /// Sweep tolerance on the `L^∞` change of the normalized components.
    pub tol: f64,
    /// Sweep cap; `None` means [`MAX_SWEEPS`], times ten for extreme exponents.
    pub max_sweeps: Option<usize>,
    /// Starting components (default `u ≡ 1`).
    pub initial: Option<Vec<GridFunction<T>>>,
}

impl<T> Default for GleOptions<T> {
    fn default() -> Self {
        Self { tol: 1e-9, max_sweeps: None, initial: None }
    }
}

/// Principal eigenpair of a GLE system.
#[derive(Debug, Clone)]
pub struct EigenResult<T> {
    pub lambda_star: T,
    /// `Λ_0 = θ*(σ)·(1, σ)` for the direction matching the returned eigenfunctions.
    pub lambdas: Vec<T>,
    /// Components with unit `L²` norm.
    pub components: Vec<GridFunction<T>>,
    pub sweeps: usize,
    /// Last `L^∞` change of the normalized components.
    pub change: T,
    /// `‖−𝓛_iφ_i − λ_iρ_iS_{α_i}(φ_{i+1})‖_{L²}` per equation.
    pub residuals: Vec<T>,
    pub alpha: Exponents<T>,
    /// Per operator: whether both sufficient scalar SMP conditions hold.
    pub smp_conditions: Vec<bool>,
    pub flags: Vec<String>,
}

impl<T: Real> EigenResult<T> {
    pub fn theta(&self) -> T {
        self.lambdas[0]
    }

    /// `σ_j = λ_{j+1} / λ_1`.
    pub fn direction(&self) -> Vec<T> {
        self.lambdas[1..].iter().map(|&l| l / self.lambdas[0]).collect()
    }

    pub fn to_json(&self) -> Value {
        let f = |x: T| round15(x.f64());
        let v = |xs: &[T]| xs.iter().map(|&x| f(x)).collect::<Vec<_>>();
        json!({
            "lambda_star": f(self.lambda_star),
            "lambdas": v(&self.lambdas),
            "theta": f(self.theta()),
            "direction": v(&self.direction()),
            "alpha": v(self.alpha.as_slice()),
            "iterations": self.sweeps,
            "change": f(self.change),
            "residuals": v(&self.residuals),
            "smp_conditions": self.smp_conditions,
            "flags": self.flags,
        })
    }

    /// Coordinates followed by `phi1..phim`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let names: Vec<String> = (1..=self.components.len()).map(|i| format!("phi{i}")).collect();
        let cols: Vec<(&str, &GridFunction<T>)> = names.iter().map(String::as_str).zip(&self.components).collect();
        write_columns_csv(&cols, out)
    }
}

impl<T: Real> DiscreteSystem<T> {
    pub fn new(ops: Vec<DiscreteOperator<T>>, weights: Vec<GridFunction<T>>, alpha: Exponents<T>) -> Result<Self> {
        let m = alpha.len();
        if ops.len() != m || weights.len() != m {
            return Err(Error::Mismatch(format!(
                "{} operators and {} weights for {m} exponents",
                ops.len(),
                weights.len()
            )));
        }
        let len = ops[0].grid().len();
        if ops.iter().any(|a| a.grid().len() != len) || weights.iter().any(|w| w.len() != len) {
            return Err(Error::Mismatch("operators and weights live on different grids".into()));
        }
        for (i, w) in weights.iter().enumerate() {
            if let Some(j) = w.values().iter().position(|&v| !(v > T::zero())) {
                return Err(Error::InvalidSystem(format!("weight {} is not positive at node {j}", i + 1)));
            }
        }
        Ok(Self { ops, weights, alpha })
    }

    pub fn operators(&self) -> &[DiscreteOperator<T>] {
        &self.ops
    }

    pub fn weights(&self) -> &[GridFunction<T>] {
        &self.weights
    }

    pub fn alpha(&self) -> &Exponents<T> {
        &self.alpha
    }

    fn rhs(&self, i: usize, lambda: T, u: &[GridFunction<T>]) -> GridFunction<T> {
        let next = &u[(i + 1) % u.len()];
        let a = self.alpha.as_slice()[i];
        let vals =
            self.weights[i].values().iter().zip(next.values()).map(|(&w, &v)| lambda * w * s_alpha(v, a)).collect();
        GridFunction::new(next.grid().clone(), vals).expect("lengths checked on construction")
    }

    /// `‖−𝓛_iu_i − λ_iρ_iS_{α_i}(u_{i+1})‖_{L²}` per equation.
    pub fn residual(&self, lambda: &[T], u: &[GridFunction<T>]) -> Result<Vec<T>> {
        let m = self.alpha.len();
        if lambda.len() != m || u.len() != m {
            return Err(Error::Mismatch(format!("expected {m} eigenvalues and components")));
        }
        if u.iter().any(|c| c.len() != self.weights[0].len()) {
            return Err(Error::Mismatch("component length differs from the grid".into()));
        }
        Ok((0..m)
            .map(|i| {
                let au = self.ops[i].apply(&u[i]);
                let f = self.rhs(i, lambda[i], u);
                let diff = au.values().iter().zip(f.values()).map(|(&x, &y)| x - y).collect();
                GridFunction::new(au.grid().clone(), diff).expect("same grid").l2_norm()
            })
            .collect())
    }

    /// Backward Gauss-Seidel power iteration `u_i ← solve(−𝓛_i, ρ_iS_{α_i}(u_{i+1}))`,
    /// `i = m, …, 1`, renormalizing each component to unit `L²`.
    ///
    /// At the fixed point `−𝓛_iφ_i = t_i^{-1}ρ_iS_{α_i}(φ_{i+1})`, where `t_i` is the norm before
    /// normalization, so `Λ = (1/t_1, …, 1/t_m)` lies on the surface and `λ* = H(Λ)`.
    pub fn solve(&self, opts: &GleOptions<T>) -> Result<EigenResult<T>> {
        let m = self.alpha.len();
        let grid = self.ops[0].grid().clone();
        let mut flags = Vec::new();
        let extreme = self.alpha.is_extreme();
        if extreme {
            flags.push("extreme_exponent".to_string());
        }
        let cap = opts.max_sweeps.unwrap_or(if extreme { 10 * MAX_SWEEPS } else { MAX_SWEEPS });
        let tol = T::tol(opts.tol);
        let neg_tol = T::epsilon() * T::lit(64.0);

        let mut u: Vec<GridFunction<T>> = match &opts.initial {
            Some(init) => {
                if init.len() != m || init.iter().any(|c| c.len() != grid.len()) {
                    return Err(Error::Mismatch("initial components do not match the system".into()));
                }
                init.clone()
            }
            None => vec![GridFunction::constant(grid.clone(), T::one()); m],
        };
        for (i, c) in u.iter_mut().enumerate() {
            let n = c.l2_norm();
            if !(n > T::zero()) || !n.is_finite() {
                return Err(Error::Degenerate { component: i + 1, norm: n.f64() });
            }
            *c = c.scaled(n.recip());
        }

        let mut t = vec![T::one(); m];
        let mut change = T::infinity();
        for sweep in 1..=cap {
            change = T::zero();
            for i in (0..m).rev() {
                let f = self.rhs(i, T::one(), &u);
                let y = solve_dirichlet(&self.ops[i], &f)?;
                let scale = y.linf_norm();
                if let Some((node, &v)) = y.values().iter().enumerate().find(|(_, &v)| v < -neg_tol * scale) {
                    return Err(Error::NegativeComponent { component: i + 1, node, value: v.f64() });
                }
                let norm = y.l2_norm();
                if !(norm.f64() > COLLAPSE && norm.f64() < BLOW_UP) {
                    return Err(Error::Degenerate { component: i + 1, norm: norm.f64() });
                }
                let next = y.scaled(norm.recip());
                let d = next.values().iter().zip(u[i].values()).map(|(&a, &b)| (a - b).abs()).fold(T::zero(), T::max);
                change = change.max(d);
                u[i] = next;
                t[i] = norm;
            }
            if change < tol {
                let lambdas: Vec<T> = t.iter().map(|&ti| ti.recip()).collect();
                let lambda_star = h_value(&lambdas, &self.alpha)?;
                let residuals = self.residual(&lambdas, &u)?;
                return Ok(EigenResult {
                    lambda_star,
                    lambdas,
                    components: u,
                    sweeps: sweep,
                    change,
                    residuals,
                    alpha: self.alpha.clone(),
                    smp_conditions: Vec::new(),
                    flags,
                });
            }
        }
        Err(Error::NoConvergence { iterations: cap, change: change.f64() })
    }
}

/// Principal surface parameter `λ*` and positive eigenfunctions of `sys` on `d`.
pub fn principal_lambda_star<T: Real>(sys: &GleSystem<T>, d: &Domain<T>) -> Result<EigenResult<T>> {
    principal_lambda_star_with(sys, d, &GleOptions::default())
}

pub fn principal_lambda_star_with<T: Real>(
    sys: &GleSystem<T>,
    d: &Domain<T>,
    opts: &GleOptions<T>,
) -> Result<EigenResult<T>> {
    let disc = sys.discretize(d)?;
    let smp =
        sys.operators().iter().map(|op| check_smp_conditions(op, d).map(|c| c.holds())).collect::<Result<Vec<_>>>()?;
    let mut res = disc.solve(opts)?;
    if smp.iter().any(|ok| !ok) {
        res.flags.push("smp_conditions_not_verified".to_string());
    }
    res.smp_conditions = smp;
    Ok(res)
}

/// Residual norms of `u` as a solution of the system on `d` with eigenvalues `Λ`.
pub fn residual<T: Real>(sys: &GleSystem<T>, d: &Domain<T>, lambda: &[T], u: &[GridFunction<T>]) -> Result<Vec<T>> {
    sys.discretize(d)?.residual(lambda, u)
}
