//! Explicit lower and upper bounds for `λ*`, the quartic test-function certificate behind
//! the upper bound, and the measure threshold `η₀` below which the maximum principle holds.
//!
//! Every hypothesis is evaluated with its two sides and a slack (positive when it holds), so
//! that a report can be audited without re-deriving any constant. Norms of weights and
//! coefficients are grid quadratures on the solver grid.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::geometry::{sigma_constant, unit_ball_volume, Domain};
use crate::gle::{h_value, GleSystem};
use crate::operators::{EllipticOperator, Grid, GridFunction, ScalarField};
use crate::round15;
use crate::scalar::Real;

/// Embedding constants used by the `L^p`-weight bound: `‖u‖_∞ ≤ C_1‖∇u‖₂` on intervals of
/// length at most one, the Moser-Trudinger constant `C_2` of the plane, and the squared sharp
/// Sobolev constant for `n ≥ 3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Embedding {
    pub c1: f64,
    pub c2: f64,
    /// Overrides [`sobolev_constant`] when set.
    pub cn: Option<f64>,
}

impl Default for Embedding {
    fn default() -> Self {
        Self { c1: 0.5, c2: 4.0, cn: None }
    }
}

impl Embedding {
    pub fn constant<T: Real>(&self, n: usize) -> Result<T> {
        match n {
            0 => Err(Error::UnsupportedDimension(0)),
            1 => Ok(T::lit(self.c1)),
            2 => Ok(T::lit(self.c2)),
            _ => match self.cn {
                Some(c) => Ok(T::lit(c)),
                None => sobolev_constant(n),
            },
        }
    }
}

/// `Γ(k/2)` by the recursion `Γ(x + 1) = xΓ(x)` from `Γ(1) = 1`, `Γ(1/2) = √π`.
fn gamma_half(k: usize) -> f64 {
    let (mut x, mut g) = if k.is_multiple_of(2) { (1.0, 1.0) } else { (0.5, std::f64::consts::PI.sqrt()) };
    while 2.0 * x < k as f64 {
        g *= x;
        x += 1.0;
    }
    g
}

/// `C_n = (π n (n−2))^{−1} (Γ(n)/Γ(n/2))^{2/n}`, the best constant in
/// `‖u‖²_{L^{2n/(n−2)}} ≤ C_n ‖∇u‖²_{L²}` on `R^n`, `n ≥ 3`.
pub fn sobolev_constant<T: Real>(n: usize) -> Result<T> {
    if n < 3 {
        return Err(Error::UnsupportedDimension(n));
    }
    let nf = n as f64;
    let ratio = gamma_half(2 * n) / gamma_half(n);
    Ok(T::lit(ratio.powf(2.0 / nf) / (std::f64::consts::PI * nf * (nf - 2.0))))
}

/// One hypothesis `lhs relation rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis<T> {
    pub name: String,
    pub relation: &'static str,
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
}

impl<T: Real> Hypothesis<T> {
    fn le(name: impl Into<String>, lhs: T, rhs: T) -> Self {
        Self { name: name.into(), relation: "<=", lhs, rhs, holds: lhs <= rhs }
    }

    fn lt(name: impl Into<String>, lhs: T, rhs: T) -> Self {
        Self { name: name.into(), relation: "<", lhs, rhs, holds: lhs < rhs }
    }

    fn gt(name: impl Into<String>, lhs: T, rhs: T) -> Self {
        Self { name: name.into(), relation: ">", lhs, rhs, holds: lhs > rhs }
    }

    /// Margin by which the hypothesis holds (negative when it fails).
    pub fn slack(&self) -> T {
        match self.relation {
            ">" => self.lhs - self.rhs,
            _ => self.rhs - self.lhs,
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "holds": self.holds,
            "lhs": round15(self.lhs.f64()),
            "relation": self.relation,
            "rhs": round15(self.rhs.f64()),
            "slack": round15(self.slack().f64()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundCase {
    /// Bounded weights, linear system.
    Linf,
    N1,
    N2,
    N3Plus,
    /// The upper bound, valid in every dimension.
    Any,
}

impl BoundCase {
    pub fn tag(self) -> &'static str {
        match self {
            BoundCase::Linf => "linf",
            BoundCase::N1 => "n=1",
            BoundCase::N2 => "n=2",
            BoundCase::N3Plus => "n>=3",
            BoundCase::Any => "any",
        }
    }

    fn of_dim(n: usize) -> Self {
        match n {
            1 => BoundCase::N1,
            2 => BoundCase::N2,
            _ => BoundCase::N3Plus,
        }
    }
}

/// Verdicts, slacks, constants and bound values of one bound evaluation. A bound value is
/// present only when every listed hypothesis holds.
#[derive(Debug, Clone)]
pub struct BoundReport<T> {
    pub bound: &'static str,
    pub case: BoundCase,
    pub hypotheses: Vec<Hypothesis<T>>,
    /// Lower bound for `λ*`.
    pub lower: Option<T>,
    /// Lower bound for `Σ λ_{0i}` over the whole principal surface (linear case).
    pub sum_lower: Option<T>,
    /// Upper bound for `λ*`.
    pub upper: Option<T>,
    pub constants: Vec<(String, T)>,
    /// Number of cyclic relabellings applied before evaluation.
    pub rotation: usize,
    pub flags: Vec<String>,
}

impl<T: Real> BoundReport<T> {
    fn new(bound: &'static str, case: BoundCase) -> Self {
        Self {
            bound,
            case,
            hypotheses: Vec::new(),
            lower: None,
            sum_lower: None,
            upper: None,
            constants: Vec::new(),
            rotation: 0,
            flags: Vec::new(),
        }
    }

    pub fn all_hold(&self) -> bool {
        self.hypotheses.iter().all(|h| h.holds)
    }

    pub fn hypothesis(&self, name: &str) -> Option<&Hypothesis<T>> {
        self.hypotheses.iter().find(|h| h.name == name)
    }

    pub fn constant(&self, name: &str) -> Option<T> {
        self.constants.iter().find(|(k, _)| k == name).map(|&(_, v)| v)
    }

    fn push_constant(&mut self, name: &str, v: T) {
        self.constants.push((name.to_string(), v));
    }

    pub fn to_json(&self) -> Value {
        let opt = |x: Option<T>| x.map(|v| round15(v.f64()));
        let mut consts = Map::new();
        for (k, v) in &self.constants {
            consts.insert(k.clone(), json!(round15(v.f64())));
        }
        json!({
            "bound": self.bound,
            "case": self.case.tag(),
            "lower": opt(self.lower),
            "sum_lower": opt(self.sum_lower),
            "upper": opt(self.upper),
            "rotation": self.rotation,
            "hypotheses": self.hypotheses.iter().map(Hypothesis::to_json).collect::<Vec<_>>(),
            "constants": consts,
            "flags": self.flags,
        })
    }
}

/// Constants of a system on a domain, with weights and coefficients sampled on its grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConstants<T> {
    pub n: usize,
    pub m: usize,
    pub measure: T,
    pub sigma: T,
    pub ball_volume: T,
    /// Common ellipticity bounds and coefficient bound over all operators.
    pub c0: T,
    pub big_c0: T,
    pub b0: T,
    /// `max_i ‖ρ_i‖_∞`.
    pub d: T,
    /// `max_i ‖bⁱ‖_∞`.
    pub big_m: T,
    /// `Σ_i |inf c_i|`.
    pub beta0: T,
    /// `max{1, ‖ρ_i‖_{L^p}}`.
    pub c_lp: T,
    /// `max_i (‖bⁱ‖_∞ + |inf c_i|)`.
    pub c: T,
    /// `min_i Π_{j≤i} α_j`.
    pub beta: T,
    pub c_tilde0: T,
    pub c_bar0: T,
    /// `(pα_1 + 1)/(p − 1)`.
    pub gamma: T,
    pub alpha1: T,
    pub p: T,
    pub drift: Vec<T>,
    pub potential_inf: Vec<T>,
    pub weight_sup: Vec<T>,
    pub weight_inf: Vec<T>,
    pub weight_lp: Vec<T>,
}

impl<T: Real> SystemConstants<T> {
    pub fn compute(sys: &GleSystem<T>, dom: &Domain<T>) -> Result<Self> {
        if dom.dim() != sys.dim() {
            return Err(Error::Mismatch(format!(
                "system in dimension {} on a domain of dimension {}",
                sys.dim(),
                dom.dim()
            )));
        }
        let n = dom.dim();
        let grid = Grid::new(dom);
        let p = sys.p();
        let weights =
            sys.weights().iter().map(|w| GridFunction::from_field(grid.clone(), w)).collect::<Result<Vec<_>>>()?;
        let weight_sup: Vec<T> = weights.iter().map(GridFunction::linf_norm).collect();
        let weight_inf: Vec<T> = weights.iter().map(GridFunction::min).collect();
        let weight_lp: Vec<T> =
            weights.iter().map(|w| if p.is_infinite() { w.linf_norm() } else { w.lq_norm(p) }).collect();
        let drift: Vec<T> = sys.operators().iter().map(|op| op.drift_sup(&grid)).collect();
        let potential_inf: Vec<T> = sys.operators().iter().map(|op| op.potential_inf(&grid)).collect();
        let bounds: Vec<_> = sys.operators().iter().map(EllipticOperator::bounds).collect();
        let c0 = bounds.iter().map(|b| b.c0).fold(T::infinity(), T::min);
        let big_c0 = bounds.iter().map(|b| b.big_c0).fold(T::zero(), T::max);
        let b0 = bounds.iter().map(|b| b.b0).fold(T::zero(), T::max);

        let c_lp = weight_lp.iter().copied().fold(T::one(), T::max);
        let c = drift.iter().zip(&potential_inf).map(|(&b, &ci)| b + ci.abs()).fold(T::zero(), T::max);
        let prefix = sys.alpha().prefix_products();
        let beta = prefix.iter().copied().fold(T::infinity(), T::min);
        let half_c0 = c0 * T::lit(0.5);
        let three_c = T::lit(3.0) * c_lp;
        let c_tilde0 =
            prefix.iter().map(|&pi| half_c0.powf(pi) / three_c.powf(pi - T::one())).fold(T::infinity(), T::min);
        let c_bar0 = prefix.iter().map(|&pi| c.powf(pi)).fold(T::zero(), T::max);
        let alpha1 = sys.alpha().as_slice()[0];
        let q = p.recip();
        let gamma = (alpha1 + q) / (T::one() - q);
        Ok(Self {
            n,
            m: sys.m(),
            measure: dom.measure(),
            sigma: sigma_constant(n)?,
            ball_volume: unit_ball_volume(n),
            c0,
            big_c0,
            b0,
            d: weight_sup.iter().copied().fold(T::zero(), T::max),
            big_m: drift.iter().copied().fold(T::zero(), T::max),
            beta0: potential_inf.iter().map(|c| c.abs()).sum(),
            c_lp,
            c,
            beta,
            c_tilde0,
            c_bar0,
            gamma,
            alpha1,
            p,
            drift,
            potential_inf,
            weight_sup,
            weight_inf,
            weight_lp,
        })
    }

    fn nn(&self) -> T {
        T::of(self.n)
    }

    /// `‖bⁱ‖^n_∞ V ≤ (c_0√Σ)^n |B_1|` for each operator.
    pub fn drift_smallness(&self, v: T) -> Vec<Hypothesis<T>> {
        let n = self.n as i32;
        let rhs = (self.c0 * self.sigma.sqrt()).powi(n) * self.ball_volume;
        self.drift
            .iter()
            .enumerate()
            .map(|(i, &b)| Hypothesis::le(format!("drift_smallness_{}", i + 1), b.powi(n) * v, rhs))
            .collect()
    }

    /// `c_0 Σ|B_1|^{2/n}V^{−2/n} − ‖bⁱ‖_∞√Σ|B_1|^{1/n}V^{−1/n} − inf c_i > 0` for each operator.
    pub fn principal_margin(&self, v: T) -> Vec<Hypothesis<T>> {
        self.drift
            .iter()
            .zip(&self.potential_inf)
            .enumerate()
            .map(|(i, (&b, &ci))| {
                let lhs = self.faber_krahn_terms(v, b) - ci;
                Hypothesis::gt(format!("principal_margin_{}", i + 1), lhs, T::zero())
            })
            .collect()
    }

    /// `c_0 Σ|B_1|^{2/n}V^{−2/n} − b √Σ|B_1|^{1/n}V^{−1/n}`.
    fn faber_krahn_terms(&self, v: T, b: T) -> T {
        let r = self.ball_volume / v;
        let nn = self.nn();
        self.c0 * self.sigma * r.powf(T::lit(2.0) / nn) - b * self.sigma.sqrt() * r.powf(nn.recip())
    }

    /// `M^n V ≤ (c_0√Σ/√m)^n |B_1|`.
    pub fn system_drift_smallness(&self, v: T) -> Hypothesis<T> {
        let n = self.n as i32;
        let rhs = (self.c0 * self.sigma.sqrt() / T::of(self.m).sqrt()).powi(n) * self.ball_volume;
        Hypothesis::le("system_drift_smallness", self.big_m.powi(n) * v, rhs)
    }

    /// `c_0 Σ|B_1|^{2/n}V^{−2/n} − M√m√Σ|B_1|^{1/n}V^{−1/n} − β_0`.
    pub fn linear_margin(&self, v: T) -> T {
        self.faber_krahn_terms(v, self.big_m * T::of(self.m).sqrt()) - self.beta0
    }

    /// Interpolation exponent `θ` of the `L^p`-weight bound.
    pub fn theta(&self) -> T {
        let q = self.p.recip();
        let a1 = self.alpha1;
        let two = T::lit(2.0);
        match self.n {
            1 => two * (T::one() - q) / (a1 + T::one()),
            2 => (two * a1 + T::one()).recip(),
            n => {
                let nn = T::of(n);
                nn * ((T::one() - q) / (a1 + T::one()) - (nn - two) / (two * nn))
            }
        }
    }

    /// `(p(α_1 − 1) + 2) / (2p(α_1 + 1))`.
    fn drift_exponent(&self) -> T {
        let q = self.p.recip();
        (self.alpha1 - T::one() + T::lit(2.0) * q) / (T::lit(2.0) * (self.alpha1 + T::one()))
    }

    /// `‖bⁱ‖_∞ V^{(p(α_1−1)+2)/(2p(α_1+1))} ≤ c_0/2` for each operator.
    pub fn weighted_drift(&self, v: T) -> Vec<Hypothesis<T>> {
        let e = self.drift_exponent();
        self.drift
            .iter()
            .enumerate()
            .map(|(i, &b)| Hypothesis::le(format!("weighted_drift_{}", i + 1), b * v.powf(e), self.c0 * T::lit(0.5)))
            .collect()
    }

    /// `V ≤ min{1, C_n^{n(θ−1)/(2θ)} Σ^{n/2} |B_1|}`.
    pub fn measure_cap(&self, v: T, cn: T) -> Hypothesis<T> {
        let th = self.theta();
        let nn = self.nn();
        let two = T::lit(2.0);
        let cap = cn.powf(nn * (th - T::one()) / (two * th)) * self.sigma.powf(nn / two) * self.ball_volume;
        Hypothesis::le("measure_cap", v, cap.min(T::one()))
    }

    /// Left side `G(V)` of the dimension-dependent condition `G > 2C`; `λ* ≥ G/(2C)` when it holds.
    pub fn interpolation_value(&self, v: T, cn: T) -> T {
        let th = self.theta();
        let b = self.beta;
        let tb = th * b;
        let two = T::lit(2.0);
        let lead = self.c_tilde0 * self.sigma.powf(tb) / cn.powf(b - tb);
        if self.n == 2 {
            lead * self.ball_volume.powf(tb) * v.powf(-b / (self.alpha1 + T::one()))
                - self.c_bar0 * v.powf(self.alpha1 * b / (two * (self.alpha1 + T::one())))
        } else {
            let nn = self.nn();
            lead * (self.ball_volume / v).powf(two * tb / nn) - self.c_bar0 * v.powf(b * self.drift_exponent())
        }
    }

    fn push_common(&self, rep: &mut BoundReport<T>) {
        for (k, v) in [
            ("n", T::of(self.n)),
            ("m", T::of(self.m)),
            ("measure", self.measure),
            ("Sigma", self.sigma),
            ("ball_volume", self.ball_volume),
            ("c0", self.c0),
            ("C0", self.big_c0),
            ("b0", self.b0),
            ("D", self.d),
            ("M", self.big_m),
            ("beta0", self.beta0),
        ] {
            rep.push_constant(k, v);
        }
    }
}

fn is_linear<T: Real>(sys: &GleSystem<T>) -> bool {
    sys.alpha().as_slice().iter().all(|&a| (a - T::one()).abs() <= T::tol(1e-12))
}

/// Lower bounds for bounded weights and a linear system: `Σ λ_{0i} ≥ F/D` over the principal
/// surface, and `λ* ≥ F/D` once `F > mD`, where `F` is [`SystemConstants::linear_margin`].
pub fn linf_lower<T: Real>(sys: &GleSystem<T>, d: &Domain<T>) -> Result<BoundReport<T>> {
    if !is_linear(sys) {
        return Err(Error::InvalidSystem("the bounded-weight lower bound needs α = (1, …, 1)".into()));
    }
    let k = SystemConstants::compute(sys, d)?;
    let v = k.measure;
    let mut rep = BoundReport::new("linf_lower", BoundCase::Linf);
    k.push_common(&mut rep);
    rep.hypotheses.push(k.system_drift_smallness(v));
    rep.hypotheses.extend(k.principal_margin(v));
    let f = k.linear_margin(v);
    let value = f / k.d;
    rep.push_constant("margin", f);
    if f <= T::zero() {
        rep.flags.push("vacuous".to_string());
    }
    if rep.all_hold() {
        rep.sum_lower = Some(value);
    }
    rep.hypotheses.push(Hypothesis::gt("lambda_star_margin", f, T::of(k.m) * k.d));
    if rep.all_hold() {
        rep.lower = Some(value);
    }
    Ok(rep)
}

/// Index of the first maximal exponent.
fn argmax_alpha<T: Real>(sys: &GleSystem<T>) -> usize {
    let a = sys.alpha().as_slice();
    (0..a.len()).fold(0, |best, i| if a[i] > a[best] { i } else { best })
}

fn rotate<T: Real>(sys: &GleSystem<T>, k: usize) -> GleSystem<T> {
    (0..k).fold(sys.clone(), |s, _| s.rotated())
}

/// Lower bound for `L^p` weights (`p > n`) and arbitrary exponents.
///
/// The system is first relabelled cyclically so that `α_1 = max α_i`; after `k` relabellings
/// the surface parameter becomes `λ*^{1/(α_1⋯α_k)}`, and the reported bound is mapped back.
pub fn lp_lower<T: Real>(sys: &GleSystem<T>, d: &Domain<T>, emb: &Embedding) -> Result<BoundReport<T>> {
    let n = d.dim();
    let p = sys.p();
    if !(p > T::of(n)) {
        return Err(Error::Hypothesis(format!("weights need p > n = {n}, got p = {p}")));
    }
    let k = argmax_alpha(sys);
    let back = sys.alpha().as_slice()[..k].iter().fold(T::one(), |acc, &a| acc * a);
    let rot = rotate(sys, k);
    let a1 = rot.alpha().as_slice()[0];
    if n >= 3 {
        let limit = T::of(n) / T::of(n - 2);
        if !(a1 < limit) {
            return Err(Error::Hypothesis(format!("exponents need max α < n/(n−2) = {limit}, got {a1}")));
        }
    }
    let kc = SystemConstants::compute(&rot, d)?;
    let theta = kc.theta();
    if !(theta > T::zero() && theta <= T::one()) {
        return Err(Error::Hypothesis(format!("interpolation exponent θ = {theta} outside (0, 1]")));
    }
    let cn = emb.constant::<T>(n)?;
    let v = kc.measure;
    let mut rep = BoundReport::new("lp_lower", BoundCase::of_dim(n));
    rep.rotation = k;
    kc.push_common(&mut rep);
    for (name, val) in [
        ("p", p),
        ("C", kc.c_lp),
        ("c", kc.c),
        ("beta", kc.beta),
        ("c_tilde0", kc.c_tilde0),
        ("c_bar0", kc.c_bar0),
        ("gamma", kc.gamma),
        ("theta", theta),
        ("Cn", cn),
        ("alpha1", a1),
    ] {
        rep.push_constant(name, val);
    }
    if n == 2 {
        rep.flags.push("moser_trudinger_constant_assumed".to_string());
    }
    if n >= 3 {
        let lo = (T::of(n - 2) / T::of(n)).powi(kc.m as i32 - 1);
        let hi = T::of(n) / T::of(n - 2);
        if sys.alpha().as_slice().iter().any(|&a| !(a > lo && a < hi)) {
            rep.flags.push("exponent_range_fails".to_string());
        }
    }
    rep.hypotheses.extend(kc.drift_smallness(v));
    rep.hypotheses.extend(kc.principal_margin(v));
    rep.hypotheses.extend(kc.weighted_drift(v));
    rep.hypotheses.push(kc.measure_cap(v, cn));
    let g = kc.interpolation_value(v, cn);
    rep.push_constant("interpolation_value", g);
    let two_c = T::lit(2.0) * kc.c_lp;
    rep.hypotheses.push(Hypothesis::gt("interpolation_margin", g, two_c));
    if rep.all_hold() {
        let rotated = g / two_c;
        rep.push_constant("rotated_lower", rotated);
        rep.lower = Some(rotated.powf(back));
    }
    Ok(rep)
}

/// `A_i` of the upper bound for exponent `α`, dimension `n`, ellipticity/coefficient bounds and
/// weight floor `ε_0`.
pub fn a_coefficient<T: Real>(alpha: T, n: usize, c0: T, big_c0: T, b0: T, eps0: T) -> T {
    let two = T::lit(2.0);
    let base = T::lit(4.0) * T::of(n) * big_c0 + T::lit(2.25) * b0;
    if alpha >= T::lit(0.5) {
        let e = two * alpha - T::one();
        two.powf(T::lit(4.0) * alpha - T::one()) / (eps0 * c0.powf(e)) * base * (base + two * c0).powf(e)
    } else {
        two.powf(T::lit(6.0) * alpha - two) / eps0 * base
    }
}

/// Upper bound `λ* ≤ E R^{−2 Σ_j Π_{i≤j} α_i}` from a ball of radius `R` about the domain centre.
///
/// Fails when `R ≥ 1`, when the closed ball is not inside the domain, or when some potential
/// is too large at the centre (`c_i(centre) R² ≥ 16 n c_0`).
pub fn upper<T: Real>(sys: &GleSystem<T>, d: &Domain<T>, radius: T, eps0: T) -> Result<BoundReport<T>> {
    let n = d.dim();
    if !(radius > T::zero() && radius < T::one()) {
        return Err(Error::Hypothesis(format!("radius must lie in (0, 1), got {radius}")));
    }
    if !(radius < d.inradius()) {
        return Err(Error::Hypothesis(format!(
            "closed ball of radius {radius} is not contained in the domain (inradius {})",
            d.inradius()
        )));
    }
    if !(eps0 > T::zero()) {
        return Err(Error::Hypothesis(format!("weight floor must be positive, got {eps0}")));
    }
    let k = SystemConstants::compute(sys, d)?;
    let center = d.center();
    let limit = T::lit(16.0) * T::of(n) * k.c0;
    let mut center_checks = Vec::new();
    for (i, op) in sys.operators().iter().enumerate() {
        let h =
            Hypothesis::lt(format!("center_potential_{}", i + 1), op.potential_at(&center) * radius * radius, limit);
        if !h.holds {
            return Err(Error::Hypothesis(format!(
                "potential of operator {} at the centre is too large: c R² = {} ≥ 16 n c0 = {}",
                i + 1,
                h.lhs,
                h.rhs
            )));
        }
        center_checks.push(h);
    }
    let v = k.measure;
    let mut rep = BoundReport::new("upper", BoundCase::Any);
    k.push_common(&mut rep);
    rep.push_constant("R", radius);
    rep.push_constant("eps0", eps0);
    rep.hypotheses.extend(k.drift_smallness(v));
    rep.hypotheses.extend(k.principal_margin(v));
    rep.hypotheses.extend(center_checks);
    for (i, &w) in k.weight_inf.iter().enumerate() {
        rep.hypotheses.push(Hypothesis::le(format!("weight_floor_{}", i + 1), eps0, w));
    }
    let a: Vec<T> = sys.alpha().as_slice().iter().map(|&al| a_coefficient(al, n, k.c0, k.big_c0, k.b0, eps0)).collect();
    for (i, &ai) in a.iter().enumerate() {
        rep.push_constant(&format!("A_{}", i + 1), ai);
    }
    let e = h_value(&a, sys.alpha())?;
    rep.push_constant("E", e);
    if rep.all_hold() {
        rep.upper = Some(e * radius.powf(-T::lit(2.0) * sys.alpha().degree_sum()));
    }
    Ok(rep)
}

/// Smallest number of samples per ray accepted by [`certificate_ratio`].
pub const MIN_CERTIFICATE_SAMPLES: usize = 64;

/// `sup (−𝓛τ)/(ρ τ^α)` over `B_r(centre)`, `r = R/2`, for `τ = (r² − |x|²)²/4`, sampled along
/// the coordinate axes and the diagonals with `samples` points per ray (boundary excluded).
pub fn certificate_ratio<T: Real>(
    op: &EllipticOperator<T>,
    alpha: T,
    rho: &ScalarField<T>,
    radius: T,
    center: &[T],
    samples: usize,
) -> Result<T> {
    if samples < MIN_CERTIFICATE_SAMPLES {
        return Err(Error::ResolutionTooCoarse { got: samples, min: MIN_CERTIFICATE_SAMPLES });
    }
    let n = op.dim();
    if center.len() != n {
        return Err(Error::Mismatch(format!("centre has {} coordinates, operator dimension {n}", center.len())));
    }
    let r = radius * T::lit(0.5);
    let mut dirs: Vec<Vec<T>> = Vec::new();
    for k in 0..n {
        for s in [T::one(), -T::one()] {
            let mut e = vec![T::zero(); n];
            e[k] = s;
            dirs.push(e);
        }
    }
    if (2..=8).contains(&n) {
        let norm = T::of(n).sqrt().recip();
        for mask in 0..(1usize << n) {
            dirs.push((0..n).map(|k| if mask >> k & 1 == 1 { -norm } else { norm }).collect());
        }
    }
    let mut sup = T::neg_infinity();
    let mut y = vec![T::zero(); n];
    for dir in &dirs {
        for j in 0..samples {
            let t = r * T::of(j) / T::of(samples);
            let x: Vec<T> = dir.iter().map(|&e| e * t).collect();
            for k in 0..n {
                y[k] = center[k] + x[k];
            }
            let s = r * r - t * t;
            let tau = s * s * T::lit(0.25);
            let a = op.diffusion_at(&y);
            let b = op.drift_at(&y);
            let c = op.potential_at(&y);
            let trace = (0..n).map(|k| a[k * n + k]).sum::<T>();
            let quad = (0..n).map(|k| (0..n).map(|l| a[k * n + l] * x[k] * x[l]).sum::<T>()).sum::<T>();
            let bx = b.iter().zip(&x).map(|(&bk, &xk)| bk * xk).sum::<T>();
            let minus_l_tau = s * trace - T::lit(2.0) * quad + s * bx - c * tau;
            sup = sup.max(minus_l_tau / (rho.eval(&y) * tau.powf(alpha)));
        }
    }
    Ok(sup)
}

/// Measure threshold for the maximum principle, with the hypothesis that binds at it.
#[derive(Debug, Clone, PartialEq)]
pub struct Eta0<T> {
    pub value: T,
    /// `"linear"` (bounded weights, sum criterion) or `"lp"` (interpolation criterion).
    pub criterion: &'static str,
    /// Hypotheses failing just above the threshold.
    pub binding: Vec<String>,
    pub measure: T,
    /// `|Ω| < η₀` for the given domain.
    pub admissible: bool,
}

impl<T: Real> Eta0<T> {
    pub fn to_json(&self) -> Value {
        json!({
            "eta0": round15(self.value.f64()),
            "criterion": self.criterion,
            "binding": self.binding,
            "measure": round15(self.measure.f64()),
            "admissible": self.admissible,
        })
    }
}

/// Hypotheses that must all hold, at measure `v`, for the maximum principle with `Λ`.
fn eta0_conditions<T: Real>(k: &SystemConstants<T>, lambda: &[T], lp: Option<(T, T)>, v: T) -> Vec<Hypothesis<T>> {
    let mut hs = Vec::new();
    match lp {
        None => {
            hs.push(k.system_drift_smallness(v));
            hs.extend(k.principal_margin(v));
            let need = k.d * lambda.iter().copied().sum::<T>();
            hs.push(Hypothesis::gt("sum_margin", k.linear_margin(v), need));
        }
        Some((cn, need)) => {
            hs.extend(k.drift_smallness(v));
            hs.extend(k.principal_margin(v));
            hs.extend(k.weighted_drift(v));
            hs.push(k.measure_cap(v, cn));
            hs.push(Hypothesis::gt("interpolation_margin", k.interpolation_value(v, cn), need));
        }
    }
    hs
}

/// Largest `η₀` such that the maximum principle for `Λ ∈ (0, ∞)^m` is guaranteed whenever
/// `|Ω| < η₀`, with every constant frozen at its value on `d`.
///
/// Linear systems use `F(|Ω|) > D Σ λ_i` together with the drift and margin hypotheses;
/// other systems require the interpolation value to exceed `2C max{1, H(Λ)^{1/P}}`, which
/// places `Λ` strictly below the surface through the `L^p`-weight lower bound (`P` undoes the
/// relabelling to `α_1 = max α_i`). The threshold is bracketed by doubling/halving and refined
/// by 60 bisection steps.
pub fn eta0<T: Real>(sys: &GleSystem<T>, d: &Domain<T>, lambda: &[T], emb: &Embedding) -> Result<Eta0<T>> {
    if lambda.len() != sys.m() {
        return Err(Error::Mismatch(format!("{} eigenvalues for a system of {} equations", lambda.len(), sys.m())));
    }
    if lambda.iter().any(|l| !(*l > T::zero())) {
        return Err(Error::InvalidSystem("η₀ needs Λ ∈ (0, ∞)^m".into()));
    }
    let (k, lp, criterion) = if is_linear(sys) {
        (SystemConstants::compute(sys, d)?, None, "linear")
    } else {
        let n = d.dim();
        if !(sys.p() > T::of(n)) {
            return Err(Error::Hypothesis(format!("weights need p > n = {n}, got p = {}", sys.p())));
        }
        let shift = argmax_alpha(sys);
        let back = sys.alpha().as_slice()[..shift].iter().fold(T::one(), |acc, &a| acc * a);
        let kc = SystemConstants::compute(&rotate(sys, shift), d)?;
        let h = h_value(lambda, sys.alpha())?;
        let need = T::lit(2.0) * kc.c_lp * h.powf(back.recip()).max(T::one());
        (kc, Some((emb.constant::<T>(n)?, need)), "lp")
    };
    let holds = |v: T| eta0_conditions(&k, lambda, lp, v).iter().all(|h| h.holds);

    let two = T::lit(2.0);
    let start = k.measure;
    let (mut lo, mut hi);
    if holds(start) {
        lo = start;
        hi = start * two;
        while holds(hi) {
            lo = hi;
            hi = hi * two;
            if !hi.is_finite() {
                return Err(Error::Hypothesis("maximum-principle condition holds for every measure".into()));
            }
        }
    } else {
        hi = start;
        lo = start / two;
        while !holds(lo) {
            hi = lo;
            lo = lo / two;
            if !(lo > T::zero()) {
                return Err(Error::Hypothesis("maximum-principle condition fails even as |Ω| → 0".into()));
            }
        }
    }
    for _ in 0..60 {
        let mid = (lo + hi) / two;
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let binding = eta0_conditions(&k, lambda, lp, hi).into_iter().filter(|h| !h.holds).map(|h| h.name).collect();
    Ok(Eta0 { value: lo, criterion, binding, measure: k.measure, admissible: k.measure < lo })
}
