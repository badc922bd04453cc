//! Domains (intervals, boxes, balls) and the dimensional constants built on them:
//! the unit-ball volume, the principal Dirichlet eigenvalue of the unit ball, and
//! the Faber-Krahn lower bound for the principal Dirichlet eigenvalue of `-Δ`.
//!
//! Intervals and boxes are anchored at the origin (`(0, L_1) × … × (0, L_n)`); balls
//! are centred at the origin and discretized through their radial reduction.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Coarsest admissible grid resolution per axis.
pub const MIN_RESOLUTION: usize = 8;

/// Largest dimension for which the Bessel-zero backend is trusted.
pub const MAX_SIGMA_DIM: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub enum DomainKind<T> {
    Interval { length: T },
    Box { sides: Vec<T> },
    Ball { radius: T },
}

/// A bounded region together with the resolution of its uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain<T> {
    kind: DomainKind<T>,
    dim: usize,
    resolution: Vec<usize>,
}

fn check_resolution(res: &[usize]) -> Result<()> {
    match res.iter().find(|&&r| r < MIN_RESOLUTION) {
        Some(&got) => Err(Error::ResolutionTooCoarse { got, min: MIN_RESOLUTION }),
        None => Ok(()),
    }
}

fn check_extent<T: Real>(what: &str, x: T) -> Result<()> {
    if x.is_finite() && x > T::zero() {
        Ok(())
    } else {
        Err(Error::InvalidDomain(format!("{what} must be positive and finite, got {x}")))
    }
}

impl<T: Real> Domain<T> {
    /// The interval `(0, length)` with `resolution` cells.
    pub fn interval(length: T, resolution: usize) -> Result<Self> {
        check_extent("interval length", length)?;
        check_resolution(&[resolution])?;
        Ok(Self { kind: DomainKind::Interval { length }, dim: 1, resolution: vec![resolution] })
    }

    /// The box `(0, L_1) × … × (0, L_n)` with `resolution[k]` cells along axis `k`.
    pub fn cuboid(sides: Vec<T>, resolution: Vec<usize>) -> Result<Self> {
        if sides.is_empty() {
            return Err(Error::InvalidDomain("box needs at least one side".into()));
        }
        if resolution.len() != sides.len() {
            return Err(Error::InvalidDomain(format!(
                "box has {} sides but {} resolutions",
                sides.len(),
                resolution.len()
            )));
        }
        for &s in &sides {
            check_extent("box side", s)?;
        }
        check_resolution(&resolution)?;
        Ok(Self { dim: sides.len(), kind: DomainKind::Box { sides }, resolution })
    }

    /// The ball of `radius` about the origin of `R^dim`, with `resolution` radial cells.
    pub fn ball(radius: T, dim: usize, resolution: usize) -> Result<Self> {
        check_extent("ball radius", radius)?;
        if dim == 0 {
            return Err(Error::UnsupportedDimension(0));
        }
        check_resolution(&[resolution])?;
        Ok(Self { kind: DomainKind::Ball { radius }, dim, resolution: vec![resolution] })
    }

    pub fn kind(&self) -> &DomainKind<T> {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn is_ball(&self) -> bool {
        matches!(self.kind, DomainKind::Ball { .. })
    }

    /// Lebesgue measure `|Ω|`.
    pub fn measure(&self) -> T {
        match &self.kind {
            DomainKind::Interval { length } => *length,
            DomainKind::Box { sides } => sides.iter().fold(T::one(), |acc, &s| acc * s),
            DomainKind::Ball { radius } => unit_ball_volume::<T>(self.dim) * radius.powi(self.dim as i32),
        }
    }

    /// Geometric centre; the inscribed ball of radius [`Domain::inradius`] is centred here.
    pub fn center(&self) -> Vec<T> {
        let half = T::lit(0.5);
        match &self.kind {
            DomainKind::Interval { length } => vec![*length * half],
            DomainKind::Box { sides } => sides.iter().map(|&s| s * half).collect(),
            DomainKind::Ball { .. } => vec![T::zero(); self.dim],
        }
    }

    /// Radius of the largest ball contained in the domain.
    pub fn inradius(&self) -> T {
        let half = T::lit(0.5);
        match &self.kind {
            DomainKind::Interval { length } => *length * half,
            DomainKind::Box { sides } => sides.iter().fold(T::infinity(), |acc, &s| acc.min(s * half)),
            DomainKind::Ball { radius } => *radius,
        }
    }

    /// Same shape and resolution with every extent multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        check_extent("scale factor", factor)?;
        let kind = match &self.kind {
            DomainKind::Interval { length } => DomainKind::Interval { length: *length * factor },
            DomainKind::Box { sides } => DomainKind::Box { sides: sides.iter().map(|&s| s * factor).collect() },
            DomainKind::Ball { radius } => DomainKind::Ball { radius: *radius * factor },
        };
        Ok(Self { kind, dim: self.dim, resolution: self.resolution.clone() })
    }

    /// Extents as listed in the text block: length, sides, or radius.
    pub fn extents(&self) -> Vec<T> {
        match &self.kind {
            DomainKind::Interval { length } => vec![*length],
            DomainKind::Box { sides } => sides.clone(),
            DomainKind::Ball { radius } => vec![*radius],
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            DomainKind::Interval { .. } => "interval",
            DomainKind::Box { .. } => "box",
            DomainKind::Ball { .. } => "ball",
        }
    }

    /// Builds a domain from its kind name, extents, dimension and resolution list.
    pub fn from_parts(kind: &str, extents: &[T], dim: usize, resolution: &[usize]) -> Result<Self> {
        let single = |what: &str| -> Result<(T, usize)> {
            match (extents, resolution) {
                ([e], [r]) => Ok((*e, *r)),
                _ => Err(Error::InvalidDomain(format!("{what} takes exactly one extent and one resolution"))),
            }
        };
        match kind {
            "interval" => {
                if dim != 1 {
                    return Err(Error::InvalidDomain(format!("interval must have dim 1, got {dim}")));
                }
                let (l, r) = single("interval")?;
                Self::interval(l, r)
            }
            "box" => {
                if extents.len() != dim {
                    return Err(Error::InvalidDomain(format!(
                        "box of dim {dim} needs {dim} extents, got {}",
                        extents.len()
                    )));
                }
                let res = if resolution.len() == 1 { vec![resolution[0]; dim] } else { resolution.to_vec() };
                Self::cuboid(extents.to_vec(), res)
            }
            "ball" => {
                let (s, r) = single("ball")?;
                Self::ball(s, dim, r)
            }
            other => Err(Error::InvalidDomain(format!("unknown domain kind `{other}`"))),
        }
    }

    /// Plain-text block (`key = value` lines) describing the domain.
    pub fn to_block(&self) -> String {
        let join = |xs: Vec<String>| xs.join(", ");
        let mut out = String::new();
        let _ = writeln!(out, "kind = {}", self.kind_name());
        let _ = writeln!(out, "extents = {}", join(self.extents().iter().map(|x| format!("{}", x.f64())).collect()));
        let _ = writeln!(out, "dim = {}", self.dim);
        let _ = writeln!(out, "resolution = {}", join(self.resolution.iter().map(|r| r.to_string()).collect()));
        out
    }

    /// Parses the block written by [`Domain::to_block`]. Blank lines and `#` comments are ignored.
    pub fn from_block(text: &str) -> Result<Self> {
        let mut kind = None;
        let mut extents = None;
        let mut dim = None;
        let mut resolution = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| Error::InvalidDomain(format!("line {}: {msg}", lineno + 1));
            let (key, value) =
                line.split_once('=').ok_or_else(|| bad(format!("expected `key = value`, got `{line}`")))?;
            let value = value.trim();
            let list = || value.split(',').map(str::trim).filter(|s| !s.is_empty());
            match key.trim() {
                "kind" => kind = Some(value.to_string()),
                "extents" => {
                    let xs: std::result::Result<Vec<f64>, _> = list().map(str::parse::<f64>).collect();
                    extents = Some(xs.map_err(|e| bad(format!("extents: {e}")))?);
                }
                "dim" => dim = Some(value.parse::<usize>().map_err(|e| bad(format!("dim: {e}")))?),
                "resolution" => {
                    let xs: std::result::Result<Vec<usize>, _> = list().map(str::parse::<usize>).collect();
                    resolution = Some(xs.map_err(|e| bad(format!("resolution: {e}")))?);
                }
                other => return Err(bad(format!("unknown key `{other}`"))),
            }
        }
        let missing = |k: &str| Error::InvalidDomain(format!("missing key `{k}`"));
        let kind = kind.ok_or_else(|| missing("kind"))?;
        let extents: Vec<T> = extents.ok_or_else(|| missing("extents"))?.into_iter().map(T::lit).collect();
        let resolution = resolution.ok_or_else(|| missing("resolution"))?;
        let dim = dim.unwrap_or(if kind == "box" { extents.len() } else { 1 });
        Self::from_parts(&kind, &extents, dim, &resolution)
    }
}

/// `|B_1| = π^{n/2} / Γ(n/2 + 1)`, evaluated through `V(n) = V(n-2)·2π/n`.
pub fn unit_ball_volume<T: Real>(n: usize) -> T {
    T::lit(unit_ball_volume_f64(n))
}

fn unit_ball_volume_f64(n: usize) -> f64 {
    use std::f64::consts::PI;
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume_f64(n - 2) * 2.0 * PI / n as f64,
    }
}

/// `Σ = λ_1(-Δ, B_1)`, the squared first positive zero of `J_{n/2-1}`.
pub fn sigma_constant<T: Real>(n: usize) -> Result<T> {
    sigma_f64(n).map(T::lit)
}

fn sigma_f64(n: usize) -> Result<f64> {
    use std::f64::consts::PI;
    match n {
        0 => Err(Error::UnsupportedDimension(0)),
        1 => Ok(PI * PI / 4.0),
        2 => Ok(J0_FIRST_ZERO * J0_FIRST_ZERO),
        3 => Ok(PI * PI),
        n if n <= MAX_SIGMA_DIM => {
            let z = bessel_first_zero(n as f64 / 2.0 - 1.0);
            Ok(z * z)
        }
        n => Err(Error::UnsupportedDimension(n)),
    }
}

const J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;

/// `J_ν(x)` without the positive prefactor `(x/2)^ν / Γ(ν+1)`; it has the same
/// positive zeros as `J_ν` for `ν > -1`.
pub(crate) fn bessel_reduced(nu: f64, x: f64) -> f64 {
    let q = -(x * x) / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..400 {
        let k = k as f64;
        term *= q / (k * (k + nu));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) && k > x {
            break;
        }
    }
    sum
}

/// First positive zero of `J_ν`, `ν > -1`: coarse scan for a sign change of the
/// ascending series, then bisection.
pub(crate) fn bessel_first_zero(nu: f64) -> f64 {
    let step = 0.25;
    let mut lo = step;
    let mut f_lo = bessel_reduced(nu, lo);
    let mut hi = lo + step;
    while bessel_reduced(nu, hi).signum() == f_lo.signum() {
        lo = hi;
        f_lo = bessel_reduced(nu, lo);
        hi += step;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if bessel_reduced(nu, mid).signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Faber-Krahn lower bound `Σ |B_1|^{2/n} |Ω|^{-2/n}` for `λ_1(-Δ, Ω)`.
pub fn faber_krahn_bound<T: Real>(n: usize, measure: T) -> Result<T> {
    if !(measure > T::zero()) {
        return Err(Error::InvalidDomain(format!("measure must be positive, got {measure}")));
    }
    let sigma = sigma_constant::<T>(n)?;
    let two_over_n = T::lit(2.0) / T::of(n);
    Ok(sigma * unit_ball_volume::<T>(n).powf(two_over_n) * measure.powf(-two_over_n))
}
