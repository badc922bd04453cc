//! Nondivergence-form operators `𝓛 = a_{κl}∂_{κl} + b_l∂_l + c`, their monotone
//! discretization with homogeneous Dirichlet data, positivity-preserving solves,
//! scalar principal eigenpairs and the scalar strong-maximum-principle conditions.

mod assemble;
mod eigen;
mod grid;
pub mod sparse;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

pub use assemble::{assemble, solve_dirichlet, DiscreteOperator, MMatrixReport, StencilInfo};
pub use eigen::{scalar_principal_eigen, scalar_principal_eigen_with, EigenOptions, ScalarEigen};
pub use grid::{write_columns_csv, Grid, GridFunction, Layout};

use crate::error::Result;
use crate::geometry::{sigma_constant, unit_ball_volume, Domain};
use crate::scalar::Real;

type Func<T, R> = Arc<dyn Fn(&[T]) -> R + Send + Sync>;

/// A scalar coefficient or weight `x ↦ f(x)`.
#[derive(Clone)]
pub struct ScalarField<T> {
    f: Func<T, T>,
    constant: Option<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn new(f: impl Fn(&[T]) -> T + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f), constant: None }
    }

    pub fn constant(value: T) -> Self {
        Self { f: Arc::new(move |_| value), constant: Some(value) }
    }

    #[inline]
    pub fn eval(&self, x: &[T]) -> T {
        (self.f)(x)
    }

    pub fn as_constant(&self) -> Option<T> {
        self.constant
    }

    /// `t·f`.
    pub fn scaled(&self, t: T) -> Self {
        match self.constant {
            Some(c) => Self::constant(c * t),
            None => {
                let f = self.f.clone();
                Self::new(move |x| t * f(x))
            }
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for ScalarField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.constant {
            Some(c) => write!(f, "ScalarField({c:?})"),
            None => f.write_str("ScalarField(<fn>)"),
        }
    }
}

/// A vector- or matrix-valued coefficient (matrices row-major).
#[derive(Clone)]
pub struct VectorField<T> {
    f: Func<T, Vec<T>>,
    constant: Option<Vec<T>>,
}

impl<T: Real> VectorField<T> {
    pub fn new(f: impl Fn(&[T]) -> Vec<T> + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f), constant: None }
    }

    pub fn constant(value: Vec<T>) -> Self {
        let v = value.clone();
        Self { f: Arc::new(move |_| v.clone()), constant: Some(value) }
    }

    #[inline]
    pub fn eval(&self, x: &[T]) -> Vec<T> {
        (self.f)(x)
    }

    pub fn as_constant(&self) -> Option<&[T]> {
        self.constant.as_deref()
    }
}

impl<T: fmt::Debug> fmt::Debug for VectorField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.constant {
            Some(c) => write!(f, "VectorField({c:?})"),
            None => f.write_str("VectorField(<fn>)"),
        }
    }
}

/// Declared constants: `c0|ξ|² ≤ a(x)ξ·ξ ≤ C0|ξ|²` and `|b(x)|, |c(x)| ≤ b0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipticBounds<T> {
    pub c0: T,
    #[serde(rename = "C0")]
    pub big_c0: T,
    pub b0: T,
}

#[derive(Debug, Clone)]
pub struct EllipticOperator<T> {
    dim: usize,
    diffusion: VectorField<T>,
    drift: VectorField<T>,
    potential: ScalarField<T>,
    bounds: EllipticBounds<T>,
}

impl<T: Real> EllipticOperator<T> {
    pub fn new(
        dim: usize,
        diffusion: VectorField<T>,
        drift: VectorField<T>,
        potential: ScalarField<T>,
        bounds: EllipticBounds<T>,
    ) -> Self {
        Self { dim, diffusion, drift, potential, bounds }
    }

    /// `Δ`, i.e. `a = I`, `b = 0`, `c = 0`, with `c0 = C0 = 1`, `b0 = 0`.
    pub fn laplacian(dim: usize) -> Self {
        Self::isotropic(dim, T::one(), vec![T::zero(); dim], T::zero())
    }

    /// Constant coefficients `a = diffusion·I`, constant drift and potential; the declared
    /// bounds are the tight ones.
    pub fn isotropic(dim: usize, diffusion: T, drift: Vec<T>, potential: T) -> Self {
        assert_eq!(drift.len(), dim, "drift must have one entry per axis");
        let mut a = vec![T::zero(); dim * dim];
        for k in 0..dim {
            a[k * dim + k] = diffusion;
        }
        let drift_norm = drift.iter().map(|&b| b * b).sum::<T>().sqrt();
        let bounds = EllipticBounds { c0: diffusion, big_c0: diffusion, b0: drift_norm.max(potential.abs()) };
        Self::new(dim, VectorField::constant(a), VectorField::constant(drift), ScalarField::constant(potential), bounds)
    }

    pub fn with_bounds(mut self, bounds: EllipticBounds<T>) -> Self {
        self.bounds = bounds;
        self
    }

    /// Replaces the potential, raising `b0` when the new potential is a larger constant.
    pub fn with_potential(mut self, potential: ScalarField<T>) -> Self {
        if let Some(c) = potential.as_constant() {
            self.bounds.b0 = self.bounds.b0.max(c.abs());
        }
        self.potential = potential;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bounds(&self) -> EllipticBounds<T> {
        self.bounds
    }

    pub fn diffusion_at(&self, x: &[T]) -> Vec<T> {
        self.diffusion.eval(x)
    }

    pub fn drift_at(&self, x: &[T]) -> Vec<T> {
        self.drift.eval(x)
    }

    pub fn potential_at(&self, x: &[T]) -> T {
        self.potential.eval(x)
    }

    pub fn is_constant(&self) -> bool {
        self.diffusion.as_constant().is_some()
            && self.drift.as_constant().is_some()
            && self.potential.as_constant().is_some()
    }

    /// `‖b‖_∞` sampled on the grid nodes.
    pub fn drift_sup(&self, grid: &Grid<T>) -> T {
        (0..grid.len())
            .map(|i| self.drift_at(grid.point(i)).iter().map(|&b| b * b).sum::<T>().sqrt())
            .fold(T::zero(), T::max)
    }

    /// `inf_Ω c` as the minimum over grid nodes.
    pub fn potential_inf(&self, grid: &Grid<T>) -> T {
        (0..grid.len()).map(|i| self.potential_at(grid.point(i))).fold(T::infinity(), T::min)
    }
}

/// Verdicts and margins of the two sufficient conditions for the scalar SMP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmpCheck<T> {
    /// `‖b‖_∞^n |Ω| ≤ (c0 √Σ)^n |B_1|`.
    pub drift_condition: bool,
    /// Right side minus left side of the drift condition.
    pub drift_slack: T,
    /// `c0 Σ|B_1|^{2/n}|Ω|^{-2/n} − ‖b‖_∞ √Σ |B_1|^{1/n}|Ω|^{-1/n} − inf c > 0`.
    pub eigen_condition: bool,
    /// Value of the left side of the eigenvalue condition.
    pub eigen_value: T,
    pub drift_sup: T,
    pub potential_inf: T,
}

impl<T: Real> SmpCheck<T> {
    pub fn holds(&self) -> bool {
        self.drift_condition && self.eigen_condition
    }
}

/// Evaluates both scalar SMP conditions for `op` on `d`, coefficients sampled on its grid.
pub fn check_smp_conditions<T: Real>(op: &EllipticOperator<T>, d: &Domain<T>) -> Result<SmpCheck<T>> {
    let grid = Grid::new(d);
    let n = d.dim();
    let nn = T::of(n);
    let sigma = sigma_constant::<T>(n)?;
    let ball = unit_ball_volume::<T>(n);
    let measure = d.measure();
    let c0 = op.bounds().c0;
    let drift_sup = op.drift_sup(&grid);
    let potential_inf = op.potential_inf(&grid);

    let lhs = drift_sup.powi(n as i32) * measure;
    let rhs = (c0 * sigma.sqrt()).powi(n as i32) * ball;
    let eigen_value = c0 * sigma * (ball / measure).powf(T::lit(2.0) / nn)
        - drift_sup * sigma.sqrt() * (ball / measure).powf(nn.recip())
        - potential_inf;
    Ok(SmpCheck {
        drift_condition: lhs <= rhs,
        drift_slack: rhs - lhs,
        eigen_condition: eigen_value > T::zero(),
        eigen_value,
        drift_sup,
        potential_inf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn laplacian_drift_condition_slack() {
        for (d, n) in [
            (Domain::interval(1.0, 16).unwrap(), 1usize),
            (Domain::cuboid(vec![1.0, 2.0], vec![8, 8]).unwrap(), 2),
            (Domain::ball(0.5, 3, 16).unwrap(), 3),
        ] {
            let chk = check_smp_conditions(&EllipticOperator::laplacian(n), &d).unwrap();
            let sigma = sigma_constant::<f64>(n).unwrap();
            let expect = sigma.sqrt().powi(n as i32) * unit_ball_volume::<f64>(n);
            assert!(chk.drift_condition);
            assert!((chk.drift_slack - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn laplacian_unit_interval_eigen_value() {
        let chk = check_smp_conditions(&EllipticOperator::laplacian(1), &Domain::interval(1.0, 16).unwrap()).unwrap();
        assert!((chk.eigen_value - PI * PI).abs() < 1e-12);
        assert!(chk.holds());
    }

    #[test]
    fn large_potential_fails() {
        let d = Domain::interval(1.0, 16).unwrap();
        let op = EllipticOperator::isotropic(1, 1.0, vec![0.0], PI * PI + 0.5);
        let chk = check_smp_conditions(&op, &d).unwrap();
        assert!(!chk.eigen_condition);
        assert!(chk.drift_condition);
    }

    #[test]
    fn strong_drift_fails_drift_condition() {
        let d = Domain::interval(1.0, 16).unwrap();
        // (c0 √Σ)|B_1| / |Ω| = π
        let op = EllipticOperator::isotropic(1, 1.0, vec![3.2], 0.0);
        assert!(!check_smp_conditions(&op, &d).unwrap().drift_condition);
        let op = EllipticOperator::isotropic(1, 1.0, vec![3.1], 0.0);
        assert!(check_smp_conditions(&op, &d).unwrap().drift_condition);
    }
}
