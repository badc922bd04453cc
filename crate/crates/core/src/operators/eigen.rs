use serde::Serialize;

use super::assemble::norm2;
use super::{solve_dirichlet, DiscreteOperator, GridFunction};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct EigenOptions<T> {
    /// Relative change of successive eigenvalue estimates at convergence.
    pub tol: f64,
    /// Bound on `‖Aφ − λρφ‖₂ / ‖φ‖₂`, taken relative to `max(1, λ‖ρ‖_∞)`.
    pub residual_tol: f64,
    pub max_iter: usize,
    pub initial: Option<GridFunction<T>>,
}

impl<T> Default for EigenOptions<T> {
    fn default() -> Self {
        Self { tol: 1e-10, residual_tol: 1e-8, max_iter: 10_000, initial: None }
    }
}

#[derive(Debug, Clone)]
pub struct ScalarEigen<T> {
    pub lambda: T,
    /// Positive eigenfunction with unit `L²` norm.
    pub phi: GridFunction<T>,
    pub iterations: usize,
    /// `‖Aφ − λρφ‖₂ / ‖φ‖₂`.
    pub residual: T,
}

#[derive(Serialize)]
struct Summary {
    lambda: f64,
    iterations: usize,
    residual: f64,
}

impl<T: Real> ScalarEigen<T> {
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::to_value(Summary {
            lambda: self.lambda.f64(),
            iterations: self.iterations,
            residual: self.residual.f64(),
        })
        .expect("plain struct serializes")
    }
}

/// Smallest eigenvalue of `A φ = λ ρ φ` with positive `φ`, by inverse power iteration.
pub fn scalar_principal_eigen<T: Real>(a: &DiscreteOperator<T>, rho: &GridFunction<T>) -> Result<ScalarEigen<T>> {
    scalar_principal_eigen_with(a, rho, &EigenOptions::default())
}

pub fn scalar_principal_eigen_with<T: Real>(
    a: &DiscreteOperator<T>,
    rho: &GridFunction<T>,
    opts: &EigenOptions<T>,
) -> Result<ScalarEigen<T>> {
    let grid = a.grid().clone();
    if rho.len() != grid.len() {
        return Err(Error::Mismatch(format!("weight has {} values, grid {}", rho.len(), grid.len())));
    }
    if let Some(i) = rho.values().iter().position(|&w| !(w > T::zero())) {
        return Err(Error::InvalidSystem(format!("weight must be positive, node {i} has {}", rho.values()[i])));
    }
    let tol = T::tol(opts.tol);
    let res_tol = T::tol(opts.residual_tol);
    let rho_sup = rho.linf_norm();
    let mut phi = match &opts.initial {
        Some(u) => u.clone(),
        None => GridFunction::constant(grid.clone(), T::one()),
    };
    let n0 = phi.l2_norm();
    if !(n0 > T::zero()) {
        return Err(Error::Degenerate { component: 0, norm: n0.f64() });
    }
    phi = phi.scaled(n0.recip());

    let mut lambda = T::nan();
    let mut change = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let rhs = rho.mul(&phi);
        let y = solve_dirichlet(a, &rhs)?;
        let denom = phi.inner(&rho.mul(&y));
        let next_lambda = phi.inner(&rhs) / denom;
        let ny = y.l2_norm();
        if !(ny > T::zero()) || !ny.is_finite() {
            return Err(Error::Degenerate { component: 0, norm: ny.f64() });
        }
        let mut next = y.scaled(ny.recip());
        if next.values().iter().copied().sum::<T>() < T::zero() {
            next = next.scaled(-T::one());
        }
        let rel = if lambda.is_nan() { T::infinity() } else { (next_lambda - lambda).abs() / next_lambda.abs() };
        change = rel.f64();
        lambda = next_lambda;
        phi = next;
        if rel <= tol {
            let residual = residual_of(a, rho, &phi, lambda);
            if residual <= res_tol * (lambda.abs() * rho_sup).max(T::one()) {
                if !(lambda > T::zero()) {
                    return Err(Error::NonPositiveEigenvalue(lambda.f64()));
                }
                return Ok(ScalarEigen { lambda, phi, iterations: it, residual });
            }
        }
    }
    Err(Error::NoConvergence { iterations: opts.max_iter, change })
}

fn residual_of<T: Real>(a: &DiscreteOperator<T>, rho: &GridFunction<T>, phi: &GridFunction<T>, lambda: T) -> T {
    let aphi = a.matrix().matvec(phi.values());
    let r: Vec<T> =
        aphi.iter().zip(phi.values().iter().zip(rho.values())).map(|(&av, (&p, &w))| av - lambda * w * p).collect();
    norm2(&r) / norm2(phi.values())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sigma_constant, Domain};
    use crate::operators::{assemble, EllipticOperator};
    use std::f64::consts::PI;

    fn laplace_eig(d: &Domain<f64>) -> ScalarEigen<f64> {
        let a = assemble(&EllipticOperator::laplacian(d.dim()), d).unwrap();
        let rho = GridFunction::constant(a.grid().clone(), 1.0);
        scalar_principal_eigen(&a, &rho).unwrap()
    }

    #[test]
    fn unit_interval_matches_discrete_formula() {
        let n = 64;
        let e = laplace_eig(&Domain::interval(1.0, n).unwrap());
        let h = 1.0 / n as f64;
        let exact = 4.0 / (h * h) * (PI * h / 2.0).sin().powi(2);
        assert!((e.lambda - exact).abs() / exact < 1e-10);
        assert!(e.phi.min() > 0.0);
        assert!((e.phi.l2_norm() - 1.0).abs() < 1e-12);
        assert!(e.residual < 1e-8 * e.lambda, "{}", e.residual);
    }

    #[test]
    fn disk_matches_bessel_zero() {
        let e = laplace_eig(&Domain::ball(1.0, 2, 256).unwrap());
        let s = sigma_constant::<f64>(2).unwrap();
        assert!((e.lambda - s).abs() / s < 5e-3, "{}", e.lambda);
    }

    #[test]
    fn weight_scaling_is_exact() {
        let d = Domain::<f64>::interval(1.0, 64).unwrap();
        let a = assemble(&EllipticOperator::laplacian(1), &d).unwrap();
        let one = GridFunction::constant(a.grid().clone(), 1.0);
        let base = scalar_principal_eigen(&a, &one).unwrap().lambda;
        let scaled = scalar_principal_eigen(&a, &one.scaled(2.5)).unwrap().lambda;
        assert!((scaled * 2.5 - base).abs() / base < 1e-10);
    }

    #[test]
    fn indefinite_operator_reports_non_positive() {
        let d = Domain::interval(1.0, 32).unwrap();
        // λ1(-u'' - c u) = π² - c < 0 with c = 12 (still below the second eigenvalue)
        let a = assemble(&EllipticOperator::isotropic(1, 1.0, vec![0.0], 12.0), &d).unwrap();
        let rho = GridFunction::constant(a.grid().clone(), 1.0);
        assert!(matches!(scalar_principal_eigen(&a, &rho), Err(Error::NonPositiveEigenvalue(_))));
    }

    #[test]
    fn non_positive_weight_rejected() {
        let d = Domain::interval(1.0, 16).unwrap();
        let a = assemble(&EllipticOperator::laplacian(1), &d).unwrap();
        let rho = GridFunction::zeros(a.grid().clone());
        assert!(matches!(scalar_principal_eigen(&a, &rho), Err(Error::InvalidSystem(_))));
    }

    #[test]
    fn iteration_cap_reported() {
        let d = Domain::interval(1.0, 64).unwrap();
        let a = assemble(&EllipticOperator::laplacian(1), &d).unwrap();
        let rho = GridFunction::constant(a.grid().clone(), 1.0);
        let opts = EigenOptions { max_iter: 2, ..EigenOptions::default() };
        assert!(matches!(
            scalar_principal_eigen_with(&a, &rho, &opts),
            Err(Error::NoConvergence { iterations: 2, .. })
        ));
    }
}
