//! Principal eigenvalues of cyclically coupled Lane-Emden elliptic systems and of
//! the Navier poly-Laplacian, together with explicit lower and upper eigenvalue
//! bounds and maximum-principle thresholds.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod gle;
pub mod operators;
pub mod polyharmonic;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

/// Shortest round-trip decimal representation of `x`, capped at 15 significant digits.
pub fn fmt_float(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let r = round15(x);
    let a = r.abs();
    if r == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

/// `x` rounded to 15 significant decimal digits.
pub fn round15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

/// Double-precision instantiations.
pub mod f64 {
    pub type Domain = crate::geometry::Domain<f64>;
    pub type EllipticOperator = crate::operators::EllipticOperator<f64>;
    pub type ScalarField = crate::operators::ScalarField<f64>;
    pub type GridFunction = crate::operators::GridFunction<f64>;
    pub type GleSystem = crate::gle::GleSystem<f64>;
    pub type EigenResult = crate::gle::EigenResult<f64>;
    pub type BoundReport = crate::bounds::BoundReport<f64>;
    pub type NavierProblem = crate::polyharmonic::NavierProblem<f64>;
}

/// Single-precision instantiations.
pub mod f32 {
    pub type Domain = crate::geometry::Domain<f32>;
    pub type EllipticOperator = crate::operators::EllipticOperator<f32>;
    pub type ScalarField = crate::operators::ScalarField<f32>;
    pub type GridFunction = crate::operators::GridFunction<f32>;
    pub type GleSystem = crate::gle::GleSystem<f32>;
    pub type EigenResult = crate::gle::EigenResult<f32>;
    pub type BoundReport = crate::bounds::BoundReport<f32>;
    pub type NavierProblem = crate::polyharmonic::NavierProblem<f32>;
}
