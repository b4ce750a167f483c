//! Numerical toolkit for relative Yamabe metrics on the Berger hemisphere
//! `SU(2)_+ = { Im z >= 0 }`.
//!
//! The crate is split along the natural pipeline:
//!
//! - [`lie_curvature`]: exact curvature of left-invariant metrics from structure constants,
//!   together with the closed-form Berger curvature formulas.
//! - [`su2_chart`]: a cell-centered Hopf-coordinate grid on the hemisphere with the Berger
//!   metric, quadrature, difference operators and boundary geometry.
//! - [`conformal_energy`]: the normalized total scalar curvature functional, the Sobolev
//!   quotient, the conformal Laplacian law and the Neumann residual.
//! - [`yamabe_estimator`]: constrained gradient minimization of the quotient.
//! - [`criterion`]: the comparison criterion `R_h h <= R_g g`, Berger region
//!   classification and deformation-path checks.
//! - [`metric_spec`]: the JSON metric-spec file format.

pub mod conformal_energy;
pub mod criterion;
mod error;
pub mod lie_curvature;
pub mod metric_spec;
pub mod su2_chart;
pub mod trial;
pub mod yamabe_estimator;

pub use error::{Error, Result};

/// Manifold dimension and the exponents that depend on it.
///
/// All exponents of the conformal theory are derived here so that no formula inlines the
/// three-dimensional values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dimension(pub usize);

impl Dimension {
    pub const THREE: Dimension = Dimension(3);

    fn n(self) -> f64 {
        self.0 as f64
    }

    /// `4(n-1)/(n-2)`, the gradient coefficient of the conformal Laplacian.
    pub fn gradient_coefficient(self) -> f64 {
        4.0 * (self.n() - 1.0) / (self.n() - 2.0)
    }

    /// `2n/(n-2)`, the critical Sobolev exponent.
    pub fn critical_exponent(self) -> f64 {
        2.0 * self.n() / (self.n() - 2.0)
    }

    /// `(n-2)/n`, the volume normalization exponent.
    pub fn volume_exponent(self) -> f64 {
        (self.n() - 2.0) / self.n()
    }

    /// `4/(n-2)`: the conformal metric is `u^{4/(n-2)} g`.
    pub fn conformal_exponent(self) -> f64 {
        4.0 / (self.n() - 2.0)
    }

    /// `(n+2)/(n-2)`, the power of `u` dividing the conformal scalar curvature.
    pub fn scalar_exponent(self) -> f64 {
        (self.n() + 2.0) / (self.n() - 2.0)
    }
}
