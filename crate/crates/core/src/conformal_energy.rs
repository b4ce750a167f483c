//! Normalized total scalar curvature, the Sobolev quotient, and the conformal Laplacian law.
//!
//! For a metric `g` on an `n`-manifold with boundary,
//!
//! ```text
//! E(g) = ∫ R_g dv_g / Vol_g^{(n-2)/n}
//! Q_g(f) = ∫ (a_n |df|²_g + R_g f²) dv_g / (∫ |f|^p dv_g)^{(n-2)/n},   a_n = 4(n-1)/(n-2), p = 2n/(n-2)
//! ```
//!
//! The quotient uses the same quadrature and gradient stencils as `E`, so `Q_g(1) = E(g)`
//! holds exactly in floating point, not just up to discretization error.

use serde::Serialize;

use crate::su2_chart::{
    adjoint_gradient, check_shape, face_normal_derivatives, grad_sq, gradient,
    integrate, pairwise_sum, volume, HopfGrid, MetricField, ScalarField,
};
use crate::{Dimension, Error, Result};

/// Dimension of every chart shipped with the crate.
pub const CHART_DIM: Dimension = Dimension::THREE;

/// `‖f‖_p` below this is treated as the zero function.
pub const DEGENERATE_NORM: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport {
    pub total_scalar_integral: f64,
    pub volume: f64,
    pub energy: f64,
}

pub fn einstein_hilbert(metric: &MetricField, scalar: &ScalarField) -> Result<EnergyReport> {
    let total = integrate(scalar, metric)?;
    let vol = integrate(&ScalarField::constant(metric.grid(), 1.0), metric)?;
    if !(vol > 0.0) {
        return Err(Error::ZeroVolume);
    }
    Ok(EnergyReport {
        total_scalar_integral: total,
        volume: vol,
        energy: total / vol.powf(CHART_DIM.volume_exponent()),
    })
}

/// Arguments of [`rayleigh_quotient`].
#[derive(Debug, Clone, Copy)]
pub struct QuotientInput<'a> {
    pub f: &'a ScalarField,
    pub metric: &'a MetricField,
    pub scalar_curvature: &'a ScalarField,
    pub dim: Dimension,
}

impl<'a> QuotientInput<'a> {
    pub fn new(
        f: &'a ScalarField,
        metric: &'a MetricField,
        scalar_curvature: &'a ScalarField,
    ) -> Result<Self> {
        check_shape(metric.shape(), f.shape())?;
        check_shape(metric.shape(), scalar_curvature.shape())?;
        if f.max_abs() == 0.0 {
            return Err(Error::DegenerateTrial { norm: 0.0 });
        }
        Ok(QuotientInput {
            f,
            metric,
            scalar_curvature,
            dim: CHART_DIM,
        })
    }

    /// `a_n = 4(n-1)/(n-2)`.
    pub fn coefficient(&self) -> f64 {
        self.dim.gradient_coefficient()
    }
}

/// `|v|^p`, exact repeated multiplication when `p` is a small integer.
#[inline]
pub(crate) fn abs_pow(v: f64, p: f64) -> f64 {
    if p.fract() == 0.0 && p.abs() <= 16.0 {
        v.abs().powi(p as i32)
    } else {
        v.abs().powf(p)
    }
}

/// `(Q, ∫(a|df|² + R f²) dv, ∫|f|^p dv)`.
fn quotient_terms(q: &QuotientInput<'_>) -> Result<(f64, f64, f64)> {
    let a = q.coefficient();
    let p = q.dim.critical_exponent();
    let grad = grad_sq(q.f, q.metric)?;
    let integrand: Vec<f64> = grad
        .values()
        .iter()
        .zip(q.f.values())
        .zip(q.scalar_curvature.values())
        .map(|((g2, f), r)| a * g2 + r * f * f)
        .collect();
    let numerator = integrate(&ScalarField::new(q.metric.grid(), integrand)?, q.metric)?;
    let powered = q.f.map(|v| abs_pow(v, p));
    let denominator = integrate(&powered, q.metric)?;
    let norm = denominator.powf(1.0 / p);
    if !(norm >= DEGENERATE_NORM) {
        return Err(Error::DegenerateTrial { norm });
    }
    let value = numerator / denominator.powf(q.dim.volume_exponent());
    Ok((value, numerator, denominator))
}

/// `Q_g(f)` with the quadrature of [`integrate`] and the stencils of [`grad_sq`].
pub fn rayleigh_quotient(q: &QuotientInput<'_>) -> Result<f64> {
    Ok(quotient_terms(q)?.0)
}

/// Laplace–Beltrami operator `Δf = (1/√g) ∂_i(√g g^{ij} ∂_j f)` (non-positive spectrum).
///
/// Finite-volume form: `Δf` at a cell is the net flux `√g g^{aj} ∂_j f` through its six faces
/// over `√g`. On a face between two cells the normal derivative is the compact difference and
/// the tangential terms average the cell gradients of [`gradient`]. No flux crosses the
/// boundary `ξ₁ ∈ {0, π}` (the Neumann condition `ν(f) = 0`) or the chart axes, where
/// `√g = 0`. With these fluxes `∫(-Δf) f dv` sums by parts into a discrete Dirichlet energy.
pub fn laplace_beltrami(f: &ScalarField, metric: &MetricField) -> Result<ScalarField> {
    let grid = metric.grid();
    check_shape(grid.shape(), f.shape())?;
    let n = grid.dims();
    let h = grid.spacing();
    let df = gradient(grid, f)?;
    let g_inv = metric.inverse_components();
    let sqrt_det = metric.sqrt_det();
    let v = f.values();

    let mut out = vec![0.0; grid.len()];
    for a in 0..3 {
        let periodic = HopfGrid::is_periodic(a);
        for c in 0..grid.len() {
            let (i, j, k) = grid.unindex(c);
            let pos = [i, j, k][a];
            if !periodic && pos + 1 == n[a] {
                continue;
            }
            let next = (pos + 1) % n[a];
            let d = match a {
                0 => grid.index(next, j, k),
                1 => grid.index(i, next, k),
                _ => grid.index(i, j, next),
            };
            let normal = 0.5 * (sqrt_det[c] * g_inv[c][a][a] + sqrt_det[d] * g_inv[d][a][a])
                * (v[d] - v[c])
                / h[a];
            let tangential: f64 = (0..3)
                .filter(|&b| b != a)
                .map(|b| {
                    0.5 * (sqrt_det[c] * g_inv[c][a][b] * df[c][b]
                        + sqrt_det[d] * g_inv[d][a][b] * df[d][b])
                })
                .sum();
            let flux = (normal + tangential) / h[a];
            out[c] += flux;
            out[d] -= flux;
        }
    }
    for (o, sd) in out.iter_mut().zip(sqrt_det) {
        *o /= sd;
    }
    ScalarField::new(grid, out)
}

/// Scalar curvature of `u^{4/(n-2)} g`: `u^{-(n+2)/(n-2)} (-a_n Δu + R u)`.
pub fn conformal_scalar(
    u: &ScalarField,
    metric: &MetricField,
    scalar: &ScalarField,
) -> Result<ScalarField> {
    check_shape(metric.shape(), scalar.shape())?;
    if let Some(c) = u.values().iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Domain(format!(
            "conformal factor must be positive, got {} at cell {c}",
            u.values()[c]
        )));
    }
    let a = CHART_DIM.gradient_coefficient();
    let e = CHART_DIM.scalar_exponent();
    let lap = laplace_beltrami(u, metric)?;
    let values = u
        .values()
        .iter()
        .zip(lap.values())
        .zip(scalar.values())
        .map(|((&u, &l), &r)| u.powf(-e) * (-a * l + r * u))
        .collect();
    ScalarField::new(metric.grid(), values)
}

/// `E(u^{4/(n-2)} g)` by direct quadrature of the conformal scalar curvature against
/// `dv_{u^{4/(n-2)} g} = u^p dv_g`.
pub fn conformal_energy_direct(
    u: &ScalarField,
    metric: &MetricField,
    scalar: &ScalarField,
) -> Result<f64> {
    let p = CHART_DIM.critical_exponent();
    let r_bar = conformal_scalar(u, metric, scalar)?;
    let density = u.map(|v| abs_pow(v, p));
    let total = integrate(&r_bar.zip_map(&density, |r, d| r * d)?, metric)?;
    let vol = integrate(&density, metric)?;
    if !(vol > 0.0) {
        return Err(Error::ZeroVolume);
    }
    Ok(total / vol.powf(CHART_DIM.volume_exponent()))
}

/// `max |ν(u)|` over boundary face cells, `ν` the inward `g`-unit normal.
pub fn neumann_residual(u: &ScalarField, metric: &MetricField) -> Result<f64> {
    Ok(face_normal_derivatives(u, metric)?
        .into_iter()
        .fold(0.0, |m, v| m.max(v.abs())))
}

/// `(∫(-Δf) f dv, ∫|df|² dv)`, the two sides of the Green identity for Neumann data.
pub fn green_identity_sides(f: &ScalarField, metric: &MetricField) -> Result<(f64, f64)> {
    let lap = laplace_beltrami(f, metric)?;
    let lhs = integrate(&lap.zip_map(f, |l, v| -l * v)?, metric)?;
    let rhs = integrate(&grad_sq(f, metric)?, metric)?;
    Ok((lhs, rhs))
}

/// The discrete quotient as a function of raw cell values, with its exact `L²` gradient.
///
/// Dirichlet energy `Σ_c w_c g^{ij}_c (Df)_i (Df)_j` has Euclidean gradient `2 Dᵀ(w g⁻¹ Df)`;
/// dividing by the cell weights gives the `L²(dv_g)` gradient, which is the discrete form of
/// `-2Δf`.
#[derive(Debug, Clone)]
pub struct DiscreteQuotient<'a> {
    metric: &'a MetricField,
    scalar: &'a ScalarField,
    dim: Dimension,
}

/// Value of the quotient together with its numerator and `∫|f|^p`.
#[derive(Debug, Clone, Copy)]
pub struct QuotientParts {
    pub value: f64,
    pub numerator: f64,
    pub power_integral: f64,
}

impl<'a> DiscreteQuotient<'a> {
    pub fn new(metric: &'a MetricField, scalar: &'a ScalarField) -> Result<Self> {
        check_shape(metric.shape(), scalar.shape())?;
        Ok(DiscreteQuotient {
            metric,
            scalar,
            dim: CHART_DIM,
        })
    }

    pub fn metric(&self) -> &MetricField {
        self.metric
    }

    pub fn scalar(&self) -> &ScalarField {
        self.scalar
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    /// Same arithmetic as [`rayleigh_quotient`].
    pub fn evaluate(&self, f: &ScalarField) -> Result<QuotientParts> {
        let input = QuotientInput {
            f,
            metric: self.metric,
            scalar_curvature: self.scalar,
            dim: self.dim,
        };
        let (value, numerator, power_integral) = quotient_terms(&input)?;
        Ok(QuotientParts {
            value,
            numerator,
            power_integral,
        })
    }

    /// `L²(dv_g)` gradient of `Q` at `f`:
    /// `∇N / D^q - q N D^{-q-1} ∇D` with `∇N = 2a(-Δ_h f) + 2Rf`, `∇D = p |f|^{p-2} f`.
    pub fn l2_gradient(&self, f: &ScalarField, parts: &QuotientParts) -> Result<Vec<f64>> {
        let grid = self.metric.grid();
        let a = self.dim.gradient_coefficient();
        let p = self.dim.critical_exponent();
        let q = self.dim.volume_exponent();
        let df = gradient(grid, f)?;
        let w = self.metric.weights();
        let flux: Vec<[f64; 3]> = df
            .iter()
            .zip(self.metric.inverse_components())
            .zip(w)
            .map(|((d, gi), wc)| {
                [0, 1, 2].map(|i| wc * (gi[i][0] * d[0] + gi[i][1] * d[1] + gi[i][2] * d[2]))
            })
            .collect();
        let stiffness = adjoint_gradient(grid, &flux);
        let d_q = parts.power_integral.powf(q);
        let coeff = q * parts.numerator / (parts.power_integral * d_q);
        Ok(f
            .values()
            .iter()
            .zip(stiffness)
            .zip(w)
            .zip(self.scalar.values())
            .map(|(((&v, s), wc), r)| {
                let grad_n = 2.0 * a * s / wc + 2.0 * r * v;
                let grad_d = p * abs_pow(v, p - 2.0) * v;
                grad_n / d_q - coeff * grad_d
            })
            .collect())
    }

    /// `L²(dv_g)` inner product of raw cell vectors.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let prods: Vec<f64> = a
            .iter()
            .zip(b)
            .zip(self.metric.weights())
            .map(|((x, y), w)| x * y * w)
            .collect();
        pairwise_sum(&prods)
    }

    /// Rescales `f` so that `∫|f|^p dv = 1`.
    pub fn normalize(&self, f: &ScalarField) -> Result<ScalarField> {
        let p = self.dim.critical_exponent();
        let d = integrate(&f.map(|v| abs_pow(v, p)), self.metric)?;
        let norm = d.powf(1.0 / p);
        if !(norm >= DEGENERATE_NORM) || !norm.is_finite() {
            return Err(Error::DegenerateTrial { norm });
        }
        Ok(f.map(|v| v / norm))
    }

    pub fn volume(&self) -> f64 {
        volume(self.metric)
    }
}
