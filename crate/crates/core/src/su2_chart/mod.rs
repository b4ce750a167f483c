//! The hemisphere `SU(2)_+ = { Im z >= 0 }` in Hopf coordinates.
//!
//! Chart: `z = cos η · e^{iξ₁}`, `w = sin η · e^{iξ₂}` with `η ∈ (0, π/2)`, `ξ₁ ∈ [0, π]`
//! (so `Im z = cos η sin ξ₁ >= 0`) and `ξ₂` periodic. The boundary `{Im z = 0}` is the pair of
//! coordinate faces `ξ₁ ∈ {0, π}`.
//!
//! The grid is cell-centered, so no cell center sits on the chart axes `η ∈ {0, π/2}` or on the
//! boundary faces. Coordinate indices are ordered `(η, ξ₁, ξ₂)` everywhere.

mod boundary;
mod dump;
mod stencil;

use std::f64::consts::PI;

use nalgebra::Matrix3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::lie_curvature::BergerParams;
use crate::{Error, Result};

pub use boundary::{boundary_second_form, face_normal_derivatives, BoundaryReport, Face, FaceSample};
pub use dump::{dump_csv, dump_json, GridDump};
pub use stencil::{adjoint_gradient, derivative_along, gradient, grad_sq};

pub type Vec4 = [f64; 4];
pub type Sym3 = [[f64; 3]; 3];

/// Cell-centered structured grid on the hemisphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HopfGrid {
    n: [usize; 3],
}

impl HopfGrid {
    /// Every direction needs at least three cells for the one-sided stencils.
    pub fn new(n_eta: usize, n_xi1: usize, n_xi2: usize) -> Result<Self> {
        let n = [n_eta, n_xi1, n_xi2];
        if n.iter().any(|&v| v < 3) {
            return Err(Error::InvalidInput(format!(
                "grid resolution {n:?} needs at least 3 cells per direction"
            )));
        }
        Ok(HopfGrid { n })
    }

    pub fn cubic(n: usize) -> Result<Self> {
        Self::new(n, n, n)
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.n[0], self.n[1], self.n[2])
    }

    pub fn dims(&self) -> [usize; 3] {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(Δη, Δξ₁, Δξ₂) = (π/(2N_η), π/N_ξ₁, 2π/N_ξ₂)`.
    pub fn spacing(&self) -> [f64; 3] {
        [
            PI / (2.0 * self.n[0] as f64),
            PI / self.n[1] as f64,
            2.0 * PI / self.n[2] as f64,
        ]
    }

    pub fn cell_volume(&self) -> f64 {
        let h = self.spacing();
        h[0] * h[1] * h[2]
    }

    /// Only `ξ₂` is periodic.
    pub fn is_periodic(axis: usize) -> bool {
        axis == 2
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n[1] + j) * self.n[2] + k
    }

    pub fn unindex(&self, c: usize) -> (usize, usize, usize) {
        let k = c % self.n[2];
        let ij = c / self.n[2];
        (ij / self.n[1], ij % self.n[1], k)
    }

    pub fn center(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        let h = self.spacing();
        [
            (i as f64 + 0.5) * h[0],
            (j as f64 + 0.5) * h[1],
            (k as f64 + 0.5) * h[2],
        ]
    }

    pub fn center_of(&self, c: usize) -> [f64; 3] {
        let (i, j, k) = self.unindex(c);
        self.center(i, j, k)
    }

    pub fn centers(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        (0..self.len()).map(|c| self.center_of(c))
    }
}

/// Embedding of a chart point into `R^4 = (Re z, Im z, Re w, Im w)`.
pub fn embed(coords: [f64; 3]) -> Vec4 {
    let [eta, x1, x2] = coords;
    [
        eta.cos() * x1.cos(),
        eta.cos() * x1.sin(),
        eta.sin() * x2.cos(),
        eta.sin() * x2.sin(),
    ]
}

/// Analytic coordinate tangents `∂/∂η, ∂/∂ξ₁, ∂/∂ξ₂` in `R^4`.
pub fn coordinate_tangents(coords: [f64; 3]) -> [Vec4; 3] {
    let [eta, x1, x2] = coords;
    let (se, ce) = eta.sin_cos();
    let (s1, c1) = x1.sin_cos();
    let (s2, c2) = x2.sin_cos();
    [
        [-se * c1, -se * s1, ce * c2, ce * s2],
        [-ce * s1, ce * c1, 0.0, 0.0],
        [0.0, 0.0, -se * s2, se * c2],
    ]
}

fn frame_at(x: Vec4) -> [Vec4; 3] {
    let [a, b, c, d] = x;
    [
        [-b, a, -d, c],
        [c, -d, -a, b],
        [-d, -c, b, a],
    ]
}

/// Left-invariant fields `V_i(A) = A·X_i` at `A = [[z, -w̄], [w, z̄]]`, returned as the first
/// column of `A X_i` in `R^4`: `V₁ = (iz, iw)`, `V₂ = (w̄, -z̄)`, `V₃ = (-iw̄, iz̄)`.
pub fn frame_fields(z: Complex64, w: Complex64) -> Result<[Vec4; 3]> {
    let r = z.norm_sqr() + w.norm_sqr();
    if !((r - 1.0).abs() <= 1e-12) {
        return Err(Error::Domain(format!(
            "|z|² + |w|² = {r} is not 1: point is off the unit sphere"
        )));
    }
    Ok(frame_at([z.re, z.im, w.re, w.im]))
}

pub(crate) fn dot4(a: &Vec4, b: &Vec4) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Per-cell scalar values on a [`HopfGrid`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarField {
    shape: (usize, usize, usize),
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: &HopfGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "field has {} values for a grid of {} cells",
                values.len(),
                grid.len()
            )));
        }
        if let Some(c) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite field value at cell {c}")));
        }
        Ok(ScalarField {
            shape: grid.shape(),
            values,
        })
    }

    /// Evaluates `f(η, ξ₁, ξ₂)` at every cell center. Panics if `f` yields a non-finite value.
    pub fn from_fn(grid: &HopfGrid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values: Vec<f64> = grid.centers().map(f).collect();
        assert!(
            values.iter().all(|v| v.is_finite()),
            "field function produced a non-finite value"
        );
        ScalarField {
            shape: grid.shape(),
            values,
        }
    }

    /// Evaluates a function of the embedded point `(Re z, Im z, Re w, Im w)`.
    pub fn from_ambient(grid: &HopfGrid, f: impl Fn(Vec4) -> f64) -> Self {
        Self::from_fn(grid, |c| f(embed(c)))
    }

    pub fn constant(grid: &HopfGrid, value: f64) -> Self {
        ScalarField {
            shape: grid.shape(),
            values: vec![value; grid.len()],
        }
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField {
            shape: self.shape,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        check_shape(self.shape, other.shape)?;
        Ok(ScalarField {
            shape: self.shape,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub(crate) fn from_raw(shape: (usize, usize, usize), values: Vec<f64>) -> Self {
        ScalarField { shape, values }
    }
}

pub(crate) fn check_shape(
    expected: (usize, usize, usize),
    actual: (usize, usize, usize),
) -> Result<()> {
    if expected != actual {
        return Err(Error::ShapeMismatch { expected, actual });
    }
    Ok(())
}

/// Coordinate metric `g_{ij}` of the chart at each cell, with cached inverse and volume data.
#[derive(Debug, Clone)]
pub struct MetricField {
    grid: HopfGrid,
    g: Vec<Sym3>,
    g_inv: Vec<Sym3>,
    sqrt_det: Vec<f64>,
    weight: Vec<f64>,
}

fn to_sym(m: &Matrix3<f64>) -> Sym3 {
    [0, 1, 2].map(|i| [0, 1, 2].map(|j| m[(i, j)]))
}

fn from_sym(s: &Sym3) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| s[i][j])
}

pub(crate) fn invert_sym(s: &Sym3) -> Option<(Sym3, f64)> {
    let m = from_sym(s);
    let det = m.determinant();
    let chol = m.cholesky()?;
    let inv = chol.inverse();
    let inv = (inv + inv.transpose()) * 0.5;
    Some((to_sym(&inv), det))
}

impl MetricField {
    /// Builds the field from per-cell coordinate metrics; each must be positive definite.
    pub fn from_components(grid: &HopfGrid, g: Vec<Sym3>) -> Result<Self> {
        if g.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "metric has {} cells for a grid of {} cells",
                g.len(),
                grid.len()
            )));
        }
        let cell_volume = grid.cell_volume();
        let mut g_inv = Vec::with_capacity(g.len());
        let mut sqrt_det = Vec::with_capacity(g.len());
        let mut weight = Vec::with_capacity(g.len());
        for (c, gc) in g.iter().enumerate() {
            let (inv, det) = invert_sym(gc).filter(|(_, d)| *d > 0.0).ok_or_else(|| {
                Error::InvalidMetric(format!("coordinate metric not positive definite at cell {c}"))
            })?;
            g_inv.push(inv);
            sqrt_det.push(det.sqrt());
            weight.push(det.sqrt() * cell_volume);
        }
        Ok(MetricField {
            grid: *grid,
            g,
            g_inv,
            sqrt_det,
            weight,
        })
    }

    pub fn grid(&self) -> &HopfGrid {
        &self.grid
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        self.grid.shape()
    }

    pub fn components(&self) -> &[Sym3] {
        &self.g
    }

    pub fn inverse_components(&self) -> &[Sym3] {
        &self.g_inv
    }

    pub fn sqrt_det(&self) -> &[f64] {
        &self.sqrt_det
    }

    /// Quadrature weights `√det g · Δη Δξ₁ Δξ₂`.
    pub fn weights(&self) -> &[f64] {
        &self.weight
    }

    /// `λ g` for a constant `λ > 0`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Domain(format!("scale factor {lambda} must be positive")));
        }
        let g = self
            .g
            .iter()
            .map(|m| m.map(|row| row.map(|v| v * lambda)))
            .collect();
        Self::from_components(&self.grid, g)
    }

    /// Pointwise conformal rescaling `φ · g` for a positive field `φ`.
    pub fn conformally_scaled(&self, factor: &ScalarField) -> Result<Self> {
        check_shape(self.shape(), factor.shape())?;
        if let Some(c) = factor.values().iter().position(|&v| v <= 0.0) {
            return Err(Error::Domain(format!("conformal factor not positive at cell {c}")));
        }
        let g = self
            .g
            .iter()
            .zip(factor.values())
            .map(|(m, &f)| m.map(|row| row.map(|v| v * f)))
            .collect();
        Self::from_components(&self.grid, g)
    }
}

fn cell_metric(coords: [f64; 3], weights: [f64; 3]) -> Result<Sym3> {
    let x = embed(coords);
    let frame = frame_at(x);
    let tangents = coordinate_tangents(coords);
    // expansion[a][k] = <∂_a, V_k>, the frame being round-orthonormal
    let mut expansion = [[0.0; 3]; 3];
    for (a, t) in tangents.iter().enumerate() {
        let mut rebuilt = [0.0; 4];
        for (k, v) in frame.iter().enumerate() {
            let e = dot4(t, v);
            expansion[a][k] = e;
            for d in 0..4 {
                rebuilt[d] += e * v[d];
            }
        }
        let residual = (0..4)
            .map(|d| (t[d] - rebuilt[d]).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual > 1e-10 {
            return Err(Error::ChartConsistency { residual });
        }
    }
    let mut g = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            g[a][b] = (0..3)
                .map(|k| weights[k] * expansion[a][k] * expansion[b][k])
                .sum();
        }
    }
    Ok(g)
}

/// Coordinate metric of `g_{s,t}` at an arbitrary chart point.
pub fn chart_metric_at(coords: [f64; 3], p: BergerParams) -> Result<Sym3> {
    cell_metric(coords, p.weights())
}

/// Coordinate representation of `g_{s,t}` on every cell: the coordinate tangents are expanded
/// in the left-invariant frame and the frame weights `(1, s, t)` applied.
pub fn chart_metric(grid: &HopfGrid, p: BergerParams) -> Result<MetricField> {
    let weights = p.weights();
    let g = (0..grid.len())
        .into_par_iter()
        .map(|c| cell_metric(grid.center_of(c), weights))
        .collect::<Result<Vec<_>>>()?;
    MetricField::from_components(grid, g)
}

/// Pairwise summation with a fixed split order, so results are reproducible bit for bit.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 16;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Midpoint-rule integral `Σ f(cell) · weight(cell)`.
pub fn integrate(field: &ScalarField, metric: &MetricField) -> Result<f64> {
    check_shape(metric.shape(), field.shape())?;
    let products: Vec<f64> = field
        .values()
        .iter()
        .zip(metric.weights())
        .map(|(f, w)| f * w)
        .collect();
    Ok(pairwise_sum(&products))
}

pub fn volume(metric: &MetricField) -> f64 {
    pairwise_sum(metric.weights())
}
