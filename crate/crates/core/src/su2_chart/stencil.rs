//! Finite-difference operators on the cell-centered grid.
//!
//! Central differences in the interior, second-order one-sided differences on the first and
//! last cell of the non-periodic directions (`η` and `ξ₁`), periodic wrap in `ξ₂`. The
//! gradient and its adjoint are built from the same stencil table so that the discrete
//! Dirichlet energy has an exact discrete gradient.

use rayon::prelude::*;

use super::{check_shape, HopfGrid, MetricField, ScalarField};
use crate::Result;

/// `(neighbor index along the axis, coefficient)` triples of the derivative stencil.
pub(crate) fn axis_stencil(idx: usize, n: usize, h: f64, periodic: bool) -> [(usize, f64); 3] {
    let c = 0.5 / h;
    if periodic {
        return [((idx + n - 1) % n, -c), ((idx + 1) % n, c), (idx, 0.0)];
    }
    if idx == 0 {
        [(0, -3.0 * c), (1, 4.0 * c), (2, -c)]
    } else if idx == n - 1 {
        [(n - 1, 3.0 * c), (n - 2, -4.0 * c), (n - 3, c)]
    } else {
        [(idx - 1, -c), (idx + 1, c), (idx, 0.0)]
    }
}

#[inline]
fn neighbor(grid: &HopfGrid, (i, j, k): (usize, usize, usize), axis: usize, m: usize) -> usize {
    match axis {
        0 => grid.index(m, j, k),
        1 => grid.index(i, m, k),
        _ => grid.index(i, j, m),
    }
}

#[inline]
fn partial(grid: &HopfGrid, values: &[f64], c: usize, axis: usize) -> f64 {
    let n = grid.dims();
    let h = grid.spacing();
    let ijk = grid.unindex(c);
    let pos = [ijk.0, ijk.1, ijk.2][axis];
    axis_stencil(pos, n[axis], h[axis], HopfGrid::is_periodic(axis))
        .iter()
        .map(|&(m, w)| w * values[neighbor(grid, ijk, axis, m)])
        .sum()
}

/// Derivative of raw cell values along one coordinate axis.
pub fn derivative_along(grid: &HopfGrid, axis: usize, values: &[f64]) -> Vec<f64> {
    assert_eq!(values.len(), grid.len(), "values must cover the grid");
    (0..grid.len())
        .into_par_iter()
        .map(|c| partial(grid, values, c, axis))
        .collect()
}

/// Coordinate partials `(∂_η f, ∂_ξ₁ f, ∂_ξ₂ f)` at every cell.
pub fn gradient(grid: &HopfGrid, f: &ScalarField) -> Result<Vec<[f64; 3]>> {
    check_shape(grid.shape(), f.shape())?;
    let v = f.values();
    Ok((0..grid.len())
        .into_par_iter()
        .map(|c| [0, 1, 2].map(|a| partial(grid, v, c, a)))
        .collect())
}

/// Transpose of [`gradient`] as a linear map from cell values to per-cell covectors.
pub fn adjoint_gradient(grid: &HopfGrid, q: &[[f64; 3]]) -> Vec<f64> {
    assert_eq!(q.len(), grid.len(), "covector field must cover the grid");
    let n = grid.dims();
    let h = grid.spacing();
    let mut out = vec![0.0; grid.len()];
    for (c, qc) in q.iter().enumerate() {
        let ijk = grid.unindex(c);
        let pos = [ijk.0, ijk.1, ijk.2];
        for axis in 0..3 {
            if qc[axis] == 0.0 {
                continue;
            }
            for (m, w) in axis_stencil(pos[axis], n[axis], h[axis], HopfGrid::is_periodic(axis)) {
                out[neighbor(grid, ijk, axis, m)] += w * qc[axis];
            }
        }
    }
    out
}

/// `|df|²_g = g^{ij} ∂_i f ∂_j f` at every cell.
pub fn grad_sq(f: &ScalarField, metric: &MetricField) -> Result<ScalarField> {
    let d = gradient(metric.grid(), f)?;
    let values = d
        .iter()
        .zip(metric.inverse_components())
        .map(|(p, gi)| quadratic(gi, p))
        .collect();
    Ok(ScalarField::from_raw(f.shape(), values))
}

#[inline]
pub(crate) fn quadratic(m: &[[f64; 3]; 3], p: &[f64; 3]) -> f64 {
    let mut acc = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            acc += m[a][b] * p[a] * p[b];
        }
    }
    acc
}
