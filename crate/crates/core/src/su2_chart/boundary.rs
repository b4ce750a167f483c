//! Geometry of the boundary `{Im z = 0}` = faces `ξ₁ = 0` and `ξ₁ = π`.
//!
//! Face values are extrapolated from the first five cell layers with quartic Lagrange weights;
//! inward `ξ₁`-derivatives differentiate the same quartic. Metric derivatives along the face use
//! fourth-order central differences.

use serde::Serialize;

use super::stencil::axis_stencil;
use super::{
    check_shape, coordinate_tangents, dot4, embed, frame_at, invert_sym, HopfGrid, MetricField,
    ScalarField, Sym3,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Face {
    /// `ξ₁ = 0`
    Lower,
    /// `ξ₁ = π`
    Upper,
}

impl Face {
    pub const BOTH: [Face; 2] = [Face::Lower, Face::Upper];

    /// `+1` when increasing `ξ₁` points into the hemisphere.
    fn inward_sign(self) -> f64 {
        match self {
            Face::Lower => 1.0,
            Face::Upper => -1.0,
        }
    }

    fn layers(self, n_xi1: usize) -> [usize; LAYERS] {
        match self {
            Face::Lower => std::array::from_fn(|l| l),
            Face::Upper => std::array::from_fn(|l| n_xi1 - 1 - l),
        }
    }

    pub fn xi1(self) -> f64 {
        match self {
            Face::Lower => 0.0,
            Face::Upper => std::f64::consts::PI,
        }
    }
}

const LAYERS: usize = 5;
const EXTRAPOLATE: [f64; LAYERS] = [
    315.0 / 128.0,
    -105.0 / 32.0,
    189.0 / 64.0,
    -45.0 / 32.0,
    35.0 / 128.0,
];
const INWARD_DERIVATIVE: [f64; LAYERS] = [-31.0 / 8.0, 229.0 / 24.0, -75.0 / 8.0, 37.0 / 8.0, -11.0 / 12.0];

/// Face-extrapolated metric and its `ξ₁` derivative on an `N_η × N_ξ₂` array.
struct FaceMetric {
    face: Face,
    g: Vec<Sym3>,
    d_xi1: Vec<Sym3>,
}

fn face_metric(metric: &MetricField, face: Face) -> FaceMetric {
    let grid = metric.grid();
    let [ne, n1, n2] = grid.dims();
    let h1 = grid.spacing()[1];
    let layers = face.layers(n1);
    let sign = face.inward_sign();
    let comps = metric.components();
    let mut g = Vec::with_capacity(ne * n2);
    let mut d_xi1 = Vec::with_capacity(ne * n2);
    for i in 0..ne {
        for k in 0..n2 {
            let cells = layers.map(|j| &comps[grid.index(i, j, k)]);
            let mut gv = [[0.0; 3]; 3];
            let mut dv = [[0.0; 3]; 3];
            for a in 0..3 {
                for b in 0..3 {
                    for l in 0..LAYERS {
                        gv[a][b] += EXTRAPOLATE[l] * cells[l][a][b];
                        dv[a][b] += INWARD_DERIVATIVE[l] * cells[l][a][b];
                    }
                    dv[a][b] *= sign / h1;
                }
            }
            g.push(gv);
            d_xi1.push(dv);
        }
    }
    FaceMetric { face, g, d_xi1 }
}

/// Per-face-cell second fundamental form diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct FaceSample {
    pub face: Face,
    pub i: usize,
    pub k: usize,
    pub eta: f64,
    pub xi2: f64,
    /// Trace of the second fundamental form against the induced metric, inward normal.
    pub mean_curvature: f64,
    pub second_form_norm: f64,
    /// Round-metric angle (radians) between the unit normal and the left-invariant field `V₁`.
    pub v1_angle: f64,
    /// `max |g(ν, ∂_a)|` over the boundary tangents `∂_η, ∂_ξ₂`.
    pub normal_tangent_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryReport {
    pub samples: Vec<FaceSample>,
    /// Face cells within `2Δη` of a chart axis, skipped because the induced metric degenerates.
    pub excluded_cells: usize,
    pub max_abs_mean_curvature: f64,
    pub max_second_form_norm: f64,
    pub min_second_form_norm: f64,
    pub max_v1_angle: f64,
    pub max_normal_tangent_residual: f64,
}

const TANGENTIAL: [usize; 2] = [0, 2];

/// Fourth-order central difference from values at offsets `-2, -1, 1, 2`.
fn central4(v: [f64; 4], h: f64) -> f64 {
    (v[0] - 8.0 * v[1] + 8.0 * v[2] - v[3]) / (12.0 * h)
}

fn inv2(m: [[f64; 2]; 2]) -> Option<[[f64; 2]; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det <= 0.0 || !det.is_finite() {
        return None;
    }
    Some([
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ])
}

fn mul2(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Mean curvature and second fundamental form of the boundary faces.
///
/// The unit normal is `ν = ±∇ξ₁/|∇ξ₁|_g`, oriented into `ξ₁ ∈ (0, π)`. With
/// `II(∂_a, ∂_b) = -g(ν, ∇_{∂_a} ∂_b) = ∓Γ^{ξ₁}_{ab} / |dξ₁|_g`, metric derivatives come from
/// the face-extrapolated metric.
pub fn boundary_second_form(metric: &MetricField) -> Result<BoundaryReport> {
    let grid = metric.grid();
    let [ne, _, n2] = grid.dims();
    if ne < 5 {
        return Err(Error::InvalidInput(
            "boundary analysis needs at least 5 cells in η".into(),
        ));
    }
    let h = grid.spacing();
    let mut samples = Vec::new();
    let mut excluded = 0;

    for face in Face::BOTH {
        let fm = face_metric(metric, face);
        let at = |i: usize, k: usize| i * n2 + k;
        for i in 0..ne {
            if i < 2 || i + 2 >= ne {
                excluded += n2;
                continue;
            }
            for k in 0..n2 {
                let g = fm.g[at(i, k)];
                let (g_inv, _) = invert_sym(&g).ok_or_else(|| {
                    Error::InvalidMetric(format!("face metric degenerate at (i={i}, k={k})"))
                })?;
                let kk = [n2 - 2, n2 - 1, 1, 2].map(|o| (k + o) % n2);
                let mut dg = [[[0.0; 3]; 3]; 3];
                for a in 0..3 {
                    for b in 0..3 {
                        let along_eta = [i - 2, i - 1, i + 1, i + 2].map(|m| fm.g[at(m, k)][a][b]);
                        let along_xi2 = kk.map(|m| fm.g[at(i, m)][a][b]);
                        dg[0][a][b] = central4(along_eta, h[0]);
                        dg[1][a][b] = fm.d_xi1[at(i, k)][a][b];
                        dg[2][a][b] = central4(along_xi2, h[2]);
                    }
                }
                // Γ^{ξ₁}_{ab} = g^{1m} Γ_{m,ab}
                let christoffel_xi1 = |a: usize, b: usize| -> f64 {
                    (0..3)
                        .map(|m| {
                            g_inv[1][m] * 0.5 * (dg[a][m][b] + dg[b][m][a] - dg[m][a][b])
                        })
                        .sum()
                };
                let sign = fm.face.inward_sign();
                let norm_dxi1 = g_inv[1][1].sqrt();
                let mut second = [[0.0; 2]; 2];
                let mut induced = [[0.0; 2]; 2];
                for (p, &a) in TANGENTIAL.iter().enumerate() {
                    for (q, &b) in TANGENTIAL.iter().enumerate() {
                        second[p][q] = -sign * christoffel_xi1(a, b) / norm_dxi1;
                        induced[p][q] = g[a][b];
                    }
                }
                let induced_inv = inv2(induced).ok_or_else(|| {
                    Error::InvalidMetric(format!("induced metric degenerate at (i={i}, k={k})"))
                })?;
                let shape = mul2(induced_inv, second);
                let mean_curvature = shape[0][0] + shape[1][1];
                let sq = mul2(shape, shape);
                let second_form_norm = (sq[0][0] + sq[1][1]).max(0.0).sqrt();

                // ν^i = sign g^{i1} / |dξ₁|
                let nu: [f64; 3] = [0, 1, 2].map(|a| sign * g_inv[a][1] / norm_dxi1);
                let normal_tangent_residual = TANGENTIAL
                    .iter()
                    .map(|&a| (0..3).map(|m| nu[m] * g[m][a]).sum::<f64>().abs())
                    .fold(0.0, f64::max);

                let eta = (i as f64 + 0.5) * h[0];
                let xi2 = (k as f64 + 0.5) * h[2];
                let coords = [eta, face.xi1(), xi2];
                let tangents = coordinate_tangents(coords);
                let mut nu4 = [0.0; 4];
                for (a, t) in tangents.iter().enumerate() {
                    for d in 0..4 {
                        nu4[d] += nu[a] * t[d];
                    }
                }
                let v1 = frame_at(embed(coords))[0];
                let cos = (dot4(&nu4, &v1) / (dot4(&nu4, &nu4).sqrt() * dot4(&v1, &v1).sqrt()))
                    .abs()
                    .min(1.0);

                samples.push(FaceSample {
                    face,
                    i,
                    k,
                    eta,
                    xi2,
                    mean_curvature,
                    second_form_norm,
                    v1_angle: cos.acos(),
                    normal_tangent_residual,
                });
            }
        }
    }

    let fold = |f: fn(&FaceSample) -> f64, init: f64, op: fn(f64, f64) -> f64| {
        samples.iter().map(f).fold(init, op)
    };
    Ok(BoundaryReport {
        excluded_cells: excluded,
        max_abs_mean_curvature: fold(|s| s.mean_curvature.abs(), 0.0, f64::max),
        max_second_form_norm: fold(|s| s.second_form_norm, 0.0, f64::max),
        min_second_form_norm: fold(|s| s.second_form_norm, f64::INFINITY, f64::min),
        max_v1_angle: fold(|s| s.v1_angle, 0.0, f64::max),
        max_normal_tangent_residual: fold(|s| s.normal_tangent_residual, 0.0, f64::max),
        samples,
    })
}

/// Inward normal derivative `ν(u)` at every boundary face cell (both faces, all `η`).
pub fn face_normal_derivatives(u: &ScalarField, metric: &MetricField) -> Result<Vec<f64>> {
    check_shape(metric.shape(), u.shape())?;
    let grid: &HopfGrid = metric.grid();
    let [ne, n1, n2] = grid.dims();
    let h = grid.spacing();
    let vals = u.values();
    let mut out = Vec::with_capacity(2 * ne * n2);
    for face in Face::BOTH {
        let fm = face_metric(metric, face);
        let layers = face.layers(n1);
        let sign = face.inward_sign();
        let face_u: Vec<f64> = (0..ne * n2)
            .map(|c| {
                let (i, k) = (c / n2, c % n2);
                (0..LAYERS)
                    .map(|l| EXTRAPOLATE[l] * vals[grid.index(i, layers[l], k)])
                    .sum()
            })
            .collect();
        for i in 0..ne {
            for k in 0..n2 {
                let d_eta: f64 = axis_stencil(i, ne, h[0], false)
                    .iter()
                    .map(|&(m, w)| w * face_u[m * n2 + k])
                    .sum();
                let d_xi1: f64 = sign
                    * (0..LAYERS)
                        .map(|l| INWARD_DERIVATIVE[l] * vals[grid.index(i, layers[l], k)])
                        .sum::<f64>()
                    / h[1];
                let d_xi2: f64 = axis_stencil(k, n2, h[2], true)
                    .iter()
                    .map(|&(m, w)| w * face_u[i * n2 + m])
                    .sum();
                let g = fm.g[i * n2 + k];
                let (g_inv, _) = invert_sym(&g).ok_or_else(|| {
                    Error::InvalidMetric(format!("face metric degenerate at (i={i}, k={k})"))
                })?;
                let du = [d_eta, d_xi1, d_xi2];
                let nu_u: f64 =
                    sign * (0..3).map(|a| g_inv[a][1] * du[a]).sum::<f64>() / g_inv[1][1].sqrt();
                out.push(nu_u);
            }
        }
    }
    Ok(out)
}
