//! Curvature of left-invariant metrics on three-dimensional Lie groups.
//!
//! A left-invariant metric is determined by its Gram matrix `G_{ij} = g(X_i, X_j)` in a
//! basis `X_1, X_2, X_3` of the Lie algebra, and the Levi-Civita connection of left-invariant
//! fields is algebraic: the Koszul formula only involves the structure constants
//! `[X_i, X_j] = c^k_{ij} X_k` and `G`. Everything in this module is therefore exact up to
//! floating-point rounding.
//!
//! Curvature convention: `R(X,Y)Z = ∇_X ∇_Y Z - ∇_Y ∇_X Z - ∇_{[X,Y]} Z` and
//! `Ric(Y,Z) = tr(X ↦ R(X,Y)Z)`, so the round unit three-sphere has scalar curvature `+6`.

use nalgebra::{Matrix2, Matrix3, Vector3};
use num_complex::Complex64;
use serde::Serialize;

use crate::{Error, Result};

/// Rank-3 array indexed `[k][i][j]`.
pub type Tensor3 = [[[f64; 3]; 3]; 3];
/// Rank-4 array indexed `[l][k][i][j]`.
pub type Tensor4 = [[[[f64; 3]; 3]; 3]; 3];

/// Residual threshold for algebraic identities (antisymmetry, Jacobi, Bianchi, torsion).
pub const IDENTITY_TOL: f64 = 1e-12;
/// Threshold for locus decisions such as "is Einstein".
pub const LOCUS_TOL: f64 = 1e-10;

/// Basis of a three-dimensional Lie algebra, described by its structure constants.
///
/// `c[k][i][j]` is the coefficient of `X_k` in `[X_i, X_j]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LieAlgebraFrame {
    c: Tensor3,
    labels: Option<[String; 3]>,
}

impl LieAlgebraFrame {
    /// Validates antisymmetry and the Jacobi identity before accepting `c`.
    pub fn new(c: Tensor3, labels: Option<[String; 3]>) -> Result<Self> {
        let frame = LieAlgebraFrame { c, labels };
        let scale = frame.magnitude().max(1.0);
        let anti = frame.antisymmetry_residual();
        if anti > IDENTITY_TOL * scale {
            return Err(Error::InvalidFrame(format!(
                "structure constants are not antisymmetric in (i,j): residual {anti:.3e}"
            )));
        }
        let jacobi = frame.jacobi_residual();
        if jacobi > IDENTITY_TOL * scale * scale {
            return Err(Error::InvalidFrame(format!(
                "Jacobi identity fails: residual {jacobi:.3e}"
            )));
        }
        Ok(frame)
    }

    /// The abelian algebra `R^3`.
    pub fn abelian() -> Self {
        LieAlgebraFrame {
            c: [[[0.0; 3]; 3]; 3],
            labels: None,
        }
    }

    pub fn dim(&self) -> usize {
        3
    }

    pub fn constants(&self) -> &Tensor3 {
        &self.c
    }

    pub fn labels(&self) -> Option<&[String; 3]> {
        self.labels.as_ref()
    }

    /// `c^k_{ij}`.
    pub fn c(&self, k: usize, i: usize, j: usize) -> f64 {
        self.c[k][i][j]
    }

    fn magnitude(&self) -> f64 {
        self.c
            .iter()
            .flatten()
            .flatten()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `max |c^k_{ij} + c^k_{ji}|`.
    pub fn antisymmetry_residual(&self) -> f64 {
        let mut r = 0.0_f64;
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    r = r.max((self.c[k][i][j] + self.c[k][j][i]).abs());
                }
            }
        }
        r
    }

    /// `max |Σ_m (c^m_{ij} c^l_{mk} + c^m_{jk} c^l_{mi} + c^m_{ki} c^l_{mj})|` over all indices.
    pub fn jacobi_residual(&self) -> f64 {
        let c = &self.c;
        let mut r = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let mut acc = 0.0;
                        for m in 0..3 {
                            acc += c[m][i][j] * c[l][m][k]
                                + c[m][j][k] * c[l][m][i]
                                + c[m][k][i] * c[l][m][j];
                        }
                        r = r.max(acc.abs());
                    }
                }
            }
        }
        r
    }

    /// Relabels the basis: new `X'_a = X_{perm[a]}`.
    pub fn permuted(&self, perm: [usize; 3]) -> Self {
        let mut c = [[[0.0; 3]; 3]; 3];
        for (k, ck) in c.iter_mut().enumerate() {
            for (i, cki) in ck.iter_mut().enumerate() {
                for (j, v) in cki.iter_mut().enumerate() {
                    *v = self.c[perm[k]][perm[i]][perm[j]];
                }
            }
        }
        let labels = self
            .labels
            .as_ref()
            .map(|l| perm.map(|p| l[p].clone()));
        LieAlgebraFrame { c, labels }
    }
}

/// Left-invariant metric as its Gram matrix in a frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameMetric {
    g: Matrix3<f64>,
}

impl FrameMetric {
    /// Requires exact symmetry and positive definiteness.
    pub fn new(g: Matrix3<f64>) -> Result<Self> {
        if !g.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidMetric("non-finite entry".into()));
        }
        if g != g.transpose() {
            return Err(Error::InvalidMetric("Gram matrix is not symmetric".into()));
        }
        if g.cholesky().is_none() {
            return Err(Error::InvalidMetric(
                "Gram matrix is not positive definite".into(),
            ));
        }
        let min_eig = g.symmetric_eigenvalues().min();
        if min_eig <= 0.0 {
            return Err(Error::InvalidMetric(format!(
                "Gram matrix has non-positive eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(FrameMetric { g })
    }

    pub fn from_rows(rows: [[f64; 3]; 3]) -> Result<Self> {
        Self::new(Matrix3::from_fn(|i, j| rows[i][j]))
    }

    pub fn diagonal(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::new(Matrix3::from_diagonal(&Vector3::new(a, b, c)))
    }

    pub fn identity() -> Self {
        FrameMetric {
            g: Matrix3::identity(),
        }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.g
    }

    pub fn rows(&self) -> [[f64; 3]; 3] {
        [0, 1, 2].map(|i| [0, 1, 2].map(|j| self.g[(i, j)]))
    }

    pub fn inverse(&self) -> Matrix3<f64> {
        self.cholesky_factor_inverse().transpose() * self.cholesky_factor_inverse()
    }

    /// Lower-triangular `L` with `L Lᵀ = G`.
    pub fn cholesky_factor(&self) -> Matrix3<f64> {
        self.g
            .cholesky()
            .expect("validated positive definite at construction")
            .l()
    }

    pub fn cholesky_factor_inverse(&self) -> Matrix3<f64> {
        self.cholesky_factor()
            .try_inverse()
            .expect("triangular factor of a positive definite matrix is invertible")
    }

    pub fn determinant(&self) -> f64 {
        let l = self.cholesky_factor();
        let d = l[(0, 0)] * l[(1, 1)] * l[(2, 2)];
        d * d
    }

    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Self::new(self.g * lambda)
    }

    /// Same relabeling as [`LieAlgebraFrame::permuted`].
    pub fn permuted(&self, perm: [usize; 3]) -> Self {
        FrameMetric {
            g: Matrix3::from_fn(|a, b| self.g[(perm[a], perm[b])]),
        }
    }

    /// `L⁻¹ A L⁻ᵀ`: the symmetric bilinear form `A` expressed in a `G`-orthonormal basis.
    pub fn orthonormalize(&self, a: &Matrix3<f64>) -> Matrix3<f64> {
        let li = self.cholesky_factor_inverse();
        let m = li * a * li.transpose();
        (m + m.transpose()) * 0.5
    }
}

/// Berger parameters `(s, t)` for the metric `diag(1, s, t)` on the su(2) frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BergerParams {
    s: f64,
    t: f64,
}

impl BergerParams {
    /// Enforces `1 <= s <= t`.
    pub fn new(s: f64, t: f64) -> Result<Self> {
        if !(s.is_finite() && t.is_finite() && 1.0 <= s && s <= t) {
            return Err(Error::InvalidBergerParams { s, t });
        }
        Ok(BergerParams { s, t })
    }

    pub fn round() -> Self {
        BergerParams { s: 1.0, t: 1.0 }
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn weights(&self) -> [f64; 3] {
        [1.0, self.s, self.t]
    }

    pub fn frame_metric(&self) -> FrameMetric {
        FrameMetric::diagonal(1.0, self.s, self.t).expect("1 <= s <= t gives a positive diagonal")
    }
}

type C2 = Matrix2<Complex64>;

fn su2_basis() -> [C2; 3] {
    let i = Complex64::i();
    let o = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    [
        C2::new(i, o, o, -i),
        C2::new(o, one, -one, o),
        C2::new(o, i, i, o),
    ]
}

/// Real inner product `Re tr(A* B)` on 2×2 complex matrices.
fn real_inner(a: &C2, b: &C2) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Structure constants of su(2) in the basis
/// `X_1 = diag(i, -i)`, `X_2 = [[0, 1], [-1, 0]]`, `X_3 = [[0, i], [i, 0]]`,
/// computed from matrix commutators and expanded back into the basis.
pub fn su2_structure_constants() -> Result<LieAlgebraFrame> {
    let basis = su2_basis();
    let gram = Matrix3::from_fn(|a, b| real_inner(&basis[a], &basis[b]));
    let gram_inv = gram
        .try_inverse()
        .ok_or_else(|| Error::Internal("su(2) basis is linearly dependent".into()))?;

    let mut c = [[[0.0; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let bracket = basis[i] * basis[j] - basis[j] * basis[i];
            let rhs = Vector3::from_fn(|a, _| real_inner(&basis[a], &bracket));
            let coeffs = gram_inv * rhs;
            let mut rebuilt = C2::zeros();
            for k in 0..3 {
                rebuilt += basis[k] * Complex64::new(coeffs[k], 0.0);
                c[k][i][j] = coeffs[k];
            }
            let residual = (bracket - rebuilt).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if residual > IDENTITY_TOL {
                return Err(Error::Internal(format!(
                    "[X_{}, X_{}] leaves span(X_1, X_2, X_3): residual {residual:.3e}",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    LieAlgebraFrame::new(c, Some(["X1".into(), "X2".into(), "X3".into()]))
}

/// Connection coefficients `Γ^k_{ij}` (index `[k][i][j]`) with `∇_{X_i} X_j = Γ^k_{ij} X_k`,
/// from the Koszul formula for left-invariant fields:
/// `2 g(∇_i X_j, X_k) = g([X_i,X_j],X_k) - g([X_j,X_k],X_i) + g([X_k,X_i],X_j)`.
pub fn levi_civita(frame: &LieAlgebraFrame, metric: &FrameMetric) -> Tensor3 {
    let g = metric.matrix();
    let g_inv = metric.inverse();
    // lowered[i][j][k] = g([X_i, X_j], X_k)
    let mut lowered = [[[0.0; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                lowered[i][j][k] = (0..3).map(|m| frame.c(m, i, j) * g[(m, k)]).sum();
            }
        }
    }
    let mut gamma = [[[0.0; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let down: [f64; 3] = [0, 1, 2]
                .map(|k| 0.5 * (lowered[i][j][k] - lowered[j][k][i] + lowered[k][i][j]));
            for l in 0..3 {
                gamma[l][i][j] = (0..3).map(|k| down[k] * g_inv[(k, l)]).sum();
            }
        }
    }
    gamma
}

/// `max |Γ^k_{ij} - Γ^k_{ji} - c^k_{ij}|`.
pub fn torsion_residual(frame: &LieAlgebraFrame, gamma: &Tensor3) -> f64 {
    let mut r = 0.0_f64;
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                r = r.max((gamma[k][i][j] - gamma[k][j][i] - frame.c(k, i, j)).abs());
            }
        }
    }
    r
}

/// `max |g(∇_i X_j, X_k) + g(X_j, ∇_i X_k)|`; the left side of metric compatibility is zero
/// because `g(X_j, X_k)` is constant.
pub fn metric_compatibility_residual(metric: &FrameMetric, gamma: &Tensor3) -> f64 {
    let g = metric.matrix();
    let mut r = 0.0_f64;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let a: f64 = (0..3).map(|m| gamma[m][i][j] * g[(m, k)]).sum();
                let b: f64 = (0..3).map(|m| gamma[m][i][k] * g[(j, m)]).sum();
                r = r.max((a + b).abs());
            }
        }
    }
    r
}

/// Curvature of a left-invariant metric.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureReport {
    /// `Γ^k_{ij}` indexed `[k][i][j]`.
    pub gamma_coeffs: Tensor3,
    /// `R^l_{kij}` = component `l` of `R(X_i, X_j) X_k`, indexed `[l][k][i][j]`.
    pub riemann: Tensor4,
    /// `Ric(X_i, X_j)`.
    pub ricci: [[f64; 3]; 3],
    pub scalar: f64,
    /// Ricci form in a `G`-orthonormal basis obtained by Cholesky.
    pub ricci_orthonormal: [[f64; 3]; 3],
    /// Sorted eigenvalues of the Ricci endomorphism.
    pub ricci_eigenvalues: [f64; 3],
    /// Frobenius norm of the traceless Ricci endomorphism.
    pub einstein_deviation: f64,
}

fn to_rows(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    [0, 1, 2].map(|i| [0, 1, 2].map(|j| m[(i, j)]))
}

pub fn curvature_report(frame: &LieAlgebraFrame, metric: &FrameMetric) -> CurvatureReport {
    let gamma = levi_civita(frame, metric);

    let mut riemann = [[[[0.0; 3]; 3]; 3]; 3];
    for l in 0..3 {
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let mut acc = 0.0;
                    for m in 0..3 {
                        acc += gamma[m][j][k] * gamma[l][i][m] - gamma[m][i][k] * gamma[l][j][m]
                            - frame.c(m, i, j) * gamma[l][m][k];
                    }
                    riemann[l][k][i][j] = acc;
                }
            }
        }
    }

    // Ric(X_j, X_k) = Σ_i R^i_{k i j}
    let mut ricci = Matrix3::zeros();
    for j in 0..3 {
        for k in 0..3 {
            ricci[(j, k)] = (0..3).map(|i| riemann[i][k][i][j]).sum();
        }
    }
    let ricci = (ricci + ricci.transpose()) * 0.5;
    let g_inv = metric.inverse();
    let scalar = (0..3)
        .flat_map(|j| (0..3).map(move |k| (j, k)))
        .map(|(j, k)| g_inv[(j, k)] * ricci[(j, k)])
        .sum::<f64>();

    let ortho = metric.orthonormalize(&ricci);
    let trace = ortho.trace();
    let traceless = ortho - Matrix3::identity() * (trace / 3.0);
    let mut eig: Vec<f64> = ortho.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);

    CurvatureReport {
        gamma_coeffs: gamma,
        riemann,
        ricci: to_rows(&ricci),
        scalar,
        ricci_orthonormal: to_rows(&ortho),
        ricci_eigenvalues: [eig[0], eig[1], eig[2]],
        einstein_deviation: traceless.norm(),
    }
}

impl CurvatureReport {
    /// `Ric(X_i/|X_i|, X_i/|X_i|)` for each frame vector; for a diagonal Gram matrix these are
    /// the eigenvalues in frame order.
    pub fn ricci_unit_diagonal(&self, metric: &FrameMetric) -> [f64; 3] {
        let g = metric.matrix();
        [0, 1, 2].map(|i| self.ricci[i][i] / g[(i, i)])
    }

    /// `|scalar - tr(G⁻¹ Ric)|`, recomputed from the stored Ricci matrix.
    pub fn trace_residual(&self, metric: &FrameMetric) -> f64 {
        let g_inv = metric.inverse();
        let mut tr = 0.0;
        for j in 0..3 {
            for k in 0..3 {
                tr += g_inv[(j, k)] * self.ricci[j][k];
            }
        }
        (tr - self.scalar).abs()
    }

    pub fn ricci_symmetry_residual(&self) -> f64 {
        let mut r = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                r = r.max((self.ricci[i][j] - self.ricci[j][i]).abs());
            }
        }
        r
    }

    /// Largest violation among: antisymmetry in `(i,j)`, antisymmetry of the lowered tensor in
    /// its last pair, pair symmetry and the first Bianchi identity.
    pub fn riemann_symmetry_residual(&self, metric: &FrameMetric) -> f64 {
        let g = metric.matrix();
        let r = &self.riemann;
        // rm[i][j][k][l] = g(R(X_i, X_j) X_k, X_l)
        let mut rm = [[[[0.0; 3]; 3]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        rm[i][j][k][l] = (0..3).map(|m| r[m][k][i][j] * g[(m, l)]).sum();
                    }
                }
            }
        }
        let mut worst = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        worst = worst
                            .max((rm[i][j][k][l] + rm[j][i][k][l]).abs())
                            .max((rm[i][j][k][l] + rm[i][j][l][k]).abs())
                            .max((rm[i][j][k][l] - rm[k][l][i][j]).abs());
                    }
                    for l in 0..3 {
                        let bianchi = r[l][k][i][j] + r[l][i][j][k] + r[l][j][k][i];
                        worst = worst.max(bianchi.abs());
                    }
                }
            }
        }
        worst
    }

    pub fn is_einstein(&self) -> bool {
        self.einstein_deviation <= LOCUS_TOL
    }
}

/// Scalar curvature of `g_{s,t}`: `(2/(st)) (2(s + t + st) - (1 + s² + t²))`.
pub fn berger_scalar_closed(p: BergerParams) -> f64 {
    let (s, t) = (p.s, p.t);
    2.0 / (s * t) * (2.0 * (s + t + s * t) - (1.0 + s * s + t * t))
}

/// Ricci curvatures on the unit frame `{X_1, X_2/√s, X_3/√t}` of `g_{s,t}`.
pub fn berger_ricci_closed(p: BergerParams) -> [f64; 3] {
    let (s, t) = (p.s, p.t);
    let k = -1.0 / (s * t);
    [
        k * (-2.0 + 2.0 * t * t + 2.0 * s * s - 4.0 * s * t),
        k * (2.0 + 2.0 * t * t - 2.0 * s * s - 4.0 * t),
        k * (2.0 - 2.0 * t * t + 2.0 * s * s - 4.0 * s),
    ]
}

/// Curvature of the Berger metric from the structure-constant engine.
pub fn berger_curvature(p: BergerParams) -> Result<CurvatureReport> {
    let frame = su2_structure_constants()?;
    Ok(curvature_report(&frame, &p.frame_metric()))
}

/// Einstein deviation of `g_{s,t}`; zero exactly on the round metric.
pub fn einstein_locus_check(p: BergerParams) -> Result<f64> {
    Ok(berger_curvature(p)?.einstein_deviation)
}
