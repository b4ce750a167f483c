//! Sufficient conditions for a metric to minimize the normalized total scalar curvature in its
//! relative conformal class, given a reference metric that already does.
//!
//! Against a reference `g` with `R_g > 0`, a metric `h` with constant scalar curvature and
//! `dv_h = γ dv_g` qualifies when `R_h h ≤ R_g g` as quadratic forms. Strict inequality
//! additionally gives uniqueness up to scaling of the metric. On left-invariant metrics the
//! comparison is the spectrum of `R_g I - R_h L⁻¹ H L⁻ᵀ` with `L Lᵀ = G`.

use rayon::prelude::*;
use serde::Serialize;

use crate::lie_curvature::{
    berger_curvature, berger_scalar_closed, BergerParams, FrameMetric, LOCUS_TOL,
};
use crate::su2_chart::MetricField;
use crate::{Error, Result};

/// `min_eig > STRICT_REL·‖R_g G‖` is a strict inequality.
pub const STRICT_REL: f64 = 1e-10;
/// `min_eig ≥ -PSD_REL·‖R_g G‖` still counts as semidefinite.
pub const PSD_REL: f64 = 1e-12;
/// Pointwise volume-ratio spread allowed for field inputs.
pub const VOLUME_RATIO_REL: f64 = 1e-8;
/// Scalar curvature of the round reference metric `g_{1,1}`.
pub const ROUND_SCALAR: f64 = 6.0;
/// Bisection stops once the bracket is shorter than this.
pub const BISECTION_TOL: f64 = 1e-8;
/// Allowed distance between a bisected root and its closed form.
pub const CLOSED_FORM_TOL: f64 = 1e-6;

/// `γ` with `dv_h = γ dv_g`: `√(det H / det G)`.
pub fn volume_ratio(g: &FrameMetric, h: &FrameMetric) -> f64 {
    (h.determinant() / g.determinant()).sqrt()
}

/// Volume ratio of two metric fields; it must be the same at every cell.
pub fn volume_ratio_fields(g: &MetricField, h: &MetricField) -> Result<f64> {
    if g.shape() != h.shape() {
        return Err(Error::ShapeMismatch {
            expected: g.shape(),
            actual: h.shape(),
        });
    }
    let ratios: Vec<f64> = h
        .sqrt_det()
        .iter()
        .zip(g.sqrt_det())
        .map(|(a, b)| a / b)
        .collect();
    let gamma = ratios[0];
    let spread = ratios
        .iter()
        .map(|r| (r - gamma).abs())
        .fold(0.0, f64::max);
    if !(spread <= VOLUME_RATIO_REL * gamma.abs()) {
        return Err(Error::HypothesisViolation(format!(
            "volume forms are not proportional: ratio varies by {spread:.3e} around {gamma:.6}"
        )));
    }
    Ok(gamma)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// `R_h h < R_g g`: `h` minimizes, uniquely up to scaling.
    AppliesStrict,
    /// `R_h h ≤ R_g g` with equality in some direction: `h` minimizes.
    AppliesBoundary,
    Fails,
    /// `R_h ≤ 0`: minimizing regardless of the comparison.
    AutoYamabeNonpositive,
    /// `R_g ≤ 0`: the comparison has no content.
    NotApplicable,
}

impl Verdict {
    pub fn applies(self) -> bool {
        matches!(self, Verdict::AppliesStrict | Verdict::AppliesBoundary)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub gamma: f64,
    /// Smallest eigenvalue of `R_g I - R_h L⁻¹ H L⁻ᵀ`.
    pub min_eig: f64,
    /// Sorted spectrum of the same matrix.
    pub eigenvalues: [f64; 3],
    /// `min_eig / ‖R_g G‖_F`.
    pub strict_margin: f64,
    pub verdict: Verdict,
    /// Strict inequality also pins `h` down up to `h ↦ λh`.
    pub unique_up_to_scaling: bool,
    pub notes: Vec<String>,
}

fn require_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be finite, got {v}")))
    }
}

/// Compares `(H, R_h)` against the reference `(G, R_g)`.
///
/// The reference is taken to be a minimizer with constant scalar curvature; that is recorded
/// in the notes, not checked.
pub fn theorem1_check(g: &FrameMetric, r_g: f64, h: &FrameMetric, r_h: f64) -> Result<CriterionReport> {
    require_finite("R_g", r_g)?;
    require_finite("R_h", r_h)?;
    let gamma = volume_ratio(g, h);
    let pencil = nalgebra::Matrix3::identity() * r_g - g.orthonormalize(h.matrix()) * r_h;
    let pencil = (pencil + pencil.transpose()) * 0.5;
    let mut eig: Vec<f64> = pencil.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    let min_eig = eig[0];
    let scale = (g.matrix() * r_g).norm();
    let strict_margin = if scale > 0.0 { min_eig / scale } else { f64::NAN };
    let tol_strict = STRICT_REL * scale;
    let tol_psd = PSD_REL * scale;

    let mut notes = vec![
        format!("R_g = {r_g} ({})", sign_word(r_g)),
        format!("R_h = {r_h} ({})", sign_word(r_h)),
        "assumed: reference metric minimizes in its class; both scalar curvatures constant".into(),
    ];
    let verdict = if r_g <= 0.0 {
        notes.push("reference scalar curvature is not positive; comparison not applicable".into());
        Verdict::NotApplicable
    } else if r_h <= 0.0 {
        notes.push("non-positive scalar curvature minimizes without comparison".into());
        Verdict::AutoYamabeNonpositive
    } else if min_eig > tol_strict {
        Verdict::AppliesStrict
    } else if min_eig.abs() <= tol_strict && min_eig >= -tol_psd {
        Verdict::AppliesBoundary
    } else {
        Verdict::Fails
    };
    Ok(CriterionReport {
        gamma,
        min_eig,
        eigenvalues: [eig[0], eig[1], eig[2]],
        strict_margin,
        verdict,
        unique_up_to_scaling: verdict == Verdict::AppliesStrict,
        notes,
    })
}

fn sign_word(v: f64) -> &'static str {
    if v > 0.0 {
        "positive"
    } else if v < 0.0 {
        "negative"
    } else {
        "zero"
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BergerClass {
    Einstein,
    Theorem1Strict,
    Theorem1Boundary,
    /// Positive scalar curvature but the comparison with the round metric fails.
    PositiveScalarUnresolved,
    AutoYamabeNonpositive,
}

impl BergerClass {
    pub fn name(self) -> &'static str {
        match self {
            BergerClass::Einstein => "Einstein",
            BergerClass::Theorem1Strict => "Theorem1Strict",
            BergerClass::Theorem1Boundary => "Theorem1Boundary",
            BergerClass::PositiveScalarUnresolved => "PositiveScalarUnresolved",
            BergerClass::AutoYamabeNonpositive => "AutoYamabeNonpositive",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BergerClassification {
    pub class: BergerClass,
    pub scalar: f64,
    pub einstein_deviation: f64,
    pub report: CriterionReport,
}

/// Classifies `g_{s,t}` against the round metric.
pub fn berger_classify(p: BergerParams) -> Result<BergerClassification> {
    let einstein_deviation = berger_curvature(p)?.einstein_deviation;
    let scalar = berger_scalar_closed(p);
    let report = theorem1_check(&FrameMetric::identity(), ROUND_SCALAR, &p.frame_metric(), scalar)?;
    let class = if einstein_deviation <= LOCUS_TOL {
        BergerClass::Einstein
    } else if scalar <= LOCUS_TOL {
        BergerClass::AutoYamabeNonpositive
    } else {
        match report.verdict {
            Verdict::AppliesStrict => BergerClass::Theorem1Strict,
            Verdict::AppliesBoundary => BergerClass::Theorem1Boundary,
            _ => BergerClass::PositiveScalarUnresolved,
        }
    };
    Ok(BergerClassification {
        class,
        scalar,
        einstein_deviation,
        report,
    })
}

/// One line of a region map. Samples with `t < s` are outside the parameter domain and
/// carry no numbers.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub s: f64,
    pub t: f64,
    #[serde(rename = "R")]
    pub scalar: Option<f64>,
    pub einstein_dev: Option<f64>,
    pub min_eig: Option<f64>,
    pub gamma: Option<f64>,
    pub verdict: String,
}

pub const OUT_OF_DOMAIN: &str = "OutOfDomain";

pub fn sweep_row(s: f64, t: f64) -> Result<SweepRow> {
    require_finite("s", s)?;
    require_finite("t", t)?;
    if s < 1.0 {
        return Err(Error::InvalidBergerParams { s, t });
    }
    if t < s {
        return Ok(SweepRow {
            s,
            t,
            scalar: None,
            einstein_dev: None,
            min_eig: None,
            gamma: None,
            verdict: OUT_OF_DOMAIN.into(),
        });
    }
    let c = berger_classify(BergerParams::new(s, t)?)?;
    Ok(SweepRow {
        s,
        t,
        scalar: Some(c.scalar),
        einstein_dev: Some(c.einstein_deviation),
        min_eig: Some(c.report.min_eig),
        gamma: Some(c.report.gamma),
        verdict: c.class.name().into(),
    })
}

/// All `(s, t)` pairs, `s`-major, computed in parallel and returned in order.
pub fn sweep(s_values: &[f64], t_values: &[f64]) -> Result<Vec<SweepRow>> {
    let pairs: Vec<(f64, f64)> = s_values
        .iter()
        .flat_map(|&s| t_values.iter().map(move |&t| (s, t)))
        .collect();
    pairs.par_iter().map(|&(s, t)| sweep_row(s, t)).collect()
}

/// Bisects `f` on `[lo, hi]` given `f(lo) < 0 ≤ f(hi)`.
fn bisect(f: impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<f64> {
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// First sign change from negative to non-negative of `f` on a uniform scan of `[lo, hi]`.
fn scan_bracket(f: &impl Fn(f64) -> Result<f64>, lo: f64, hi: f64, n: usize) -> Result<(f64, f64)> {
    let at = |k: usize| lo + (hi - lo) * k as f64 / n as f64;
    let mut prev = f(at(0))?;
    for k in 1..=n {
        let v = f(at(k))?;
        if prev < 0.0 && v >= 0.0 {
            return Ok((at(k - 1), at(k)));
        }
        prev = v;
    }
    Err(Error::Bracket { lo, hi })
}

fn berger_min_eig(s: f64, t: f64) -> Result<f64> {
    let p = BergerParams::new(s, t)?;
    let r = berger_curvature(p)?.scalar;
    Ok(theorem1_check(&FrameMetric::identity(), ROUND_SCALAR, &p.frame_metric(), r)?.min_eig)
}

fn check_closed_form(what: &str, got: f64, want: f64) -> Result<f64> {
    if (got - want).abs() > CLOSED_FORM_TOL {
        return Err(Error::Internal(format!(
            "{what}: bisection gave {got}, closed form {want}"
        )));
    }
    Ok(got)
}

/// Smallest `t` at which `g_{s,t}` passes the comparison with the round metric.
///
/// The comparison uses the curvature engine's scalar curvature; the result is then checked
/// against `s + √s + 1`.
pub fn boundary_curve(s: f64) -> Result<f64> {
    require_finite("s", s)?;
    if s < 1.0 {
        return Err(Error::InvalidInput(format!("s must be at least 1, got {s}")));
    }
    let f = |t: f64| berger_min_eig(s, t);
    let (lo, hi) = scan_bracket(&f, s, s + 4.0, 400)?;
    let t = bisect(f, lo, hi)?;
    check_closed_form("criterion boundary", t, s + s.sqrt() + 1.0)
}

/// The `t > s` at which the scalar curvature of `g_{s,t}` changes sign, checked against
/// `(1 + √s)²`.
pub fn scalar_sign_boundary(s: f64) -> Result<f64> {
    require_finite("s", s)?;
    if s < 1.0 {
        return Err(Error::InvalidInput(format!("s must be at least 1, got {s}")));
    }
    let neg_r = |t: f64| -> Result<f64> { Ok(-berger_curvature(BergerParams::new(s, t)?)?.scalar) };
    let (lo, hi) = (s, 2.0 * s + 3.0);
    if !(neg_r(lo)? < 0.0 && neg_r(hi)? >= 0.0) {
        return Err(Error::Bracket { lo, hi });
    }
    let t = bisect(neg_r, lo, hi)?;
    check_closed_form("scalar sign boundary", t, (1.0 + s.sqrt()).powi(2))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PathSample {
    pub t: f64,
    #[serde(rename = "R")]
    pub scalar: f64,
    pub min_eig: f64,
    pub gamma: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct PathReport {
    pub t_start: f64,
    pub t_end: f64,
    /// Uniform samples including both ends, ordered by parameter.
    pub samples: Vec<PathSample>,
    /// Length of the final stretch of `[T, T')` on which every sample passes.
    pub delta: f64,
    pub endpoint_scalar: f64,
}

/// Scalar curvature allowed at the end of a path.
pub const ENDPOINT_TOL: f64 = 1e-10;

/// Checks a deformation `t ↦ (G_t, R_t)` on `[T, T']` against its starting metric.
///
/// Requires `R_t > 0` before the end and `R_{T'} = 0`; each sample is compared with `g_T`,
/// which the caller asserts is a minimizer. The endpoint has `R = 0` and is reported but not
/// counted toward `delta`.
pub fn corollary_path_check(
    path: impl Fn(f64) -> Result<(FrameMetric, f64)>,
    t_start: f64,
    t_end: f64,
    steps: usize,
) -> Result<PathReport> {
    require_finite("T", t_start)?;
    require_finite("T'", t_end)?;
    if t_end < t_start {
        return Err(Error::InvalidInput(format!(
            "path end {t_end} precedes its start {t_start}"
        )));
    }
    if t_end == t_start {
        let (_, r) = path(t_end)?;
        return Ok(PathReport {
            t_start,
            t_end,
            samples: Vec::new(),
            delta: 0.0,
            endpoint_scalar: r,
        });
    }
    if steps < 1 {
        return Err(Error::InvalidInput("a path needs at least one step".into()));
    }
    let param = |k: usize| {
        if k == steps {
            t_end
        } else {
            t_start + (t_end - t_start) * k as f64 / steps as f64
        }
    };
    let (g_ref, r_ref) = path(t_start)?;
    let mut samples = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = param(k);
        let (h, r) = path(t)?;
        if k < steps && !(r > 0.0) {
            return Err(Error::HypothesisViolation(format!(
                "condition (3) R > 0 before the endpoint fails at t = {t} (R = {r})"
            )));
        }
        if k == steps && !(r.abs() <= ENDPOINT_TOL) {
            return Err(Error::HypothesisViolation(format!(
                "condition (4) R = 0 at the endpoint fails at t = {t} (R = {r})"
            )));
        }
        let rep = theorem1_check(&g_ref, r_ref, &h, r)?;
        samples.push(PathSample {
            t,
            scalar: r,
            min_eig: rep.min_eig,
            gamma: rep.gamma,
            verdict: rep.verdict,
        });
    }
    let endpoint_scalar = samples[steps].scalar;
    let interior = &samples[..steps];
    let first_of_tail = interior
        .iter()
        .rposition(|s| !s.verdict.applies())
        .map_or(0, |k| k + 1);
    let delta = if first_of_tail < steps {
        t_end - interior[first_of_tail].t
    } else {
        0.0
    };
    Ok(PathReport {
        t_start,
        t_end,
        samples,
        delta,
        endpoint_scalar,
    })
}

/// The Berger line `t ↦ g_{s,t}` as a path, scalar curvature from the engine.
pub fn berger_path(s: f64) -> impl Fn(f64) -> Result<(FrameMetric, f64)> {
    move |t| {
        let p = BergerParams::new(s, t)?;
        Ok((p.frame_metric(), berger_curvature(p)?.scalar))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn berger(s: f64, t: f64) -> FrameMetric {
        BergerParams::new(s, t).unwrap().frame_metric()
    }

    #[test]
    fn volume_ratios() {
        let i = FrameMetric::identity();
        assert!((volume_ratio(&i, &berger(1.0, 3.0)) - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(volume_ratio(&i, &i), 1.0);
        assert!((volume_ratio(&i, &berger(2.0, 4.5)) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn criterion_fixtures() {
        let i = FrameMetric::identity();
        // 6I - 2 diag(1,1,3) = diag(4,4,0)
        let r = theorem1_check(&i, 6.0, &berger(1.0, 3.0), 2.0).unwrap();
        assert_eq!(r.verdict, Verdict::AppliesBoundary);
        assert!(r.min_eig.abs() < 1e-10);
        // 6I - 1 diag(1,1,3.5) = diag(5,5,2.5)
        let r = theorem1_check(&i, 6.0, &berger(1.0, 3.5), 1.0).unwrap();
        assert_eq!(r.verdict, Verdict::AppliesStrict);
        assert!((r.min_eig - 2.5).abs() < 1e-10);
        assert!(r.unique_up_to_scaling);
        // 6I - 4 diag(1,1,2) = diag(2,2,-2)
        let r = theorem1_check(&i, 6.0, &berger(1.0, 2.0), 4.0).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        assert!((r.min_eig + 2.0).abs() < 1e-12);
    }

    #[test]
    fn sign_routing() {
        let i = FrameMetric::identity();
        let r = theorem1_check(&i, -1.0, &i, 6.0).unwrap();
        assert_eq!(r.verdict, Verdict::NotApplicable);
        let r = theorem1_check(&i, 6.0, &berger(1.0, 4.5), -0.1).unwrap();
        assert_eq!(r.verdict, Verdict::AutoYamabeNonpositive);
        assert!(theorem1_check(&i, f64::NAN, &i, 1.0).is_err());
    }

    #[test]
    fn classification_examples() {
        let c = |s, t| berger_classify(BergerParams::new(s, t).unwrap()).unwrap().class;
        assert_eq!(c(1.0, 1.0), BergerClass::Einstein);
        assert_eq!(c(1.0, 3.5), BergerClass::Theorem1Strict);
        assert_eq!(c(1.0, 3.0), BergerClass::Theorem1Boundary);
        assert_eq!(c(1.0, 2.0), BergerClass::PositiveScalarUnresolved);
        assert_eq!(c(1.0, 4.5), BergerClass::AutoYamabeNonpositive);
        assert_eq!(c(1.0, 4.0), BergerClass::AutoYamabeNonpositive);
    }

    #[test]
    fn curves() {
        for (s, want) in [(1.0, 3.0), (4.0, 7.0), (2.25, 4.75)] {
            assert!((boundary_curve(s).unwrap() - want).abs() < 1e-6);
        }
        for s in [1.0, 2.25, 4.0] {
            let want = (1.0 + f64::sqrt(s)).powi(2);
            assert!((scalar_sign_boundary(s).unwrap() - want).abs() < 1e-6);
        }
        assert!(boundary_curve(0.5).is_err());
    }

    #[test]
    fn path_on_round_line() {
        let rep = corollary_path_check(berger_path(1.0), 3.0, 4.0, 100).unwrap();
        assert_eq!(rep.samples.len(), 101);
        assert!(rep.samples.iter().all(|s| s.min_eig >= -1e-10));
        assert_eq!(rep.delta, 1.0);
        assert!(rep.endpoint_scalar.abs() < 1e-10);
        assert!(rep.samples.windows(2).all(|w| w[0].t < w[1].t));
    }

    #[test]
    fn degenerate_and_reversed_paths() {
        let rep = corollary_path_check(berger_path(1.0), 4.0, 4.0, 10).unwrap();
        assert_eq!(rep.delta, 0.0);
        assert!(rep.samples.is_empty());
        assert!(matches!(
            corollary_path_check(berger_path(1.0), 4.0, 3.0, 10),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn path_conditions() {
        // ends at R(1,3.5) = 1, not 0
        let err = corollary_path_check(berger_path(1.0), 3.0, 3.5, 10).unwrap_err();
        assert!(matches!(&err, Error::HypothesisViolation(m) if m.contains("(4)")));
        // passes R = 0 at t = 4 before the end
        let err = corollary_path_check(berger_path(1.0), 3.0, 4.5, 10).unwrap_err();
        assert!(matches!(&err, Error::HypothesisViolation(m) if m.contains("(3)")));
    }

    #[test]
    fn path_from_two() {
        // against g_{1,2} (R = 4) the pencil is diag(2t - 4, 2t - 4, (t - 2)²)
        let rep = corollary_path_check(berger_path(1.0), 2.0, 4.0, 100).unwrap();
        assert!(rep.samples.iter().all(|s| s.verdict != Verdict::Fails));
        assert_eq!(rep.delta, 2.0);
    }

    #[test]
    fn field_volume_ratio() {
        use crate::su2_chart::{chart_metric, HopfGrid};
        let grid = HopfGrid::cubic(6).unwrap();
        let g = chart_metric(&grid, BergerParams::round()).unwrap();
        let h = chart_metric(&grid, BergerParams::new(1.0, 3.0).unwrap()).unwrap();
        assert!((volume_ratio_fields(&g, &h).unwrap() - 3f64.sqrt()).abs() < 1e-8);
        let bent = g
            .conformally_scaled(&crate::su2_chart::ScalarField::from_fn(&grid, |[e, _, _]| 1.0 + e))
            .unwrap();
        assert!(matches!(
            volume_ratio_fields(&g, &bent),
            Err(Error::HypothesisViolation(_))
        ));
    }
}
