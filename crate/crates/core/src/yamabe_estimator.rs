//! Minimization of the Sobolev quotient over grid functions.
//!
//! Descent runs on the sphere `∫|f|^p dv = 1`: take a step against the `L²(dv_g)` gradient,
//! rescale back onto the sphere, and accept only if the quotient drops (Armijo backtracking).
//! The first trial step of each iteration is the Barzilai–Borwein length from the previous
//! accepted step. Restarts are independent and run in parallel; the best value wins, with
//! ties going to the lower restart index.

use rayon::prelude::*;
use serde::Serialize;

use crate::conformal_energy::{einstein_hilbert, neumann_residual, DiscreteQuotient};
use crate::su2_chart::{MetricField, ScalarField};
use crate::trial::{random_trial, TrialFamily};
use crate::{Error, Result};

/// Relative changes below `tol` on this many consecutive accepted steps mean convergence.
pub const CONVERGENCE_STREAK: usize = 5;
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimatorOptions {
    pub max_iters: usize,
    pub step: f64,
    pub tol: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        EstimatorOptions {
            max_iters: 300,
            step: 1e-2,
            tol: 1e-9,
            restarts: 4,
            seed: 0,
        }
    }
}

impl EstimatorOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::InvalidInput("max_iters must be at least 1".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidInput(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidInput(format!("step must be positive, got {}", self.step)));
        }
        if self.restarts < 1 {
            return Err(Error::InvalidInput("restarts must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct QuotientEstimate {
    pub value: f64,
    /// Normalized to `∫|f|^p dv = 1`.
    pub minimizer: ScalarField,
    pub iterations_used: usize,
    pub converged: bool,
    pub neumann_residual_of_minimizer: f64,
    /// Quotient after every accepted step, starting with the initial value.
    pub trace: Vec<f64>,
    /// Index of the restart that produced the estimate; 0 is the constant start.
    pub restart: usize,
}

/// The JSON form of an estimate.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateSummary {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
    pub neumann_residual: f64,
    pub trace: Vec<f64>,
}

impl QuotientEstimate {
    pub fn summary(&self) -> EstimateSummary {
        EstimateSummary {
            value: self.value,
            converged: self.converged,
            iterations: self.iterations_used,
            neumann_residual: self.neumann_residual_of_minimizer,
            trace: self.trace.clone(),
        }
    }

    /// Standard deviation of the minimizer over its mean, with respect to `dv_g`.
    pub fn normalized_spread(&self, metric: &MetricField) -> f64 {
        let w = metric.weights();
        let vol: f64 = w.iter().sum();
        let v = self.minimizer.values();
        let mean = v.iter().zip(w).map(|(x, w)| x * w).sum::<f64>() / vol;
        let var = v.iter().zip(w).map(|(x, w)| (x - mean).powi(2) * w).sum::<f64>() / vol;
        var.sqrt() / mean.abs()
    }
}

struct Run {
    f: ScalarField,
    value: f64,
    trace: Vec<f64>,
    iterations: usize,
    converged: bool,
}

fn failure(message: String, trace: &[f64]) -> Error {
    Error::NumericalFailure {
        message,
        trace: trace.to_vec(),
    }
}

fn descend(q: &DiscreteQuotient<'_>, start: &ScalarField, opts: &EstimatorOptions) -> Result<Run> {
    let grid = q.metric().grid();
    let mut f = q.normalize(start)?;
    let mut parts = q.evaluate(&f)?;
    let mut trace = vec![parts.value];
    if !parts.value.is_finite() {
        return Err(failure("quotient of the initial trial is not finite".into(), &trace));
    }
    let mut grad = q.l2_gradient(&f, &parts)?;
    let mut last_step: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut streak = 0;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iters {
        let g2 = q.inner(&grad, &grad);
        if !g2.is_finite() {
            return Err(failure(format!("gradient not finite at iteration {iterations}"), &trace));
        }
        if g2 == 0.0 {
            converged = true;
            break;
        }
        let mut alpha = match &last_step {
            Some((s, y)) => {
                let sy = q.inner(s, y);
                let ss = q.inner(s, s);
                if sy > 0.0 && (ss / sy).is_finite() {
                    ss / sy
                } else {
                    opts.step
                }
            }
            None => opts.step,
        };

        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let moved: Vec<f64> = f
                .values()
                .iter()
                .zip(&grad)
                .map(|(v, g)| v - alpha * g)
                .collect();
            if moved.iter().any(|v| !v.is_finite()) {
                return Err(failure(format!("iterate not finite at iteration {iterations}"), &trace));
            }
            let candidate = match q.normalize(&ScalarField::new(grid, moved)?) {
                Ok(c) => c,
                Err(Error::DegenerateTrial { .. }) => {
                    alpha *= 0.5;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let cand_parts = q.evaluate(&candidate)?;
            if !cand_parts.value.is_finite() {
                return Err(failure(
                    format!("quotient not finite at iteration {iterations}"),
                    &trace,
                ));
            }
            if cand_parts.value <= parts.value - ARMIJO * alpha * g2 {
                accepted = Some((candidate, cand_parts));
                break;
            }
            alpha *= 0.5;
        }
        // no decrease at any step length: stationary to working precision
        let Some((next, next_parts)) = accepted else {
            converged = true;
            break;
        };
        iterations += 1;

        let next_grad = q.l2_gradient(&next, &next_parts)?;
        let s: Vec<f64> = next.values().iter().zip(f.values()).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = next_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        last_step = Some((s, y));

        let rel = (parts.value - next_parts.value).abs() / parts.value.abs().max(f64::MIN_POSITIVE);
        if next_parts.value > parts.value {
            return Err(Error::Internal("accepted step increased the quotient".into()));
        }
        trace.push(next_parts.value);
        f = next;
        parts = next_parts;
        grad = next_grad;

        streak = if rel < opts.tol { streak + 1 } else { 0 };
        if streak >= CONVERGENCE_STREAK {
            converged = true;
            break;
        }
    }

    Ok(Run {
        value: parts.value,
        f,
        trace,
        iterations,
        converged,
    })
}

/// Estimates `inf Q_g` over grid functions.
///
/// Restart 0 starts from the constant function; restart `r ≥ 1` from bump trial `r` under
/// `opts.seed`.
pub fn estimate(
    metric: &MetricField,
    scalar: &ScalarField,
    opts: &EstimatorOptions,
) -> Result<QuotientEstimate> {
    opts.validate()?;
    if scalar.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("scalar curvature must be finite".into()));
    }
    let q = DiscreteQuotient::new(metric, scalar)?;
    let grid = metric.grid();
    let runs: Vec<Result<Run>> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let start = if r == 0 {
                ScalarField::constant(grid, 1.0)
            } else {
                random_trial(grid, TrialFamily::Bump, opts.seed, r as u64)
            };
            descend(&q, &start, opts)
        })
        .collect();

    let mut best: Option<(usize, Run)> = None;
    for (r, run) in runs.into_iter().enumerate() {
        let run = run?;
        if best.as_ref().is_none_or(|(_, b)| run.value < b.value) {
            best = Some((r, run));
        }
    }
    let (restart, run) = best.ok_or_else(|| Error::Internal("no restarts ran".into()))?;
    Ok(QuotientEstimate {
        value: run.value,
        neumann_residual_of_minimizer: neumann_residual(&run.f, metric)?,
        minimizer: run.f,
        iterations_used: run.iterations,
        converged: run.converged,
        trace: run.trace,
        restart,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeReport {
    pub n_trials: usize,
    pub min_over_trials: f64,
    /// Index of the minimizing trial; 0 is the constant function.
    pub argmin: usize,
    pub energy: f64,
    /// `(min_over_trials - energy) / |energy|`.
    pub gap_to_energy: f64,
}

/// Evaluates the quotient on the constant function and `n_trials - 1` random bump and
/// harmonic trials (alternating), reporting the minimum against `E(g)`.
pub fn yamabe_property_probe(
    metric: &MetricField,
    scalar: &ScalarField,
    n_trials: usize,
    seed: u64,
) -> Result<ProbeReport> {
    if n_trials < 1 {
        return Err(Error::InvalidInput("n_trials must be at least 1".into()));
    }
    let q = DiscreteQuotient::new(metric, scalar)?;
    let grid = metric.grid();
    let energy = einstein_hilbert(metric, scalar)?.energy;
    let values: Vec<Result<f64>> = (0..n_trials)
        .into_par_iter()
        .map(|k| {
            let f = match k {
                0 => ScalarField::constant(grid, 1.0),
                k if k % 2 == 1 => random_trial(grid, TrialFamily::Bump, seed, k as u64),
                k => random_trial(grid, TrialFamily::Harmonic, seed, k as u64),
            };
            Ok(q.evaluate(&f)?.value)
        })
        .collect();
    let mut min = f64::INFINITY;
    let mut argmin = 0;
    for (k, v) in values.into_iter().enumerate() {
        let v = v?;
        if v < min {
            min = v;
            argmin = k;
        }
    }
    Ok(ProbeReport {
        n_trials,
        min_over_trials: min,
        argmin,
        energy,
        gap_to_energy: (min - energy) / energy.abs(),
    })
}
