//! Seeded low-frequency trial functions on the hemisphere chart.
//!
//! Every family is a smooth function of the ambient coordinates `x ∈ S³ ⊂ ℝ⁴`, so it stays
//! resolvable on coarse grids. Trial `index` under `seed` is reproducible on its own,
//! independent of how many other trials are drawn or in which order.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::su2_chart::{HopfGrid, ScalarField, Vec4};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrialFamily {
    /// Positive offset plus a few Gaussian bumps and a quadratic polynomial.
    Bump,
    /// Offset plus a restricted harmonic polynomial of degree at most two.
    Harmonic,
    /// `1 + x₁² G(x)` with `x₁ = Im z`. Its normal derivative vanishes on `{Im z = 0}` for
    /// every metric, because `x₁` does.
    Admissible,
    /// Bumps and polynomials in `(x₀, x₁², x₂, x₃)`; reflection-even across the boundary.
    Even,
}

/// Per-trial generator: stream `index` of the ChaCha sequence seeded by `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn random_point_on_sphere(rng: &mut ChaCha8Rng) -> Vec4 {
    loop {
        let p: Vec4 = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n2: f64 = p.iter().map(|v| v * v).sum();
        if n2 > 1e-4 && n2 <= 1.0 {
            let n = n2.sqrt();
            return p.map(|v| v / n);
        }
    }
}

/// Sum of Gaussian bumps `Σ a_m exp(-|x - c_m|²/σ_m²)` plus `b·x + xᵀ Q x`.
#[derive(Debug, Clone)]
struct AmbientMix {
    bumps: Vec<(Vec4, f64, f64)>,
    linear: Vec4,
    quadratic: [[f64; 4]; 4],
}

impl AmbientMix {
    fn random(rng: &mut ChaCha8Rng, amplitude: f64) -> Self {
        let n_bumps = rng.random_range(1..=3);
        let bumps = (0..n_bumps)
            .map(|_| {
                let c = random_point_on_sphere(rng);
                let sigma = rng.random_range(0.7..1.5);
                let a = amplitude * rng.random_range(-1.0..1.0);
                (c, sigma, a)
            })
            .collect();
        let linear = std::array::from_fn(|_| 0.5 * amplitude * rng.random_range(-1.0..1.0));
        let mut quadratic = [[0.0; 4]; 4];
        for a in 0..4 {
            for b in a..4 {
                let v = 0.25 * amplitude * rng.random_range(-1.0..1.0);
                quadratic[a][b] = v;
                quadratic[b][a] = v;
            }
        }
        AmbientMix {
            bumps,
            linear,
            quadratic,
        }
    }

    fn eval(&self, x: Vec4) -> f64 {
        let mut v = 0.0;
        for (c, sigma, a) in &self.bumps {
            let d2: f64 = (0..4).map(|i| (x[i] - c[i]).powi(2)).sum();
            v += a * (-d2 / (sigma * sigma)).exp();
        }
        for a in 0..4 {
            v += self.linear[a] * x[a];
            for b in 0..4 {
                v += self.quadratic[a][b] * x[a] * x[b];
            }
        }
        v
    }
}

/// Traceless quadratic plus linear part: harmonic on ℝ⁴, so its restriction is a sum of
/// spherical harmonics of degree 1 and 2.
fn harmonic(rng: &mut ChaCha8Rng, amplitude: f64) -> impl Fn(Vec4) -> f64 {
    let linear: Vec4 = std::array::from_fn(|_| amplitude * rng.random_range(-1.0..1.0));
    let mut q = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in a..4 {
            let v = 0.5 * amplitude * rng.random_range(-1.0..1.0);
            q[a][b] = v;
            q[b][a] = v;
        }
    }
    let trace = (0..4).map(|a| q[a][a]).sum::<f64>() / 4.0;
    for (a, row) in q.iter_mut().enumerate() {
        row[a] -= trace;
    }
    move |x: Vec4| {
        let mut v = 0.0;
        for a in 0..4 {
            v += linear[a] * x[a];
            for b in 0..4 {
                v += q[a][b] * x[a] * x[b];
            }
        }
        v
    }
}

/// Draws trial `index` of `family` under `seed`.
pub fn random_trial(grid: &HopfGrid, family: TrialFamily, seed: u64, index: u64) -> ScalarField {
    let mut rng = trial_rng(seed, index);
    match family {
        TrialFamily::Bump => {
            let offset = rng.random_range(0.5..1.5);
            let mix = AmbientMix::random(&mut rng, 0.6);
            ScalarField::from_ambient(grid, |x| offset + mix.eval(x))
        }
        TrialFamily::Harmonic => {
            let offset = rng.random_range(0.5..1.5);
            let h = harmonic(&mut rng, 0.4);
            ScalarField::from_ambient(grid, |x| offset + h(x))
        }
        TrialFamily::Admissible => {
            let mix = AmbientMix::random(&mut rng, 0.5);
            ScalarField::from_ambient(grid, |x| 1.0 + x[1] * x[1] * mix.eval(x))
        }
        TrialFamily::Even => {
            let offset = rng.random_range(0.5..1.5);
            let mix = AmbientMix::random(&mut rng, 0.6);
            ScalarField::from_ambient(grid, |x| {
                let folded = [x[0], x[1] * x[1], x[2], x[3]];
                offset + mix.eval(folded)
            })
        }
    }
}
