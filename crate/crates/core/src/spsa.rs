//! Simultaneous perturbation stochastic approximation.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng;

/// Desired per-component magnitude of the first update when calibrating `a`.
pub const CALIBRATION_TARGET_STEP: f64 = 0.1;
/// Width of the moving average used to pick the returned iterate.
pub const SMOOTHING_WINDOW: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct SpsaConfig {
    pub iterations: usize,
    /// Step-size numerator; replaced by calibration when `calibration_samples > 0`.
    pub a: f64,
    /// Perturbation-size numerator.
    pub c: f64,
    /// Stability constant `A`.
    pub stability: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub calibration_samples: usize,
    pub seed: u64,
}

impl SpsaConfig {
    /// Standard exponents, `c = 0.1`, `A = 0.1·iterations`, calibrated `a`.
    pub fn new(iterations: usize, seed: u64) -> Self {
        Self {
            iterations,
            a: 0.2,
            c: 0.1,
            stability: 0.1 * iterations as f64,
            alpha: 0.602,
            gamma: 0.101,
            calibration_samples: 25,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpsa(m));
        if !(self.alpha > 0.5 && self.alpha <= 1.0) {
            return bad(format!("alpha must lie in (0.5, 1], got {}", self.alpha));
        }
        if !(self.gamma > 0.0 && self.gamma <= 0.5) {
            return bad(format!("gamma must lie in (0, 0.5], got {}", self.gamma));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return bad(format!("c must be positive, got {}", self.c));
        }
        if !(self.a > 0.0 && self.a.is_finite()) {
            return bad(format!("a must be positive, got {}", self.a));
        }
        if !(self.stability >= 0.0 && self.stability.is_finite()) {
            return bad(format!("A must be nonnegative, got {}", self.stability));
        }
        Ok(())
    }

    /// `a_k = a/(k+1+A)^α`.
    pub fn step_gain(&self, a: f64, k: usize) -> f64 {
        a / (k as f64 + 1.0 + self.stability).powf(self.alpha)
    }

    /// `c_k = c/(k+1)^γ`.
    pub fn perturbation_gain(&self, k: usize) -> f64 {
        self.c / (k as f64 + 1.0).powf(self.gamma)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub iteration: usize,
    pub params: Vec<f64>,
    /// Mean of the two perturbed evaluations around `params`.
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct SpsaOutcome {
    pub best_params: Vec<f64>,
    pub best_iteration: Option<usize>,
    /// Parameters after the last update.
    pub final_params: Vec<f64>,
    pub trajectory: Vec<TrajectoryPoint>,
    /// Step numerator actually used.
    pub a: f64,
}

fn bernoulli_direction(rng: &mut rng::Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()
}

fn shifted(theta: &[f64], delta: &[f64], scale: f64) -> Vec<f64> {
    theta.iter().zip(delta).map(|(t, d)| t + scale * d).collect()
}

/// Index minimising the centred moving average of `values`. Only centres
/// with a full window are candidates once there are enough values.
pub fn smoothed_argmin(values: &[f64], window: usize) -> Option<usize> {
    let half = window / 2;
    let candidates = if values.len() >= window { half..values.len() - half } else { 0..values.len() };
    candidates
        .map(|k| {
            let lo = k.saturating_sub(half);
            let hi = (k + half + 1).min(values.len());
            (k, values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, _)| k)
}

/// Minimises a noisy objective. `objective(params, seed)` receives a distinct
/// evaluation seed derived from `config.seed` on every call, so a run is a
/// pure function of its configuration.
pub fn spsa_minimize<F>(mut objective: F, initial: &[f64], config: &SpsaConfig) -> Result<SpsaOutcome>
where
    F: FnMut(&[f64], u64) -> f64,
{
    config.validate()?;
    let n = initial.len();
    if n == 0 {
        return Ok(SpsaOutcome {
            best_params: Vec::new(),
            best_iteration: None,
            final_params: Vec::new(),
            trajectory: Vec::new(),
            a: config.a,
        });
    }

    let mut directions = rng::rng_from(rng::split_named(config.seed, "perturbation"));
    let eval_root = rng::split_named(config.seed, "evaluation");
    let mut eval_count = 0u64;
    let mut evaluate = |params: &[f64], iteration: usize| -> Result<f64> {
        let seed = rng::split(eval_root, eval_count);
        eval_count += 1;
        let v = objective(params, seed);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteObjective { iteration, value: v })
        }
    };

    let mut a = config.a;
    if config.calibration_samples > 0 {
        let c0 = config.perturbation_gain(0);
        let mut magnitude = 0.0;
        for _ in 0..config.calibration_samples {
            let delta = bernoulli_direction(&mut directions, n);
            let plus = evaluate(&shifted(initial, &delta, c0), 0)?;
            let minus = evaluate(&shifted(initial, &delta, -c0), 0)?;
            magnitude += (plus - minus).abs() / (2.0 * c0);
        }
        magnitude /= config.calibration_samples as f64;
        if magnitude > 0.0 {
            a = CALIBRATION_TARGET_STEP * (1.0 + config.stability).powf(config.alpha) / magnitude;
        }
    }

    let mut theta = initial.to_vec();
    let mut trajectory = Vec::with_capacity(config.iterations);
    for k in 0..config.iterations {
        let ak = config.step_gain(a, k);
        let ck = config.perturbation_gain(k);
        let delta = bernoulli_direction(&mut directions, n);
        let plus = evaluate(&shifted(&theta, &delta, ck), k)?;
        let minus = evaluate(&shifted(&theta, &delta, -ck), k)?;
        trajectory.push(TrajectoryPoint { iteration: k, params: theta.clone(), objective: 0.5 * (plus + minus) });
        let diff = (plus - minus) / (2.0 * ck);
        for (t, d) in theta.iter_mut().zip(&delta) {
            *t -= ak * diff / d;
        }
    }

    let objectives: Vec<f64> = trajectory.iter().map(|p| p.objective).collect();
    let best_iteration = smoothed_argmin(&objectives, SMOOTHING_WINDOW);
    let best_params = best_iteration.map_or_else(|| theta.clone(), |k| trajectory[k].params.clone());
    Ok(SpsaOutcome { best_params, best_iteration, final_params: theta, trajectory, a })
}
