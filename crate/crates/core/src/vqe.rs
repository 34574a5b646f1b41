//! Variational eigensolver driver: SPSA over a layered ansatz with
//! shot-estimated objectives.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;

use crate::circuit::{build_ansatz, probabilities, AnsatzShape, Circuit, Estimate, Estimator, ExpectationMode};
use crate::error::{Error, Result};
use crate::matrix::C64;
use crate::oscillator::{build_model, matrix_square, ModelSpec};
use crate::pauli::{decompose, PauliSum};
use crate::rng;
use crate::spsa::{spsa_minimize, SpsaConfig, TrajectoryPoint};

pub const DEFAULT_SHOTS: u64 = 8192;
pub const DEFAULT_REPETITIONS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveKind {
    /// Minimise `⟨H⟩`.
    Energy,
    /// Minimise `⟨H²⟩` to land in the zero eigenspace.
    Constraint,
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ObjectiveKind::Energy => "energy",
            ObjectiveKind::Constraint => "constraint",
        })
    }
}

impl FromStr for ObjectiveKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "energy" => Ok(ObjectiveKind::Energy),
            "constraint" => Ok(ObjectiveKind::Constraint),
            _ => Err(Error::Config(format!("unknown objective {s:?} (expected energy or constraint)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VqeConfig {
    pub shape: AnsatzShape,
    pub objective: ObjectiveKind,
    pub shots: u64,
    pub spsa: SpsaConfig,
    pub repetitions: usize,
    /// Initial angles are uniform in `[−init_scale, init_scale]`.
    pub init_scale: f64,
    /// Independent SPSA starts; the one with the lowest re-estimated
    /// objective is kept.
    pub restarts: usize,
}

impl VqeConfig {
    pub fn new(shape: AnsatzShape, objective: ObjectiveKind, spsa: SpsaConfig) -> Self {
        Self { shape, objective, shots: DEFAULT_SHOTS, spsa, repetitions: DEFAULT_REPETITIONS, init_scale: std::f64::consts::PI, restarts: 1 }
    }
}

/// Evaluations averaged when ranking restarts.
pub const SELECTION_EVALUATIONS: usize = 5;

/// Seeds derived from the SPSA seed for each stochastic stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VqeSeeds {
    pub root: u64,
    pub selection: u64,
    pub final_evaluation: u64,
}

impl VqeSeeds {
    pub fn from_root(root: u64) -> Self {
        Self {
            root,
            selection: rng::split_named(root, "selection"),
            final_evaluation: rng::split_named(root, "final"),
        }
    }

    /// SPSA seed of restart `r`; restart 0 uses the root seed itself.
    pub fn restart(&self, r: usize) -> u64 {
        if r == 0 {
            self.root
        } else {
            rng::split(rng::split_named(self.root, "restart"), r as u64)
        }
    }

    pub fn init(&self, r: usize) -> u64 {
        rng::split_named(self.restart(r), "init")
    }
}

#[derive(Debug, Clone)]
pub struct VqeResult {
    pub best_params: Vec<f64>,
    /// Mean of the final repeated `⟨H⟩` evaluations.
    pub energy: f64,
    /// Standard error of that mean.
    pub stderr: f64,
    /// `⟨H²⟩` over the same repetitions, for constraint runs.
    pub h_squared: Option<Estimate>,
    /// Trajectory of the selected restart.
    pub trajectory: Vec<TrajectoryPoint>,
    pub selected_restart: usize,
    /// Re-estimated objective of every restart's best parameters.
    pub restart_objectives: Vec<f64>,
    pub final_state: Vec<C64>,
    pub final_probabilities: Vec<f64>,
    pub circuit: Circuit,
    pub seeds: VqeSeeds,
    /// SPSA step numerator after calibration.
    pub spsa_a: f64,
}

/// Sample mean and (n−1)-normalised standard deviation.
pub fn mean_and_stddev(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs `f(r)` for `r in 0..count`, in parallel when enabled; output order is
/// always `0..count`.
pub(crate) fn map_indexed<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(f).collect()
    }
}

fn repeated_values(
    psi: &[C64],
    estimator: &Estimator,
    shots: u64,
    repetitions: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    map_indexed(repetitions, |r| {
        estimator
            .estimate(psi, ExpectationMode::Shots { shots, seed: rng::split(seed, r as u64) })
            .map(|e| e.value)
    })
    .into_iter()
    .collect()
}

/// Repeats the shot-mode estimate `repetitions` times with split seeds and
/// returns the sample mean and standard deviation.
pub fn estimate_error(
    circuit: &Circuit,
    observable: &PauliSum,
    shots: u64,
    repetitions: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if repetitions < 2 {
        return Err(Error::TooFewRepetitions(repetitions));
    }
    if observable.n_qubits() != circuit.n_qubits() {
        return Err(Error::QubitMismatch { expected: circuit.n_qubits(), found: observable.n_qubits() });
    }
    let psi = circuit.run(0)?;
    let values = repeated_values(&psi, &Estimator::new(observable.clone()), shots, repetitions, seed)?;
    Ok(mean_and_stddev(&values))
}

pub fn initial_parameters(shape: &AnsatzShape, scale: f64, seed: u64) -> Vec<f64> {
    let mut r = rng::rng_from(seed);
    (0..shape.parameter_count())
        .map(|_| if scale > 0.0 { r.random_range(-scale..=scale) } else { 0.0 })
        .collect()
}

pub fn vqe_run(spec: &ModelSpec, config: &VqeConfig) -> Result<VqeResult> {
    let n = spec.total_qubits();
    if config.shape.n_qubits != n {
        return Err(Error::QubitMismatch { expected: n, found: config.shape.n_qubits });
    }
    if config.repetitions < 2 {
        return Err(Error::TooFewRepetitions(config.repetitions));
    }
    if config.shots == 0 {
        return Err(Error::ZeroShots);
    }
    let h = build_model(spec)?;
    let energy_estimator = Estimator::new(decompose(&h)?);
    let square_estimator = match config.objective {
        ObjectiveKind::Energy => None,
        ObjectiveKind::Constraint => Some(Estimator::new(decompose(&matrix_square(&h))?)),
    };
    let objective_estimator = square_estimator.as_ref().unwrap_or(&energy_estimator);

    let seeds = VqeSeeds::from_root(config.spsa.seed);
    let shape = config.shape;
    let shots = config.shots;
    // Ansatz parameters always yield a valid circuit, so failures here are
    // construction bugs surfaced as NaN and then as a non-finite objective.
    let objective = |params: &[f64], seed: u64| -> f64 {
        build_ansatz(&shape, params)
            .and_then(|c| c.run(0))
            .and_then(|psi| objective_estimator.estimate(&psi, ExpectationMode::Shots { shots, seed }))
            .map_or(f64::NAN, |e| e.value)
    };
    let restarts = config.restarts.max(1);
    let outcomes = map_indexed(restarts, |r| {
        let initial = initial_parameters(&shape, config.init_scale, seeds.init(r));
        let spsa = SpsaConfig { seed: seeds.restart(r), ..config.spsa.clone() };
        spsa_minimize(objective, &initial, &spsa)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let restart_objectives: Vec<f64> = outcomes
        .iter()
        .map(|o| {
            let base = rng::split(seeds.selection, 0);
            (0..SELECTION_EVALUATIONS)
                .map(|i| objective(&o.best_params, rng::split(base, i as u64)))
                .sum::<f64>()
                / SELECTION_EVALUATIONS as f64
        })
        .collect();
    let selected_restart = restart_objectives
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map_or(0, |(i, _)| i);
    let outcome = outcomes.into_iter().nth(selected_restart).expect("at least one restart");

    let circuit = build_ansatz(&shape, &outcome.best_params)?;
    let psi = circuit.run(0)?;
    let reps = config.repetitions;
    let energies = repeated_values(&psi, &energy_estimator, shots, reps, rng::split_named(seeds.final_evaluation, "h"))?;
    let (energy, sd) = mean_and_stddev(&energies);
    let h_squared = match &square_estimator {
        None => None,
        Some(est) => {
            let values = repeated_values(&psi, est, shots, reps, rng::split_named(seeds.final_evaluation, "h2"))?;
            let (m, s) = mean_and_stddev(&values);
            Some(Estimate { value: m, stderr: s / (reps as f64).sqrt() })
        }
    };

    Ok(VqeResult {
        best_params: outcome.best_params,
        energy,
        stderr: sd / (reps as f64).sqrt(),
        h_squared,
        trajectory: outcome.trajectory,
        selected_restart,
        restart_objectives,
        final_probabilities: probabilities(&psi),
        final_state: psi,
        circuit,
        seeds,
        spsa_a: outcome.a,
    })
}
