//! The four experiment commands. Each writes plain CSV/text artifacts plus
//! the resolved configuration into `output.dir` and returns its numbers.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::circuit::{build_ansatz, Circuit, Estimate};
use crate::config::{Command, ExperimentConfig, ECHO_FILE};
use crate::error::{Error, Result};
use crate::matrix::{ONE, ZERO};
use crate::oscillator::build_model;
use crate::pauli::{decompose, PauliSum};
use crate::rng;
use crate::spectrum::{convergence_csv, convergence_scan, eigendecompose, nearest_zero_state, ConvergenceRow};
use crate::spsa::TrajectoryPoint;
use crate::vqe::{estimate_error, initial_parameters, vqe_run, VqeResult};
use crate::wavefunction::{basis_probabilities_csv, reconstruct_wavefunction, WavefunctionGrid};

/// Ordered `key = value` lines, the same shape as the config format.
#[derive(Debug, Default, Clone)]
pub struct Summary {
    lines: Vec<(String, String)>,
}

impl Summary {
    pub fn put(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.lines.push((key.to_string(), value.to_string()));
        self
    }

    pub fn num(&mut self, key: &str, value: f64) -> &mut Self {
        self.put(key, format!("{value:?}"))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn to_text(&self) -> String {
        self.lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    fn prepare(cfg: &ExperimentConfig, command: Command) -> Result<Self> {
        let dir = cfg.output_dir().to_path_buf();
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let echo = dir.join(ECHO_FILE);
        if !cfg.overwrite && echo.exists() {
            return Err(Error::Config(format!(
                "{} already holds a run and output.overwrite is false",
                dir.display()
            )));
        }
        let mut out = Output { dir, files: Vec::new() };
        out.write(ECHO_FILE, &cfg.resolved_text(command))?;
        Ok(out)
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.files.push(path);
        Ok(())
    }
}

fn header(cfg: &ExperimentConfig, command: Command) -> Summary {
    let spec = cfg.model_spec();
    let mut s = Summary::default();
    s.put("command", command.name())
        .put("family", spec.family.name())
        .put("qubits_per_mode", spec.qubits_per_mode)
        .put("seed", cfg.seed);
    if !cfg.tag.is_empty() {
        s.put("tag", &cfg.tag);
    }
    s
}

pub fn trajectory_csv(trajectory: &[TrajectoryPoint]) -> String {
    let n = trajectory.first().map_or(0, |p| p.params.len());
    let mut s = String::from("iteration,objective");
    for i in 0..n {
        let _ = write!(s, ",theta_{i}");
    }
    s.push('\n');
    for p in trajectory {
        let _ = write!(s, "{},{:.16e}", p.iteration, p.objective);
        for t in &p.params {
            let _ = write!(s, ",{t:.16e}");
        }
        s.push('\n');
    }
    s
}

/// Two one-axis densities on the same grid as `x,<name_a>,<name_b>`.
fn paired_density_csv(a: &WavefunctionGrid, b: &WavefunctionGrid, names: (&str, &str)) -> String {
    let mut s = format!("x,{},{}\n", names.0, names.1);
    for ((x, da), db) in a.axes[0].values().iter().zip(&a.density).zip(&b.density) {
        let _ = writeln!(s, "{x:.10e},{da:.16e},{db:.16e}");
    }
    s
}

#[derive(Debug, Clone)]
pub struct SpectrumReport {
    /// Ground energy, or the eigenvalue nearest zero for two-mode families.
    pub value: f64,
    pub eigenvalues: Vec<f64>,
    pub convergence: Vec<ConvergenceRow>,
    pub residual: f64,
    pub summary: Summary,
    pub files: Vec<PathBuf>,
}

pub fn cmd_spectrum(cfg: &ExperimentConfig) -> Result<SpectrumReport> {
    let spec = cfg.model_spec();
    let mut out = Output::prepare(cfg, Command::Spectrum)?;
    let h = build_model(&spec)?;
    let spectrum = eigendecompose(&h)?;
    let two_mode = spec.family.is_two_mode();
    let (value, state) = if two_mode {
        nearest_zero_state(&spectrum, 1).remove(0)
    } else {
        let (e, v) = spectrum.ground();
        (e, v.to_vec())
    };
    let convergence = convergence_scan(&spec, &cfg.spectrum_dims())?;
    let density = reconstruct_wavefunction(&state, spec.mode_dim(), &cfg.axes(), spec.omega)?;
    let probs: Vec<f64> = state.iter().map(|c| c.norm_sqr()).collect();

    out.write("spectrum.csv", &spectrum.to_csv())?;
    out.write("convergence.csv", &convergence_csv(&convergence))?;
    out.write("probabilities.csv", &basis_probabilities_csv(&probs))?;
    out.write("density.csv", &density.to_csv())?;
    if cfg.export_matrix {
        out.write("matrix.csv", &h.to_csv())?;
    }

    let mut summary = header(cfg, Command::Spectrum);
    summary
        .put("dim", spectrum.dim())
        .num(if two_mode { "nearest_zero_eigenvalue" } else { "ground_energy" }, value)
        .num("residual", spectrum.residual)
        .put("sweeps", spectrum.sweeps)
        .num("density_norm", density.norm);
    if let Some(last) = convergence.last() {
        summary.put("converged_dim", last.dim).num("converged_value", last.value);
        if let Some(d) = last.difference {
            summary.num("last_difference", d);
        }
    }
    out.write("summary.txt", &summary.to_text())?;
    Ok(SpectrumReport {
        value,
        eigenvalues: spectrum.eigenvalues,
        convergence,
        residual: spectrum.residual,
        summary,
        files: out.files,
    })
}

#[derive(Debug, Clone)]
pub struct VqeReport {
    pub result: VqeResult,
    /// Lowest eigenvalue of the same truncated matrix.
    pub exact_ground: f64,
    pub density: WavefunctionGrid,
    pub exact_density: WavefunctionGrid,
    /// Normalised grid overlap of the two densities.
    pub overlap: f64,
    pub summary: Summary,
    pub files: Vec<PathBuf>,
}

fn write_run_artifacts(out: &mut Output, result: &VqeResult, observable: &PauliSum) -> Result<()> {
    out.write("trajectory.csv", &trajectory_csv(&result.trajectory))?;
    out.write("probabilities.csv", &basis_probabilities_csv(&result.final_probabilities))?;
    out.write("circuit.txt", &result.circuit.to_text())?;
    out.write("hamiltonian.pauli", &observable.to_text())
}

fn restart_summary(summary: &mut Summary, result: &VqeResult) {
    let objectives: Vec<String> = result.restart_objectives.iter().map(|v| format!("{v:?}")).collect();
    summary
        .put("restarts", result.restart_objectives.len())
        .put("selected_restart", result.selected_restart)
        .put("restart_objectives", objectives.join(", "))
        .num("spsa_a", result.spsa_a);
}

pub fn cmd_vqe(cfg: &ExperimentConfig) -> Result<VqeReport> {
    let spec = cfg.model_spec();
    let mut out = Output::prepare(cfg, Command::Vqe)?;
    let h = build_model(&spec)?;
    let observable = decompose(&h)?;
    let exact = eigendecompose(&h)?;
    let result = vqe_run(&spec, &cfg.vqe_config(Command::Vqe))?;
    let (exact_ground, ground_state) = exact.ground();

    let axes = cfg.axes();
    let density = reconstruct_wavefunction(&result.final_state, spec.mode_dim(), &axes, spec.omega)?;
    let exact_density = reconstruct_wavefunction(ground_state, spec.mode_dim(), &axes, spec.omega)?;
    let overlap = density.overlap(&exact_density);

    write_run_artifacts(&mut out, &result, &observable)?;
    if spec.family.is_two_mode() {
        out.write("density.csv", &density.to_csv())?;
        out.write("exact_density.csv", &exact_density.to_csv())?;
    } else {
        out.write("density.csv", &paired_density_csv(&density, &exact_density, ("vqe", "exact")))?;
    }

    let mut summary = header(cfg, Command::Vqe);
    summary
        .num("energy", result.energy)
        .num("stderr", result.stderr)
        .num("exact_ground", exact_ground)
        .num("relative_error", (result.energy - exact_ground).abs() / exact_ground.abs())
        .num("density_overlap", overlap);
    restart_summary(&mut summary, &result);
    out.write("summary.txt", &summary.to_text())?;
    Ok(VqeReport { result, exact_ground, density, exact_density, overlap, summary, files: out.files })
}

#[derive(Debug, Clone)]
pub struct ConstraintReport {
    pub result: VqeResult,
    pub h: Estimate,
    pub h_squared: Estimate,
    /// Exact eigenvalue closest to zero for reference.
    pub nearest_zero: f64,
    pub density: WavefunctionGrid,
    /// Density of `|0⟩⊗|0⟩`.
    pub reference_density: WavefunctionGrid,
    pub summary: Summary,
    pub files: Vec<PathBuf>,
}

pub fn cmd_constraint(cfg: &ExperimentConfig) -> Result<ConstraintReport> {
    let spec = cfg.model_spec();
    if !spec.family.is_two_mode() {
        return Err(Error::NotTwoMode(spec.family));
    }
    let mut out = Output::prepare(cfg, Command::Constraint)?;
    let h = build_model(&spec)?;
    let observable = decompose(&h)?;
    let nearest_zero = nearest_zero_state(&eigendecompose(&h)?, 1)[0].0;
    let result = vqe_run(&spec, &cfg.vqe_config(Command::Constraint))?;
    let h_est = Estimate { value: result.energy, stderr: result.stderr };
    let h_squared = result.h_squared.expect("constraint runs report ⟨H²⟩");

    let axes = cfg.axes();
    let dim = spec.mode_dim();
    let density = reconstruct_wavefunction(&result.final_state, dim, &axes, spec.omega)?;
    let mut vacuum = vec![ZERO; dim * dim];
    vacuum[0] = ONE;
    let reference_density = reconstruct_wavefunction(&vacuum, dim, &axes, spec.omega)?;

    write_run_artifacts(&mut out, &result, &observable)?;
    out.write("density.csv", &density.to_csv())?;
    out.write("reference_density.csv", &reference_density.to_csv())?;

    let mut summary = header(cfg, Command::Constraint);
    summary
        .num("h", h_est.value)
        .num("h_stderr", h_est.stderr)
        .num("h_squared", h_squared.value)
        .num("h_squared_stderr", h_squared.stderr)
        .put("zero_within_2_stderr", h_est.value.abs() <= 2.0 * h_est.stderr)
        .num("exact_nearest_zero", nearest_zero)
        .num("density_norm", density.norm);
    restart_summary(&mut summary, &result);
    out.write("summary.txt", &summary.to_text())?;
    Ok(ConstraintReport {
        result,
        h: h_est,
        h_squared,
        nearest_zero,
        density,
        reference_density,
        summary,
        files: out.files,
    })
}

/// Least-squares fit of `log σ = log A − β log x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub a: f64,
    pub exponent: f64,
    /// RMS residual in natural-log units.
    pub residual: f64,
}

pub fn fit_power_law(x: &[f64], y: &[f64]) -> Option<PowerLawFit> {
    if x.len() != y.len() || x.len() < 2 || x.iter().chain(y).any(|v| !(*v > 0.0 && v.is_finite())) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (lx.iter().zip(&ly).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum::<f64>() / n).sqrt();
    Some(PowerLawFit { a: intercept.exp(), exponent: -slope, residual })
}

#[derive(Debug, Clone)]
pub struct ShotNoiseReport {
    pub shots_grid: Vec<u64>,
    pub means: Vec<f64>,
    pub stddevs: Vec<f64>,
    /// Absent when some standard deviation is zero.
    pub fit: Option<PowerLawFit>,
}

impl ShotNoiseReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("shots,mean,stddev,fit\n");
        for ((x, m), sd) in self.shots_grid.iter().zip(&self.means).zip(&self.stddevs) {
            let _ = write!(s, "{x},{m:.16e},{sd:.16e},");
            if let Some(f) = self.fit {
                let _ = write!(s, "{:.16e}", f.a * (*x as f64).powf(-f.exponent));
            }
            s.push('\n');
        }
        s
    }
}

/// Measures the spread of repeated shot estimates at every grid point.
pub fn shot_noise_scan(
    circuit: &Circuit,
    observable: &PauliSum,
    shots_grid: &[u64],
    repetitions: usize,
    seed: u64,
) -> Result<ShotNoiseReport> {
    if shots_grid.len() < 4 || shots_grid.windows(2).any(|w| w[0] >= w[1]) || shots_grid[0] == 0 {
        return Err(Error::InsufficientGrid);
    }
    if repetitions < 30 {
        return Err(Error::Config(format!("noise scans need at least 30 repetitions, got {repetitions}")));
    }
    let mut means = Vec::with_capacity(shots_grid.len());
    let mut stddevs = Vec::with_capacity(shots_grid.len());
    for (i, &shots) in shots_grid.iter().enumerate() {
        let (m, sd) = estimate_error(circuit, observable, shots, repetitions, rng::split(seed, i as u64))?;
        means.push(m);
        stddevs.push(sd);
    }
    let xs: Vec<f64> = shots_grid.iter().map(|&s| s as f64).collect();
    let fit = fit_power_law(&xs, &stddevs);
    Ok(ShotNoiseReport { shots_grid: shots_grid.to_vec(), means, stddevs, fit })
}

#[derive(Debug, Clone)]
pub struct NoiseScanOutput {
    pub report: ShotNoiseReport,
    pub summary: Summary,
    pub files: Vec<PathBuf>,
}

pub fn cmd_noise_scan(cfg: &ExperimentConfig) -> Result<NoiseScanOutput> {
    let spec = cfg.model_spec();
    let mut out = Output::prepare(cfg, Command::NoiseScan)?;
    let observable = decompose(&build_model(&spec)?)?.scaled(cfg.noise_coefficient_scale);
    let shape = cfg.ansatz_shape();
    let params = initial_parameters(&shape, cfg.init_scale, rng::split_named(cfg.seed, "noise-circuit"));
    let circuit = build_ansatz(&shape, &params)?;
    let report = shot_noise_scan(
        &circuit,
        &observable,
        &cfg.noise_shots,
        cfg.noise_repetitions,
        rng::split_named(cfg.seed, "noise-scan"),
    )?;

    out.write("noise.csv", &report.to_csv())?;
    out.write("circuit.txt", &circuit.to_text())?;
    out.write("hamiltonian.pauli", &observable.to_text())?;
    let mut summary = header(cfg, Command::NoiseScan);
    summary.put("repetitions", cfg.noise_repetitions);
    match report.fit {
        Some(f) => {
            summary.num("fit_a", f.a).num("fit_exponent", f.exponent).num("fit_residual", f.residual);
        }
        None => {
            summary.put("fit", "none (zero spread)");
        }
    }
    out.write("summary.txt", &summary.to_text())?;
    Ok(NoiseScanOutput { report, summary, files: out.files })
}

/// Runs `command` and returns its summary and the files it wrote.
pub fn run_command(command: Command, cfg: &ExperimentConfig) -> Result<(Summary, Vec<PathBuf>)> {
    match command {
        Command::Spectrum => cmd_spectrum(cfg).map(|r| (r.summary, r.files)),
        Command::Vqe => cmd_vqe(cfg).map(|r| (r.summary, r.files)),
        Command::Constraint => cmd_constraint(cfg).map(|r| (r.summary, r.files)),
        Command::NoiseScan => cmd_noise_scan(cfg).map(|r| (r.summary, r.files)),
    }
}
