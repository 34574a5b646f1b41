//! Line-oriented experiment configuration.
//!
//! Each non-blank line is `section.key = value`; `#` starts a comment.
//! Keys are fixed (see [`KEYS`]) and anything else is rejected with its line
//! number.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::circuit::AnsatzShape;
use crate::error::{Error, Result};
use crate::oscillator::{Family, ModelSpec};
use crate::spsa::SpsaConfig;
use crate::vqe::{ObjectiveKind, VqeConfig, DEFAULT_REPETITIONS, DEFAULT_SHOTS};
use crate::wavefunction::Axis;

/// Environment variable that replaces `run.seed`.
pub const SEED_ENV: &str = "MSSQ_SEED";
/// Name of the resolved configuration written into every output directory.
pub const ECHO_FILE: &str = "resolved.cfg";

pub const REQUIRED_KEYS: [&str; 2] = ["model.family", "output.dir"];

/// Every accepted key, in echo order.
pub const KEYS: [&str; 28] = [
    "model.family",
    "model.qubits_per_mode",
    "model.omega",
    "model.lambda",
    "model.quartic_c",
    "spectrum.dims",
    "spectrum.export_matrix",
    "ansatz.depth",
    "ansatz.init_scale",
    "vqe.restarts",
    "spsa.iterations",
    "spsa.a",
    "spsa.c",
    "spsa.A",
    "spsa.alpha",
    "spsa.gamma",
    "spsa.calibration_samples",
    "run.shots",
    "run.repetitions",
    "run.seed",
    "grid.extent",
    "grid.points",
    "noise.shots",
    "noise.repetitions",
    "noise.coefficient_scale",
    "output.dir",
    "output.tag",
    "output.overwrite",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Vqe,
    Constraint,
    NoiseScan,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Vqe => "vqe",
            Command::Constraint => "constraint",
            Command::NoiseScan => "noise-scan",
        }
    }

    fn default_iterations(self) -> usize {
        match self {
            Command::Constraint => 16000,
            _ => 1000,
        }
    }

    fn default_restarts(self) -> usize {
        match self {
            Command::Constraint => 4,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub family: Option<Family>,
    pub qubits_per_mode: usize,
    pub omega: f64,
    /// `None` means the family's published value.
    pub lambda: Option<f64>,
    pub quartic_c: Option<f64>,
    /// Per-mode dimensions for the convergence table; `None` picks a
    /// family-dependent ladder.
    pub spectrum_dims: Option<Vec<usize>>,
    pub export_matrix: bool,
    pub depth: usize,
    pub init_scale: f64,
    pub restarts: Option<usize>,
    pub iterations: Option<usize>,
    pub spsa_a: f64,
    pub spsa_c: f64,
    pub spsa_stability: Option<f64>,
    pub alpha: f64,
    pub gamma: f64,
    pub calibration_samples: usize,
    pub shots: u64,
    pub repetitions: usize,
    pub seed: u64,
    pub grid_extent: f64,
    pub grid_points: usize,
    pub noise_shots: Vec<u64>,
    pub noise_repetitions: usize,
    pub noise_coefficient_scale: f64,
    pub output_dir: Option<PathBuf>,
    /// Free-form label copied into summaries.
    pub tag: String,
    pub overwrite: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let spsa = SpsaConfig::new(0, 0);
        Self {
            family: None,
            qubits_per_mode: 2,
            omega: 1.0,
            lambda: None,
            quartic_c: None,
            spectrum_dims: None,
            export_matrix: false,
            depth: 2,
            init_scale: std::f64::consts::PI,
            restarts: None,
            iterations: None,
            spsa_a: spsa.a,
            spsa_c: spsa.c,
            spsa_stability: None,
            alpha: spsa.alpha,
            gamma: spsa.gamma,
            calibration_samples: spsa.calibration_samples,
            shots: DEFAULT_SHOTS,
            repetitions: DEFAULT_REPETITIONS,
            seed: 0,
            grid_extent: 8.0,
            grid_points: 321,
            noise_shots: vec![256, 512, 1024, 2048, 4096, 8192, 16384],
            noise_repetitions: 100,
            noise_coefficient_scale: 1.0,
            output_dir: None,
            tag: String::new(),
            overwrite: true,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str, expected: &str) -> std::result::Result<T, String> {
    value.parse().map_err(|_| format!("{key}: expected {expected}, got {value:?}"))
}

fn parse_list<T: FromStr>(key: &str, value: &str, expected: &str) -> std::result::Result<Vec<T>, String> {
    value
        .split(',')
        .map(|item| parse_value(key, item.trim(), expected))
        .collect()
}

fn parse_bool(key: &str, value: &str) -> std::result::Result<bool, String> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("{key}: expected true or false, got {value:?}")),
    }
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
}

impl ExperimentConfig {
    /// Assigns one key. The error string names the key; callers add location.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let value = value.trim();
        let float = |v: &str| parse_value::<f64>(key, v, "a number");
        let int = |v: &str| parse_value::<usize>(key, v, "a nonnegative integer");
        match key {
            "model.family" => {
                self.family = Some(value.parse().map_err(|_| {
                    let names: Vec<&str> = Family::ALL.iter().map(|f| f.name()).collect();
                    format!("{key}: unknown family {value:?} (expected one of {})", names.join(", "))
                })?)
            }
            "model.qubits_per_mode" => self.qubits_per_mode = int(value)?,
            "model.omega" => self.omega = float(value)?,
            "model.lambda" => self.lambda = Some(float(value)?),
            "model.quartic_c" => self.quartic_c = Some(float(value)?),
            "spectrum.dims" => self.spectrum_dims = Some(parse_list(key, value, "a comma-separated list of integers")?),
            "spectrum.export_matrix" => self.export_matrix = parse_bool(key, value)?,
            "ansatz.depth" => self.depth = int(value)?,
            "ansatz.init_scale" => self.init_scale = float(value)?,
            "vqe.restarts" => self.restarts = Some(int(value)?),
            "spsa.iterations" => self.iterations = Some(int(value)?),
            "spsa.a" => self.spsa_a = float(value)?,
            "spsa.c" => self.spsa_c = float(value)?,
            "spsa.A" => self.spsa_stability = Some(float(value)?),
            "spsa.alpha" => self.alpha = float(value)?,
            "spsa.gamma" => self.gamma = float(value)?,
            "spsa.calibration_samples" => self.calibration_samples = int(value)?,
            "run.shots" => self.shots = parse_value(key, value, "a nonnegative integer")?,
            "run.repetitions" => self.repetitions = int(value)?,
            "run.seed" => self.seed = parse_value(key, value, "an unsigned 64-bit integer")?,
            "grid.extent" => self.grid_extent = float(value)?,
            "grid.points" => self.grid_points = int(value)?,
            "noise.shots" => self.noise_shots = parse_list(key, value, "a comma-separated list of integers")?,
            "noise.repetitions" => self.noise_repetitions = int(value)?,
            "noise.coefficient_scale" => self.noise_coefficient_scale = float(value)?,
            "output.dir" => {
                if value.is_empty() {
                    return Err(format!("{key}: expected a path"));
                }
                self.output_dir = Some(PathBuf::from(value))
            }
            "output.tag" => self.tag = value.to_string(),
            "output.overwrite" => self.overwrite = parse_bool(key, value)?,
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Parses configuration text. `overrides` are `section.key=value` pairs
    /// applied after the file; `seed_env` replaces `run.seed` before them.
    pub fn from_text(text: &str, seed_env: Option<&str>, overrides: &[String]) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen: BTreeSet<String> = BTreeSet::new();
        let mut last_line = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            last_line = line;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(Error::Parse { line, message: format!("expected `section.key = value`, got {content:?}") });
            };
            let key = key.trim();
            if !seen.insert(key.to_string()) && KEYS.contains(&key) {
                return Err(Error::Parse { line, message: format!("duplicate key {key:?}") });
            }
            cfg.set(key, value).map_err(|message| Error::Parse { line, message })?;
        }

        if let Some(seed) = seed_env {
            cfg.seed = seed
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{SEED_ENV}: expected an unsigned 64-bit integer, got {seed:?}")))?;
        }
        for o in overrides {
            let (key, value) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set {o:?}: expected section.key=value")))?;
            cfg.set(key.trim(), value).map_err(|m| Error::Config(format!("--set: {m}")))?;
            seen.insert(key.trim().to_string());
        }

        let missing: Vec<&str> = REQUIRED_KEYS.iter().copied().filter(|k| !seen.contains(*k)).collect();
        if !missing.is_empty() {
            return Err(Error::Config(format!(
                "missing required key{} {} (input ends at line {last_line})",
                if missing.len() > 1 { "s" } else { "" },
                missing.join(", ")
            )));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        self.model_spec().validate()?;
        if self.qubits_per_mode * self.family().modes() > 16 {
            return bad("model.qubits_per_mode: more than 16 qubits in total is not supported");
        }
        if let Some(dims) = &self.spectrum_dims {
            if dims.is_empty() || dims.iter().any(|d| *d < 2 || !d.is_power_of_two()) {
                return bad("spectrum.dims: every entry must be a power of two ≥ 2");
            }
        }
        if self.shots == 0 {
            return bad("run.shots must be positive");
        }
        if self.repetitions < 2 {
            return bad("run.repetitions must be at least 2");
        }
        if !(self.init_scale.is_finite() && self.init_scale >= 0.0) {
            return bad("ansatz.init_scale must be nonnegative");
        }
        if !(self.grid_extent.is_finite() && self.grid_extent > 0.0) || self.grid_points < 2 {
            return bad("grid.extent must be positive and grid.points at least 2");
        }
        if self.restarts == Some(0) {
            return bad("vqe.restarts must be positive");
        }
        if !self.noise_coefficient_scale.is_finite() {
            return bad("noise.coefficient_scale must be finite");
        }
        self.spsa_config(Command::Vqe).validate()
    }

    /// Family; only valid after parsing, which enforces the key.
    pub fn family(&self) -> Family {
        self.family.expect("model.family is required")
    }

    pub fn output_dir(&self) -> &Path {
        self.output_dir.as_deref().expect("output.dir is required")
    }

    pub fn model_spec(&self) -> ModelSpec {
        let family = self.family();
        let mut spec = ModelSpec::new(family, self.qubits_per_mode).with_omega(self.omega);
        if let Some(l) = self.lambda {
            spec.lambda_abs = l;
        }
        if let Some(c) = self.quartic_c {
            spec.quartic_c = c;
        }
        spec
    }

    pub fn spectrum_dims(&self) -> Vec<usize> {
        match &self.spectrum_dims {
            Some(d) => d.clone(),
            None if self.family().is_two_mode() => vec![2, 4, 8, 16],
            None => vec![4, 8, 16, 32, 64, 128],
        }
    }

    pub fn iterations(&self, command: Command) -> usize {
        self.iterations.unwrap_or(command.default_iterations())
    }

    pub fn restarts(&self, command: Command) -> usize {
        self.restarts.unwrap_or(command.default_restarts())
    }

    pub fn spsa_config(&self, command: Command) -> SpsaConfig {
        let iterations = self.iterations(command);
        SpsaConfig {
            iterations,
            a: self.spsa_a,
            c: self.spsa_c,
            stability: self.spsa_stability.unwrap_or(0.1 * iterations as f64),
            alpha: self.alpha,
            gamma: self.gamma,
            calibration_samples: self.calibration_samples,
            seed: self.seed,
        }
    }

    pub fn ansatz_shape(&self) -> AnsatzShape {
        AnsatzShape::new(self.model_spec().total_qubits(), self.depth)
    }

    pub fn vqe_config(&self, command: Command) -> VqeConfig {
        let objective = if command == Command::Constraint { ObjectiveKind::Constraint } else { ObjectiveKind::Energy };
        let mut cfg = VqeConfig::new(self.ansatz_shape(), objective, self.spsa_config(command));
        cfg.shots = self.shots;
        cfg.repetitions = self.repetitions;
        cfg.init_scale = self.init_scale;
        cfg.restarts = self.restarts(command);
        cfg
    }

    pub fn axes(&self) -> Vec<Axis> {
        vec![Axis::symmetric(self.grid_extent, self.grid_points); self.family().modes()]
    }

    /// Every key with the value `command` will actually use. Parsing the
    /// result reproduces the same run.
    pub fn resolved_text(&self, command: Command) -> String {
        let spec = self.model_spec();
        let spsa = self.spsa_config(command);
        let mut s = format!("# resolved configuration for `{}`\n", command.name());
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("model.family", spec.family.name().to_string());
        put("model.qubits_per_mode", spec.qubits_per_mode.to_string());
        put("model.omega", format!("{:?}", spec.omega));
        put("model.lambda", format!("{:?}", spec.lambda_abs));
        put("model.quartic_c", format!("{:?}", spec.quartic_c));
        put("spectrum.dims", join(&self.spectrum_dims()));
        put("spectrum.export_matrix", self.export_matrix.to_string());
        put("ansatz.depth", self.depth.to_string());
        put("ansatz.init_scale", format!("{:?}", self.init_scale));
        put("vqe.restarts", self.restarts(command).to_string());
        put("spsa.iterations", spsa.iterations.to_string());
        put("spsa.a", format!("{:?}", spsa.a));
        put("spsa.c", format!("{:?}", spsa.c));
        put("spsa.A", format!("{:?}", spsa.stability));
        put("spsa.alpha", format!("{:?}", spsa.alpha));
        put("spsa.gamma", format!("{:?}", spsa.gamma));
        put("spsa.calibration_samples", spsa.calibration_samples.to_string());
        put("run.shots", self.shots.to_string());
        put("run.repetitions", self.repetitions.to_string());
        put("run.seed", self.seed.to_string());
        put("grid.extent", format!("{:?}", self.grid_extent));
        put("grid.points", self.grid_points.to_string());
        put("noise.shots", join(&self.noise_shots));
        put("noise.repetitions", self.noise_repetitions.to_string());
        put("noise.coefficient_scale", format!("{:?}", self.noise_coefficient_scale));
        put("output.dir", self.output_dir().display().to_string());
        put("output.tag", self.tag.clone());
        put("output.overwrite", self.overwrite.to_string());
        s
    }
}

/// Reads and parses `path`, honouring `MSSQ_SEED` and `--set` overrides.
pub fn parse_config_with(path: &Path, overrides: &[String]) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let env = std::env::var(SEED_ENV).ok();
    ExperimentConfig::from_text(&text, env.as_deref(), overrides)
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    parse_config_with(path, &[])
}
