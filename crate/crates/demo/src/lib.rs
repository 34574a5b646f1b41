//! Browser bindings: exact spectra with densities, a small VQE run, and a
//! shot-noise scan, each returned as flat arrays for canvas plotting.

use mssq::circuit::{build_ansatz, AnsatzShape};
use mssq::experiment::shot_noise_scan;
use mssq::pauli::decompose;
use mssq::spectrum::{eigendecompose, nearest_zero_state};
use mssq::spsa::SpsaConfig;
use mssq::vqe::{initial_parameters, vqe_run, ObjectiveKind, VqeConfig};
use mssq::wavefunction::{reconstruct_wavefunction, Axis};
use mssq::{build_model, rng, Family, ModelSpec, C64};
use wasm_bindgen::prelude::*;

const ONE_MODE_POINTS: usize = 321;
const TWO_MODE_POINTS: usize = 81;
const MAX_QUBITS: usize = 8;

fn model(family: &str, qubits_per_mode: usize, omega: f64) -> Result<ModelSpec, JsError> {
    let family: Family = family.parse().map_err(|e: mssq::Error| JsError::new(&e.to_string()))?;
    let spec = ModelSpec::new(family, qubits_per_mode).with_omega(omega);
    spec.validate().map_err(js)?;
    if spec.total_qubits() > MAX_QUBITS {
        return Err(JsError::new(&format!("at most {MAX_QUBITS} qubits in the browser")));
    }
    Ok(spec)
}

fn js(e: mssq::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn axes(spec: &ModelSpec) -> Vec<Axis> {
    if spec.family.is_two_mode() {
        vec![Axis::symmetric(6.0, TWO_MODE_POINTS); 2]
    } else {
        vec![Axis::symmetric(8.0, ONE_MODE_POINTS)]
    }
}

fn density(spec: &ModelSpec, state: &[C64]) -> Result<Vec<f64>, JsError> {
    Ok(reconstruct_wavefunction(state, spec.mode_dim(), &axes(spec), spec.omega).map_err(js)?.density)
}

/// Target state for plots: the ground state, or the eigenvector closest to
/// zero energy for two-mode families.
fn reference_state(spec: &ModelSpec) -> Result<(f64, Vec<f64>, Vec<C64>), JsError> {
    let s = eigendecompose(&build_model(spec).map_err(js)?).map_err(js)?;
    let (value, state) = if spec.family.is_two_mode() {
        nearest_zero_state(&s, 1).remove(0)
    } else {
        (s.eigenvalues[0], s.eigenvectors[0].clone())
    };
    Ok((value, s.eigenvalues, state))
}

#[wasm_bindgen]
pub struct SpectrumView {
    value: f64,
    eigenvalues: Vec<f64>,
    axis: Vec<f64>,
    density: Vec<f64>,
    two_mode: bool,
}

#[wasm_bindgen]
impl SpectrumView {
    /// Ground energy, or the eigenvalue nearest zero for two-mode families.
    #[wasm_bindgen(getter)]
    pub fn value(&self) -> f64 {
        self.value
    }
    #[wasm_bindgen(getter)]
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigenvalues.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn axis(&self) -> Vec<f64> {
        self.axis.clone()
    }
    /// Row-major `axis.len()²` grid when `two_mode`.
    #[wasm_bindgen(getter)]
    pub fn density(&self) -> Vec<f64> {
        self.density.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn two_mode(&self) -> bool {
        self.two_mode
    }
}

#[wasm_bindgen]
pub fn spectrum(family: &str, qubits_per_mode: usize, omega: f64) -> Result<SpectrumView, JsError> {
    let spec = model(family, qubits_per_mode, omega)?;
    let (value, eigenvalues, state) = reference_state(&spec)?;
    Ok(SpectrumView {
        value,
        eigenvalues,
        axis: axes(&spec)[0].values(),
        density: density(&spec, &state)?,
        two_mode: spec.family.is_two_mode(),
    })
}

#[wasm_bindgen]
pub struct VqeView {
    energy: f64,
    stderr: f64,
    h_squared: f64,
    exact: f64,
    objectives: Vec<f64>,
    axis: Vec<f64>,
    density: Vec<f64>,
    exact_density: Vec<f64>,
    two_mode: bool,
}

#[wasm_bindgen]
impl VqeView {
    #[wasm_bindgen(getter)]
    pub fn energy(&self) -> f64 {
        self.energy
    }
    #[wasm_bindgen(getter)]
    pub fn stderr(&self) -> f64 {
        self.stderr
    }
    /// `NaN` for energy-mode runs.
    #[wasm_bindgen(getter)]
    pub fn h_squared(&self) -> f64 {
        self.h_squared
    }
    #[wasm_bindgen(getter)]
    pub fn exact(&self) -> f64 {
        self.exact
    }
    #[wasm_bindgen(getter)]
    pub fn objectives(&self) -> Vec<f64> {
        self.objectives.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn axis(&self) -> Vec<f64> {
        self.axis.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn density(&self) -> Vec<f64> {
        self.density.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn exact_density(&self) -> Vec<f64> {
        self.exact_density.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn two_mode(&self) -> bool {
        self.two_mode
    }
}

/// Energy-mode VQE for one-mode families, `⟨H²⟩` minimisation for two-mode
/// ones. A single SPSA start keeps the page responsive.
#[wasm_bindgen]
pub fn vqe(
    family: &str,
    qubits_per_mode: usize,
    depth: usize,
    iterations: usize,
    shots: u32,
    seed: u32,
) -> Result<VqeView, JsError> {
    let spec = model(family, qubits_per_mode, 1.0)?;
    let objective = if spec.family.is_two_mode() { ObjectiveKind::Constraint } else { ObjectiveKind::Energy };
    let shape = AnsatzShape::new(spec.total_qubits(), depth);
    let mut cfg = VqeConfig::new(shape, objective, SpsaConfig::new(iterations, seed as u64));
    cfg.shots = shots as u64;
    let r = vqe_run(&spec, &cfg).map_err(js)?;
    let (exact, _, state) = reference_state(&spec)?;
    Ok(VqeView {
        energy: r.energy,
        stderr: r.stderr,
        h_squared: r.h_squared.map_or(f64::NAN, |e| e.value),
        exact,
        objectives: r.trajectory.iter().map(|p| p.objective).collect(),
        axis: axes(&spec)[0].values(),
        density: density(&spec, &r.final_state)?,
        exact_density: density(&spec, &state)?,
        two_mode: spec.family.is_two_mode(),
    })
}

#[wasm_bindgen]
pub struct NoiseView {
    shots: Vec<f64>,
    stddevs: Vec<f64>,
    fit_a: f64,
    fit_exponent: f64,
    residual: f64,
}

#[wasm_bindgen]
impl NoiseView {
    #[wasm_bindgen(getter)]
    pub fn shots(&self) -> Vec<f64> {
        self.shots.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn stddevs(&self) -> Vec<f64> {
        self.stddevs.clone()
    }
    /// `NaN` when the spread is zero and no fit exists.
    #[wasm_bindgen(getter)]
    pub fn fit_a(&self) -> f64 {
        self.fit_a
    }
    #[wasm_bindgen(getter)]
    pub fn fit_exponent(&self) -> f64 {
        self.fit_exponent
    }
    #[wasm_bindgen(getter)]
    pub fn residual(&self) -> f64 {
        self.residual
    }
}

/// Spread of the energy estimate for a random seeded circuit, 256 to 16384 shots.
#[wasm_bindgen]
pub fn noise_scan(family: &str, qubits_per_mode: usize, repetitions: usize, seed: u32) -> Result<NoiseView, JsError> {
    let spec = model(family, qubits_per_mode, 1.0)?;
    let shape = AnsatzShape::new(spec.total_qubits(), 2);
    let seed = seed as u64;
    let params = initial_parameters(&shape, std::f64::consts::PI, rng::split_named(seed, "noise-circuit"));
    let circuit = build_ansatz(&shape, &params).map_err(js)?;
    let observable = decompose(&build_model(&spec).map_err(js)?).map_err(js)?;
    let grid: Vec<u64> = (8..=14).map(|k| 1u64 << k).collect();
    let report = shot_noise_scan(&circuit, &observable, &grid, repetitions, rng::split_named(seed, "noise-scan"))
        .map_err(js)?;
    let (fit_a, fit_exponent, residual) = report.fit.map_or((f64::NAN, f64::NAN, f64::NAN), |f| (f.a, f.exponent, f.residual));
    Ok(NoiseView {
        shots: grid.iter().map(|&s| s as f64).collect(),
        stddevs: report.stddevs,
        fit_a,
        fit_exponent,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_spectrum_view() {
        let v = spectrum("harmonic", 3, 1.0).ok().unwrap();
        assert!((v.value - 0.5).abs() < 1e-9);
        assert_eq!(v.density.len(), ONE_MODE_POINTS);
        assert!(!v.two_mode);
    }

    #[test]
    fn two_mode_views_are_square_grids() {
        let v = spectrum("closed-free", 2, 1.0).ok().unwrap();
        assert_eq!(v.density.len(), TWO_MODE_POINTS * TWO_MODE_POINTS);
        let r = vqe("open-phi4", 1, 1, 40, 1024, 3).ok().unwrap();
        assert!(r.h_squared.is_finite());
        assert_eq!(r.objectives.len(), 40);
    }

    #[test]
    fn noise_view_has_seven_points() {
        let n = noise_scan("anharmonic", 2, 30, 1).ok().unwrap();
        assert_eq!(n.shots.len(), 7);
        assert!(n.fit_exponent > 0.3 && n.fit_exponent < 0.7, "{}", n.fit_exponent);
    }
}
