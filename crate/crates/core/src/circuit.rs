//! Statevector simulation of u3/CNOT circuits, shot sampling and Pauli-sum
//! estimation.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::matrix::{C64, ZERO};
use crate::pauli::{group_by_basis, MeasurementGroup, Pauli, PauliSum};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    U3 { target: usize, theta: f64, phi: f64, lam: f64 },
    Cnot { control: usize, target: usize },
}

impl Gate {
    pub fn u3(target: usize, theta: f64, phi: f64, lam: f64) -> Self {
        Gate::U3 { target, theta, phi, lam }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::Cnot { control, target }
    }

    /// `[[cos(θ/2), −e^{iλ} sin(θ/2)], [e^{iφ} sin(θ/2), e^{i(φ+λ)} cos(θ/2)]]`.
    pub fn u3_matrix(theta: f64, phi: f64, lam: f64) -> [[C64; 2]; 2] {
        let (s, c) = (theta / 2.0).sin_cos();
        [
            [C64::new(c, 0.0), -C64::from_polar(s, lam)],
            [C64::from_polar(s, phi), C64::from_polar(c, phi + lam)],
        ]
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        match *self {
            Gate::U3 { target, .. } if target >= n_qubits => {
                Err(Error::InvalidGate(format!("u3 target {target} out of range for {n_qubits} qubits")))
            }
            Gate::Cnot { control, target } if control >= n_qubits || target >= n_qubits => Err(Error::InvalidGate(
                format!("cx {control} {target} out of range for {n_qubits} qubits"),
            )),
            Gate::Cnot { control, target } if control == target => {
                Err(Error::InvalidGate(format!("cx control and target are both {control}")))
            }
            _ => Ok(()),
        }
    }
}

/// Bit mask of qubit `q`; qubit 0 is the most significant bit.
#[inline]
pub fn qubit_mask(n_qubits: usize, q: usize) -> usize {
    1 << (n_qubits - 1 - q)
}

fn apply_single(psi: &mut [C64], n_qubits: usize, q: usize, u: &[[C64; 2]; 2]) {
    let bit = qubit_mask(n_qubits, q);
    for i in 0..psi.len() {
        if i & bit == 0 {
            let (a0, a1) = (psi[i], psi[i | bit]);
            psi[i] = u[0][0] * a0 + u[0][1] * a1;
            psi[i | bit] = u[1][0] * a0 + u[1][1] * a1;
        }
    }
}

fn apply_cnot(psi: &mut [C64], n_qubits: usize, control: usize, target: usize) {
    let cbit = qubit_mask(n_qubits, control);
    let tbit = qubit_mask(n_qubits, target);
    for i in 0..psi.len() {
        if i & cbit != 0 && i & tbit == 0 {
            psi.swap(i, i | tbit);
        }
    }
}

pub fn apply_gate(psi: &mut [C64], n_qubits: usize, gate: &Gate) {
    match *gate {
        Gate::U3 { target, theta, phi, lam } => apply_single(psi, n_qubits, target, &Gate::u3_matrix(theta, phi, lam)),
        Gate::Cnot { control, target } => apply_cnot(psi, n_qubits, control, target),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, gates: Vec::new() }
    }

    pub fn from_gates(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Self::new(n_qubits);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Statevector after applying every gate to basis state `initial`.
    pub fn run(&self, initial: usize) -> Result<Vec<C64>> {
        let dim = 1usize << self.n_qubits;
        if initial >= dim {
            return Err(Error::InvalidInitialState { index: initial, n_qubits: self.n_qubits });
        }
        let mut psi = vec![ZERO; dim];
        psi[initial] = C64::new(1.0, 0.0);
        for g in &self.gates {
            apply_gate(&mut psi, self.n_qubits, g);
        }
        Ok(psi)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("qubits {}\n", self.n_qubits);
        for g in &self.gates {
            let _ = match *g {
                Gate::U3 { target, theta, phi, lam } => {
                    writeln!(s, "u3 {target} {theta:.16e} {phi:.16e} {lam:.16e}")
                }
                Gate::Cnot { control, target } => writeln!(s, "cx {control} {target}"),
            };
        }
        s
    }

    pub fn write_text(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let perr = |line: usize, message: String| Error::Parse { line, message };
        let mut circuit: Option<Circuit> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let int = |s: &str| s.parse::<usize>().map_err(|e| perr(line_no, format!("{e}: {s:?}")));
            let real = |s: &str| s.parse::<f64>().map_err(|e| perr(line_no, format!("{e}: {s:?}")));
            match (circuit.as_mut(), fields.as_slice()) {
                (None, ["qubits", n]) => circuit = Some(Circuit::new(int(n)?)),
                (None, _) => return Err(perr(line_no, "expected header \"qubits N\"".into())),
                (Some(c), ["u3", q, t, p, l]) => c
                    .push(Gate::u3(int(q)?, real(t)?, real(p)?, real(l)?))
                    .map_err(|e| perr(line_no, e.to_string()))?,
                (Some(c), ["cx", ctl, tgt]) => {
                    c.push(Gate::cnot(int(ctl)?, int(tgt)?)).map_err(|e| perr(line_no, e.to_string()))?
                }
                (Some(_), _) => return Err(perr(line_no, format!("unrecognised gate line {line:?}"))),
            }
        }
        circuit.ok_or_else(|| perr(1, "missing \"qubits N\" header".into()))
    }
}

/// Layered hardware-efficient ansatz: a u3 on every qubit, then `depth`
/// repetitions of a linear CNOT chain followed by another u3 layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnsatzShape {
    pub n_qubits: usize,
    pub depth: usize,
}

impl AnsatzShape {
    pub fn new(n_qubits: usize, depth: usize) -> Self {
        Self { n_qubits, depth }
    }

    pub fn parameter_count(&self) -> usize {
        3 * self.n_qubits * (self.depth + 1)
    }
}

/// Parameters are consumed layer-major, qubit-minor, as `(θ, φ, λ)` triples.
pub fn build_ansatz(shape: &AnsatzShape, params: &[f64]) -> Result<Circuit> {
    let expected = shape.parameter_count();
    if params.len() != expected {
        return Err(Error::ParameterLength { expected, found: params.len() });
    }
    let n = shape.n_qubits;
    let mut c = Circuit::new(n);
    let mut angles = params.chunks_exact(3);
    for layer in 0..=shape.depth {
        if layer > 0 {
            for q in 0..n.saturating_sub(1) {
                c.push(Gate::cnot(q, q + 1))?;
            }
        }
        for q in 0..n {
            let a = angles.next().expect("length checked above");
            c.push(Gate::u3(q, a[0], a[1], a[2]))?;
        }
    }
    Ok(c)
}

/// Measurement histogram indexed by basis state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counts {
    pub n_qubits: usize,
    pub counts: Vec<u64>,
}

impl Counts {
    pub fn shots(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn bitstring(&self, index: usize) -> String {
        format!("{index:0width$b}", width = self.n_qubits)
    }

    pub fn get(&self, bits: &str) -> u64 {
        usize::from_str_radix(bits, 2).ok().and_then(|i| self.counts.get(i).copied()).unwrap_or(0)
    }

    /// Non-zero entries keyed by bit string (qubit 0 first).
    pub fn to_map(&self) -> BTreeMap<String, u64> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (self.bitstring(i), c))
            .collect()
    }
}

pub fn probabilities(psi: &[C64]) -> Vec<f64> {
    psi.iter().map(|z| z.norm_sqr()).collect()
}

/// Multinomial draw over outcomes with the given probabilities, by
/// sequential conditional binomials.
pub fn sample_multinomial(probs: &[f64], shots: u64, seed: u64) -> Result<Vec<u64>> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let mut rng = rng::rng_from(seed);
    let mut remaining_mass: f64 = probs.iter().sum();
    let mut remaining = shots;
    let mut out = vec![0u64; probs.len()];
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == probs.len() {
            out[i] = remaining;
            break;
        }
        let q = if remaining_mass > 0.0 { (p / remaining_mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = if q >= 1.0 {
            remaining
        } else if q <= 0.0 {
            0
        } else {
            Binomial::new(remaining, q).expect("probability in (0, 1)").sample(&mut rng)
        };
        out[i] = k;
        remaining -= k;
        remaining_mass -= p;
    }
    Ok(out)
}

pub fn sample_counts(psi: &[C64], shots: u64, seed: u64) -> Result<Counts> {
    let n_qubits = psi.len().trailing_zeros() as usize;
    Ok(Counts { n_qubits, counts: sample_multinomial(&probabilities(psi), shots, seed)? })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpectationMode {
    Exact,
    Shots { shots: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

/// Rotation taking the eigenbasis of `basis` to the computational basis.
fn basis_change(basis: Pauli) -> Option<[[C64; 2]; 2]> {
    use std::f64::consts::{FRAC_PI_2, PI};
    match basis {
        Pauli::X => Some(Gate::u3_matrix(FRAC_PI_2, 0.0, PI)),
        Pauli::Y => Some(Gate::u3_matrix(FRAC_PI_2, 0.0, FRAC_PI_2)),
        Pauli::Z | Pauli::I => None,
    }
}

/// A Pauli-sum observable with its measurement grouping precomputed.
#[derive(Debug, Clone)]
pub struct Estimator {
    observable: PauliSum,
    groups: Vec<MeasurementGroup>,
    /// Sum of identity-string coefficients.
    constant: f64,
}

impl Estimator {
    pub fn new(observable: PauliSum) -> Self {
        let groups = group_by_basis(&observable);
        let constant = observable.terms().iter().filter(|t| t.string.is_identity()).map(|t| t.coeff).sum();
        Self { observable, groups, constant }
    }

    pub fn observable(&self) -> &PauliSum {
        &self.observable
    }

    pub fn groups(&self) -> &[MeasurementGroup] {
        &self.groups
    }

    /// Estimate `⟨ψ|H|ψ⟩`. In shot mode each measurement group gets its own
    /// histogram drawn from a seed split off `seed` by group index.
    pub fn estimate(&self, psi: &[C64], mode: ExpectationMode) -> Result<Estimate> {
        let n = self.observable.n_qubits();
        if psi.len() != 1 << n {
            return Err(Error::QubitMismatch { expected: n, found: psi.len().trailing_zeros() as usize });
        }
        let (shots, seed) = match mode {
            ExpectationMode::Exact => {
                return Ok(Estimate { value: self.observable.expectation(psi), stderr: 0.0 });
            }
            ExpectationMode::Shots { shots, seed } => (shots, seed),
        };
        if shots == 0 {
            return Err(Error::ZeroShots);
        }
        let mut value = self.constant;
        let mut variance = 0.0;
        for (gi, group) in self.groups.iter().enumerate() {
            let terms: Vec<(f64, usize)> = group
                .terms
                .iter()
                .map(|&i| &self.observable.terms()[i])
                .filter(|t| !t.string.is_identity())
                .map(|t| {
                    let support = t
                        .string
                        .letters()
                        .iter()
                        .enumerate()
                        .filter(|(_, &p)| p != Pauli::I)
                        .fold(0usize, |m, (q, _)| m | qubit_mask(n, q));
                    (t.coeff, support)
                })
                .collect();
            if terms.is_empty() {
                continue;
            }
            let mut rotated = psi.to_vec();
            for (q, b) in group.basis.iter().enumerate() {
                if let Some(u) = b.and_then(basis_change) {
                    apply_single(&mut rotated, n, q, &u);
                }
            }
            let counts = sample_multinomial(&probabilities(&rotated), shots, rng::split(seed, gi as u64))?;
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for (outcome, &k) in counts.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let v: f64 = terms
                    .iter()
                    .map(|&(c, support)| if (outcome & support).count_ones() % 2 == 0 { c } else { -c })
                    .sum();
                sum += k as f64 * v;
                sum_sq += k as f64 * v * v;
            }
            let m = shots as f64;
            let mean = sum / m;
            let sample_var = if shots > 1 { ((sum_sq - m * mean * mean) / (m - 1.0)).max(0.0) } else { 0.0 };
            value += mean;
            variance += sample_var / m;
        }
        Ok(Estimate { value, stderr: variance.sqrt() })
    }
}

/// `⟨H⟩` on the state prepared by `circuit` from `|0…0⟩`.
pub fn expectation(circuit: &Circuit, observable: &PauliSum, mode: ExpectationMode) -> Result<Estimate> {
    if observable.n_qubits() != circuit.n_qubits() {
        return Err(Error::QubitMismatch { expected: circuit.n_qubits(), found: observable.n_qubits() });
    }
    let psi = circuit.run(0)?;
    Estimator::new(observable.clone()).estimate(&psi, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    #[test]
    fn empty_circuit() {
        let psi = Circuit::new(2).run(0).unwrap();
        assert_eq!(psi, vec![C64::new(1.0, 0.0), ZERO, ZERO, ZERO]);
    }

    #[test]
    fn not_rotation() {
        let c = Circuit::from_gates(1, vec![Gate::u3(0, PI, 0.0, PI)]).unwrap();
        let psi = c.run(0).unwrap();
        assert!(psi[0].norm() < 1e-15);
        assert!((psi[1] - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn bell_state() {
        let c = Circuit::from_gates(2, vec![Gate::u3(0, FRAC_PI_2, 0.0, PI), Gate::cnot(0, 1)]).unwrap();
        let psi = c.run(0).unwrap();
        let expected = [FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2];
        for (a, e) in psi.iter().zip(expected) {
            assert!((a - C64::new(e, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn invalid_inputs() {
        assert!(Circuit::new(2).run(4).is_err());
        assert!(Circuit::from_gates(2, vec![Gate::cnot(1, 1)]).is_err());
        assert!(Circuit::from_gates(2, vec![Gate::u3(2, 0.0, 0.0, 0.0)]).is_err());
        assert!(matches!(
            build_ansatz(&AnsatzShape::new(2, 1), &[0.0; 11]),
            Err(Error::ParameterLength { expected: 12, found: 11 })
        ));
    }

    #[test]
    fn ansatz_layout() {
        let shape = AnsatzShape::new(2, 1);
        assert_eq!(shape.parameter_count(), 12);
        let params: Vec<f64> = (0..12).map(|i| i as f64).collect();
        let c = build_ansatz(&shape, &params).unwrap();
        assert_eq!(
            c.gates(),
            &[
                Gate::u3(0, 0.0, 1.0, 2.0),
                Gate::u3(1, 3.0, 4.0, 5.0),
                Gate::cnot(0, 1),
                Gate::u3(0, 6.0, 7.0, 8.0),
                Gate::u3(1, 9.0, 10.0, 11.0),
            ]
        );
        let zero = build_ansatz(&AnsatzShape::new(2, 0), &[0.0; 6]).unwrap();
        assert_eq!(zero.gates().len(), 2);
        assert_eq!(zero.run(0).unwrap()[0], C64::new(1.0, 0.0));
    }

    #[test]
    fn circuit_text_round_trip() {
        let shape = AnsatzShape::new(3, 2);
        let params: Vec<f64> = (0..shape.parameter_count()).map(|i| (i as f64 * 0.37).sin()).collect();
        let c = build_ansatz(&shape, &params).unwrap();
        let text = c.to_text();
        assert!(text.starts_with("qubits 3\n"));
        assert_eq!(Circuit::from_text(&text).unwrap(), c);
        assert!(Circuit::from_text("u3 0 0 0 0").is_err());
        assert!(Circuit::from_text("qubits 1\ncx 0 1").is_err());
    }

    #[test]
    fn deterministic_sampling() {
        let psi = vec![C64::new(1.0, 0.0), ZERO, ZERO, ZERO];
        assert_eq!(sample_counts(&psi, 100, 3).unwrap().to_map(), BTreeMap::from([("00".to_string(), 100)]));
        assert!(matches!(sample_counts(&psi, 0, 3), Err(Error::ZeroShots)));

        let h = FRAC_1_SQRT_2;
        let bell = vec![C64::new(h, 0.0), ZERO, ZERO, C64::new(h, 0.0)];
        let a = sample_counts(&bell, 8192, 42).unwrap();
        assert_eq!(a, sample_counts(&bell, 8192, 42).unwrap());
        assert_eq!(a.shots(), 8192);
        let sigma = (8192.0f64 * 0.25).sqrt();
        for bits in ["00", "11"] {
            assert!((a.get(bits) as f64 - 4096.0).abs() < 4.0 * sigma);
        }
        assert_eq!(a.get("01") + a.get("10"), 0);
    }

    #[test]
    fn simple_expectations() {
        let zero = Circuit::new(1);
        let z = PauliSum::from_terms(1, &[(1.0, "Z")]).unwrap();
        assert_eq!(expectation(&zero, &z, ExpectationMode::Exact).unwrap(), Estimate { value: 1.0, stderr: 0.0 });

        let x = PauliSum::from_terms(1, &[(1.0, "X")]).unwrap();
        let est = expectation(&zero, &x, ExpectationMode::Shots { shots: 8192, seed: 5 }).unwrap();
        assert!(est.value.abs() < 4.0 / 8192f64.sqrt());
        assert!((est.stderr - 1.0 / 8192f64.sqrt()).abs() < 1e-3);

        let two = PauliSum::from_terms(2, &[(1.0, "ZZ")]).unwrap();
        assert!(matches!(expectation(&zero, &two, ExpectationMode::Exact), Err(Error::QubitMismatch { .. })));
    }

    #[test]
    fn y_measurement_rotation() {
        // u3(π/2, π/2, 0) prepares (|0⟩ + i|1⟩)/√2, the +1 eigenstate of Y.
        let c = Circuit::from_gates(1, vec![Gate::u3(0, FRAC_PI_2, FRAC_PI_2, 0.0)]).unwrap();
        let y = PauliSum::from_terms(1, &[(1.0, "Y")]).unwrap();
        assert!((expectation(&c, &y, ExpectationMode::Exact).unwrap().value - 1.0).abs() < 1e-15);
        let est = expectation(&c, &y, ExpectationMode::Shots { shots: 1000, seed: 1 }).unwrap();
        assert_eq!(est.value, 1.0);
        assert_eq!(est.stderr, 0.0);
    }
}
