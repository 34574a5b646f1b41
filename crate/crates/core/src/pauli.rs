//! Pauli-string decomposition of Hermitian matrices.
//!
//! Qubit 0 is the most significant bit of a basis index and the first letter
//! of a Pauli string, so `"XZ"` is `X ⊗ Z`.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::{OperatorMatrix, C64, ZERO};

/// Terms with smaller magnitude are dropped by [`decompose`].
pub const COEFF_CUTOFF: f64 = 1e-12;
/// Imaginary parts below this are discarded; larger ones are an error.
pub const IMAG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    const ORDER: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    fn from_letter(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn matrix(self) -> OperatorMatrix {
        let (o, l, i) = (C64::new(1.0, 0.0), ZERO, C64::new(0.0, 1.0));
        let m = match self {
            Pauli::I => [[o, l], [l, o]],
            Pauli::X => [[l, o], [o, l]],
            Pauli::Y => [[l, -i], [i, l]],
            Pauli::Z => [[o, l], [l, -o]],
        };
        OperatorMatrix::from_fn(2, |r, c| m[r][c])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self(letters)
    }

    pub fn identity(n: usize) -> Self {
        Self(vec![Pauli::I; n])
    }

    /// The `index`-th string of the lexicographic (I, X, Y, Z) enumeration.
    pub fn from_index(index: usize, n: usize) -> Self {
        Self((0..n).map(|q| Pauli::ORDER[(index >> (2 * (n - 1 - q))) & 3]).collect())
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&p| p == Pauli::I)
    }

    fn bit(&self, q: usize) -> usize {
        1 << (self.0.len() - 1 - q)
    }

    /// Bits flipped by the string (X and Y positions).
    pub fn x_mask(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &p)| matches!(p, Pauli::X | Pauli::Y))
            .fold(0, |m, (q, _)| m | self.bit(q))
    }

    /// Bits carrying a sign (Y and Z positions).
    pub fn z_mask(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &p)| matches!(p, Pauli::Y | Pauli::Z))
            .fold(0, |m, (q, _)| m | self.bit(q))
    }

    fn y_phase(&self) -> C64 {
        let ys = self.0.iter().filter(|&&p| p == Pauli::Y).count();
        [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)][ys % 4]
    }

    /// `P|k⟩ = phase(k) |k ⊕ x_mask⟩`.
    fn phase_fn(&self) -> impl Fn(usize) -> C64 {
        let base = self.y_phase();
        let z = self.z_mask();
        move |k| if (k & z).count_ones() % 2 == 0 { base } else { -base }
    }

    /// `P|ψ⟩`.
    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        let x = self.x_mask();
        let phase = self.phase_fn();
        let mut out = vec![ZERO; psi.len()];
        for (k, &amp) in psi.iter().enumerate() {
            out[k ^ x] = phase(k) * amp;
        }
        out
    }

    /// `⟨ψ|P|ψ⟩`, real for Hermitian `P`.
    pub fn expectation(&self, psi: &[C64]) -> f64 {
        let x = self.x_mask();
        let phase = self.phase_fn();
        psi.iter()
            .enumerate()
            .map(|(k, &amp)| psi[k ^ x].conj() * phase(k) * amp)
            .sum::<C64>()
            .re
    }

    pub fn matrix(&self) -> OperatorMatrix {
        let n = self.0.len();
        let dim = 1usize << n;
        let x = self.x_mask();
        let phase = self.phase_fn();
        let mut m = OperatorMatrix::zeros(dim);
        for k in 0..dim {
            m[(k ^ x, k)] = phase(k);
        }
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.letter())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::InvalidPauliString(s.to_string()));
        }
        s.chars()
            .map(Pauli::from_letter)
            .collect::<Option<Vec<_>>>()
            .map(PauliString)
            .ok_or_else(|| Error::InvalidPauliString(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coeff: f64,
    pub string: PauliString,
}

/// Real linear combination of Pauli strings over a fixed number of qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
}

impl PauliSum {
    pub fn empty(n_qubits: usize) -> Self {
        Self { n_qubits, terms: Vec::new() }
    }

    /// Builds a sum from `(coeff, string)` pairs, merging repeated strings.
    pub fn from_terms<S: AsRef<str>>(n_qubits: usize, terms: &[(f64, S)]) -> Result<Self> {
        let mut sum = Self::empty(n_qubits);
        for (coeff, s) in terms {
            let string: PauliString = s.as_ref().parse()?;
            sum.push(*coeff, string)?;
        }
        Ok(sum)
    }

    /// Adds a term, merging into an existing equal string.
    pub fn push(&mut self, coeff: f64, string: PauliString) -> Result<()> {
        if string.len() != self.n_qubits {
            return Err(Error::QubitMismatch { expected: self.n_qubits, found: string.len() });
        }
        match self.terms.iter_mut().find(|t| t.string == string) {
            Some(t) => t.coeff += coeff,
            None => self.terms.push(PauliTerm { coeff, string }),
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, s: &str) -> f64 {
        self.terms.iter().find(|t| t.string.to_string() == s).map_or(0.0, |t| t.coeff)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|t| PauliTerm { coeff: t.coeff * factor, string: t.string.clone() }).collect(),
        }
    }

    /// Exact `⟨ψ|H|ψ⟩`.
    pub fn expectation(&self, psi: &[C64]) -> f64 {
        self.terms.iter().map(|t| t.coeff * t.string.expectation(psi)).sum()
    }

    /// Text form: one `coefficient string` line per term, 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for t in &self.terms {
            let _ = writeln!(s, "{:.16e} {}", t.coeff, t.string);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut terms: Vec<(f64, PauliString)> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(c), Some(s), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Parse { line: i + 1, message: "expected \"coefficient pauli-string\"".into() });
            };
            let coeff: f64 = c.parse().map_err(|e| Error::Parse { line: i + 1, message: format!("{e}: {c:?}") })?;
            let string: PauliString =
                s.parse().map_err(|e: Error| Error::Parse { line: i + 1, message: e.to_string() })?;
            terms.push((coeff, string));
        }
        let n = terms.first().map_or(0, |(_, s)| s.len());
        let mut sum = Self::empty(n);
        for (i, (c, s)) in terms.into_iter().enumerate() {
            sum.push(c, s).map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })?;
        }
        Ok(sum)
    }
}

/// `coeff(P) = tr(P·H)/2ⁿ` for every string in lexicographic order, dropping
/// terms below [`COEFF_CUTOFF`].
pub fn decompose(h: &OperatorMatrix) -> Result<PauliSum> {
    h.check_hermitian()?;
    let n = h.n_qubits().ok_or(Error::NotPowerOfTwo(h.dim()))?;
    let dim = h.dim();
    let count = 1usize << (2 * n);
    let coeff_of = |index: usize| -> Result<Option<PauliTerm>> {
        let string = PauliString::from_index(index, n);
        let x = string.x_mask();
        let phase = string.phase_fn();
        // tr(P H) = Σ_k ⟨k⊕x|P|k⟩ H[k, k⊕x]
        let tr: C64 = (0..dim).map(|k| phase(k) * h[(k, k ^ x)]).sum();
        let c = tr / dim as f64;
        if c.im.abs() > IMAG_TOL {
            return Err(Error::ComplexCoefficient { string: string.to_string(), imag: c.im });
        }
        Ok((c.re.abs() >= COEFF_CUTOFF).then_some(PauliTerm { coeff: c.re, string }))
    };

    #[cfg(feature = "parallel")]
    let terms: Vec<Option<PauliTerm>> = {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(coeff_of).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let terms: Vec<Option<PauliTerm>> = (0..count).map(coeff_of).collect::<Result<_>>()?;

    Ok(PauliSum { n_qubits: n, terms: terms.into_iter().flatten().collect() })
}

/// `Σ coeff · P` as a dense matrix.
pub fn reconstruct(sum: &PauliSum) -> OperatorMatrix {
    let dim = 1usize << sum.n_qubits;
    let mut m = OperatorMatrix::zeros(dim);
    for t in &sum.terms {
        let x = t.string.x_mask();
        let phase = t.string.phase_fn();
        for k in 0..dim {
            m[(k ^ x, k)] += phase(k) * t.coeff;
        }
    }
    m
}

/// Measurement basis of one qubit within a group; `None` means unconstrained.
pub type QubitBasis = Option<Pauli>;

/// Terms sharing one qubit-wise measurement setting.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementGroup {
    pub basis: Vec<QubitBasis>,
    /// Indices into the source [`PauliSum`]'s terms.
    pub terms: Vec<usize>,
}

impl MeasurementGroup {
    fn accepts(&self, s: &PauliString) -> bool {
        s.letters()
            .iter()
            .zip(&self.basis)
            .all(|(&p, b)| p == Pauli::I || b.is_none_or(|b| b == p))
    }

    fn absorb(&mut self, index: usize, s: &PauliString) {
        for (b, &p) in self.basis.iter_mut().zip(s.letters()) {
            if p != Pauli::I {
                *b = Some(p);
            }
        }
        self.terms.push(index);
    }
}

/// Greedy first-fit grouping into qubit-wise compatible sets, in input order.
pub fn group_by_basis(sum: &PauliSum) -> Vec<MeasurementGroup> {
    let mut groups: Vec<MeasurementGroup> = Vec::new();
    for (i, t) in sum.terms.iter().enumerate() {
        match groups.iter_mut().find(|g| g.accepts(&t.string)) {
            Some(g) => g.absorb(i, &t.string),
            None => {
                let mut g = MeasurementGroup { basis: vec![None; sum.n_qubits], terms: Vec::new() };
                g.absorb(i, &t.string);
                groups.push(g);
            }
        }
    }
    groups
}
