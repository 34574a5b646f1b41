//! Truncated oscillator algebra and the model Hamiltonians.
//!
//! Every mode lives in a `2^n`-dimensional number basis. Position and
//! momentum are built from truncated ladder matrices and then multiplied, so
//! powers such as `x²` carry the usual truncation artifact in their last
//! row/column. Convergence is reached by raising `n`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::{ModeBlock, OperatorMatrix, C64, I};

/// Quartic coefficient of the anharmonic oscillator and of the closed φ⁴ universe.
pub const ANHARMONIC_QUARTIC: f64 = 0.275 / 4.0;
/// Quartic coefficient of the double well and of the open φ⁴ universe.
pub const DOUBLE_WELL_QUARTIC: f64 = 0.15 / 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// `p²/2 + x²/2`
    HarmonicOsc,
    /// `p²/2 + x²/2 + c x⁴`
    AnharmonicOsc,
    /// `p²/2 − x² + c x⁴`
    DoubleWell,
    /// `−p_a²/4 + p_χ²/4 − a² + χ²`
    ClosedFree,
    /// `−p_a²/4 + p_χ²/4 − a² + χ² − |Λ|a⁴ + cχ⁴`
    ClosedPhi4,
    /// `−p_a²/4 + p_χ²/4 + a² − χ² − |Λ|a⁴ + cχ⁴`
    OpenPhi4,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::HarmonicOsc,
        Family::AnharmonicOsc,
        Family::DoubleWell,
        Family::ClosedFree,
        Family::ClosedPhi4,
        Family::OpenPhi4,
    ];

    pub fn is_two_mode(self) -> bool {
        matches!(self, Family::ClosedFree | Family::ClosedPhi4 | Family::OpenPhi4)
    }

    pub fn modes(self) -> usize {
        if self.is_two_mode() {
            2
        } else {
            1
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::HarmonicOsc => "harmonic",
            Family::AnharmonicOsc => "anharmonic",
            Family::DoubleWell => "double-well",
            Family::ClosedFree => "closed-free",
            Family::ClosedPhi4 => "closed-phi4",
            Family::OpenPhi4 => "open-phi4",
        }
    }

    pub fn default_quartic(self) -> f64 {
        match self {
            Family::HarmonicOsc | Family::ClosedFree => 0.0,
            Family::AnharmonicOsc | Family::ClosedPhi4 => ANHARMONIC_QUARTIC,
            Family::DoubleWell | Family::OpenPhi4 => DOUBLE_WELL_QUARTIC,
        }
    }

    pub fn default_lambda(self) -> f64 {
        match self {
            Family::ClosedPhi4 => ANHARMONIC_QUARTIC,
            Family::OpenPhi4 => DOUBLE_WELL_QUARTIC,
            _ => 0.0,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        Ok(match key.as_str() {
            "harmonic" | "harmonicosc" => Family::HarmonicOsc,
            "anharmonic" | "anharmonicosc" => Family::AnharmonicOsc,
            "doublewell" => Family::DoubleWell,
            "closedfree" => Family::ClosedFree,
            "closedphi4" => Family::ClosedPhi4,
            "openphi4" => Family::OpenPhi4,
            _ => {
                return Err(Error::Config(format!(
                    "unknown model family {s:?} (expected one of: {})",
                    Family::ALL.map(Family::name).join(", ")
                )))
            }
        })
    }
}

/// Which Hamiltonian to build.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub family: Family,
    /// `|Λ|`, used only by the φ⁴ universes.
    pub lambda_abs: f64,
    /// Quartic coefficient `c`.
    pub quartic_c: f64,
    pub qubits_per_mode: usize,
    /// Frequency scale of the number basis.
    pub omega: f64,
}

impl ModelSpec {
    /// A spec with the default coefficients for `family` and `omega = 1`.
    pub fn new(family: Family, qubits_per_mode: usize) -> Self {
        Self {
            family,
            lambda_abs: family.default_lambda(),
            quartic_c: family.default_quartic(),
            qubits_per_mode,
            omega: 1.0,
        }
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn total_qubits(&self) -> usize {
        self.qubits_per_mode * self.family.modes()
    }

    pub fn mode_dim(&self) -> usize {
        1 << self.qubits_per_mode
    }

    pub fn validate(&self) -> Result<()> {
        if self.qubits_per_mode == 0 {
            return Err(Error::Config("qubits_per_mode must be positive".into()));
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::Config(format!("omega must be positive, got {}", self.omega)));
        }
        if !(self.lambda_abs.is_finite() && self.lambda_abs >= 0.0) {
            return Err(Error::Config(format!("lambda must be nonnegative, got {}", self.lambda_abs)));
        }
        if !(self.quartic_c.is_finite() && self.quartic_c >= 0.0) {
            return Err(Error::Config(format!("quartic_c must be nonnegative, got {}", self.quartic_c)));
        }
        Ok(())
    }
}

/// Truncated lowering and raising operators: `lower[n−1, n] = √n`.
pub fn ladder(dim: usize) -> Result<(OperatorMatrix, OperatorMatrix)> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let mut lower = OperatorMatrix::zeros(dim);
    for n in 1..dim {
        lower[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    let raise = lower.adjoint();
    Ok((lower, raise))
}

/// `x = (a + a†)/√(2ω)`, `p = i√(ω/2)(a† − a)`.
pub fn quadratures(dim: usize, omega: f64) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let (lower, raise) = ladder(dim)?;
    let x = (&lower + &raise).scale_real(1.0 / (2.0 * omega).sqrt());
    let p = (&raise - &lower).scale(I * (omega / 2.0).sqrt());
    Ok((x, p))
}

/// `kinetic·p² + quadratic·x² + quartic·x⁴` on one mode.
fn single_mode(dim: usize, omega: f64, kinetic: f64, quadratic: f64, quartic: f64) -> Result<OperatorMatrix> {
    let (x, p) = quadratures(dim, omega)?;
    let x2 = &x * &x;
    let p2 = &p * &p;
    let mut h = &p2.scale_real(kinetic) + &x2.scale_real(quadratic);
    if quartic != 0.0 {
        h = &h + &(&x2 * &x2).scale_real(quartic);
    }
    Ok(h)
}

fn mode_layout(label: &str, qubits: usize) -> Vec<ModeBlock> {
    vec![ModeBlock { label: label.to_string(), qubits }]
}

/// Single-mode piece `p²/4 + s·x² + q·x⁴` of the two-mode universes.
fn universe_piece(spec: &ModelSpec, quadratic: f64, quartic: f64) -> Result<OperatorMatrix> {
    single_mode(spec.mode_dim(), spec.omega, 0.25, quadratic, quartic)
}

/// Dense Hamiltonian for `spec`. Two-mode families place mode `a` on the
/// most significant qubit block and mode `χ` on the least significant one.
pub fn build_model(spec: &ModelSpec) -> Result<OperatorMatrix> {
    spec.validate()?;
    let n = spec.qubits_per_mode;
    let dim = spec.mode_dim();
    let w = spec.omega;
    let h = match spec.family {
        Family::HarmonicOsc => single_mode(dim, w, 0.5, 0.5, 0.0)?.with_layout(mode_layout("x", n)),
        Family::AnharmonicOsc => single_mode(dim, w, 0.5, 0.5, spec.quartic_c)?.with_layout(mode_layout("x", n)),
        Family::DoubleWell => single_mode(dim, w, 0.5, -1.0, spec.quartic_c)?.with_layout(mode_layout("x", n)),
        Family::ClosedFree | Family::ClosedPhi4 | Family::OpenPhi4 => {
            let (sign, lam, c) = match spec.family {
                Family::ClosedFree => (1.0, 0.0, 0.0),
                Family::ClosedPhi4 => (1.0, spec.lambda_abs, spec.quartic_c),
                _ => (-1.0, spec.lambda_abs, spec.quartic_c),
            };
            let piece_a = universe_piece(spec, sign, lam)?.with_layout(mode_layout("a", n));
            let piece_chi = universe_piece(spec, sign, c)?.with_layout(mode_layout("chi", n));
            let id_a = OperatorMatrix::identity(dim).with_layout(mode_layout("a", n));
            let id_chi = OperatorMatrix::identity(dim).with_layout(mode_layout("chi", n));
            &id_a.kron(&piece_chi) - &piece_a.kron(&id_chi)
        }
    };
    Ok(h)
}

/// `H·H`, the objective of the zero-eigenstate search.
pub fn matrix_square(h: &OperatorMatrix) -> OperatorMatrix {
    let mut sq = h * h;
    // Symmetrise away rounding so the product stays exactly Hermitian.
    let n = sq.dim();
    for r in 0..n {
        for c in r..n {
            let avg = (sq[(r, c)] + sq[(c, r)].conj()) * 0.5;
            sq[(r, c)] = avg;
            sq[(c, r)] = avg.conj();
        }
    }
    sq
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::ZERO;

    fn naive_product(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
        let n = a.dim();
        OperatorMatrix::from_fn(n, |r, c| (0..n).map(|k| a[(r, k)] * b[(k, c)]).sum())
    }

    #[test]
    fn ladder_dim2() {
        let (lower, raise) = ladder(2).unwrap();
        assert_eq!(lower, OperatorMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]));
        assert_eq!(raise, OperatorMatrix::from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]]));
    }

    #[test]
    fn ladder_dim3_entries() {
        let (lower, _) = ladder(3).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let expected = match (r, c) {
                    (0, 1) => 1.0,
                    (1, 2) => 2f64.sqrt(),
                    _ => 0.0,
                };
                assert_eq!(lower[(r, c)], C64::new(expected, 0.0));
            }
        }
    }

    #[test]
    fn ladder_rejects_small_dim() {
        assert!(matches!(ladder(1), Err(Error::InvalidDimension(1))));
        assert!(matches!(ladder(0), Err(Error::InvalidDimension(0))));
    }

    #[test]
    fn number_operator_from_ladder() {
        let (lower, raise) = ladder(4).unwrap();
        let n = naive_product(&raise, &lower);
        assert!(n.max_abs_diff(&OperatorMatrix::diagonal(&[0.0, 1.0, 2.0, 3.0])) < 1e-14);
    }

    #[test]
    fn quadratures_dim2() {
        let (x, p) = quadratures(2, 1.0).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let x_expected = OperatorMatrix::from_real_rows(&[&[0.0, h], &[h, 0.0]]);
        let p_expected = OperatorMatrix::from_fn(2, |r, c| match (r, c) {
            (0, 1) => C64::new(0.0, -h),
            (1, 0) => C64::new(0.0, h),
            _ => ZERO,
        });
        assert!(x.max_abs_diff(&x_expected) < 1e-15);
        assert!(p.max_abs_diff(&p_expected) < 1e-15);
        assert!(x.is_hermitian() && p.is_hermitian());
    }

    #[test]
    fn truncated_commutator() {
        for dim in [2usize, 3, 5, 8] {
            for omega in [1.0, 0.3] {
                let (x, p) = quadratures(dim, omega).unwrap();
                let comm = &naive_product(&x, &p) - &naive_product(&p, &x);
                for r in 0..dim {
                    for c in 0..dim {
                        let expected = if r != c {
                            ZERO
                        } else if r == dim - 1 {
                            C64::new(0.0, 1.0 - dim as f64)
                        } else {
                            C64::new(0.0, 1.0)
                        };
                        assert!((comm[(r, c)] - expected).norm() < 1e-12, "dim {dim} ({r},{c})");
                    }
                }
            }
        }
    }

    #[test]
    fn harmonic_one_qubit_is_half_identity() {
        let h = build_model(&ModelSpec::new(Family::HarmonicOsc, 1)).unwrap();
        assert!(h.max_abs_diff(&OperatorMatrix::identity(2).scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn closed_free_one_qubit_is_zero() {
        let h = build_model(&ModelSpec::new(Family::ClosedFree, 1)).unwrap();
        assert_eq!(h.dim(), 4);
        assert!(h.max_abs() < 1e-15);
    }

    #[test]
    fn closed_free_matches_pair_construction() {
        let n = 2;
        let dim = 1 << n;
        let h = build_model(&ModelSpec::new(Family::ClosedFree, n)).unwrap();
        let (x, p) = quadratures(dim, 1.0).unwrap();
        let piece = &naive_product(&p, &p).scale_real(0.25) + &naive_product(&x, &x);
        let id = OperatorMatrix::identity(dim);
        let expected = &id.kron(&piece) - &piece.kron(&id);
        assert!(h.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn published_coefficients() {
        let closed = ModelSpec::new(Family::ClosedPhi4, 2);
        assert_eq!(closed.lambda_abs, 0.275 / 4.0);
        assert_eq!(closed.quartic_c, 0.275 / 4.0);
        let open = ModelSpec::new(Family::OpenPhi4, 2);
        assert_eq!(open.lambda_abs, 0.15 / 4.0);
        assert_eq!(open.quartic_c, 0.15 / 4.0);
        assert_eq!(ModelSpec::new(Family::AnharmonicOsc, 2).quartic_c, 0.06875);
        assert_eq!(ModelSpec::new(Family::DoubleWell, 2).quartic_c, 0.0375);
    }

    #[test]
    fn anharmonic_without_quartic_is_harmonic() {
        for n in 1..=4 {
            let mut spec = ModelSpec::new(Family::AnharmonicOsc, n);
            spec.quartic_c = 0.0;
            let a = build_model(&spec).unwrap();
            let h = build_model(&ModelSpec::new(Family::HarmonicOsc, n)).unwrap();
            assert_eq!(a.max_abs_diff(&h), 0.0);
        }
    }

    #[test]
    fn dimensions_and_layout() {
        for fam in Family::ALL {
            let spec = ModelSpec::new(fam, 2);
            let h = build_model(&spec).unwrap();
            assert_eq!(h.dim(), 1 << spec.total_qubits());
            assert_eq!(h.layout.len(), fam.modes());
            assert_eq!(h.layout.iter().map(|b| b.qubits).sum::<usize>(), spec.total_qubits());
            let (dev, _, _) = h.hermitian_deviation();
            assert!(dev < 1e-12, "{fam}: {dev}");
        }
    }

    #[test]
    fn swapping_modes_negates_equal_coupling_universes() {
        // With |Λ| = c both mode pieces coincide, so SWAP·H·SWAP = −H.
        for fam in [Family::ClosedFree, Family::ClosedPhi4, Family::OpenPhi4] {
            let spec = ModelSpec::new(fam, 2);
            let h = build_model(&spec).unwrap();
            let d = spec.mode_dim();
            let swap = |i: usize| (i % d) * d + i / d;
            let swapped = OperatorMatrix::from_fn(h.dim(), |r, c| h[(swap(r), swap(c))]);
            assert!(swapped.max_abs_diff(&h.scale_real(-1.0)) < 1e-12, "{fam}");
        }
    }

    #[test]
    fn square_of_harmonic_one_qubit() {
        let h = build_model(&ModelSpec::new(Family::HarmonicOsc, 1)).unwrap();
        let sq = matrix_square(&h);
        assert!(sq.max_abs_diff(&OperatorMatrix::identity(2).scale_real(0.25)) < 1e-15);
        assert_eq!(matrix_square(&OperatorMatrix::zeros(4)), OperatorMatrix::zeros(4));
    }

    #[test]
    fn family_parsing() {
        for fam in Family::ALL {
            assert_eq!(fam.name().parse::<Family>().unwrap(), fam);
            assert_eq!(format!("{fam:?}").parse::<Family>().unwrap(), fam);
        }
        assert!("triple-well".parse::<Family>().is_err());
    }
}
