//! Position-space reconstruction of number-basis states.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::{C64, ZERO};

/// Uniform grid `[min, max]` with `points` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, points: usize) -> Self {
        Self { min, max, points }
    }

    pub fn symmetric(extent: f64, points: usize) -> Self {
        Self::new(-extent, extent, points)
    }

    pub fn step(&self) -> f64 {
        if self.points < 2 {
            0.0
        } else {
            (self.max - self.min) / (self.points - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.points).map(|i| self.min + h * i as f64).collect()
    }

    /// Trapezoid weights.
    fn weights(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.points)
            .map(|i| if i == 0 || i + 1 == self.points { 0.5 * h } else { h })
            .collect()
    }
}

impl Default for Axis {
    fn default() -> Self {
        Axis::symmetric(8.0, 321)
    }
}

/// Normalised Hermite functions `φ_0..φ_{count-1}` at `x`, by the three-term
/// recurrence on the normalised functions themselves.
pub fn hermite_functions(count: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let phi0 = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    out.push(phi0);
    if count == 1 {
        return out;
    }
    out.push(std::f64::consts::SQRT_2 * x * phi0);
    for n in 1..count - 1 {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}

/// `|ψ|²` sampled on one axis per mode.
#[derive(Debug, Clone)]
pub struct WavefunctionGrid {
    pub axes: Vec<Axis>,
    /// Row-major over the axes (first axis slowest).
    pub density: Vec<f64>,
    /// Trapezoid integral of `density`.
    pub norm: f64,
}

impl WavefunctionGrid {
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        match self.axes.as_slice() {
            [ax] => {
                s.push_str("x,density\n");
                for (x, d) in ax.values().iter().zip(&self.density) {
                    let _ = writeln!(s, "{x:.10e},{d:.16e}");
                }
            }
            [ax_a, ax_chi] => {
                s.push_str("x_a,x_chi,density\n");
                let xs_a = ax_a.values();
                let xs_chi = ax_chi.values();
                for (i, xa) in xs_a.iter().enumerate() {
                    for (j, xc) in xs_chi.iter().enumerate() {
                        let d = self.density[i * xs_chi.len() + j];
                        let _ = writeln!(s, "{xa:.10e},{xc:.10e},{d:.16e}");
                    }
                }
            }
            _ => unreachable!("grids have one or two axes"),
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    fn weights(&self) -> Vec<f64> {
        match self.axes.as_slice() {
            [ax] => ax.weights(),
            [a, b] => {
                let wb = b.weights();
                a.weights().iter().flat_map(|wa| wb.iter().map(move |w| wa * w)).collect()
            }
            _ => unreachable!("grids have one or two axes"),
        }
    }

    /// `∫ρ₁ρ₂ / √(∫ρ₁² ∫ρ₂²)`: 1 for identical shapes, independent of normalisation.
    pub fn overlap(&self, other: &WavefunctionGrid) -> f64 {
        assert_eq!(self.axes, other.axes, "overlap needs identical grids");
        let w = self.weights();
        let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).zip(&w).map(|((x, y), w)| x * y * w).sum() };
        let cross = dot(&self.density, &other.density);
        let aa = dot(&self.density, &self.density);
        let bb = dot(&other.density, &other.density);
        if aa == 0.0 || bb == 0.0 {
            return 0.0;
        }
        cross / (aa * bb).sqrt()
    }
}

/// Scaled basis functions `ω^{1/4} φ_n(x√ω)` on every point of `axis`;
/// `out[i][n]` is level `n` at point `i`.
fn basis_table(axis: &Axis, mode_dim: usize, omega: f64) -> Vec<Vec<f64>> {
    let scale = omega.powf(0.25);
    let root = omega.sqrt();
    axis.values()
        .into_iter()
        .map(|x| hermite_functions(mode_dim, x * root).into_iter().map(|v| v * scale).collect())
        .collect()
}

/// `ψ(x) = Σ_n c_n ω^{1/4} φ_n(x√ω)`, tensor-expanded over two axes when
/// two are given (coefficient index `i_a·mode_dim + i_χ`).
pub fn reconstruct_wavefunction(coeffs: &[C64], mode_dim: usize, axes: &[Axis], omega: f64) -> Result<WavefunctionGrid> {
    let expected = match axes.len() {
        1 => mode_dim,
        2 => mode_dim * mode_dim,
        n => return Err(Error::Config(format!("wavefunction grids need 1 or 2 axes, got {n}"))),
    };
    if coeffs.len() != expected {
        return Err(Error::CoefficientLength { expected, found: coeffs.len() });
    }
    let density: Vec<f64> = match axes {
        [ax] => basis_table(ax, mode_dim, omega)
            .iter()
            .map(|phis| phis.iter().zip(coeffs).map(|(p, c)| c * p).sum::<C64>().norm_sqr())
            .collect(),
        [ax_a, ax_chi] => {
            let ta = basis_table(ax_a, mode_dim, omega);
            let tc = basis_table(ax_chi, mode_dim, omega);
            // Contract the χ index first: partial[j][i_a] = Σ_{i_χ} c[i_a, i_χ] φ_{i_χ}(x_j).
            let partial: Vec<Vec<C64>> = tc
                .iter()
                .map(|phis| {
                    (0..mode_dim)
                        .map(|ia| {
                            coeffs[ia * mode_dim..(ia + 1) * mode_dim]
                                .iter()
                                .zip(phis)
                                .map(|(c, p)| c * p)
                                .sum()
                        })
                        .collect()
                })
                .collect();
            let mut out = Vec::with_capacity(ta.len() * tc.len());
            for phis_a in &ta {
                for row in &partial {
                    let psi: C64 = row.iter().zip(phis_a).fold(ZERO, |acc, (r, p)| acc + r * p);
                    out.push(psi.norm_sqr());
                }
            }
            out
        }
        _ => unreachable!(),
    };
    let mut grid = WavefunctionGrid { axes: axes.to_vec(), density, norm: 0.0 };
    grid.norm = grid.density.iter().zip(grid.weights()).map(|(d, w)| d * w).sum();
    Ok(grid)
}

/// `(n, |c_n|²)` rows.
pub fn basis_probabilities_csv(probabilities: &[f64]) -> String {
    let mut s = String::from("index,probability\n");
    for (i, p) in probabilities.iter().enumerate() {
        let _ = writeln!(s, "{i},{p:.16e}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(dim: usize, k: usize) -> Vec<C64> {
        (0..dim).map(|i| if i == k { C64::new(1.0, 0.0) } else { ZERO }).collect()
    }

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    /// Physicists' Hermite polynomial by the unnormalised recurrence.
    fn hermite_poly(n: usize, x: f64) -> f64 {
        let (mut h0, mut h1) = (1.0, 2.0 * x);
        if n == 0 {
            return h0;
        }
        for k in 1..n {
            let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
            h0 = h1;
            h1 = h2;
        }
        h1
    }

    #[test]
    fn matches_closed_form_for_low_orders() {
        for n in 0..12 {
            for &x in &[-3.1, -0.4, 0.0, 0.7, 2.5] {
                let closed = hermite_poly(n, x) * (-x * x / 2.0).exp()
                    / (2f64.powi(n as i32) * factorial(n) * std::f64::consts::PI.sqrt()).sqrt();
                let rec = hermite_functions(n + 1, x)[n];
                assert!((closed - rec).abs() < 1e-12, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn hermite_functions_are_bounded() {
        let ax = Axis::symmetric(10.0, 2001);
        for x in ax.values() {
            let phis = hermite_functions(128, x);
            for v in &phis[1..] {
                assert!(v.abs() <= 0.8);
            }
        }
    }

    #[test]
    fn ground_state_density() {
        let g = reconstruct_wavefunction(&unit(4, 0), 4, &[Axis::default()], 1.0).unwrap();
        let mid = g.density.len() / 2;
        assert!((g.density[mid] - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-12);
        assert!((g.norm - 1.0).abs() < 1e-6);
    }

    #[test]
    fn first_excited_has_node_at_origin() {
        let g = reconstruct_wavefunction(&unit(4, 1), 4, &[Axis::default()], 1.0).unwrap();
        assert!(g.density[g.density.len() / 2].abs() < 1e-30);
    }

    #[test]
    fn omega_rescaling_preserves_norm() {
        let g = reconstruct_wavefunction(&unit(8, 3), 8, &[Axis::default()], 0.3).unwrap();
        assert!((g.norm - 1.0).abs() < 0.02);
    }

    #[test]
    fn two_mode_product_gaussian() {
        let ax = Axis::symmetric(6.0, 61);
        let g = reconstruct_wavefunction(&unit(16, 0), 4, &[ax, ax], 1.0).unwrap();
        let xs = ax.values();
        for (i, xa) in xs.iter().enumerate() {
            for (j, xc) in xs.iter().enumerate() {
                let expected = (-(xa * xa) - xc * xc).exp() / std::f64::consts::PI;
                assert!((g.density[i * xs.len() + j] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let err = reconstruct_wavefunction(&unit(3, 0), 4, &[Axis::default()], 1.0);
        assert!(matches!(err, Err(Error::CoefficientLength { expected: 4, found: 3 })));
    }

    #[test]
    fn overlap_of_identical_is_one() {
        let g = reconstruct_wavefunction(&unit(4, 2), 4, &[Axis::default()], 1.0).unwrap();
        assert!((g.overlap(&g) - 1.0).abs() < 1e-12);
    }
}
