//! Dense Hermitian eigensolver and the quantities derived from full spectra.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::{OperatorMatrix, C64, ZERO};
use crate::oscillator::{build_model, ModelSpec};

/// Jacobi sweeps stop once the off-diagonal norm drops below this fraction of
/// the Frobenius norm.
pub const OFF_DIAGONAL_TOL: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 100;
/// Eigenvalues closer than this are treated as one degenerate cluster.
pub const CLUSTER_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` belongs to `eigenvalues[k]`.
    pub eigenvectors: Vec<Vec<C64>>,
    /// `max_k ‖H v_k − λ_k v_k‖₂`.
    pub residual: f64,
    pub sweeps: usize,
}

impl SpectrumResult {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn ground(&self) -> (f64, &[C64]) {
        (self.eigenvalues[0], &self.eigenvectors[0])
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,eigenvalue\n");
        for (i, v) in self.eigenvalues.iter().enumerate() {
            let _ = writeln!(s, "{i},{v:.16e}");
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// One Jacobi rotation annihilating `a[p][q]`. With `e = a_pq/|a_pq|` the
/// unitary acting on the `(p, q)` plane is `U = [[c, s], [−s·ē, c·ē]]`;
/// `a ← U†·a·U` and the eigenvector rows `vt ← (V·U)ᵀ`.
fn rotate(a: &mut [C64], vt: &mut [C64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let b = apq.norm();
    if b == 0.0 {
        return;
    }
    let phase = apq / b;
    let phase_conj = phase.conj();
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let theta = (aqq - app) / (2.0 * b);
    let t = if theta == 0.0 { 1.0 } else { theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt()) };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // Rows p and q of U†·a·U outside the (p, q) block only mix the old rows,
    // and Hermiticity gives the matching columns.
    let (rp, rq) = (p * n, q * n);
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let xp = a[rp + k];
        let xq = a[rq + k];
        let np = xp * c - xq * phase * s;
        let nq = xp * s + xq * phase * c;
        a[rp + k] = np;
        a[rq + k] = nq;
        a[k * n + p] = np.conj();
        a[k * n + q] = nq.conj();
    }
    a[rp + p] = C64::new(app - t * b, 0.0);
    a[rq + q] = C64::new(aqq + t * b, 0.0);
    a[rp + q] = ZERO;
    a[rq + p] = ZERO;

    let (vp, vq) = (p * n, q * n);
    for k in 0..n {
        let xp = vt[vp + k];
        let xq = vt[vq + k];
        vt[vp + k] = xp * c - xq * phase_conj * s;
        vt[vq + k] = xp * s + xq * phase_conj * c;
    }
}

fn off_diagonal_norm(a: &[C64], n: usize) -> f64 {
    let mut sum = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                sum += a[r * n + c].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

fn normalize(v: &mut [C64]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for z in v.iter_mut() {
            *z /= norm;
        }
    }
}

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Full eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations.
pub fn eigendecompose(h: &OperatorMatrix) -> Result<SpectrumResult> {
    h.check_hermitian()?;
    let n = h.dim();
    let mut a: Vec<C64> = h.entries().to_vec();
    // Row j of `vt` is the eigenvector belonging to diagonal entry j.
    let mut vt: Vec<C64> = OperatorMatrix::identity(n).entries().to_vec();
    let frobenius = h.frobenius();

    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS && off_diagonal_norm(&a, n) > OFF_DIAGONAL_TOL * frobenius {
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut vt, n, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[i * n + i].re).collect();
    let mut eigenvectors: Vec<Vec<C64>> =
        order.iter().map(|&j| vt[j * n..(j + 1) * n].to_vec()).collect();

    // Re-orthonormalise inside degenerate clusters.
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (eigenvalues[end] - eigenvalues[end - 1]).abs() < CLUSTER_TOL {
            end += 1;
        }
        for k in start..end {
            let (done, rest) = eigenvectors.split_at_mut(k);
            let vk = &mut rest[0];
            for prev in &done[start..k] {
                let proj = inner(prev, vk);
                for (x, y) in vk.iter_mut().zip(prev) {
                    *x -= proj * y;
                }
            }
            normalize(vk);
        }
        start = end;
    }

    let residual = eigenvalues
        .iter()
        .zip(&eigenvectors)
        .map(|(&lam, vec)| {
            h.matvec(vec)
                .iter()
                .zip(vec)
                .map(|(hv, x)| (hv - x * lam).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max);

    Ok(SpectrumResult { eigenvalues, eigenvectors, residual, sweeps })
}

/// The `k` eigenpairs with smallest `|λ|`; ties go to the lower index.
pub fn nearest_zero_state(spec: &SpectrumResult, k: usize) -> Vec<(f64, Vec<C64>)> {
    let mut order: Vec<usize> = (0..spec.dim()).collect();
    order.sort_by(|&i, &j| spec.eigenvalues[i].abs().total_cmp(&spec.eigenvalues[j].abs()));
    order
        .into_iter()
        .take(k.min(spec.dim()))
        .map(|i| (spec.eigenvalues[i], spec.eigenvectors[i].clone()))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub dim: usize,
    pub value: f64,
    /// `|value − previous value|`, absent for the first row.
    pub difference: Option<f64>,
}

/// Ground energy (one-mode families) or nearest-zero eigenvalue (two-mode
/// families) for each per-mode dimension in `dims`.
pub fn convergence_scan(template: &ModelSpec, dims: &[usize]) -> Result<Vec<ConvergenceRow>> {
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(dims.len());
    for &dim in dims {
        if !dim.is_power_of_two() || dim < 2 {
            return Err(Error::NotPowerOfTwo(dim));
        }
        let mut spec = template.clone();
        spec.qubits_per_mode = dim.trailing_zeros() as usize;
        let spectrum = eigendecompose(&build_model(&spec)?)?;
        let value = if spec.family.is_two_mode() {
            nearest_zero_state(&spectrum, 1)[0].0
        } else {
            spectrum.eigenvalues[0]
        };
        let difference = rows.last().map(|prev| (value - prev.value).abs());
        rows.push(ConvergenceRow { dim, value, difference });
    }
    Ok(rows)
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("dim,value,difference\n");
    for r in rows {
        match r.difference {
            Some(d) => {
                let _ = writeln!(s, "{},{:.16e},{:.16e}", r.dim, r.value, d);
            }
            None => {
                let _ = writeln!(s, "{},{:.16e},", r.dim, r.value);
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscillator::Family;
    use rand::Rng;

    fn random_hermitian(n: usize, seed: u64) -> OperatorMatrix {
        let mut rng = crate::rng::rng_from(seed);
        let mut m = OperatorMatrix::zeros(n);
        for r in 0..n {
            m[(r, r)] = C64::new(rng.random_range(-1.0..1.0), 0.0);
            for c in (r + 1)..n {
                let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                m[(r, c)] = z;
                m[(c, r)] = z.conj();
            }
        }
        m
    }

    #[test]
    fn harmonic_one_qubit() {
        let h = build_model(&ModelSpec::new(Family::HarmonicOsc, 1)).unwrap();
        let s = eigendecompose(&h).unwrap();
        assert_eq!(s.eigenvalues, vec![0.5, 0.5]);
    }

    #[test]
    fn harmonic_ground_is_exact() {
        for n in 2..=6 {
            let h = build_model(&ModelSpec::new(Family::HarmonicOsc, n)).unwrap();
            let s = eigendecompose(&h).unwrap();
            assert!((s.eigenvalues[0] - 0.5).abs() < 1e-9, "n={n}: {}", s.eigenvalues[0]);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = OperatorMatrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        assert!(matches!(eigendecompose(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn two_by_two_complex_analytic() {
        // [[1, 1−i], [1+i, 2]] has eigenvalues (3 ± √9)/2 = 0 and 3.
        let mut m = OperatorMatrix::zeros(2);
        m[(0, 0)] = C64::new(1.0, 0.0);
        m[(1, 1)] = C64::new(2.0, 0.0);
        m[(0, 1)] = C64::new(1.0, -1.0);
        m[(1, 0)] = C64::new(1.0, 1.0);
        let s = eigendecompose(&m).unwrap();
        assert!(s.eigenvalues[0].abs() < 1e-14);
        assert!((s.eigenvalues[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn random_hermitian_contract() {
        for (seed, n) in [(1, 3), (2, 8), (3, 16), (4, 33)] {
            let h = random_hermitian(n, seed);
            let s = eigendecompose(&h).unwrap();
            assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            assert!(s.residual < 1e-8 * s.spectral_radius().max(1.0), "residual {}", s.residual);
            for i in 0..n {
                for j in 0..n {
                    let ip = inner(&s.eigenvectors[i], &s.eigenvectors[j]);
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - C64::new(expect, 0.0)).norm() < 1e-10);
                }
            }
            let trace = h.trace().re;
            let sum: f64 = s.eigenvalues.iter().sum();
            assert!((trace - sum).abs() <= 1e-8 * trace.abs().max(1.0));
        }
    }

    #[test]
    fn square_has_squared_spectrum() {
        let h = random_hermitian(4, 9);
        let mut expected: Vec<f64> = eigendecompose(&h).unwrap().eigenvalues.iter().map(|v| v * v).collect();
        expected.sort_by(f64::total_cmp);
        let got = eigendecompose(&crate::oscillator::matrix_square(&h)).unwrap().eigenvalues;
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn degenerate_clusters_stay_orthonormal() {
        let h = build_model(&ModelSpec::new(Family::ClosedFree, 2)).unwrap();
        let s = eigendecompose(&h).unwrap();
        for i in 0..s.dim() {
            for j in 0..s.dim() {
                let ip = inner(&s.eigenvectors[i], &s.eigenvectors[j]).norm();
                assert!((ip - if i == j { 1.0 } else { 0.0 }).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn closed_free_zero_modes() {
        let h = build_model(&ModelSpec::new(Family::ClosedFree, 2)).unwrap();
        let s = eigendecompose(&h).unwrap();
        let zeros = s.eigenvalues.iter().filter(|v| v.abs() < 1e-9).count();
        assert!(zeros >= 2, "{:?}", s.eigenvalues);
        assert!(nearest_zero_state(&s, 1)[0].0.abs() < 1e-9);
    }

    #[test]
    fn equal_coupling_spectra_are_symmetric() {
        for fam in [Family::ClosedFree, Family::ClosedPhi4, Family::OpenPhi4] {
            let s = eigendecompose(&build_model(&ModelSpec::new(fam, 2)).unwrap()).unwrap();
            let n = s.dim();
            for i in 0..n {
                assert!((s.eigenvalues[i] + s.eigenvalues[n - 1 - i]).abs() < 1e-9, "{fam}");
            }
        }
    }

    fn manual(values: &[f64]) -> SpectrumResult {
        SpectrumResult {
            eigenvalues: values.to_vec(),
            eigenvectors: (0..values.len())
                .map(|i| (0..values.len()).map(|j| if i == j { C64::new(1.0, 0.0) } else { ZERO }).collect())
                .collect(),
            residual: 0.0,
            sweeps: 0,
        }
    }

    #[test]
    fn nearest_zero_selection() {
        let picked = nearest_zero_state(&manual(&[-1.0, 0.2, 3.0]), 1);
        assert_eq!(picked[0].0, 0.2);
        assert_eq!(picked[0].1[1], C64::new(1.0, 0.0));
        assert_eq!(nearest_zero_state(&manual(&[-0.2, 0.2]), 1)[0].0, -0.2);
        assert_eq!(nearest_zero_state(&manual(&[-0.2, 0.2]), 5).len(), 2);
    }

    #[test]
    fn harmonic_scan_is_flat() {
        let rows = convergence_scan(&ModelSpec::new(Family::HarmonicOsc, 1), &[4, 8, 16]).unwrap();
        for r in &rows {
            assert!((r.value - 0.5).abs() < 1e-9);
        }
        assert!(rows[0].difference.is_none());
        assert!(rows[1].difference.unwrap() < 1e-9);
        assert!(convergence_scan(&ModelSpec::new(Family::HarmonicOsc, 1), &[6]).is_err());
    }
}
