//! Independent dense oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use mssq::circuit::{Circuit, Gate};
use mssq::{OperatorMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Dense = Vec<Vec<C64>>;

pub fn u3(theta: f64, phi: f64, lam: f64) -> [[C64; 2]; 2] {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [C64::new(c, 0.0), -C64::from_polar(s, lam)],
        [C64::from_polar(s, phi), C64::from_polar(c, phi + lam)],
    ]
}

pub fn bit(k: usize, n: usize, q: usize) -> usize {
    (k >> (n - 1 - q)) & 1
}

/// Full 2ⁿ×2ⁿ matrix of one gate, built entry by entry.
pub fn gate_unitary(gate: &Gate, n: usize) -> Dense {
    let d = 1 << n;
    let mut m = vec![vec![C64::new(0.0, 0.0); d]; d];
    match *gate {
        Gate::U3 { target, theta, phi, lam } => {
            let u = u3(theta, phi, lam);
            let mask = 1 << (n - 1 - target);
            for r in 0..d {
                for c in 0..d {
                    if r & !mask == c & !mask {
                        m[r][c] = u[bit(r, n, target)][bit(c, n, target)];
                    }
                }
            }
        }
        Gate::Cnot { control, target } => {
            for c in 0..d {
                let r = if bit(c, n, control) == 1 { c ^ (1 << (n - 1 - target)) } else { c };
                m[r][c] = C64::new(1.0, 0.0);
            }
        }
    }
    m
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let d = a.len();
    (0..d)
        .map(|i| (0..d).map(|j| (0..d).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

pub fn random_gate(rng: &mut ChaCha8Rng, n: usize) -> Gate {
    if n > 1 && rng.random_bool(0.4) {
        let control = rng.random_range(0..n);
        let mut target = rng.random_range(0..n - 1);
        if target >= control {
            target += 1;
        }
        Gate::cnot(control, target)
    } else {
        let tau = std::f64::consts::TAU;
        Gate::u3(rng.random_range(0..n), rng.random_range(0.0..tau), rng.random_range(0.0..tau), rng.random_range(0.0..tau))
    }
}

pub fn random_circuit(rng: &mut ChaCha8Rng) -> Circuit {
    let n = rng.random_range(1..=4);
    let len = rng.random_range(0..=20);
    Circuit::from_gates(n, (0..len).map(|_| random_gate(rng, n)).collect()).unwrap()
}

pub fn random_hermitian(seed: u64, dim: usize) -> OperatorMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = vec![C64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        a[i * dim + i] = C64::new(rng.random_range(-2.0..2.0), 0.0);
        for j in i + 1..dim {
            let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            a[i * dim + j] = z;
            a[j * dim + i] = z.conj();
        }
    }
    OperatorMatrix::from_fn(dim, |r, c| a[r * dim + c])
}

/// Dense matrix of a Pauli string as an explicit Kronecker product.
pub fn pauli_dense(letters: &str) -> Vec<Vec<C64>> {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let single = |ch: char| match ch {
        'I' => [[one, zero], [zero, one]],
        'X' => [[zero, one], [one, zero]],
        'Y' => [[zero, -i], [i, zero]],
        'Z' => [[one, zero], [zero, -one]],
        _ => unreachable!(),
    };
    let mut m = vec![vec![one]];
    for ch in letters.chars() {
        let p = single(ch);
        let d = m.len();
        let mut next = vec![vec![zero; 2 * d]; 2 * d];
        for r in 0..d {
            for c in 0..d {
                for a in 0..2 {
                    for b in 0..2 {
                        next[2 * r + a][2 * c + b] = m[r][c] * p[a][b];
                    }
                }
            }
        }
        m = next;
    }
    m
}


/// Circuit output from the explicit product of full gate matrices.
pub fn dense_run(circuit: &Circuit, initial: usize) -> Vec<C64> {
    let n = circuit.n_qubits();
    let d = 1 << n;
    let mut u: Dense = (0..d)
        .map(|i| (0..d).map(|j| C64::new((i == j) as u8 as f64, 0.0)).collect())
        .collect();
    for g in circuit.gates() {
        u = matmul(&gate_unitary(g, n), &u);
    }
    (0..d).map(|k| u[k][initial]).collect()
}
