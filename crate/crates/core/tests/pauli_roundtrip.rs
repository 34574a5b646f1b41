use mssq::pauli::{decompose, reconstruct, PauliString};
use mssq::C64;
use proptest::prelude::*;

mod common;
use common::*;

#[test]
fn fifty_random_hermitian_matrices_round_trip() {
    for case in 0..50u64 {
        let dim = [2, 4, 8, 16][(case % 4) as usize];
        let h = random_hermitian(case, dim);
        let sum = decompose(&h).unwrap();
        let back = reconstruct(&sum);
        assert!(back.max_abs_diff(&h) < 1e-9, "case {case}, dim {dim}: {}", back.max_abs_diff(&h));
    }
}

#[test]
fn coefficients_match_trace_oracle() {
    for case in 0..8u64 {
        let dim: usize = [2, 4, 8][(case % 3) as usize];
        let n = dim.trailing_zeros() as usize;
        let h = random_hermitian(100 + case, dim);
        let sum = decompose(&h).unwrap();
        for index in 0..4usize.pow(n as u32) {
            let letters = PauliString::from_index(index, n).to_string();
            let p = pauli_dense(&letters);
            let mut tr = C64::new(0.0, 0.0);
            for r in 0..dim {
                for c in 0..dim {
                    tr += p[r][c] * h[(c, r)];
                }
            }
            let expected = tr.re / dim as f64;
            assert!(tr.im.abs() < 1e-10);
            let got = sum.coefficient(&letters);
            assert!((got - expected).abs() < 1e-12, "{letters}: {got} vs {expected}");
        }
    }
}

proptest! {
    #[test]
    fn decomposition_is_linear(alpha in -3.0f64..3.0, beta in -3.0f64..3.0, sa in any::<u64>(), sb in any::<u64>(), n in 1usize..=3) {
        let dim = 1 << n;
        let a = random_hermitian(sa, dim);
        let b = random_hermitian(sb, dim);
        let combo = &a.scale_real(alpha) + &b.scale_real(beta);
        let (da, db, dc) = (decompose(&a).unwrap(), decompose(&b).unwrap(), decompose(&combo).unwrap());
        for index in 0..4usize.pow(n as u32) {
            let s = PauliString::from_index(index, n).to_string();
            let lhs = dc.coefficient(&s);
            let rhs = alpha * da.coefficient(&s) + beta * db.coefficient(&s);
            prop_assert!((lhs - rhs).abs() < 1e-9, "{}: {} vs {}", s, lhs, rhs);
        }
    }

    #[test]
    fn text_format_round_trips(seed in any::<u64>(), n in 1usize..=3) {
        let sum = decompose(&random_hermitian(seed, 1 << n)).unwrap();
        let again = mssq::pauli::PauliSum::from_text(&sum.to_text()).unwrap();
        prop_assert_eq!(again, sum);
    }
}
