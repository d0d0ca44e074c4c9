//! Fixed inputs shared by the benchmarks.

use lientropy::{IntegerMatrix, RealMatrix};

/// Deterministic `n × n` matrix with entries in `[-1, 1]` plus `2·I`, so it is
/// comfortably invertible.
pub fn dense(n: usize) -> RealMatrix {
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15 ^ n as u64;
    let entries = (0..n * n)
        .map(|k| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let u = (state >> 11) as f64 / (1u64 << 53) as f64;
            2.0 * u - 1.0 + if k % (n + 1) == 0 { 2.0 } else { 0.0 }
        })
        .collect();
    RealMatrix::new(n, entries).expect("finite entries")
}

/// `[[1, 1], [0, 1]] ⊕ rotation(1) ⊕ diag(2, 1/2)`: every Jordan factor is
/// nontrivial.
pub fn mixed6() -> RealMatrix {
    let (s, c) = 1f64.sin_cos();
    let shear = RealMatrix::from_rows(&[[1.0, 1.0], [0.0, 1.0]]).expect("finite");
    let rot = RealMatrix::from_rows(&[[c, -s], [s, c]]).expect("finite");
    RealMatrix::direct_sum(
        &RealMatrix::direct_sum(&shear, &rot),
        &RealMatrix::diagonal(&[2.0, 0.5]),
    )
}

pub fn cat_map() -> IntegerMatrix {
    IntegerMatrix::from_rows(&[[2, 1], [1, 1]]).expect("square")
}

pub fn doubling() -> IntegerMatrix {
    IntegerMatrix::from_rows(&[[2]]).expect("square")
}

/// Block-diagonal lattice map of size 6 with a unipotent block.
pub fn lattice6() -> IntegerMatrix {
    let a = IntegerMatrix::from_rows(&[[2, 1, 0], [1, 1, 1], [0, -1, 3]]).expect("square");
    let b = IntegerMatrix::from_rows(&[[1, 1, 0], [0, 1, 1], [0, 0, 1]]).expect("square");
    IntegerMatrix::direct_sum(&a, &b)
}
