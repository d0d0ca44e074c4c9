use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::jordan::{elliptic_invariant_gram_with, multiplicative_jordan_with};
use crate::linalg::RealMatrix;

/// Orbits whose Euclidean norm passes this are declared divergent.
pub const DIVERGENCE_CUTOFF: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitNorm {
    /// `√(vᵀPv)` with `P` invariant under the elliptic part of `m`.
    EllipticGram,
    Euclidean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Return {
    pub n: u64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceReport {
    pub recurrent: bool,
    /// Closest approach `‖mⁿx − x‖` over the steps taken, earliest on ties.
    pub best_return: Option<Return>,
    pub divergent: bool,
    pub steps: u64,
    pub norm: OrbitNorm,
}

/// Whether `min_{1≤n≤N} ‖mⁿx − x‖ ≤ δ`.
///
/// Distances use the Gram norm of the elliptic part of `m` when its Jordan
/// decomposition and that norm exist, the Euclidean norm otherwise. An orbit
/// leaving the ball of radius [`DIVERGENCE_CUTOFF`] stops the scan; it is
/// non-recurrent unless it already came back within `δ`.
pub fn recurrence_check(
    m: &RealMatrix,
    x: &[f64],
    n_max: u64,
    delta: f64,
) -> Result<RecurrenceReport> {
    if x.len() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            found: x.len(),
        });
    }
    if n_max < 1 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("x must be finite".into()));
    }

    let tol = Tolerances::default();
    let gram = multiplicative_jordan_with(m, &tol)
        .and_then(|j| elliptic_invariant_gram_with(&j.elliptic, &tol))
        .ok();
    let norm = if gram.is_some() {
        OrbitNorm::EllipticGram
    } else {
        OrbitNorm::Euclidean
    };
    let dist = |v: &DVector<f64>| match &gram {
        Some(p) => v.dot(&(p.as_nalgebra() * v)).max(0.0).sqrt(),
        None => v.norm(),
    };

    let a = m.as_nalgebra();
    let x0 = DVector::from_column_slice(x);
    let mut v = x0.clone();
    let mut best: Option<Return> = None;
    let mut divergent = false;
    let mut steps = 0;
    for n in 1..=n_max {
        v = a * &v;
        steps = n;
        if !(v.norm() <= DIVERGENCE_CUTOFF) {
            divergent = true;
            break;
        }
        let d = dist(&(&v - &x0));
        if best.is_none_or(|b| d < b.distance) {
            best = Some(Return { n, distance: d });
        }
        if d == 0.0 {
            break;
        }
    }
    Ok(RecurrenceReport {
        recurrent: best.is_some_and(|b| b.distance <= delta),
        best_return: best,
        divergent,
        steps,
        norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jordan::recurrent_subspace;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn rotation(theta: f64) -> RealMatrix {
        let (s, c) = theta.sin_cos();
        RealMatrix::from_rows(&[[c, -s], [s, c]]).unwrap()
    }

    #[test]
    fn rational_rotation_returns_at_its_period() {
        let r = recurrence_check(&rotation(2.0 * PI * 3.0 / 7.0), &[0.3, -1.1], 7, 1e-9).unwrap();
        assert!(r.recurrent);
        let best = r.best_return.unwrap();
        assert_eq!(best.n, 7);
        assert!(best.distance < 1e-12);
        assert_eq!(r.norm, OrbitNorm::EllipticGram);
    }

    #[test]
    fn expanding_diagonal_diverges() {
        let m = RealMatrix::diagonal(&[2.0, 3.0]);
        let r = recurrence_check(&m, &[1.0, 1.0], 100_000, 1e-3).unwrap();
        assert!(!r.recurrent && r.divergent);
        assert!(r.steps < 100);
    }

    #[test]
    fn identity_returns_immediately() {
        let r = recurrence_check(&RealMatrix::identity(3), &[1.0, 2.0, 3.0], 10, 1e-6).unwrap();
        assert!(r.recurrent);
        assert_eq!(
            r.best_return,
            Some(Return {
                n: 1,
                distance: 0.0
            })
        );
    }

    #[test]
    fn singular_map_falls_back_to_euclidean() {
        let m = RealMatrix::from_rows(&[[1.0, 0.0], [0.0, 0.0]]).unwrap();
        let r = recurrence_check(&m, &[1.0, 0.0], 5, 1e-6).unwrap();
        assert_eq!(r.norm, OrbitNorm::Euclidean);
        assert!(r.recurrent);
    }

    #[test]
    fn preconditions() {
        let m = RealMatrix::identity(2);
        assert!(recurrence_check(&m, &[1.0], 5, 1e-3).is_err());
        assert!(recurrence_check(&m, &[1.0, 0.0], 0, 1e-3).is_err());
        assert!(recurrence_check(&m, &[1.0, 0.0], 5, 0.0).is_err());
    }

    fn well_conditioned(n: usize) -> impl Strategy<Value = RealMatrix> {
        prop::collection::vec(-1.0f64..1.0, n * n).prop_map(move |v| {
            let m = RealMatrix::new(n, v).unwrap();
            RealMatrix::identity(n).add(&m.scale(0.3))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        // Conjugates of a rotation next to a hyperbolic, shear or finite-order
        // block. Next to an expanding block, rounding in a recurrent vector grows
        // like λⁿ, so there the rotation has finite order q and returns first.
        #[test]
        fn recurrent_subspace_vectors_return_and_hyperbolic_ones_do_not(
            s in well_conditioned(4),
            theta in 0.3f64..3.0,
            q in 3u32..12,
            lambda in 1.5f64..3.0,
            kind in 0usize..3,
            coeffs in prop::collection::vec(-1.0f64..1.0, 4),
        ) {
            let core = match kind {
                0 => RealMatrix::direct_sum(
                    &rotation(2.0 * PI / q as f64),
                    &RealMatrix::diagonal(&[lambda, 1.0 / lambda]),
                ),
                1 => RealMatrix::direct_sum(&rotation(theta), &RealMatrix::from_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap()),
                _ => RealMatrix::direct_sum(&rotation(theta), &RealMatrix::identity(2).scale(-1.0)),
            };
            let s_inv = s.inverse().unwrap();
            let m = &(&s * &core) * &s_inv;
            let rec = recurrent_subspace(&m).unwrap();
            prop_assert_eq!(rec.dim(), if kind == 2 { 4 } else if kind == 1 { 3 } else { 2 });
            for v in &rec.basis {
                let r = recurrence_check(&m, v, 100_000, 1e-3).unwrap();
                prop_assert!(r.recurrent, "{:?} {:?}", v, r);
            }
            if kind == 0 {
                // Unit vector with hyperbolic component ≥ 0.1 in eigen-coordinates.
                let mut local = coeffs.clone();
                if local[2].abs() + local[3].abs() < 0.2 {
                    local[2] = 0.2_f64.copysign(local[2] + 1e-300);
                }
                let x = s.apply(&local);
                let len = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let x: Vec<f64> = x.iter().map(|v| v / len).collect();
                let r = recurrence_check(&m, &x, 100_000, 1e-3).unwrap();
                prop_assert!(!r.recurrent, "{:?} {:?}", x, r);
            }
        }
    }
}
