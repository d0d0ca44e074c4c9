use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::jordan::{multiplicative_jordan_with, MultiplicativeJordan};
use crate::linalg::RealMatrix;

/// Matrix of `X ↦ g·X·g⁻¹` on `n×n` matrices, in the row-major elementary
/// basis `E₁₁, E₁₂, …, Eₙₙ`. Equals `g ⊗ g⁻ᵀ`.
pub fn adjoint_matrix(g: &RealMatrix) -> Result<RealMatrix> {
    let g_inv = g.inverse()?;
    let n = g.dim();
    let a = g.as_nalgebra();
    let b = g_inv.as_nalgebra().transpose();
    // (g X g⁻¹)_{ij} = Σ_{kl} g_{ik} X_{kl} g⁻¹_{lj}; row index i·n+j, column k·n+l.
    let ad = DMatrix::from_fn(n * n, n * n, |r, c| {
        let (i, j) = (r / n, r % n);
        let (k, l) = (c / n, c % n);
        a[(i, k)] * b[(j, l)]
    });
    RealMatrix::from_nalgebra(ad)
}

/// Componentwise comparison between `Jordan(Ad g)` and `Ad` of the factors of
/// `Jordan(g)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjointJordanReport {
    pub consistent: bool,
    pub tolerance: f64,
    /// `max|Δ| / max(1, max|Ad(e)|)`, and likewise for `h` and `u`.
    pub elliptic_residual: f64,
    pub hyperbolic_residual: f64,
    pub unipotent_residual: f64,
    pub group_decomposition: MultiplicativeJordan,
}

fn normalized_gap(computed: &RealMatrix, expected: &RealMatrix) -> f64 {
    computed.sub(expected).max_abs() / expected.max_abs().max(1.0)
}

/// Checks that the Jordan decomposition of `Ad(g)` is `Ad(e)·Ad(h)·Ad(u)`.
pub fn verify_adjoint_jordan(g: &RealMatrix) -> Result<AdjointJordanReport> {
    verify_adjoint_jordan_with(g, &Tolerances::default())
}

pub fn verify_adjoint_jordan_with(g: &RealMatrix, tol: &Tolerances) -> Result<AdjointJordanReport> {
    const TOLERANCE: f64 = 1e-6;
    let j = multiplicative_jordan_with(g, tol)?;
    let ad = adjoint_matrix(g)?;
    let jad = multiplicative_jordan_with(&ad, tol)?;
    let expected = (
        adjoint_matrix(&j.elliptic)?,
        adjoint_matrix(&j.hyperbolic)?,
        adjoint_matrix(&j.unipotent)?,
    );
    let elliptic_residual = normalized_gap(&jad.elliptic, &expected.0);
    let hyperbolic_residual = normalized_gap(&jad.hyperbolic, &expected.1);
    let unipotent_residual = normalized_gap(&jad.unipotent, &expected.2);
    let consistent = [elliptic_residual, hyperbolic_residual, unipotent_residual]
        .iter()
        .all(|&r| r <= TOLERANCE);
    Ok(AdjointJordanReport {
        consistent,
        tolerance: TOLERANCE,
        elliptic_residual,
        hyperbolic_residual,
        unipotent_residual,
        group_decomposition: j,
    })
}

/// Whether `x` lies in the recurrent set `G_h ∩ G_u` of the conjugation `C_g`,
/// i.e. commutes with the hyperbolic and unipotent parts of `g`.
pub fn conjugation_recurrent_membership(g: &RealMatrix, x: &RealMatrix, tol: f64) -> Result<bool> {
    if g.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            found: x.dim(),
        });
    }
    if !x.is_invertible() {
        return Err(Error::SingularMatrix);
    }
    let j = multiplicative_jordan_with(g, &Tolerances::default())?;
    Ok(commutes(x, &j.hyperbolic, tol) && commutes(x, &j.unipotent, tol))
}

fn commutes(x: &RealMatrix, y: &RealMatrix, tol: f64) -> bool {
    x.commutator(y).norm() <= tol * x.norm() * y.norm()
}
