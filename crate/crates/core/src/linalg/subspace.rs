use nalgebra::{DMatrix, DVector, SVD};
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::RealMatrix;

/// A linear subspace of ℝⁿ given by an orthonormal basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subspace {
    pub ambient_dim: usize,
    pub basis: Vec<Vec<f64>>,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: Vec::new(),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        let basis = (0..ambient_dim)
            .map(|i| {
                let mut e = vec![0.0; ambient_dim];
                e[i] = 1.0;
                e
            })
            .collect();
        Self { ambient_dim, basis }
    }

    /// Orthonormalized span of `vectors` (rank decided at `1e-12` relative).
    pub fn span(ambient_dim: usize, vectors: &[Vec<f64>]) -> Result<Self> {
        if vectors.is_empty() {
            return Ok(Self::zero(ambient_dim));
        }
        for v in vectors {
            if v.len() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: ambient_dim,
                    found: v.len(),
                });
            }
        }
        let m = DMatrix::from_fn(ambient_dim, vectors.len(), |i, j| vectors[j][i]);
        Ok(range_of(&m, 1e-12))
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// Basis vectors as the columns of an `ambient_dim × dim` matrix.
    pub fn basis_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.ambient_dim, self.dim(), |i, j| self.basis[j][i])
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> DMatrix<f64> {
        let b = self.basis_matrix();
        &b * b.transpose()
    }

    /// Largest deviation of `BᵀB` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let b = self.basis_matrix();
        let g = b.transpose() * &b - DMatrix::identity(self.dim(), self.dim());
        g.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Distance from `x` to the subspace.
    pub fn distance(&self, x: &[f64]) -> f64 {
        let v = DVector::from_column_slice(x);
        (&v - self.projector() * &v).norm()
    }
}

/// Orthonormal basis of the range of `m`, keeping singular directions above
/// `rel_tol·σ_max`.
fn range_of(m: &DMatrix<f64>, rel_tol: f64) -> Subspace {
    let n = m.nrows();
    let svd = SVD::new(m.clone(), true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let basis = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > rel_tol * smax && s > 0.0)
        .map(|(j, _)| u.column(j).iter().copied().collect())
        .collect();
    Subspace {
        ambient_dim: n,
        basis,
    }
}

/// Null space of a (possibly rectangular) matrix: right-singular vectors whose
/// singular value is at most `tol·σ_max`, or at most `tol` when `σ_max ≤ tol`.
pub(crate) fn null_space_of(m: &DMatrix<f64>, tol: f64, max_iterations: usize) -> Result<Subspace> {
    let cols = m.ncols();
    if cols == 0 {
        return Ok(Subspace::zero(0));
    }
    // Pad short matrices so the SVD returns a full set of right vectors.
    let padded = if m.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = SVD::try_new(padded, false, true, f64::EPSILON, max_iterations)
        .ok_or_else(|| Error::NonConvergence("SVD for null space".into()))?;
    let v_t = svd.v_t.expect("requested Vᵀ");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let scale = if smax <= tol { 1.0 } else { smax };
    let cutoff = tol * scale;
    let basis = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cutoff)
        .map(|(j, _)| v_t.row(j).iter().copied().collect())
        .collect();
    Ok(Subspace {
        ambient_dim: cols,
        basis,
    })
}

/// Orthonormal basis of `ker m` at relative tolerance `tol`.
pub fn null_space(m: &RealMatrix, tol: f64) -> Result<Subspace> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    null_space_of(m.as_nalgebra(), tol, Tolerances::default().max_iterations)
}

/// `a ∩ b` with the default relative tolerance.
pub fn intersect(a: &Subspace, b: &Subspace) -> Result<Subspace> {
    intersect_with(a, b, Tolerances::default().relative)
}

/// `a ∩ b`, the null space of the stacked complement projectors
/// `[I − Πa; I − Πb]`.
pub fn intersect_with(a: &Subspace, b: &Subspace, tol: f64) -> Result<Subspace> {
    if a.ambient_dim != b.ambient_dim {
        return Err(Error::DimensionMismatch {
            expected: a.ambient_dim,
            found: b.ambient_dim,
        });
    }
    let n = a.ambient_dim;
    if a.is_empty() || b.is_empty() {
        return Ok(Subspace::zero(n));
    }
    let id = DMatrix::<f64>::identity(n, n);
    let mut stacked = DMatrix::zeros(2 * n, n);
    stacked
        .view_mut((0, 0), (n, n))
        .copy_from(&(&id - a.projector()));
    stacked
        .view_mut((n, 0), (n, n))
        .copy_from(&(&id - b.projector()));
    // The stacked matrix has singular values in [0, √2]; an all-zero stack
    // means a = b = ℝⁿ.
    let smax = stacked.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if smax == 0.0 {
        return Ok(Subspace::full(n));
    }
    let mut s = null_space_of(&stacked, tol, Tolerances::default().max_iterations)?;
    s.ambient_dim = n;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    fn same_subspace(a: &Subspace, b: &Subspace) -> bool {
        a.dim() == b.dim() && (a.projector() - b.projector()).amax() < 1e-8
    }

    #[test]
    fn null_space_examples() {
        assert_eq!(null_space(&RealMatrix::zeros(3), 1e-9).unwrap().dim(), 3);
        assert!(null_space(&RealMatrix::identity(3), 1e-9)
            .unwrap()
            .is_empty());

        let shear_minus_id = RealMatrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap();
        let k = null_space(&shear_minus_id, 1e-9).unwrap();
        assert!(same_subspace(&k, &Subspace::span(2, &[e(2, 0)]).unwrap()));
    }

    #[test]
    fn null_space_rejects_bad_tolerance() {
        assert!(null_space(&RealMatrix::identity(2), 0.0).is_err());
    }

    #[test]
    fn intersection_examples() {
        let full = Subspace::full(3);
        let b = Subspace::span(3, &[vec![1.0, 1.0, 0.0]]).unwrap();
        assert!(same_subspace(&intersect(&full, &b).unwrap(), &b));

        let a = Subspace::span(3, &[e(3, 0), e(3, 1)]).unwrap();
        let b = Subspace::span(3, &[e(3, 1), e(3, 2)]).unwrap();
        let c = intersect(&a, &b).unwrap();
        assert!(same_subspace(&c, &Subspace::span(3, &[e(3, 1)]).unwrap()));

        let a = Subspace::span(2, &[e(2, 0)]).unwrap();
        let b = Subspace::span(2, &[e(2, 1)]).unwrap();
        assert!(intersect(&a, &b).unwrap().is_empty());
    }

    #[test]
    fn intersection_dimension_mismatch() {
        let err = intersect(&Subspace::full(2), &Subspace::full(3)).unwrap_err();
        assert_eq!(err.code(), "DIMENSION_MISMATCH");
    }
}
