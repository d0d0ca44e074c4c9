use std::fmt;
use std::ops::Mul;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense square real matrix with finite entries.
///
/// Serialized as an array of rows. The 0×0 matrix is allowed so that trivial
/// factors (no torus, no vector part) have a representation.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct RealMatrix(DMatrix<f64>);

impl RealMatrix {
    /// Builds a matrix from `dim * dim` row-major entries.
    pub fn new(dim: usize, row_major: Vec<f64>) -> Result<Self> {
        if row_major.len() != dim * dim {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                row_major.len()
            )));
        }
        Self::from_nalgebra(DMatrix::from_row_slice(dim, dim, &row_major))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::InvalidMatrix(format!(
                    "row {i} has {} entries, expected {dim} (matrix must be square)",
                    row.len()
                )));
            }
            entries.extend_from_slice(row);
        }
        Self::new(dim, entries)
    }

    pub fn from_nalgebra(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidMatrix(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidMatrix("entries must be finite".into()));
        }
        Ok(Self(m))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        Self(DMatrix::from_diagonal(
            &nalgebra::DVector::from_column_slice(diag),
        ))
    }

    /// Block-diagonal sum `a ⊕ b`.
    pub fn direct_sum(a: &RealMatrix, b: &RealMatrix) -> Self {
        let (p, q) = (a.dim(), b.dim());
        let mut m = DMatrix::zeros(p + q, p + q);
        m.view_mut((0, 0), (p, p)).copy_from(&a.0);
        m.view_mut((p, p), (q, q)).copy_from(&b.0);
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[(row, col)]
    }

    pub fn as_nalgebra(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_nalgebra(self) -> DMatrix<f64> {
        self.0
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }

    pub fn row_major(&self) -> Vec<f64> {
        self.0.transpose().as_slice().to_vec()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        self.0
            .clone()
            .singular_values()
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(&self.0 * s)
    }

    pub fn sub(&self, other: &RealMatrix) -> Self {
        Self(&self.0 - &other.0)
    }

    pub fn add(&self, other: &RealMatrix) -> Self {
        Self(&self.0 + &other.0)
    }

    /// `self - I`.
    pub fn minus_identity(&self) -> Self {
        let n = self.dim();
        Self(&self.0 - DMatrix::identity(n, n))
    }

    /// Commutator `self·other − other·self`.
    pub fn commutator(&self, other: &RealMatrix) -> Self {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(
            x.len(),
            self.dim(),
            "vector length must equal matrix dimension"
        );
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.0[(i, j)] * x[j]).sum())
            .collect()
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = DMatrix::identity(self.dim(), self.dim());
        for _ in 0..k {
            acc = &acc * &self.0;
        }
        Self(acc)
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn determinant(&self) -> f64 {
        let n = self.dim();
        let mut a = self.row_major();
        let mut det = 1.0;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
                .unwrap();
            if a[pivot * n + col] == 0.0 {
                return 0.0;
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(col * n + k, pivot * n + k);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for row in col + 1..n {
                let f = a[row * n + col] / p;
                if f != 0.0 {
                    for k in col..n {
                        a[row * n + k] -= f * a[col * n + k];
                    }
                }
            }
        }
        det
    }

    /// Invertibility test `σ_min > 1e-12·σ_max` (reciprocal condition number).
    pub fn is_invertible(&self) -> bool {
        if self.dim() == 0 {
            return true;
        }
        let sv = self.0.clone().singular_values();
        let (smin, smax) = (sv.min(), sv.max());
        smax > 0.0 && smin > 1e-12 * smax
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_invertible() {
            return Err(Error::SingularMatrix);
        }
        self.0
            .clone()
            .try_inverse()
            .map(Self)
            .ok_or(Error::SingularMatrix)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl Mul for &RealMatrix {
    type Output = RealMatrix;

    fn mul(self, rhs: &RealMatrix) -> RealMatrix {
        RealMatrix(&self.0 * &rhs.0)
    }
}

impl TryFrom<Vec<Vec<f64>>> for RealMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<RealMatrix> for Vec<Vec<f64>> {
    fn from(m: RealMatrix) -> Self {
        m.to_rows()
    }
}

impl fmt::Debug for RealMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RealMatrix{:?}", self.to_rows())
    }
}

/// Dense square integer matrix, the lattice map of a torus endomorphism.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<i64>>")]
pub struct IntegerMatrix {
    dim: usize,
    entries: Vec<i64>,
}

impl IntegerMatrix {
    pub fn new(dim: usize, row_major: Vec<i64>) -> Result<Self> {
        if row_major.len() != dim * dim {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                row_major.len()
            )));
        }
        Ok(Self {
            dim,
            entries: row_major,
        })
    }

    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::InvalidMatrix(format!(
                    "row {i} has {} entries, expected {dim} (matrix must be square)",
                    row.len()
                )));
            }
            entries.extend_from_slice(row);
        }
        Self::new(dim, entries)
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1;
        }
        Self { dim, entries }
    }

    /// The 0×0 matrix (trivial torus).
    pub fn empty() -> Self {
        Self {
            dim: 0,
            entries: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        self.entries
            .chunks(self.dim.max(1))
            .take(self.dim)
            .map(<[i64]>::to_vec)
            .collect()
    }

    pub fn to_real(&self) -> RealMatrix {
        RealMatrix(DMatrix::from_fn(self.dim, self.dim, |i, j| {
            self.get(i, j) as f64
        }))
    }

    /// Block-diagonal sum `a ⊕ b`.
    pub fn direct_sum(a: &IntegerMatrix, b: &IntegerMatrix) -> Self {
        let n = a.dim + b.dim;
        let mut entries = vec![0; n * n];
        for i in 0..a.dim {
            for j in 0..a.dim {
                entries[i * n + j] = a.get(i, j);
            }
        }
        for i in 0..b.dim {
            for j in 0..b.dim {
                entries[(a.dim + i) * n + a.dim + j] = b.get(i, j);
            }
        }
        Self { dim: n, entries }
    }

    /// Upper block-triangular `[[a, c], [0, d]]`; `c` is `a.dim × d.dim` row-major.
    pub fn block_upper(a: &IntegerMatrix, c: &[i64], d: &IntegerMatrix) -> Result<Self> {
        if c.len() != a.dim * d.dim {
            return Err(Error::DimensionMismatch {
                expected: a.dim * d.dim,
                found: c.len(),
            });
        }
        let mut m = Self::direct_sum(a, d);
        let n = m.dim;
        for i in 0..a.dim {
            for j in 0..d.dim {
                m.entries[i * n + a.dim + j] = c[i * d.dim + j];
            }
        }
        Ok(m)
    }

    pub fn checked_mul(&self, rhs: &IntegerMatrix) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rhs.dim,
            });
        }
        let n = self.dim;
        let mut entries = vec![0i64; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc: i128 = 0;
                for k in 0..n {
                    acc += self.get(i, k) as i128 * rhs.get(k, j) as i128;
                }
                entries[i * n + j] = i64::try_from(acc)
                    .map_err(|_| Error::Overflow("integer matrix product".into()))?;
            }
        }
        Ok(Self { dim: n, entries })
    }

    pub fn checked_pow(&self, k: u32) -> Result<Self> {
        let mut acc = Self::identity(self.dim);
        for _ in 0..k {
            acc = acc.checked_mul(self)?;
        }
        Ok(acc)
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Result<i128> {
        let n = self.dim;
        if n == 0 {
            return Ok(1);
        }
        let mut a: Vec<i128> = self.entries.iter().map(|&x| x as i128).collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n - 1 {
            if a[k * n + k] == 0 {
                match (k + 1..n).find(|&r| a[r * n + k] != 0) {
                    Some(r) => {
                        for c in 0..n {
                            a.swap(k * n + c, r * n + c);
                        }
                        sign = -sign;
                    }
                    None => return Ok(0),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = a[i * n + j]
                        .checked_mul(a[k * n + k])
                        .and_then(|x| x.checked_sub(a[i * n + k].checked_mul(a[k * n + j])?))
                        .ok_or_else(|| Error::Overflow("Bareiss determinant".into()))?;
                    a[i * n + j] = num / prev;
                }
            }
            prev = a[k * n + k];
        }
        Ok(sign * a[n * n - 1])
    }

    /// Coefficients of `det(xI − A)`, lowest degree first, computed exactly.
    pub fn characteristic_polynomial(&self) -> Result<Vec<i128>> {
        crate::linalg::poly::faddeev_leverrier(self)
    }
}

impl TryFrom<Vec<Vec<i64>>> for IntegerMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<i64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<IntegerMatrix> for Vec<Vec<i64>> {
    fn from(m: IntegerMatrix) -> Self {
        m.to_rows()
    }
}

impl fmt::Debug for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntegerMatrix{:?}", self.to_rows())
    }
}

/// Applies `m` to `x` exactly `n` times without forming `mⁿ`.
pub fn matrix_power_apply(m: &RealMatrix, x: &[f64], n: u64) -> Result<Vec<f64>> {
    if x.len() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            found: x.len(),
        });
    }
    let mut v = x.to_vec();
    for _ in 0..n {
        v = m.apply(&v);
    }
    Ok(v)
}
