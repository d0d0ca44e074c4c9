//! Multiplicative Jordan decomposition of invertible real matrices.
//!
//! Every invertible `m` factors uniquely as `m = E·H·U` with the three factors
//! commuting, `E` elliptic (semisimple, spectrum on the unit circle), `H`
//! hyperbolic (semisimple, positive real spectrum) and `U` unipotent. The
//! construction goes through the additive Chevalley decomposition `m = S + N`:
//! `S` is assembled from the complex generalized eigenspaces of `m`, then
//! `U = I + S⁻¹N` and `S` is split eigenvalue-wise as `λ = (λ/|λ|)·|λ|`.
//!
//! The recurrent set of `x ↦ m·x` is `Fix(H) ∩ Fix(U)`; on it `m` acts as the
//! isometry `E` for the Gram form returned by [`elliptic_invariant_gram`].

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{
    intersect_with, locally_close, null_space_of, raw_eigenvalues, single_linkage_by,
    spectral_order, RealMatrix, Subspace,
};

type CMatrix = DMatrix<Complex64>;

/// Largest principal-angle sine below which two clusters' eigenspaces are
/// considered numerically the same (a split defective eigenvalue).
const MERGE_ANGLE: f64 = 1e-2;

fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

fn shifted_power(m: &CMatrix, mu: Complex64, k: usize) -> CMatrix {
    let n = m.nrows();
    let mut shifted = m.clone();
    for i in 0..n {
        shifted[(i, i)] -= mu;
    }
    let mut acc = shifted.clone();
    for _ in 1..k {
        acc = &acc * &shifted;
    }
    acc
}

/// `k` right-singular vectors of `a` with the smallest singular values, as
/// columns, together with the largest of those `k` singular values and the
/// next singular value up.
fn smallest_right_vectors(a: &CMatrix, k: usize, max_iter: usize) -> Result<(CMatrix, f64, f64)> {
    let n = a.ncols();
    let svd = SVD::try_new(a.clone(), false, true, f64::EPSILON, max_iter)
        .ok_or_else(|| Error::NonConvergence("complex SVD for eigenspace basis".into()))?;
    let v_t = svd.v_t.expect("requested Vᵀ");
    // try_new sorts singular values in descending order.
    let mut basis = CMatrix::zeros(n, k);
    for (c, row) in (n - k..n).enumerate() {
        for i in 0..n {
            basis[(i, c)] = v_t[(row, i)].conj();
        }
    }
    let worst = svd.singular_values[n - k];
    let kept = if k < n {
        svd.singular_values[n - k - 1]
    } else {
        f64::INFINITY
    };
    Ok((basis, worst, kept))
}

/// Basis of the generalized eigenspace of dimension `k` at `mu`: the kernel of
/// `(m − μI)^j` for the power `j ≤ k` that separates the `k` smallest singular
/// values best from the rest. Powers past the nilpotency index only shrink
/// the gap.
fn generalized_eigenspace(
    m: &CMatrix,
    mu: Complex64,
    k: usize,
    max_power: usize,
    max_iter: usize,
) -> Result<(CMatrix, f64)> {
    let mut best: Option<(CMatrix, f64, f64)> = None;
    for j in 1..=max_power {
        let (basis, worst, kept) = smallest_right_vectors(&shifted_power(m, mu, j), k, max_iter)?;
        let ratio = if worst > 0.0 {
            kept / worst
        } else {
            f64::INFINITY
        };
        if best.as_ref().is_none_or(|b| ratio > b.2) {
            best = Some((basis, worst, ratio));
        }
        if ratio == f64::INFINITY {
            break;
        }
    }
    let (basis, worst, _) = best.expect("max_power ≥ 1");
    Ok((basis, worst))
}

fn min_singular_value(a: &CMatrix) -> f64 {
    SVD::new(a.clone(), false, false)
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone)]
struct Cluster {
    value: Complex64,
    multiplicity: usize,
    /// `n × multiplicity` basis of the (generalized) eigenspace.
    basis: CMatrix,
    /// Largest singular value discarded into the basis; measures how far the
    /// basis is from an exact invariant subspace.
    residual: f64,
}

/// Decomposition of ℂⁿ into the (generalized) eigenspaces of a real matrix.
#[derive(Debug, Clone)]
struct SpectralSplit {
    clusters: Vec<Cluster>,
    basis: CMatrix,
    basis_inv: CMatrix,
}

impl SpectralSplit {
    /// With `generalized = false` each basis spans `ker(m − μI)` only, which
    /// covers ℂⁿ exactly when `m` is semisimple.
    fn compute(m: &RealMatrix, tol: &Tolerances, generalized: bool) -> Result<Self> {
        let n = m.dim();
        let cm = to_complex(m.as_nalgebra());
        let raw = raw_eigenvalues(m, tol)?;
        let scale = 1.0 + m.norm();
        let base = tol.cluster * scale;

        // Unconditional merging only at the scale of the eigenvalues involved;
        // farther pairs within `base` merge below only if their eigenspaces
        // are parallel. A purely norm-relative radius would fuse the small
        // eigenvalues of badly scaled matrices such as `Ad(g)`.
        let mut groups: Vec<Vec<usize>> =
            single_linkage_by(&raw, |a, b| locally_close(a, b, tol.cluster));
        let mut clusters: Vec<Cluster> = Vec::with_capacity(groups.len());
        let build = |members: &[usize]| -> Result<Cluster> {
            let k = members.len();
            let mut value = members.iter().map(|&i| raw[i]).sum::<Complex64>() / k as f64;
            if value.im.abs() <= tol.cluster * (1.0 + value.norm()) {
                value.im = 0.0;
            }
            let max_power = if generalized { k } else { 1 };
            let (basis, residual) =
                generalized_eigenspace(&cm, value, k, max_power, tol.max_iterations)?;
            Ok(Cluster {
                value,
                multiplicity: k,
                basis,
                residual,
            })
        };
        for g in &groups {
            clusters.push(build(g)?);
        }

        // Eigenvalues of a defective block of size k scatter by roughly
        // (ε‖m‖)^{1/k}. Re-merge clusters whose eigenvalues are that close and
        // whose eigenspaces are numerically parallel. Without the generalized
        // flag only pairs within `base` are candidates.
        let unit = 64.0 * n as f64 * f64::EPSILON;
        for size in 2..=n {
            let gate = if generalized {
                base.max(scale * unit.powf(1.0 / size as f64))
            } else {
                base
            };
            loop {
                let mut best: Option<(usize, usize, f64)> = None;
                for i in 0..clusters.len() {
                    for j in i + 1..clusters.len() {
                        let (a, b) = (&clusters[i], &clusters[j]);
                        if a.multiplicity + b.multiplicity > size
                            || (a.value - b.value).norm() > gate
                        {
                            continue;
                        }
                        let mut joined = CMatrix::zeros(n, a.multiplicity + b.multiplicity);
                        joined
                            .view_mut((0, 0), (n, a.multiplicity))
                            .copy_from(&a.basis);
                        joined
                            .view_mut((0, a.multiplicity), (n, b.multiplicity))
                            .copy_from(&b.basis);
                        let angle = min_singular_value(&joined);
                        if angle <= MERGE_ANGLE && best.is_none_or(|(_, _, s)| angle < s) {
                            best = Some((i, j, angle));
                        }
                    }
                }
                let Some((i, j, _)) = best else { break };
                let moved = groups.remove(j);
                groups[i].extend(moved);
                clusters.remove(j);
                clusters[i] = build(&groups[i])?;
            }
        }

        // Real input: conjugate clusters get exactly conjugate values.
        for i in 0..clusters.len() {
            if clusters[i].value.im > 0.0 {
                let target = clusters[i].value.conj();
                let k = clusters[i].multiplicity;
                if let Some(j) = (0..clusters.len())
                    .filter(|&j| clusters[j].value.im < 0.0 && clusters[j].multiplicity == k)
                    .min_by(|&a, &b| {
                        (clusters[a].value - target)
                            .norm()
                            .total_cmp(&(clusters[b].value - target).norm())
                    })
                {
                    clusters[j].value = target;
                }
            }
        }
        clusters.sort_by(|a, b| spectral_order(&a.value, &b.value));

        let mut basis = CMatrix::zeros(n, n);
        let mut col = 0;
        for c in &clusters {
            basis
                .view_mut((0, col), (n, c.multiplicity))
                .copy_from(&c.basis);
            col += c.multiplicity;
        }
        let basis_inv = basis.clone().try_inverse().ok_or_else(|| {
            Error::NonConvergence("eigenspace bases are linearly dependent".into())
        })?;
        Ok(Self {
            clusters,
            basis,
            basis_inv,
        })
    }

    /// `Re(V·diag(f(μ))·V⁻¹)`: the real matrix acting as `f(μ)` on each
    /// eigenspace.
    fn realize(&self, f: impl Fn(Complex64) -> Complex64) -> DMatrix<f64> {
        let n = self.basis.nrows();
        let mut scaled = self.basis.clone();
        let mut col = 0;
        for c in &self.clusters {
            let v = f(c.value);
            for j in col..col + c.multiplicity {
                for i in 0..n {
                    scaled[(i, j)] *= v;
                }
            }
            col += c.multiplicity;
        }
        (scaled * &self.basis_inv).map(|z| z.re)
    }

    /// `S⁻¹N` assembled block by block: `V_c·(W_c·m·V_c − μI)/μ·W_c` with
    /// `W = V⁻¹`. Working inside each eigenspace keeps rounding that leaks
    /// between eigenspaces out of the nilpotent part.
    fn scaled_nilpotent(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.basis.nrows();
        let cm = to_complex(m);
        let mut acc = CMatrix::zeros(n, n);
        let mut col = 0;
        for c in &self.clusters {
            let k = c.multiplicity;
            if k > 1 {
                let v = self.basis.columns(col, k);
                let w = self.basis_inv.rows(col, k);
                let mut block = w * &cm * v;
                for i in 0..k {
                    block[(i, i)] -= c.value;
                }
                acc += v * (block / c.value) * w;
            }
            col += k;
        }
        acc.map(|z| z.re)
    }
}

/// The commuting factorization `source = elliptic · hyperbolic · unipotent`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplicativeJordan {
    pub elliptic: RealMatrix,
    pub hyperbolic: RealMatrix,
    pub unipotent: RealMatrix,
    pub source: RealMatrix,
}

/// Measured deviations from the defining properties of the decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JordanResiduals {
    /// `‖E·H·U − m‖ / ‖m‖`.
    pub reconstruction: f64,
    /// Largest `‖[A, B]‖ / (‖A‖·‖B‖)` over the three pairs.
    pub commutator: f64,
    /// Largest `||λ| − 1|` over the spectrum of `E`.
    pub elliptic_modulus: f64,
    /// Eigenvector residual of `E` relative to `1 + ‖E‖`.
    pub elliptic_semisimple: f64,
    /// Largest `|Im λ| / |λ|` over the spectrum of `H`.
    pub hyperbolic_imaginary: f64,
    /// Smallest real part in the spectrum of `H`.
    pub hyperbolic_min: f64,
    /// Eigenvector residual of `H` relative to `1 + ‖H‖`.
    pub hyperbolic_semisimple: f64,
    /// `‖(U − I)^dim‖`.
    pub nilpotency: f64,
}

impl JordanResiduals {
    /// Whether every residual is inside the documented bounds.
    pub fn within_bounds(&self) -> bool {
        self.reconstruction <= 1e-8
            && self.commutator <= 1e-8
            && self.elliptic_modulus <= 1e-7
            && self.elliptic_semisimple <= 1e-7
            && self.hyperbolic_imaginary <= 1e-7
            && self.hyperbolic_min >= 1e-12
            && self.hyperbolic_semisimple <= 1e-7
            && self.nilpotency <= 1e-7
    }
}

fn rel_commutator(a: &RealMatrix, b: &RealMatrix) -> f64 {
    let denom = (a.norm() * b.norm()).max(f64::MIN_POSITIVE);
    a.commutator(b).norm() / denom
}

fn semisimple_residual(m: &RealMatrix, tol: &Tolerances) -> Result<f64> {
    let split = SpectralSplit::compute(m, tol, false)?;
    let scale = 1.0 + m.norm();
    Ok(split
        .clusters
        .iter()
        .map(|c| c.residual / scale)
        .fold(0.0, f64::max))
}

impl MultiplicativeJordan {
    pub fn dim(&self) -> usize {
        self.source.dim()
    }

    pub fn residuals(&self) -> Result<JordanResiduals> {
        let tol = Tolerances::default();
        let (e, h, u, m) = (
            &self.elliptic,
            &self.hyperbolic,
            &self.unipotent,
            &self.source,
        );
        let product = &(e * h) * u;
        let reconstruction = product.sub(m).norm() / m.norm().max(f64::MIN_POSITIVE);
        let commutator = rel_commutator(e, h)
            .max(rel_commutator(e, u))
            .max(rel_commutator(h, u));

        let e_spec = raw_eigenvalues(e, &tol)?;
        let elliptic_modulus = e_spec
            .iter()
            .map(|z| (z.norm() - 1.0).abs())
            .fold(0.0, f64::max);
        let h_spec = raw_eigenvalues(h, &tol)?;
        let hyperbolic_imaginary = h_spec
            .iter()
            .map(|z| z.im.abs() / z.norm().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        let hyperbolic_min = h_spec.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);

        let nil = u.minus_identity().pow(self.dim() as u32);
        Ok(JordanResiduals {
            reconstruction,
            commutator,
            elliptic_modulus,
            elliptic_semisimple: semisimple_residual(e, &tol)?,
            hyperbolic_imaginary,
            hyperbolic_min,
            hyperbolic_semisimple: semisimple_residual(h, &tol)?,
            nilpotency: nil.norm(),
        })
    }
}

/// Multiplicative Jordan decomposition with default tolerances.
pub fn multiplicative_jordan(m: &RealMatrix) -> Result<MultiplicativeJordan> {
    multiplicative_jordan_with(m, &Tolerances::default())
}

pub fn multiplicative_jordan_with(
    m: &RealMatrix,
    tol: &Tolerances,
) -> Result<MultiplicativeJordan> {
    if !m.is_invertible() {
        return Err(Error::SingularMatrix);
    }
    let n = m.dim();
    if n == 0 {
        let z = RealMatrix::zeros(0);
        return Ok(MultiplicativeJordan {
            elliptic: z.clone(),
            hyperbolic: z.clone(),
            unipotent: z.clone(),
            source: z,
        });
    }
    let split = SpectralSplit::compute(m, tol, true)?;
    let modulus = |z: Complex64| {
        let r = z.norm();
        if tol.on_unit_circle(r) {
            1.0
        } else {
            r
        }
    };
    let elliptic = split.realize(|z| z / z.norm());
    let hyperbolic = split.realize(|z| Complex64::new(modulus(z), 0.0));
    let unipotent = DMatrix::identity(n, n) + split.scaled_nilpotent(m.as_nalgebra());
    Ok(MultiplicativeJordan {
        elliptic: RealMatrix::from_nalgebra(elliptic)?,
        hyperbolic: RealMatrix::from_nalgebra(hyperbolic)?,
        unipotent: RealMatrix::from_nalgebra(unipotent)?,
        source: m.clone(),
    })
}

/// Recurrent subspace `Fix(H) ∩ Fix(U)` with default tolerances.
pub fn recurrent_subspace(m: &RealMatrix) -> Result<Subspace> {
    recurrent_subspace_with(m, &Tolerances::default())
}

pub fn recurrent_subspace_with(m: &RealMatrix, tol: &Tolerances) -> Result<Subspace> {
    let j = multiplicative_jordan_with(m, tol)?;
    recurrent_subspace_of(&j, tol)
}

/// `Fix(H) ∩ Fix(U)` for an already computed decomposition.
pub fn recurrent_subspace_of(j: &MultiplicativeJordan, tol: &Tolerances) -> Result<Subspace> {
    let fix_h = null_space_of(
        j.hyperbolic.minus_identity().as_nalgebra(),
        tol.relative,
        tol.max_iterations,
    )?;
    let fix_u = null_space_of(
        j.unipotent.minus_identity().as_nalgebra(),
        tol.relative,
        tol.max_iterations,
    )?;
    intersect_with(&fix_h, &fix_u, tol.relative)
}

/// A symmetric positive-definite `P` with `eᵀ·P·e = P`, normalized to
/// `trace P = dim`.
pub fn elliptic_invariant_gram(e: &RealMatrix) -> Result<RealMatrix> {
    elliptic_invariant_gram_with(e, &Tolerances::default())
}

pub fn elliptic_invariant_gram_with(e: &RealMatrix, tol: &Tolerances) -> Result<RealMatrix> {
    let n = e.dim();
    if n == 0 {
        return Ok(RealMatrix::zeros(0));
    }
    let split = SpectralSplit::compute(e, tol, false)
        .map_err(|err| Error::NotElliptic(format!("no eigenbasis: {err}")))?;
    let scale = 1.0 + e.norm();
    for c in &split.clusters {
        let r = c.value.norm();
        if (r - 1.0).abs() > 1e-7 {
            return Err(Error::NotElliptic(format!(
                "eigenvalue {} has modulus {r}",
                c.value
            )));
        }
        if c.residual > 1e-7 * scale {
            return Err(Error::NotElliptic(format!(
                "eigenvalue {} is defective (eigenvector residual {:e})",
                c.value, c.residual
            )));
        }
    }
    // W = V⁻¹ diagonalizes e; WᴴW is invariant because |λ| = 1.
    let w = &split.basis_inv;
    let gram = (w.adjoint() * w).map(|z| z.re);
    let sym = (&gram + gram.transpose()) * 0.5;
    let trace = sym.trace();
    RealMatrix::from_nalgebra(sym * (n as f64 / trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> RealMatrix {
        RealMatrix::from_rows(rows).unwrap()
    }

    fn assert_close(a: &RealMatrix, b: &RealMatrix, tol: f64) {
        let d = a.sub(b).max_abs();
        assert!(d <= tol, "{a:?} vs {b:?}: max deviation {d:e}");
    }

    #[test]
    fn positive_diagonal_is_purely_hyperbolic() {
        let g = m(&[&[2.0, 0.0], &[0.0, 0.5]]);
        let j = multiplicative_jordan(&g).unwrap();
        assert_close(&j.elliptic, &RealMatrix::identity(2), 1e-12);
        assert_close(&j.hyperbolic, &g, 1e-12);
        assert_close(&j.unipotent, &RealMatrix::identity(2), 1e-12);
    }

    #[test]
    fn shear_is_purely_unipotent() {
        let g = m(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let j = multiplicative_jordan(&g).unwrap();
        assert_close(&j.elliptic, &RealMatrix::identity(2), 1e-12);
        assert_close(&j.hyperbolic, &RealMatrix::identity(2), 1e-12);
        assert_close(&j.unipotent, &g, 1e-12);
    }

    #[test]
    fn scaled_rotation_splits_into_rotation_and_scaling() {
        let g = m(&[&[0.0, -2.0], &[2.0, 0.0]]);
        let j = multiplicative_jordan(&g).unwrap();
        assert_close(&j.elliptic, &m(&[&[0.0, -1.0], &[1.0, 0.0]]), 1e-12);
        assert_close(&j.hyperbolic, &RealMatrix::identity(2).scale(2.0), 1e-12);
        assert_close(&j.unipotent, &RealMatrix::identity(2), 1e-12);
        assert!(j.residuals().unwrap().within_bounds());
    }

    #[test]
    fn singular_input_is_rejected() {
        let g = m(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert_eq!(
            multiplicative_jordan(&g).unwrap_err(),
            Error::SingularMatrix
        );
    }

    #[test]
    fn conjugated_jordan_block_of_size_three() {
        // A·J·A⁻¹ with J a 3×3 Jordan block at 2: E = I, H = 2I, U = I + N/2.
        let a = m(&[&[1.0, 0.5, 0.0], &[0.2, 1.0, 0.3], &[0.0, -0.4, 1.0]]);
        let jb = m(&[&[2.0, 1.0, 0.0], &[0.0, 2.0, 1.0], &[0.0, 0.0, 2.0]]);
        let a_inv = a.inverse().unwrap();
        let g = &(&a * &jb) * &a_inv;
        let j = multiplicative_jordan(&g).unwrap();
        assert_close(&j.elliptic, &RealMatrix::identity(3), 1e-6);
        assert_close(&j.hyperbolic, &RealMatrix::identity(3).scale(2.0), 1e-6);
        let expected_u = &(&a * &jb.scale(0.5)) * &a_inv;
        assert_close(&j.unipotent, &expected_u, 1e-6);
        assert!(
            j.residuals().unwrap().within_bounds(),
            "{:?}",
            j.residuals()
        );
    }

    #[test]
    fn recurrent_subspace_examples() {
        let rot = m(&[&[0.0, -1.0], &[1.0, 0.0]]);
        assert_eq!(recurrent_subspace(&rot).unwrap().dim(), 2);

        let d = m(&[&[2.0, 0.0], &[0.0, 3.0]]);
        assert!(recurrent_subspace(&d).unwrap().is_empty());

        let shear = m(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let r = recurrent_subspace(&shear).unwrap();
        assert_eq!(r.dim(), 1);
        assert!(r.distance(&[1.0, 0.0]) < 1e-10);
    }

    #[test]
    fn gram_examples() {
        let id = RealMatrix::identity(3);
        assert_close(&elliptic_invariant_gram(&id).unwrap(), &id, 1e-12);

        let (c, s) = (0.7f64.cos(), 0.7f64.sin());
        let rot = m(&[&[c, -s], &[s, c]]);
        let p = elliptic_invariant_gram(&rot).unwrap();
        let lhs = &(&rot.transpose() * &p) * &rot;
        assert_close(&lhs, &p, 1e-12);

        let a = m(&[&[2.0, 1.0], &[0.5, 1.0]]);
        let conj = &(&a * &rot) * &a.inverse().unwrap();
        let p = elliptic_invariant_gram(&conj).unwrap();
        let lhs = &(&conj.transpose() * &p) * &conj;
        assert_close(&lhs, &p, 1e-7 * p.norm());
        // Also the hand-built witness A⁻ᵀA⁻¹ satisfies the relation.
        let ai = a.inverse().unwrap();
        let w = &ai.transpose() * &ai;
        assert_close(&(&(&conj.transpose() * &w) * &conj), &w, 1e-12);
    }

    #[test]
    fn gram_rejects_non_elliptic() {
        let h = m(&[&[2.0, 0.0], &[0.0, 0.5]]);
        assert_eq!(
            elliptic_invariant_gram(&h).unwrap_err().code(),
            "NOT_ELLIPTIC"
        );
        let shear = m(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert_eq!(
            elliptic_invariant_gram(&shear).unwrap_err().code(),
            "NOT_ELLIPTIC"
        );
    }
}
