use std::cmp::Ordering;

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{hqr, RealMatrix};

/// One eigenvalue and its algebraic multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
}

impl Eigenvalue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn modulus(&self) -> f64 {
        self.value().norm()
    }
}

/// Eigenvalues of a real matrix, grouped by numerical equality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<Eigenvalue>,
    /// Largest relative backward error `σ_min(m − λI)/‖m‖₂` over the reported
    /// eigenvalues.
    pub residual_bound: f64,
}

impl Spectrum {
    pub fn total_multiplicity(&self) -> usize {
        self.eigenvalues.iter().map(|e| e.multiplicity).sum()
    }

    /// Every eigenvalue repeated according to its multiplicity.
    pub fn expanded(&self) -> Vec<Complex64> {
        self.eigenvalues
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.value(), e.multiplicity))
            .collect()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(Eigenvalue::modulus)
            .fold(0.0, f64::max)
    }
}

/// Deterministic spectral order: descending modulus, then descending real
/// part, then descending imaginary part.
pub fn spectral_order(a: &Complex64, b: &Complex64) -> Ordering {
    b.norm()
        .total_cmp(&a.norm())
        .then(b.re.total_cmp(&a.re))
        .then(b.im.total_cmp(&a.im))
}

/// All `dim` eigenvalues (with repetition) in spectral order, via Hessenberg
/// QR.
pub(crate) fn raw_eigenvalues(m: &RealMatrix, tol: &Tolerances) -> Result<Vec<Complex64>> {
    let n = m.dim();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut values = hqr::eigenvalues(m.as_nalgebra(), tol.max_iterations).map_err(|cap| {
        Error::NonConvergence(format!(
            "QR iteration on a {n}x{n} matrix stopped after {} sweeps",
            cap.sweeps
        ))
    })?;
    // Real inputs: make conjugate pairs exact mirror images.
    for v in values.iter_mut() {
        if v.im.abs() <= f64::EPSILON * (1.0 + v.re.abs()) {
            v.im = 0.0;
        }
    }
    values.sort_by(spectral_order);
    Ok(values)
}

/// Smallest singular value of `m − λI` relative to `‖m‖₂`.
pub(crate) fn backward_error(m: &RealMatrix, lambda: Complex64, scale: f64) -> f64 {
    let n = m.dim();
    let shifted = DMatrix::from_fn(n, n, |i, j| {
        let d = if i == j {
            lambda
        } else {
            Complex64::new(0.0, 0.0)
        };
        Complex64::new(m.get(i, j), 0.0) - d
    });
    let smin = SVD::new(shifted, false, false)
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if scale > 0.0 {
        smin / scale
    } else {
        smin
    }
}

/// Whether two computed eigenvalues are numerically one, at a radius relative
/// to their own size.
pub(crate) fn locally_close(a: Complex64, b: Complex64, rel: f64) -> bool {
    (a - b).norm() <= rel * (1.0 + a.norm().max(b.norm()))
}

/// Groups eigenvalues by single linkage under a symmetric closeness test.
/// Returns groups as index lists into `values`, in order of first member.
pub(crate) fn single_linkage_by(
    values: &[Complex64],
    close: impl Fn(Complex64, Complex64) -> bool,
) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if close(values[i], values[j]) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_slot[r] == usize::MAX {
            root_slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_slot[r]].push(i);
    }
    groups
}

/// Eigenvalues of `m` with multiplicity, in deterministic spectral order.
///
/// Eigenvalues within `tol.cluster·(1 + |λ|)` of each other are reported as
/// one entry at their mean.
pub fn eigenvalues(m: &RealMatrix, tol: &Tolerances) -> Result<Spectrum> {
    let raw = raw_eigenvalues(m, tol)?;
    if raw.is_empty() {
        return Ok(Spectrum {
            eigenvalues: Vec::new(),
            residual_bound: 0.0,
        });
    }
    let scale = m.spectral_norm();
    let mut grouped: Vec<Eigenvalue> =
        single_linkage_by(&raw, |a, b| locally_close(a, b, tol.cluster))
            .into_iter()
            .map(|idx| {
                let mean = idx.iter().map(|&i| raw[i]).sum::<Complex64>() / idx.len() as f64;
                let real = mean.im.abs() <= tol.cluster * (1.0 + mean.norm());
                Eigenvalue {
                    re: mean.re,
                    im: if real { 0.0 } else { mean.im },
                    multiplicity: idx.len(),
                }
            })
            .collect();
    grouped.sort_by(|a, b| spectral_order(&a.value(), &b.value()));
    let residual_bound = grouped
        .iter()
        .map(|e| backward_error(m, e.value(), scale))
        .fold(0.0, f64::max);
    Ok(Spectrum {
        eigenvalues: grouped,
        residual_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, re: f64, im: f64) -> bool {
        (a.re - re).abs() < 1e-12 && (a.im - im).abs() < 1e-12
    }

    #[test]
    fn identity_has_one_double_eigenvalue() {
        let s = eigenvalues(&RealMatrix::identity(2), &Tolerances::default()).unwrap();
        assert_eq!(s.eigenvalues.len(), 1);
        assert_eq!(s.eigenvalues[0].multiplicity, 2);
        assert!(close(s.eigenvalues[0].value(), 1.0, 0.0));
    }

    #[test]
    fn cat_map_eigenvalues_from_quadratic_formula() {
        let m = RealMatrix::from_rows(&[[2.0, 1.0], [1.0, 1.0]]).unwrap();
        let s = eigenvalues(&m, &Tolerances::default()).unwrap();
        let r5 = 5f64.sqrt();
        assert!(close(s.eigenvalues[0].value(), (3.0 + r5) / 2.0, 0.0));
        assert!(close(s.eigenvalues[1].value(), (3.0 - r5) / 2.0, 0.0));
        assert!(s.residual_bound < 1e-14);
    }

    #[test]
    fn rotation_eigenvalues_ordered_by_imaginary_part() {
        let m = RealMatrix::from_rows(&[[0.0, -1.0], [1.0, 0.0]]).unwrap();
        let s = eigenvalues(&m, &Tolerances::default()).unwrap();
        assert_eq!(s.eigenvalues.len(), 2);
        assert!(close(s.eigenvalues[0].value(), 0.0, 1.0));
        assert!(close(s.eigenvalues[1].value(), 0.0, -1.0));
    }

    #[test]
    fn empty_matrix_has_empty_spectrum() {
        let s = eigenvalues(&RealMatrix::zeros(0), &Tolerances::default()).unwrap();
        assert!(s.eigenvalues.is_empty());
    }

    #[test]
    fn starved_iteration_cap_reports_non_convergence() {
        let m =
            RealMatrix::from_rows(&[[0.0, -1.0, 0.3], [1.0, 0.2, 0.0], [0.5, 0.1, 0.7]]).unwrap();
        let tol = Tolerances {
            max_iterations: 1,
            ..Tolerances::default()
        };
        let err = eigenvalues(&m, &tol).unwrap_err();
        assert_eq!(err.code(), "NON_CONVERGENCE");
    }
}
