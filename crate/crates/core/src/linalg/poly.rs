//! Exact integer polynomials: characteristic polynomials of lattice maps and
//! the cyclotomic factor test used by the exact entropy mode.
//!
//! Polynomials are coefficient vectors, lowest degree first.

use crate::error::{Error, Result};
use crate::linalg::IntegerMatrix;

fn overflow(what: &str) -> Error {
    Error::Overflow(what.to_string())
}

/// `det(xI − A)` by the Faddeev–LeVerrier recurrence. Every division is exact
/// over the integers; intermediate values use checked `i128` arithmetic.
pub(crate) fn faddeev_leverrier(a: &IntegerMatrix) -> Result<Vec<i128>> {
    let n = a.dim();
    let mut coeffs = vec![0i128; n + 1];
    coeffs[n] = 1;
    if n == 0 {
        return Ok(coeffs);
    }
    let at = |i: usize, j: usize| a.get(i, j) as i128;
    // m holds M_k; starts at M_0 = 0.
    let mut m = vec![0i128; n * n];
    for k in 1..=n {
        // M_k = A·M_{k−1} + c_{n−k+1}·I
        let mut next = vec![0i128; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0i128;
                for l in 0..n {
                    acc = acc
                        .checked_add(
                            at(i, l)
                                .checked_mul(m[l * n + j])
                                .ok_or_else(|| overflow("charpoly"))?,
                        )
                        .ok_or_else(|| overflow("charpoly"))?;
                }
                next[i * n + j] = acc;
            }
        }
        for i in 0..n {
            next[i * n + i] = next[i * n + i]
                .checked_add(coeffs[n - k + 1])
                .ok_or_else(|| overflow("charpoly"))?;
        }
        m = next;
        // c_{n−k} = −tr(A·M_k)/k
        let mut tr = 0i128;
        for i in 0..n {
            for l in 0..n {
                tr = tr
                    .checked_add(
                        at(i, l)
                            .checked_mul(m[l * n + i])
                            .ok_or_else(|| overflow("charpoly"))?,
                    )
                    .ok_or_else(|| overflow("charpoly"))?;
            }
        }
        debug_assert_eq!(tr % k as i128, 0);
        coeffs[n - k] = -tr / k as i128;
    }
    Ok(coeffs)
}

fn trim(p: &mut Vec<i128>) {
    while p.len() > 1 && *p.last().unwrap() == 0 {
        p.pop();
    }
}

/// Exact division by a monic polynomial; `None` when the remainder is nonzero.
pub fn divide_exact(num: &[i128], den: &[i128]) -> Option<Vec<i128>> {
    debug_assert_eq!(*den.last().unwrap(), 1, "divisor must be monic");
    let dd = den.len() - 1;
    if num.len() < den.len() {
        return if num.iter().all(|&c| c == 0) {
            Some(vec![0])
        } else {
            None
        };
    }
    let mut rem = num.to_vec();
    let mut quot = vec![0i128; num.len() - dd];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dd];
        quot[i] = c;
        if c != 0 {
            for (j, &d) in den.iter().enumerate() {
                rem[i + j] = rem[i + j].checked_sub(c.checked_mul(d)?)?;
            }
        }
    }
    if rem.iter().all(|&c| c == 0) {
        trim(&mut quot);
        Some(quot)
    } else {
        None
    }
}

fn euler_phi(mut k: u64) -> u64 {
    let mut result = k;
    let mut p = 2;
    while p * p <= k {
        if k.is_multiple_of(p) {
            while k.is_multiple_of(p) {
                k /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if k > 1 {
        result -= result / k;
    }
    result
}

/// The `k`-th cyclotomic polynomial Φ_k.
pub fn cyclotomic(k: u64) -> Vec<i128> {
    assert!(k >= 1);
    // x^k − 1 divided by Φ_d for every proper divisor d.
    let mut p = vec![0i128; k as usize + 1];
    p[0] = -1;
    p[k as usize] = 1;
    for d in 1..k {
        if k.is_multiple_of(d) {
            p = divide_exact(&p, &cyclotomic(d)).expect("Φ_d divides x^k − 1");
        }
    }
    p
}

/// Result of stripping cyclotomic factors from a monic integer polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclotomicSplit {
    /// `(k, multiplicity)` for each Φ_k dividing the input.
    pub factors: Vec<(u64, usize)>,
    /// What remains after dividing out every cyclotomic factor.
    pub residual: Vec<i128>,
}

impl CyclotomicSplit {
    /// All roots are roots of unity.
    pub fn is_fully_cyclotomic(&self) -> bool {
        self.residual == [1]
    }
}

/// Divides out every cyclotomic factor of a monic integer polynomial.
pub fn split_cyclotomic(poly: &[i128]) -> CyclotomicSplit {
    let mut residual = poly.to_vec();
    trim(&mut residual);
    let mut factors = Vec::new();
    let mut k = 1u64;
    // φ(k) ≥ sqrt(k/2), so no Φ_k with k > 2·deg² can divide.
    loop {
        let deg = (residual.len() - 1) as u64;
        if deg == 0 || k > 2 * deg * deg + 2 {
            break;
        }
        if euler_phi(k) <= deg {
            let phi = cyclotomic(k);
            let mut mult = 0;
            while let Some(q) = divide_exact(&residual, &phi) {
                residual = q;
                mult += 1;
            }
            if mult > 0 {
                factors.push((k, mult));
            }
        }
        k += 1;
    }
    CyclotomicSplit { factors, residual }
}
