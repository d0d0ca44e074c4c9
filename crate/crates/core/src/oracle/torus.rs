use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::IntegerMatrix;

/// A point of `ℝᵖ/ℤᵖ`, every coordinate in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TorusPoint {
    coords: Vec<f64>,
}

/// `x mod 1` in `[0, 1)`.
pub(crate) fn wrap(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    // rem_euclid can round up to exactly 1 for tiny negative inputs.
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Wrap-around distance `min(|Δ|, 1 − |Δ|)` between two circle coordinates.
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = wrap(a - b);
    d.min(1.0 - d)
}

impl TorusPoint {
    /// Reduces every coordinate mod 1. Rejects non-finite input.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(
                "torus coordinates must be finite".into(),
            ));
        }
        Ok(Self {
            coords: coords.into_iter().map(wrap).collect(),
        })
    }

    pub fn origin(dim: usize) -> Self {
        Self {
            coords: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Max-metric with wrap-around on each coordinate.
    pub fn distance(&self, other: &TorusPoint) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| circle_distance(*a, *b))
            .fold(0.0, f64::max)
    }
}

/// Smallest `e ≤ 64` with `x·2ᵉ` an integer, if any.
fn dyadic_exponent(x: f64) -> Option<u32> {
    (0..=64).find(|&e| {
        let scaled = x * 2f64.powi(e as i32);
        scaled.fract() == 0.0
    })
}

/// Applies `x ↦ T·x mod 1` exactly `n` times.
///
/// Points whose coordinates are all dyadic with denominator at most `2⁶⁴` are
/// iterated exactly on their numerators modulo `2ᵉ`, so no rounding
/// accumulates. Other points are iterated in floating point.
pub fn torus_iterate(t: &IntegerMatrix, x: &TorusPoint, n: u64) -> Result<TorusPoint> {
    let p = t.dim();
    if x.dim() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: x.dim(),
        });
    }
    if n == 0 || p == 0 {
        return Ok(x.clone());
    }
    let exps: Option<Vec<u32>> = x.coords.iter().map(|&c| dyadic_exponent(c)).collect();
    match exps {
        Some(exps) => {
            let e = exps.into_iter().max().unwrap_or(0);
            Ok(iterate_dyadic(t, x, n, e))
        }
        None => Ok(iterate_float(t, x, n)),
    }
}

fn iterate_dyadic(t: &IntegerMatrix, x: &TorusPoint, n: u64, e: u32) -> TorusPoint {
    let p = t.dim();
    let scale = 2f64.powi(e as i32);
    // Wrapping u64 arithmetic is exact modulo 2⁶⁴, hence modulo 2ᵉ.
    let mask = if e == 64 { u64::MAX } else { (1u64 << e) - 1 };
    let mut k: Vec<u64> = x.coords.iter().map(|&c| (c * scale) as u64).collect();
    let entries: Vec<u64> = t.entries().iter().map(|&v| v as u64).collect();
    for _ in 0..n {
        let next: Vec<u64> = (0..p)
            .map(|i| {
                (0..p).fold(0u64, |acc, j| {
                    acc.wrapping_add(entries[i * p + j].wrapping_mul(k[j]))
                }) & mask
            })
            .collect();
        k = next;
    }
    TorusPoint {
        coords: k.into_iter().map(|v| wrap(v as f64 / scale)).collect(),
    }
}

fn iterate_float(t: &IntegerMatrix, x: &TorusPoint, n: u64) -> TorusPoint {
    let p = t.dim();
    let entries: Vec<f64> = t.entries().iter().map(|&v| v as f64).collect();
    let mut v = x.coords.clone();
    for _ in 0..n {
        v = (0..p)
            .map(|i| wrap((0..p).map(|j| entries[i * p + j] * v[j]).sum()))
            .collect();
    }
    TorusPoint { coords: v }
}
