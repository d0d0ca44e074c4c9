use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::IntegerMatrix;
use crate::oracle::torus::TorusPoint;

/// Proximal and return times collected before a pair counts as a witness.
pub const WITNESS_HITS: usize = 3;

/// Printed with every search result.
pub const ABSENCE_CAVEAT: &str =
    "no witness within the budget does not prove zero entropy; the search is a semi-decision procedure";

const FIRST_HORIZON: u64 = 1 << 10;
const MAX_ENTRY: i64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiYorkeWitness {
    pub a: TorusPoint,
    pub b: TorusPoint,
    /// Common point near which both orbits meet at the proximal times.
    pub c: TorusPoint,
    /// Times `n` with `Tⁿa` and `Tⁿb` both within `δ` of `a` and `b`.
    pub return_times: Vec<u64>,
    /// Times `m` with `Tᵐa = c` and `Tᵐb` within `δ` of `c`.
    pub proximal_times: Vec<u64>,
    /// `max(d(Tⁿa, a), d(Tⁿb, b))` at each return time.
    pub return_gaps: Vec<f64>,
    /// `d(Tᵐa, Tᵐb)` at each proximal time.
    pub proximal_gaps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiYorkeSearch {
    pub witness: Option<LiYorkeWitness>,
    pub delta: f64,
    pub budget: u64,
    /// Map applications spent, summed over all candidate pairs.
    pub steps_used: u64,
    pub pairs_tried: u64,
    pub caveat: String,
}

/// Searches for a pair `(a, b)` whose orbits under `x ↦ T·x mod 1` come back
/// near `(a, b)` along one sequence of times and near a common point `c` along
/// another.
///
/// `a` runs over periodic points with coordinates in `{0, ¼, ½, ¾}` and
/// `b = a + offset`, where each offset coordinate is a binary Champernowne
/// number scaled into `(δ, 4δ]`. Orbits are computed exactly on binary
/// fractions long enough that truncation never reaches the leading 64 bits
/// within the horizon. Horizons grow by a factor of 4 from 1024 until the
/// budget, counted in map applications, is spent.
pub fn li_yorke_search(t: &IntegerMatrix, budget: u64, delta: f64) -> Result<LiYorkeSearch> {
    let p = t.dim();
    if budget < 1 {
        return Err(Error::InvalidArgument("budget must be at least 1".into()));
    }
    if !(delta > 0.0 && delta <= 0.25) {
        return Err(Error::InvalidArgument(format!(
            "delta must lie in (0, 0.25], got {delta}"
        )));
    }
    if p == 0 {
        return Err(Error::InvalidArgument("lattice map has dimension 0".into()));
    }
    if t.entries().iter().any(|v| v.abs() > MAX_ENTRY) {
        return Err(Error::InvalidArgument(format!(
            "lattice map entries must not exceed {MAX_ENTRY} in absolute value"
        )));
    }

    let row_norm = (0..p)
        .map(|i| (0..p).map(|j| t.get(i, j).unsigned_abs()).sum::<u64>())
        .max()
        .unwrap_or(0)
        .max(1);
    let bits_per_step = 64 - (row_norm - 1).leading_zeros() as u64;
    // 2^(−shift)·C with C ∈ [½, 1) lies in (δ, 4δ].
    let shift = ((1.0 / delta).log2().floor() as u32)
        .saturating_sub(1)
        .max(1);
    let threshold = (delta * 2f64.powi(64)) as u64;

    let candidates = periodic_candidates(t);
    let mut used = 0u64;
    let mut pairs = 0u64;
    let mut horizon = FIRST_HORIZON;
    let mut witness = None;
    'rounds: while used < budget && !candidates.is_empty() {
        for a in &candidates {
            let steps = horizon.min(budget - used);
            if steps == 0 {
                break 'rounds;
            }
            let limbs = 2 + (steps * bits_per_step).div_ceil(64) as usize;
            pairs += 1;
            let (found, spent) = scan_pair(t, a, shift, limbs, steps, threshold);
            used += spent;
            if found.is_some() {
                witness = found;
                break 'rounds;
            }
        }
        horizon = horizon.saturating_mul(4);
    }
    Ok(LiYorkeSearch {
        witness,
        delta,
        budget,
        steps_used: used,
        pairs_tried: pairs,
        caveat: ABSENCE_CAVEAT.to_string(),
    })
}

/// A point of the torus as fixed-point binary fractions, most significant
/// limb first.
#[derive(Clone, PartialEq)]
struct Fraction(Vec<Vec<u64>>);

impl Fraction {
    fn step(&self, t: &IntegerMatrix, out: &mut Fraction) {
        let p = self.0.len();
        let limbs = self.0[0].len();
        for i in 0..p {
            let mut carry: i128 = 0;
            for l in (0..limbs).rev() {
                let mut acc = carry;
                for j in 0..p {
                    acc += t.get(i, j) as i128 * self.0[j][l] as i128;
                }
                out.0[i][l] = acc as u64;
                carry = acc >> 64;
            }
            // The integer part (final carry) is dropped: reduction mod 1.
        }
    }

    fn lead(&self, i: usize) -> u64 {
        self.0[i][0]
    }

    fn to_point(&self) -> TorusPoint {
        let c = self.0.iter().map(|x| x[0] as f64 / 2f64.powi(64)).collect();
        TorusPoint::new(c).expect("finite")
    }
}

/// Wrap-around distance between leading limbs, in units of 2⁻⁶⁴.
fn lead_distance(x: u64, y: u64) -> u64 {
    let d = x.wrapping_sub(y);
    d.min(d.wrapping_neg())
}

fn max_lead_distance(x: &Fraction, y: &Fraction) -> u64 {
    (0..x.0.len())
        .map(|i| lead_distance(x.lead(i), y.lead(i)))
        .max()
        .unwrap_or(0)
}

fn to_gap(d: u64) -> f64 {
    d as f64 / 2f64.powi(64)
}

/// Bits of the concatenation of `start, start + step, start + 2·step, …` in
/// binary.
fn champernowne_bits(start: u64, step: u64) -> impl Iterator<Item = bool> {
    (0..).flat_map(move |k| {
        let v = start + k * step;
        let width = 64 - v.leading_zeros();
        (0..width).rev().map(move |b| (v >> b) & 1 == 1)
    })
}

/// `a + 2^(−shift)·Cᵢ` on every coordinate `i`.
fn offset_point(a: &[u64], shift: u32, limbs: usize) -> Fraction {
    let p = a.len();
    let coords = (0..p)
        .map(|i| {
            let mut x = vec![0u64; limbs];
            let bits = champernowne_bits(i as u64 + 1, p as u64);
            for (pos, bit) in (shift as usize..limbs * 64).zip(bits) {
                if bit {
                    x[pos / 64] |= 1 << (63 - pos % 64);
                }
            }
            x[0] = x[0].wrapping_add(a[i]);
            x
        })
        .collect();
    Fraction(coords)
}

fn dyadic_point(a: &[u64], limbs: usize) -> Fraction {
    Fraction(
        a.iter()
            .map(|&v| {
                let mut x = vec![0u64; limbs];
                x[0] = v;
                x
            })
            .collect(),
    )
}

/// Points with coordinates in `{0, ¼, ½, ¾}` that are periodic under `T`,
/// as leading limbs, ordered by denominator then lexicographically.
fn periodic_candidates(t: &IntegerMatrix) -> Vec<Vec<u64>> {
    let p = t.dim();
    let quarter = 1u64 << 62;
    let mut out: Vec<Vec<u64>> = Vec::new();
    for denominator_bits in 0..=2u32 {
        let per_axis = 1u64 << denominator_bits;
        let unit = if denominator_bits == 0 {
            0
        } else {
            quarter << (2 - denominator_bits)
        };
        let total = per_axis.pow(p as u32);
        for idx in 0..total {
            let mut rest = idx;
            let mut a = vec![0u64; p];
            for c in (0..p).rev() {
                a[c] = (rest % per_axis) * unit;
                rest /= per_axis;
            }
            if !out.contains(&a) && is_periodic(t, &a) {
                out.push(a);
            }
        }
    }
    out
}

/// Orbits of quarter points live in a set of `4ᵖ` points, so a repeat shows up
/// within that many steps.
fn is_periodic(t: &IntegerMatrix, a: &[u64]) -> bool {
    let start = dyadic_point(a, 1);
    let mut x = start.clone();
    let mut next = start.clone();
    for _ in 0..4usize.pow(t.dim() as u32) {
        x.step(t, &mut next);
        std::mem::swap(&mut x, &mut next);
        if x == start {
            return true;
        }
    }
    false
}

/// Runs one candidate pair for up to `steps` map applications.
fn scan_pair(
    t: &IntegerMatrix,
    a_lead: &[u64],
    shift: u32,
    limbs: usize,
    steps: u64,
    threshold: u64,
) -> (Option<LiYorkeWitness>, u64) {
    let a0 = dyadic_point(a_lead, limbs);
    let b0 = offset_point(a_lead, shift, limbs);
    if max_lead_distance(&a0, &b0) <= threshold {
        return (None, 0);
    }
    let (mut a, mut b) = (a0.clone(), b0.clone());
    let (mut a_next, mut b_next) = (a0.clone(), b0.clone());
    let mut c: Option<Fraction> = None;
    let (mut returns, mut return_gaps) = (Vec::new(), Vec::new());
    let (mut proximal, mut proximal_gaps) = (Vec::new(), Vec::new());
    for n in 1..=steps {
        a.step(t, &mut a_next);
        b.step(t, &mut b_next);
        std::mem::swap(&mut a, &mut a_next);
        std::mem::swap(&mut b, &mut b_next);

        let back = max_lead_distance(&a, &a0).max(max_lead_distance(&b, &b0));
        if back < threshold && returns.len() < WITNESS_HITS {
            returns.push(n);
            return_gaps.push(to_gap(back));
        }
        let apart = max_lead_distance(&a, &b);
        if apart < threshold && proximal.len() < WITNESS_HITS {
            let at_c = match &c {
                None => {
                    c = Some(a.clone());
                    true
                }
                Some(c) => c.0.iter().zip(&a.0).all(|(x, y)| x[0] == y[0]),
            };
            if at_c {
                proximal.push(n);
                proximal_gaps.push(to_gap(apart));
            }
        }
        if returns.len() == WITNESS_HITS && proximal.len() == WITNESS_HITS {
            let witness = LiYorkeWitness {
                a: a0.to_point(),
                b: b0.to_point(),
                c: c.expect("set at first proximal time").to_point(),
                return_times: returns,
                proximal_times: proximal,
                return_gaps,
                proximal_gaps,
            };
            return (Some(witness), n);
        }
    }
    (None, steps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn im(rows: &[&[i64]]) -> IntegerMatrix {
        IntegerMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn doubling_has_a_witness() {
        let s = li_yorke_search(&im(&[&[2]]), 1_000_000, 1e-3).unwrap();
        let w = s.witness.expect("doubling map has Li-Yorke pairs");
        assert!(s.steps_used <= 1_000_000);
        assert!(w.a.distance(&w.b) > 1e-3);
        assert_eq!(w.return_times.len(), WITNESS_HITS);
        assert_eq!(w.proximal_times.len(), WITNESS_HITS);
        assert!(w.return_times.windows(2).all(|p| p[0] < p[1]));
        assert!(w.proximal_times.windows(2).all(|p| p[0] < p[1]));
        assert!(w
            .return_gaps
            .iter()
            .chain(&w.proximal_gaps)
            .all(|&g| g < 1e-3));
    }

    #[test]
    fn isometries_have_none() {
        for t in [im(&[&[0, -1], &[1, 0]]), im(&[&[1]])] {
            let s = li_yorke_search(&t, 1_000_000, 1e-3).unwrap();
            assert!(s.witness.is_none());
            assert_eq!(s.steps_used, 1_000_000);
            assert!(s.caveat.contains("does not prove"));
        }
    }

    #[test]
    fn champernowne_prefix() {
        let bits: String = champernowne_bits(1, 1)
            .take(12)
            .map(|b| if b { '1' } else { '0' })
            .collect();
        assert_eq!(bits, "110111001011");
    }

    #[test]
    fn exact_steps_match_torus_iterate() {
        use crate::oracle::torus::torus_iterate;
        let t = im(&[&[2, 1], &[1, 1]]);
        let a = [1u64 << 62, 3u64 << 62];
        let mut x = dyadic_point(&a, 3);
        let mut y = x.clone();
        for _ in 0..5 {
            x.step(&t, &mut y);
            std::mem::swap(&mut x, &mut y);
        }
        let expected = torus_iterate(&t, &TorusPoint::new(vec![0.25, 0.75]).unwrap(), 5).unwrap();
        assert_eq!(x.to_point(), expected);
    }

    #[test]
    fn candidates_are_periodic_points() {
        // Under doubling only 0 is periodic among quarter points.
        assert_eq!(periodic_candidates(&im(&[&[2]])), vec![vec![0]]);
        assert_eq!(periodic_candidates(&im(&[&[1]])).len(), 4);
    }

    #[test]
    fn preconditions() {
        let t = im(&[&[2]]);
        assert!(li_yorke_search(&t, 0, 1e-3).is_err());
        assert!(li_yorke_search(&t, 10, 0.0).is_err());
        assert!(li_yorke_search(&t, 10, 0.3).is_err());
    }
}
