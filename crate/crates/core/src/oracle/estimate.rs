use std::time::{Duration, Instant};

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::IntegerMatrix;

/// Largest grid the estimator will enumerate.
pub const MAX_GRID_POINTS: u64 = 20_000_000;

/// Metric used by every estimate, recorded in the output.
pub const TORUS_METRIC: &str = "max over coordinates of min(|dx|, 1 - |dx|)";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateConfig {
    pub n_max: usize,
    pub epsilon: f64,
    /// Points per coordinate; the grid has `grid_resolutionᵖ` points.
    pub grid_resolution: u64,
    /// Wall-clock limit. Rows finished before it runs out are kept.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_budget: Option<Duration>,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        Self {
            n_max: 14,
            epsilon: 0.05,
            grid_resolution: 200,
            wall_budget: None,
        }
    }
}

/// One row of the separated-set table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSample {
    pub n: usize,
    pub epsilon: f64,
    pub separated_count: u64,
    /// `ln(separated_count) / n`.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub per_n: Vec<RateSample>,
    /// Least-squares slope of `ln(count)` against `n` over `fit_range`.
    pub extrapolated: f64,
    pub epsilon_used: f64,
    pub wall_budget_exhausted: bool,
    /// Inclusive range of `n` used for the slope.
    pub fit_range: (usize, usize),
    pub grid_points: u64,
    pub metric: String,
}

/// Estimates the entropy of `x ↦ T·x mod 1` from maximal `(n, ε)`-separated
/// subsets of a uniform grid.
///
/// For each `n ≤ n_max`, grid points are visited in lexicographic order and
/// kept when their `dₙ`-distance to every point kept so far exceeds `ε`, where
/// `dₙ(x, y) = max_{0≤i<n} d(Tⁱx, Tⁱy)`. Grid orbits are computed exactly
/// modulo the grid resolution.
pub fn estimate_entropy(t: &IntegerMatrix, config: &EstimateConfig) -> Result<EntropyEstimate> {
    let p = t.dim();
    let g = config.grid_resolution;
    let eps = config.epsilon;
    if p == 0 {
        return Err(Error::InvalidArgument("lattice map has dimension 0".into()));
    }
    if config.n_max < 2 {
        return Err(Error::InvalidArgument(format!(
            "n_max must be at least 2, got {}",
            config.n_max
        )));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in (0, 0.5), got {eps}"
        )));
    }
    if (g as f64) < 1.0 / eps {
        return Err(Error::InvalidArgument(format!(
            "grid resolution {g} is below 1/epsilon = {}",
            1.0 / eps
        )));
    }
    let total = g
        .checked_pow(p as u32)
        .filter(|&n| n <= MAX_GRID_POINTS)
        .ok_or_else(|| {
            Error::InvalidArgument(format!("grid of {g}^{p} points exceeds {MAX_GRID_POINTS}"))
        })?;

    let start = Instant::now();
    let out_of_time = || config.wall_budget.is_some_and(|b| start.elapsed() > b);

    let orbits = Orbits::compute(t, g, total as usize, config.n_max);
    let mut per_n = Vec::with_capacity(config.n_max);
    let mut exhausted = false;
    for n in 1..=config.n_max {
        match orbits.separated_count(n, eps, &out_of_time) {
            Some(count) => per_n.push(RateSample {
                n,
                epsilon: eps,
                separated_count: count,
                rate: (count as f64).ln() / n as f64,
            }),
            None => {
                exhausted = true;
                break;
            }
        }
    }
    let (fit_range, extrapolated) = extrapolate(&per_n, total);
    Ok(EntropyEstimate {
        per_n,
        extrapolated,
        epsilon_used: eps,
        wall_budget_exhausted: exhausted,
        fit_range,
        grid_points: total,
        metric: TORUS_METRIC.to_string(),
    })
}

/// Grid orbits stored as integer numerators modulo the resolution.
struct Orbits {
    p: usize,
    g: u64,
    len: usize,
    points: usize,
    /// `data[(point·len + i)·p + c]` is coordinate `c` of `Tⁱx`, times `g`.
    data: Vec<u32>,
}

impl Orbits {
    fn compute(t: &IntegerMatrix, g: u64, points: usize, len: usize) -> Self {
        let p = t.dim();
        let gi = g as i128;
        let entries: Vec<i128> = t
            .entries()
            .iter()
            .map(|&v| (v as i128).rem_euclid(gi))
            .collect();
        let mut data = vec![0u32; points * len * p];
        data.par_chunks_mut(len * p)
            .enumerate()
            .for_each(|(idx, orbit)| {
                // First coordinate is the most significant digit.
                let mut rest = idx as u64;
                for c in (0..p).rev() {
                    orbit[c] = (rest % g) as u32;
                    rest /= g;
                }
                for i in 1..len {
                    let (prev, next) = orbit[(i - 1) * p..(i + 1) * p].split_at_mut(p);
                    for (r, slot) in next.iter_mut().enumerate() {
                        let s: i128 = (0..p).map(|c| entries[r * p + c] * prev[c] as i128).sum();
                        *slot = s.rem_euclid(gi) as u32;
                    }
                }
            });
        Self {
            p,
            g,
            len,
            points,
            data,
        }
    }

    fn at(&self, point: usize, i: usize) -> &[u32] {
        let base = (point * self.len + i) * self.p;
        &self.data[base..base + self.p]
    }

    fn separated(&self, a: usize, b: usize, n: usize, threshold: f64) -> bool {
        let g = self.g as i64;
        (0..n).any(|i| {
            self.at(a, i).iter().zip(self.at(b, i)).any(|(&x, &y)| {
                let d = (x as i64 - y as i64).rem_euclid(g);
                d.min(g - d) as f64 > threshold
            })
        })
    }

    /// Size of the greedy maximal separated set, or `None` if time ran out.
    fn separated_count(&self, n: usize, eps: f64, out_of_time: &dyn Fn() -> bool) -> Option<u64> {
        let threshold = eps * self.g as f64;
        // Cells of width ≥ ε: points within ε sit in the same or adjacent cells
        // at every time. Keys combine a few times spread over 0..n, keeping the
        // probe count 3^(p·times) near 81.
        let k = (1.0 / eps).floor() as u64;
        let slots = (4 / self.p).clamp(1, n);
        let mut times: Vec<usize> = (0..slots)
            .map(|s| {
                if slots == 1 {
                    0
                } else {
                    s * (n - 1) / (slots - 1)
                }
            })
            .collect();
        times.dedup();
        let cell = |x: u32| (x as u64 * k / self.g) as i64;
        let key_of = |cells: &[i64]| {
            cells.iter().fold(0u64, |acc, &c| {
                acc.wrapping_mul(k)
                    .wrapping_add(c.rem_euclid(k as i64) as u64)
            })
        };
        let width = times.len() * self.p;
        let mut offsets: Vec<Vec<i64>> = vec![vec![]];
        for _ in 0..width {
            offsets = offsets
                .into_iter()
                .flat_map(|o| {
                    (-1..=1).map(move |d| {
                        let mut o = o.clone();
                        o.push(d);
                        o
                    })
                })
                .collect();
        }

        let mut buckets: FxHashMap<u64, Vec<usize>> = FxHashMap::default();
        let mut kept = 0u64;
        let mut cells = vec![0i64; width];
        let mut probe = vec![0i64; width];
        let mut seen: Vec<u64> = Vec::with_capacity(offsets.len());
        for point in 0..self.points {
            if point % 4096 == 0 && out_of_time() {
                return None;
            }
            for (ti, &time) in times.iter().enumerate() {
                for (c, &x) in self.at(point, time).iter().enumerate() {
                    cells[ti * self.p + c] = cell(x);
                }
            }
            seen.clear();
            let mut is_new = true;
            'probe: for off in &offsets {
                for (slot, (c, o)) in probe.iter_mut().zip(cells.iter().zip(off)) {
                    *slot = c + o;
                }
                let key = key_of(&probe);
                // With fewer than three cells per axis, neighbours wrap onto
                // each other.
                if k < 3 {
                    if seen.contains(&key) {
                        continue;
                    }
                    seen.push(key);
                }
                if let Some(list) = buckets.get(&key) {
                    for &q in list {
                        if !self.separated(point, q, n, threshold) {
                            is_new = false;
                            break 'probe;
                        }
                    }
                }
            }
            if is_new {
                kept += 1;
                buckets.entry(key_of(&cells)).or_default().push(point);
            }
        }
        Some(kept)
    }
}

/// Slope of `ln(count)` over the top half of the unsaturated prefix.
///
/// Once the separated set holds a sizeable share of the grid, the grid rather
/// than the map limits the count and `ln(count)` flattens. The first row whose
/// count exceeds a quarter of the grid ends the usable prefix.
fn extrapolate(per_n: &[RateSample], grid_points: u64) -> ((usize, usize), f64) {
    const SATURATION: f64 = 0.25;
    let limit = SATURATION * grid_points as f64;
    let usable = per_n
        .iter()
        .take_while(|s| (s.separated_count as f64) <= limit)
        .count()
        .max(2)
        .min(per_n.len());
    match usable {
        0 => ((0, 0), 0.0),
        1 => ((per_n[0].n, per_n[0].n), per_n[0].rate),
        _ => {
            let rows = &per_n[(usable / 2).min(usable - 2)..usable];
            let xs: Vec<f64> = rows.iter().map(|s| s.n as f64).collect();
            let ys: Vec<f64> = rows
                .iter()
                .map(|s| (s.separated_count as f64).ln())
                .collect();
            let mx = xs.iter().sum::<f64>() / xs.len() as f64;
            let my = ys.iter().sum::<f64>() / ys.len() as f64;
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
            let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
            ((rows[0].n, rows[rows.len() - 1].n), (sxy / sxx).max(0.0))
        }
    }
}
