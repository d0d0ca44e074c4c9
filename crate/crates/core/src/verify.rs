//! Cross-module property suite on fixed-seed samples.

use std::f64::consts::PI;

use nalgebra::SVD;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::engine::{compute, conjectural_general_entropy, torus_entropy};
use crate::error::Result;
use crate::group::{AbelianEndo, EndoDescriptor, GroupDescriptor, SemisimpleEndo};
use crate::jordan::{multiplicative_jordan, recurrent_subspace};
use crate::linalg::{eigenvalues, IntegerMatrix, RealMatrix, Subspace};
use crate::oracle::{
    adjoint_matrix, estimate_entropy, li_yorke_search, recurrence_check, verify_adjoint_jordan,
    EstimateConfig,
};

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyLevel {
    /// Analytic properties only.
    Fast,
    /// Adds the oracle runs.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub name: String,
    pub passed: bool,
    /// Worst observed deviation, in the units of `tolerance`.
    pub residual: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub level: VerifyLevel,
    pub seed: u64,
    pub passed: bool,
    pub properties: Vec<PropertyResult>,
}

fn result(
    name: &str,
    residual: f64,
    tolerance: f64,
    samples: usize,
    detail: String,
) -> PropertyResult {
    PropertyResult {
        name: name.to_string(),
        passed: residual <= tolerance,
        residual,
        tolerance,
        samples,
        detail,
    }
}

fn failed(name: &str, err: crate::Error) -> PropertyResult {
    PropertyResult {
        name: name.to_string(),
        passed: false,
        residual: f64::INFINITY,
        tolerance: 0.0,
        samples: 0,
        detail: format!("{}: {err}", err.code()),
    }
}

/// Runs the suite at `level` with the default seed.
pub fn run_verify(level: VerifyLevel) -> VerifyReport {
    run_verify_seeded(level, DEFAULT_SEED)
}

type Check = Box<dyn FnOnce(&mut ChaCha8Rng) -> Result<PropertyResult>>;

pub fn run_verify_seeded(level: VerifyLevel, seed: u64) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks: Vec<(&str, Check)> = vec![
        ("product_formula", Box::new(|r| product_formula(r, 100))),
        ("power_formula", Box::new(|r| power_formula(r, 100))),
        ("jordan_invariants", Box::new(|r| jordan_invariants(r, 200))),
        ("adjoint_jordan", Box::new(|r| adjoint_jordan(r, 200))),
        ("vector_vanishing", Box::new(|r| vector_vanishing(r, 50))),
        ("doubling_reduction", Box::new(|_| doubling_reduction())),
        ("semisimple_zero", Box::new(|_| semisimple_zero())),
        ("conjectural_product", Box::new(|_| conjectural_product())),
    ];
    if level == VerifyLevel::Full {
        checks.push(("cat_map_oracle", Box::new(|_| cat_map_oracle())));
        checks.push(("doubling_oracle", Box::new(|_| doubling_oracle())));
        checks.push(("recurrence_dichotomy", Box::new(|_| recurrence_dichotomy())));
        checks.push(("li_yorke_dichotomy", Box::new(|_| li_yorke_dichotomy())));
    }
    let properties: Vec<PropertyResult> = checks
        .into_iter()
        .map(|(name, f)| f(&mut rng).unwrap_or_else(|e| failed(name, e)))
        .collect();
    VerifyReport {
        level,
        seed,
        passed: properties.iter().all(|p| p.passed),
        properties,
    }
}

/// Square matrix with entries in `[-1, 1]`, dimension `1..=max_dim`, and
/// 2-norm condition number at most `max_cond`.
pub fn random_invertible(rng: &mut impl Rng, max_dim: usize, max_cond: f64) -> RealMatrix {
    loop {
        let n = rng.gen_range(1..=max_dim);
        let v: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let m = RealMatrix::new(n, v).expect("finite entries");
        let s = SVD::new(m.as_nalgebra().clone(), false, false).singular_values;
        let (hi, lo) = (s.max(), s.min());
        if lo > 0.0 && hi / lo <= max_cond {
            return m;
        }
    }
}

/// Integer matrix of dimension `1..=max_dim`, entries in `[-3, 3]`, nonzero
/// determinant.
pub fn random_lattice_block(rng: &mut impl Rng, max_dim: usize) -> IntegerMatrix {
    loop {
        let n = rng.gen_range(1..=max_dim);
        let v: Vec<i64> = (0..n * n).map(|_| rng.gen_range(-3..=3)).collect();
        let m = IntegerMatrix::new(n, v).expect("square");
        if m.determinant().expect("small entries") != 0 {
            return m;
        }
    }
}

fn product_formula(rng: &mut ChaCha8Rng, samples: usize) -> Result<PropertyResult> {
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let a = random_lattice_block(rng, 3);
        let b = random_lattice_block(rng, 3);
        let whole = torus_entropy(&IntegerMatrix::direct_sum(&a, &b))?.value;
        let parts = torus_entropy(&a)?.value + torus_entropy(&b)?.value;
        worst = worst.max((whole - parts).abs());
    }
    Ok(result(
        "product_formula",
        worst,
        1e-9,
        samples,
        "max |h(A⊕B) − h(A) − h(B)|".into(),
    ))
}

fn power_formula(rng: &mut ChaCha8Rng, samples: usize) -> Result<PropertyResult> {
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let a =
            IntegerMatrix::direct_sum(&random_lattice_block(rng, 3), &random_lattice_block(rng, 3));
        let h = torus_entropy(&a)?.value;
        for k in 2..=5u32 {
            let hk = torus_entropy(&a.checked_pow(k)?)?.value;
            worst = worst.max((hk - k as f64 * h).abs() / k as f64);
        }
    }
    Ok(result(
        "power_formula",
        worst,
        1e-8,
        samples * 4,
        "max |h(Aᵏ) − k·h(A)| / k over k = 2..5".into(),
    ))
}

fn jordan_invariants(rng: &mut ChaCha8Rng, samples: usize) -> Result<PropertyResult> {
    let mut failures = 0usize;
    let mut worst_reconstruction: f64 = 0.0;
    let mut worst_commutator: f64 = 0.0;
    for _ in 0..samples {
        let g = random_invertible(rng, 5, 1e4);
        let r = multiplicative_jordan(&g)?.residuals()?;
        if !r.within_bounds() {
            failures += 1;
        }
        worst_reconstruction = worst_reconstruction.max(r.reconstruction);
        worst_commutator = worst_commutator.max(r.commutator);
    }
    Ok(result(
        "jordan_invariants",
        failures as f64,
        0.0,
        samples,
        format!(
            "samples outside bounds; worst reconstruction {worst_reconstruction:e}, worst commutator {worst_commutator:e}"
        ),
    ))
}

fn adjoint_jordan(rng: &mut ChaCha8Rng, samples: usize) -> Result<PropertyResult> {
    let mut worst: f64 = 0.0;
    let mut failures = 0usize;
    for _ in 0..samples {
        let g = random_invertible(rng, 5, 1e4);
        let r = verify_adjoint_jordan(&g)?;
        let w = r
            .elliptic_residual
            .max(r.hyperbolic_residual)
            .max(r.unipotent_residual);
        if !r.consistent {
            failures += 1;
        }
        worst = worst.max(w);
    }
    Ok(result(
        "adjoint_jordan",
        worst,
        1e-6,
        samples,
        format!(
            "max residual of Jordan(Ad g) against Ad of the factors; {failures} above tolerance"
        ),
    ))
}

fn vector_vanishing(rng: &mut ChaCha8Rng, samples: usize) -> Result<PropertyResult> {
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let s = random_invertible(rng, 5, 1e3).scale(3.0);
        let q = s.dim();
        let cert = compute(
            &GroupDescriptor::Vector { q },
            &EndoDescriptor::Abelian(AbelianEndo {
                lattice_map: IntegerMatrix::empty(),
                coupling: Vec::new(),
                vector_map: s,
            }),
        )?;
        worst = worst.max(cert.value.abs());
    }
    Ok(result(
        "vector_vanishing",
        worst,
        0.0,
        samples,
        "max |h| for linear isomorphisms of ℝ^q".into(),
    ))
}

fn doubling_reduction() -> Result<PropertyResult> {
    let cert = compute(
        &GroupDescriptor::Abelian { p: 1, q: 1 },
        &EndoDescriptor::Abelian(AbelianEndo {
            lattice_map: IntegerMatrix::from_rows(&[[2]])?,
            coupling: vec![vec![0.5]],
            vector_map: RealMatrix::from_rows(&[[-3.0]])?,
        }),
    )?;
    let reference = torus_entropy(&IntegerMatrix::from_rows(&[[2]])?)?.value;
    Ok(result(
        "doubling_reduction",
        (cert.value - reference).abs(),
        1e-12,
        1,
        format!("h = {} on T¹ × ℝ, torus part {reference}", cert.value),
    ))
}

fn semisimple_zero() -> Result<PropertyResult> {
    let g = RealMatrix::diagonal(&[2.0, 0.5]);
    let cert = compute(
        &GroupDescriptor::SemisimpleLinear { matrix_size: 2 },
        &EndoDescriptor::SemisimpleLinear(SemisimpleEndo {
            g: g.clone(),
            power: 1,
        }),
    )?;
    let radius = eigenvalues(&adjoint_matrix(&g)?, &Tolerances::default())?.spectral_radius();
    Ok(result(
        "semisimple_zero",
        cert.value.abs() + (radius - 4.0).abs(),
        1e-12,
        1,
        format!("h = {}, spectral radius of Ad(g) = {radius}", cert.value),
    ))
}

fn conjectural_product() -> Result<PropertyResult> {
    let cert = conjectural_general_entropy(
        &IntegerMatrix::from_rows(&[[2]])?,
        &IntegerMatrix::from_rows(&[[3]])?,
    )?;
    let gap = (cert.value - 6f64.ln()).abs() + if cert.conjectural { 0.0 } else { 1.0 };
    Ok(result(
        "conjectural_product",
        gap,
        1e-12,
        1,
        format!("h = {}, conjectural = {}", cert.value, cert.conjectural),
    ))
}

fn oracle_gap(name: &str, t: IntegerMatrix, grid_resolution: u64) -> Result<PropertyResult> {
    let est = estimate_entropy(
        &t,
        &EstimateConfig {
            grid_resolution,
            ..EstimateConfig::default()
        },
    )?;
    let h = torus_entropy(&t)?.value;
    Ok(result(
        name,
        (est.extrapolated - h).abs(),
        0.1,
        1,
        format!(
            "estimate {} over n = {}..{}, formula {h}",
            est.extrapolated, est.fit_range.0, est.fit_range.1
        ),
    ))
}

fn cat_map_oracle() -> Result<PropertyResult> {
    oracle_gap(
        "cat_map_oracle",
        IntegerMatrix::from_rows(&[[2, 1], [1, 1]])?,
        200,
    )
}

fn doubling_oracle() -> Result<PropertyResult> {
    oracle_gap(
        "doubling_oracle",
        IntegerMatrix::from_rows(&[[2]])?,
        100_000,
    )
}

fn rotation(theta: f64) -> RealMatrix {
    let (s, c) = theta.sin_cos();
    RealMatrix::from_rows(&[[c, -s], [s, c]]).expect("finite")
}

/// Matrices for the recurrence dichotomy. The rotation in the mixed case has
/// finite order: next to an expanding block, rounding in a recurrent vector
/// grows like λⁿ and would swamp a slow irrational return.
pub fn recurrence_battery() -> Vec<(&'static str, RealMatrix)> {
    let shear = RealMatrix::from_rows(&[[1.0, 1.0], [0.0, 1.0]]).expect("finite");
    let s = RealMatrix::from_rows(&[
        [1.0, 0.5, 0.0, 0.2],
        [0.0, 1.0, 0.3, 0.0],
        [0.1, 0.0, 1.0, 0.4],
        [0.0, 0.2, 0.0, 1.0],
    ])
    .expect("finite");
    let core = RealMatrix::direct_sum(
        &rotation(2.0 * PI / 5.0),
        &RealMatrix::diagonal(&[2.0, 0.5]),
    );
    let mixed = &(&s * &core) * &s.inverse().expect("invertible");
    vec![
        ("rotation", rotation(1.0)),
        ("shear", shear.clone()),
        ("diag(2,3)", RealMatrix::diagonal(&[2.0, 3.0])),
        (
            "rotation+shear",
            RealMatrix::direct_sum(&rotation(1.0), &shear),
        ),
        ("mixed 4x4", mixed),
    ]
}

/// Unit vectors `x = c + h` with `c ∈ Fix(H)`, `h ∈ range(H − I)` and
/// `‖h‖ ≥ 0.1`, where `H` is the hyperbolic part of `m`.
pub fn hyperbolic_probes(m: &RealMatrix) -> Result<Vec<Vec<f64>>> {
    let n = m.dim();
    let h = multiplicative_jordan(m)?.hyperbolic.minus_identity();
    let columns: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| h.get(i, j)).collect())
        .collect();
    let hyper = Subspace::span(n, &columns)?;
    let central = crate::linalg::null_space(&h, 1e-9)?;
    let mut out = Vec::new();
    for hv in &hyper.basis {
        out.push(hv.clone());
        for cv in &central.basis {
            for weight in [0.1, 0.5] {
                // ‖x‖ = 1 with hyperbolic part `weight·hv` up to normalization.
                let x: Vec<f64> = cv.iter().zip(hv).map(|(c, h)| c + weight * h).collect();
                let len = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                if weight / len >= 0.1 {
                    out.push(x.iter().map(|v| v / len).collect());
                }
            }
        }
    }
    Ok(out)
}

fn recurrence_dichotomy() -> Result<PropertyResult> {
    let mut failures = Vec::new();
    let mut checked = 0;
    for (name, m) in recurrence_battery() {
        for v in recurrent_subspace(&m)?.basis {
            checked += 1;
            if !recurrence_check(&m, &v, 100_000, 1e-3)?.recurrent {
                failures.push(format!("{name}: recurrent vector {v:?} did not return"));
            }
        }
        for x in hyperbolic_probes(&m)? {
            checked += 1;
            if recurrence_check(&m, &x, 100_000, 1e-3)?.recurrent {
                failures.push(format!("{name}: hyperbolic vector {x:?} returned"));
            }
        }
    }
    Ok(result(
        "recurrence_dichotomy",
        failures.len() as f64,
        0.0,
        checked,
        if failures.is_empty() {
            "all vectors classified".into()
        } else {
            failures.join("; ")
        },
    ))
}

fn li_yorke_dichotomy() -> Result<PropertyResult> {
    let doubling = li_yorke_search(&IntegerMatrix::from_rows(&[[2]])?, 1_000_000, 1e-3)?;
    let rotation = li_yorke_search(
        &IntegerMatrix::from_rows(&[[0, -1], [1, 0]])?,
        1_000_000,
        1e-3,
    )?;
    let wrong = doubling.witness.is_none() as u32 + rotation.witness.is_some() as u32;
    Ok(result(
        "li_yorke_dichotomy",
        wrong as f64,
        0.0,
        2,
        format!(
            "doubling witness found: {}; rotation witness found: {}; {}",
            doubling.witness.is_some(),
            rotation.witness.is_some(),
            doubling.caveat
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samplers_respect_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let m = random_invertible(&mut rng, 5, 1e4);
            assert!((1..=5).contains(&m.dim()));
            let t = random_lattice_block(&mut rng, 3);
            assert!(t.entries().iter().all(|v| v.abs() <= 3));
            assert_ne!(t.determinant().unwrap(), 0);
        }
    }

    #[test]
    fn probes_have_hyperbolic_weight() {
        let m = RealMatrix::direct_sum(&rotation(1.0), &RealMatrix::diagonal(&[2.0]));
        let probes = hyperbolic_probes(&m).unwrap();
        assert!(!probes.is_empty());
        for x in probes {
            let len = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((len - 1.0).abs() < 1e-12);
            assert!(x[2].abs() >= 0.1 - 1e-12);
        }
    }

    #[test]
    fn fast_suite_is_deterministic() {
        let a = run_verify(VerifyLevel::Fast);
        let b = run_verify(VerifyLevel::Fast);
        assert_eq!(a, b);
        assert_eq!(a.properties.len(), 8);
    }
}
