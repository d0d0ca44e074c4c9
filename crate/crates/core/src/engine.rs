//! The reduction engine.
//!
//! Every class of group handled here has entropy equal to the entropy of the
//! restriction to its toral component, and on a torus the entropy is
//! `Σ_{|λ|>1} log|λ|` over the eigenvalues of the lattice map. Each public
//! function returns an [`EntropyCertificate`] recording the value, the
//! eigenvalues that produced it and the chain of reductions applied.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{LogBase, Options, Tolerances};
use crate::error::{Error, Result};
use crate::group::{validate_with, AbelianEndo, EndoDescriptor, GroupDescriptor, SemisimpleEndo};
use crate::linalg::poly::split_cyclotomic;
use crate::linalg::{locally_close, raw_eigenvalues, single_linkage_by, IntegerMatrix, RealMatrix};

/// Largest lattice dimension for the exact cyclotomic test.
pub const EXACT_CYCLOTOMIC_MAX_DIM: usize = 6;

/// One eigenvalue of modulus greater than one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
    /// `log|λ|` in the certificate's base.
    pub log_modulus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub rule: String,
    /// The result the step applies, stated in words.
    pub reference: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyCertificate {
    pub value: f64,
    pub log_base: LogBase,
    pub conjectural: bool,
    pub contributions: Vec<Contribution>,
    pub trace: Vec<TraceStep>,
}

impl EntropyCertificate {
    pub fn zero(log_base: LogBase) -> Self {
        Self {
            value: 0.0,
            log_base,
            conjectural: false,
            contributions: Vec::new(),
            trace: Vec::new(),
        }
    }

    fn step(&mut self, rule: &str, reference: &str, detail: impl Into<String>) {
        self.trace.push(TraceStep {
            rule: rule.to_string(),
            reference: reference.to_string(),
            detail: detail.into(),
        });
    }

    /// Prepends a step, for reductions that wrap an inner computation.
    fn lead(&mut self, rule: &str, reference: &str, detail: impl Into<String>) {
        self.trace.insert(
            0,
            TraceStep {
                rule: rule.to_string(),
                reference: reference.to_string(),
                detail: detail.into(),
            },
        );
    }

    /// Largest `|value − Σ log_modulus|`.
    pub fn consistency_gap(&self) -> f64 {
        (self.value
            - self
                .contributions
                .iter()
                .map(|c| c.log_modulus)
                .sum::<f64>())
        .abs()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    /// Same certificate in another logarithm base.
    pub fn in_base(&self, base: LogBase) -> Self {
        if base == self.log_base {
            return self.clone();
        }
        let factor = base.convert(1.0) / self.log_base.convert(1.0);
        let mut out = self.clone();
        out.log_base = base;
        out.value *= factor;
        for c in &mut out.contributions {
            c.log_modulus *= factor;
        }
        out
    }
}

pub(crate) mod refs {
    pub const BOWEN: &str =
        "Bowen's formula: h = Σ_{|λ|>1} log|λ| over eigenvalues with multiplicity";
    pub const TORUS: &str = "entropy of a torus endomorphism is Bowen's sum over its lattice map";
    pub const CYCLOTOMIC: &str =
        "all roots of a product of cyclotomic polynomials lie on the unit circle";
    pub const VECTOR: &str =
        "a linear isomorphism of a finite-dimensional vector space has zero entropy";
    pub const ABELIAN: &str = "abelian groups: h(φ) = h(φ|T(G)) for φ = [[T, B], [0, S]]";
    pub const NILPOTENT: &str =
        "connected nilpotent groups: h(φ) = h(φ|T(G)); G/T(G) is simply connected";
    pub const SEMISIMPLE: &str = "connected semi-simple groups: h(φ) = h(φ|T(G)) = 0";
    pub const CONJUGATION: &str = "a power φᵏ of a semi-simple endomorphism is a conjugation C_g";
    pub const POWER: &str = "h(φᵏ) = k·h(φ)";
    pub const LI_YORKE: &str =
        "positive entropy forces a Li-Yorke pair; C_g = C_e·C_h·C_u has none";
    pub const REDUCTIVE: &str = "reductive groups with proper π: h(φ) = h(φ|T(G))";
    pub const PRODUCT: &str = "h(φ × ψ) = h(φ) + h(ψ)";
    pub const COMPACT: &str = "compact groups are reductive with π proper";
    pub const GENERAL: &str = "general connected groups: h(φ) = h(φ|T(R')) + h(φ̃|T(R/R')) \
                               for the solvable radical R (conditional)";
    pub const GENERAL_GAP: &str = "needs the entropy sum over a principal bundle for locally \
                                   compact bundles, which is not established";
}

/// Eigenvalue groups for entropy: locally coincident values, then, near the
/// unit circle only, pairs within the scatter radius `(1 + ‖m‖)·(64nε)^{1/k}`
/// of a defective block of size `k`. A split defective eigenvalue on the
/// circle would otherwise leak spurious `log(1 + δ)` terms; away from the
/// circle all its parts fall on one side and their log-moduli already sum to
/// the right value. A merged group is kept only if its mean, which is the
/// well-conditioned part of a split eigenvalue, lies on the circle and is an
/// eigenvalue of `m` to within `cluster·(1 + ‖m‖)`, and `m − z` stays that
/// close to singular halfway out to each member; otherwise
/// it falls back to the two groups it was merged from, recursively.
enum Merge {
    Leaf(Vec<usize>),
    Pair(Box<Merge>, Box<Merge>),
}

impl Merge {
    fn indices(&self, out: &mut Vec<usize>) {
        match self {
            Merge::Leaf(g) => out.extend(g),
            Merge::Pair(a, b) => {
                a.indices(out);
                b.indices(out);
            }
        }
    }

    fn accept(self, keep: &dyn Fn(&[usize]) -> bool, out: &mut Vec<Vec<usize>>) {
        match self {
            Merge::Leaf(g) => out.push(g),
            Merge::Pair(a, b) => {
                let mut all = Vec::new();
                a.indices(&mut all);
                b.indices(&mut all);
                if keep(&all) {
                    out.push(all);
                } else {
                    a.accept(keep, out);
                    b.accept(keep, out);
                }
            }
        }
    }
}

fn entropy_clusters(m: &RealMatrix, tol: &Tolerances) -> Result<Vec<(Complex64, usize)>> {
    let raw = raw_eigenvalues(m, tol)?;
    let n = raw.len();
    let mut groups = single_linkage_by(&raw, |a, b| locally_close(a, b, tol.cluster));
    let mean = |g: &[usize]| g.iter().map(|&i| raw[i]).sum::<Complex64>() / g.len() as f64;
    let mut trees: Vec<Merge> = groups.iter().cloned().map(Merge::Leaf).collect();
    let scale = 1.0 + m.norm();
    let unit = 64.0 * n as f64 * f64::EPSILON;
    for size in 2..=n {
        let gate = scale * unit.powf(1.0 / size as f64);
        loop {
            let mut best: Option<(usize, usize, f64)> = None;
            for i in 0..groups.len() {
                for j in i + 1..groups.len() {
                    if groups[i].len() + groups[j].len() > size {
                        continue;
                    }
                    let (a, b) = (mean(&groups[i]), mean(&groups[j]));
                    let near_circle =
                        (a.norm() - 1.0).abs() <= gate && (b.norm() - 1.0).abs() <= gate;
                    let d = (a - b).norm();
                    if near_circle && d <= gate && best.is_none_or(|(_, _, e)| d < e) {
                        best = Some((i, j, d));
                    }
                }
            }
            let Some((i, j, _)) = best else { break };
            let moved = groups.remove(j);
            groups[i].extend(moved);
            let right = trees.remove(j);
            let left = std::mem::replace(&mut trees[i], Merge::Leaf(Vec::new()));
            trees[i] = Merge::Pair(Box::new(left), Box::new(right));
        }
    }
    let band = tol.cluster * scale;
    let a = m.as_nalgebra().map(|v| Complex64::new(v, 0.0));
    // The mean must itself be an eigenvalue: `m − μ` numerically singular.
    let on_circle = |g: &[usize]| {
        let mu = mean(g);
        if (mu.norm() - 1.0).abs() > band {
            return false;
        }
        // m − z stays numerically singular across a split cluster, both at
        // its centre and halfway out to every member.
        let near_spectrum = |z: Complex64| {
            let shifted = &a - nalgebra::DMatrix::<Complex64>::identity(n, n) * z;
            shifted.singular_values().min() <= band
        };
        near_spectrum(mu) && g.iter().all(|&i| near_spectrum((mu + raw[i]) / 2.0))
    };
    let mut groups = Vec::with_capacity(trees.len());
    for t in trees {
        t.accept(&on_circle, &mut groups);
    }
    Ok(groups
        .iter()
        .map(|g| {
            let mut v = mean(g);
            if v.im.abs() <= tol.cluster * (1.0 + v.norm()) {
                v.im = 0.0;
            }
            (v, g.len())
        })
        .collect())
}

/// `Σ_{|λ|>1} log|λ|` over the eigenvalues of an invertible `m`.
pub fn bowen_formula(m: &RealMatrix) -> Result<EntropyCertificate> {
    bowen_formula_with(m, &Options::default())
}

pub fn bowen_formula_with(m: &RealMatrix, opts: &Options) -> Result<EntropyCertificate> {
    if !m.is_invertible() {
        return Err(Error::SingularMatrix);
    }
    let tol = &opts.tolerances;
    let mut clusters = entropy_clusters(m, tol)?;
    clusters.sort_by(|a, b| crate::linalg::spectral_order(&a.0, &b.0));
    let mut cert = EntropyCertificate::zero(opts.log_base);
    for (z, k) in clusters {
        let modulus = z.norm();
        if !tol.is_expanding(modulus) {
            continue;
        }
        let log_modulus = opts.log_base.convert(modulus.ln());
        for _ in 0..k {
            cert.contributions.push(Contribution {
                re: z.re,
                im: z.im,
                modulus,
                log_modulus,
            });
        }
    }
    cert.value = cert.contributions.iter().map(|c| c.log_modulus).sum();
    cert.step(
        "BOWEN",
        refs::BOWEN,
        format!(
            "{} of {} eigenvalues outside the unit band (±{:e}); sum {}",
            cert.contributions.len(),
            m.dim(),
            tol.unit_band,
            cert.value
        ),
    );
    Ok(cert)
}

/// Entropy of `x ↦ T·x mod ℤᵖ`.
pub fn torus_entropy(t: &IntegerMatrix) -> Result<EntropyCertificate> {
    torus_entropy_with(t, &Options::default())
}

pub fn torus_entropy_with(t: &IntegerMatrix, opts: &Options) -> Result<EntropyCertificate> {
    if t.determinant()? == 0 {
        return Err(Error::SingularLatticeMap);
    }
    if t.dim() == 0 {
        let mut cert = EntropyCertificate::zero(opts.log_base);
        cert.step("TORUS", refs::TORUS, "trivial torus T⁰; entropy 0");
        return Ok(cert);
    }
    if opts.exact_cyclotomic && t.dim() <= EXACT_CYCLOTOMIC_MAX_DIM {
        let split = split_cyclotomic(&t.characteristic_polynomial()?);
        if split.is_fully_cyclotomic() {
            let factors: Vec<String> = split
                .factors
                .iter()
                .map(|(k, e)| {
                    if *e == 1 {
                        format!("Φ{k}")
                    } else {
                        format!("Φ{k}^{e}")
                    }
                })
                .collect();
            let mut cert = EntropyCertificate::zero(opts.log_base);
            cert.step(
                "CYCLOTOMIC",
                refs::CYCLOTOMIC,
                format!(
                    "characteristic polynomial = {}; entropy exactly 0",
                    factors.join("·")
                ),
            );
            cert.step(
                "TORUS",
                refs::TORUS,
                format!("{}-dimensional lattice map", t.dim()),
            );
            return Ok(cert);
        }
    }
    let mut cert = bowen_formula_with(&t.to_real(), opts)?;
    cert.step(
        "TORUS",
        refs::TORUS,
        format!("{}-dimensional lattice map", t.dim()),
    );
    Ok(cert)
}

/// Entropy of `[[T, B], [0, S]]` on `Tᵖ × ℝ^q`: only `T` contributes.
pub fn abelian_entropy(
    t: &IntegerMatrix,
    coupling: &[Vec<f64>],
    s: &RealMatrix,
) -> Result<EntropyCertificate> {
    abelian_entropy_with(t, coupling, s, &Options::default())
}

pub fn abelian_entropy_with(
    t: &IntegerMatrix,
    coupling: &[Vec<f64>],
    s: &RealMatrix,
    opts: &Options,
) -> Result<EntropyCertificate> {
    if !s.is_invertible() {
        return Err(Error::NotSurjective(
            "vector map S is singular; φ must restrict to an isomorphism of ℝ^q".into(),
        ));
    }
    let mut cert = torus_entropy_with(t, opts)?;
    cert.step(
        "VECTOR_PART",
        refs::VECTOR,
        format!("S is an isomorphism of ℝ^{}; contributes 0", s.dim()),
    );
    if !coupling.is_empty() {
        cert.step(
            "COUPLING",
            refs::ABELIAN,
            "off-diagonal block B contributes 0",
        );
    }
    cert.step(
        "ABELIAN_REDUCTION",
        refs::ABELIAN,
        format!("h(φ) = h(φ|T^{}) = {}", t.dim(), cert.value),
    );
    Ok(cert)
}

pub fn nilpotent_entropy(toral_map: &IntegerMatrix) -> Result<EntropyCertificate> {
    nilpotent_entropy_with(toral_map, &Options::default())
}

pub fn nilpotent_entropy_with(
    toral_map: &IntegerMatrix,
    opts: &Options,
) -> Result<EntropyCertificate> {
    let mut cert = torus_entropy_with(toral_map, opts)?;
    cert.step(
        "NILPOTENT_REDUCTION",
        refs::NILPOTENT,
        format!("h(φ) = h(φ|T^{}) = {}", toral_map.dim(), cert.value),
    );
    Ok(cert)
}

/// Always zero; Bowen's sum over `Ad(g)` is only an upper bound here.
pub fn semisimple_entropy(e: &SemisimpleEndo) -> Result<EntropyCertificate> {
    semisimple_entropy_with(e, &Options::default())
}

pub fn semisimple_entropy_with(e: &SemisimpleEndo, opts: &Options) -> Result<EntropyCertificate> {
    if !e.g.is_invertible() {
        return Err(Error::SingularMatrix);
    }
    let mut cert = EntropyCertificate::zero(opts.log_base);
    cert.step(
        "CONJUGATION",
        refs::CONJUGATION,
        format!("φ^{} = C_g with g of size {}", e.power, e.g.dim()),
    );
    cert.step("POWER", refs::POWER, format!("h(φ) = h(C_g)/{}", e.power));
    cert.step(
        "LI_YORKE",
        refs::LI_YORKE,
        "C_g has no Li-Yorke pair, so h(C_g) = 0",
    );
    cert.step(
        "SEMISIMPLE_REDUCTION",
        refs::SEMISIMPLE,
        "T(G) is trivial; h(φ) = 0",
    );
    Ok(cert)
}

/// Entropy of `φ` on a reductive group via `Z(G)₀ × G'`. An improper `π`
/// gives the same value marked conjectural.
pub fn reductive_entropy(
    center: &AbelianEndo,
    derived: &SemisimpleEndo,
    pi_proper: bool,
) -> Result<EntropyCertificate> {
    reductive_entropy_with(center, derived, pi_proper, &Options::default())
}

pub fn reductive_entropy_with(
    center: &AbelianEndo,
    derived: &SemisimpleEndo,
    pi_proper: bool,
    opts: &Options,
) -> Result<EntropyCertificate> {
    let z = abelian_entropy_with(
        &center.lattice_map,
        &center.coupling,
        &center.vector_map,
        opts,
    )?;
    let d = semisimple_entropy_with(derived, opts)?;
    let mut cert = product_entropy(&z, &d);
    if pi_proper {
        cert.step(
            "REDUCTIVE_REDUCTION",
            refs::REDUCTIVE,
            format!("h(φ) = h(φ|Z(G)₀) + h(φ|G') = {} + 0", z.value),
        );
    } else {
        cert.conjectural = true;
        cert.step(
            "PI_NOT_PROPER",
            refs::REDUCTIVE,
            "WARNING: π not declared proper; value assumes the reductive reduction still holds",
        );
    }
    Ok(cert)
}

/// Compact groups are reductive with `π` proper.
pub fn compact_entropy(toral_map: &IntegerMatrix) -> Result<EntropyCertificate> {
    compact_entropy_with(toral_map, &Options::default())
}

pub fn compact_entropy_with(
    toral_map: &IntegerMatrix,
    opts: &Options,
) -> Result<EntropyCertificate> {
    let mut cert = torus_entropy_with(toral_map, opts)?;
    cert.step("COMPACT", refs::COMPACT, "π proper");
    cert.step(
        "REDUCTIVE_REDUCTION",
        refs::REDUCTIVE,
        format!("h(φ) = h(φ|T^{}) = {}", toral_map.dim(), cert.value),
    );
    Ok(cert)
}

/// Entropy of `φ × ψ`. `b` is converted to `a`'s log base.
pub fn product_entropy(a: &EntropyCertificate, b: &EntropyCertificate) -> EntropyCertificate {
    let b = b.in_base(a.log_base);
    let mut out = a.clone();
    out.value = a.value + b.value;
    out.conjectural = a.conjectural || b.conjectural;
    out.contributions.extend(b.contributions.iter().copied());
    out.trace.extend(b.trace.iter().cloned());
    out.step(
        "PRODUCT",
        refs::PRODUCT,
        format!("{} + {} = {}", a.value, b.value, out.value),
    );
    out
}

/// Entropy of `φᵏ` from that of `φ`.
pub fn power_entropy(c: &EntropyCertificate, k: u32) -> Result<EntropyCertificate> {
    if k == 0 {
        return Err(Error::InvalidArgument("power must be at least 1".into()));
    }
    let mut out = c.clone();
    out.value = c.value * k as f64;
    for x in &mut out.contributions {
        let z = Complex64::new(x.re, x.im).powu(k);
        x.re = z.re;
        x.im = z.im;
        x.modulus = x.modulus.powi(k as i32);
        x.log_modulus *= k as f64;
    }
    out.step(
        "POWER",
        refs::POWER,
        format!("{k}·{} = {}", c.value, out.value),
    );
    Ok(out)
}

/// `h(φ|T(R')) + h(φ̃|T(R/R'))`, always marked conjectural.
pub fn conjectural_general_entropy(
    t_r_prime: &IntegerMatrix,
    t_quotient: &IntegerMatrix,
) -> Result<EntropyCertificate> {
    conjectural_general_entropy_with(t_r_prime, t_quotient, &Options::default())
}

pub fn conjectural_general_entropy_with(
    t_r_prime: &IntegerMatrix,
    t_quotient: &IntegerMatrix,
    opts: &Options,
) -> Result<EntropyCertificate> {
    let a = torus_entropy_with(t_r_prime, opts)?;
    let b = torus_entropy_with(t_quotient, opts)?;
    let mut cert = product_entropy(&a, &b);
    cert.conjectural = true;
    cert.step(
        "GENERAL_CONJECTURE",
        refs::GENERAL,
        format!("h(φ|T(R')) + h(φ̃|T(R/R')) = {} + {}", a.value, b.value),
    );
    cert.step("CONJECTURAL", refs::GENERAL_GAP, "value is conditional");
    Ok(cert)
}

/// Validates and dispatches with default options.
pub fn compute(group: &GroupDescriptor, endo: &EndoDescriptor) -> Result<EntropyCertificate> {
    compute_with(group, endo, &Options::default())
}

pub fn compute_with(
    group: &GroupDescriptor,
    endo: &EndoDescriptor,
    opts: &Options,
) -> Result<EntropyCertificate> {
    let report = validate_with(group, endo, &opts.tolerances);
    if !report.ok {
        return Err(Error::ValidationFailed(report));
    }
    let mut cert = match (group, endo) {
        (GroupDescriptor::Nilpotent { .. }, EndoDescriptor::Nilpotent { toral_map, .. }) => {
            nilpotent_entropy_with(toral_map, opts)?
        }
        (_, EndoDescriptor::Abelian(a)) => {
            abelian_entropy_with(&a.lattice_map, &a.coupling, &a.vector_map, opts)?
        }
        (_, EndoDescriptor::SemisimpleLinear(s)) => semisimple_entropy_with(s, opts)?,
        (
            GroupDescriptor::Reductive { pi_proper, .. },
            EndoDescriptor::Reductive {
                center_endo,
                derived_endo,
            },
        ) => reductive_entropy_with(center_endo, derived_endo, *pi_proper, opts)?,
        (_, EndoDescriptor::Compact { toral_map }) => compact_entropy_with(toral_map, opts)?,
        (
            _,
            EndoDescriptor::GeneralConjecture {
                toral_r_prime,
                toral_r_mod_r_prime,
            },
        ) => conjectural_general_entropy_with(toral_r_prime, toral_r_mod_r_prime, opts)?,
        (g, e) => {
            return Err(Error::VariantMismatch {
                group: g.kind().into(),
                endo: e.kind().into(),
            })
        }
    };
    let notes: Vec<String> = report
        .findings
        .iter()
        .map(|f| format!("{} {}: {}", f.severity, f.code, f.message))
        .collect();
    let detail = if notes.is_empty() {
        format!("{} descriptor valid", group.kind())
    } else {
        format!("{} descriptor valid; {}", group.kind(), notes.join("; "))
    };
    cert.lead(
        "VALIDATED",
        "descriptor hypotheses checked before any reduction",
        detail,
    );
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::AbelianDims;
    use crate::group::SemisimpleDims;
    use crate::oracle::adjoint::adjoint_matrix;
    use proptest::prelude::*;

    const CAT: f64 = 0.962_423_650_119_206_9;

    fn im(rows: &[&[i64]]) -> IntegerMatrix {
        IntegerMatrix::from_rows(rows).unwrap()
    }

    fn rm(rows: &[&[f64]]) -> RealMatrix {
        RealMatrix::from_rows(rows).unwrap()
    }

    fn cat() -> IntegerMatrix {
        im(&[&[2, 1], &[1, 1]])
    }

    fn abelian(t: IntegerMatrix, s: RealMatrix) -> AbelianEndo {
        AbelianEndo {
            lattice_map: t,
            coupling: Vec::new(),
            vector_map: s,
        }
    }

    fn ss(g: RealMatrix) -> SemisimpleEndo {
        SemisimpleEndo { g, power: 1 }
    }

    #[test]
    fn bowen_examples() {
        let c = bowen_formula(&RealMatrix::identity(3)).unwrap();
        assert_eq!(c.value, 0.0);
        assert!(c.contributions.is_empty());
        let c = bowen_formula(&cat().to_real()).unwrap();
        assert!((c.value - CAT).abs() < 1e-12);
        assert_eq!(c.contributions.len(), 1);
        let c = bowen_formula(&rm(&[&[2.0, 0.0], &[0.0, 0.5]])).unwrap();
        assert!((c.value - 2f64.ln()).abs() < 1e-15);
        assert_eq!(
            bowen_formula(&RealMatrix::zeros(2)).unwrap_err().code(),
            "SINGULAR_MATRIX"
        );
    }

    #[test]
    fn bowen_counts_multiplicity() {
        let c = bowen_formula(&RealMatrix::diagonal(&[3.0, 3.0, 0.2])).unwrap();
        assert_eq!(c.contributions.len(), 2);
        assert!((c.value - 2.0 * 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn torus_examples() {
        assert!((torus_entropy(&im(&[&[2]])).unwrap().value - 2f64.ln()).abs() < 1e-15);
        assert!((torus_entropy(&cat()).unwrap().value - CAT).abs() < 1e-12);
        assert_eq!(torus_entropy(&im(&[&[0, -1], &[1, 0]])).unwrap().value, 0.0);
        assert_eq!(
            torus_entropy(&im(&[&[1, 2], &[2, 4]])).unwrap_err().code(),
            "SINGULAR_LATTICE_MAP"
        );
        let c = torus_entropy(&im(&[&[2]])).unwrap();
        assert_eq!(c.trace.last().unwrap().rule, "TORUS");
    }

    #[test]
    fn exact_cyclotomic_mode() {
        let opts = Options {
            exact_cyclotomic: true,
            ..Options::default()
        };
        // Order-6 rotation of the hexagonal lattice and a unipotent block.
        for t in [
            im(&[&[0, -1], &[1, 1]]),
            im(&[&[1, 1, 0], &[0, 1, 1], &[0, 0, 1]]),
        ] {
            let c = torus_entropy_with(&t, &opts).unwrap();
            assert_eq!(c.value, 0.0);
            assert_eq!(c.trace[0].rule, "CYCLOTOMIC");
        }
        let c = torus_entropy_with(&cat(), &opts).unwrap();
        assert!((c.value - CAT).abs() < 1e-12);
    }

    #[test]
    fn defective_unit_eigenvalues_contribute_nothing() {
        let j = im(&[&[1, 1, 0], &[0, 1, 1], &[0, 0, 1]]);
        for k in 1..=5 {
            let c = torus_entropy(&j.checked_pow(k).unwrap()).unwrap();
            assert!(c.value.abs() < 1e-12, "k={k}: {}", c.value);
        }
    }

    #[test]
    fn abelian_examples() {
        let c = abelian_entropy(&im(&[&[2]]), &[], &rm(&[&[3.0]])).unwrap();
        assert_eq!(c.value, torus_entropy(&im(&[&[2]])).unwrap().value);
        assert!(c
            .trace
            .iter()
            .any(|s| s.rule == "VECTOR_PART" && s.detail.contains("contributes 0")));
        let c = abelian_entropy(
            &IntegerMatrix::empty(),
            &[],
            &rm(&[&[0.3, 5.0], &[-1.0, 2.0]]),
        )
        .unwrap();
        assert_eq!(c.value, 0.0);
        let rot = rm(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let c = abelian_entropy(&cat(), &[], &rot).unwrap();
        assert!((c.value - CAT).abs() < 1e-12);
        let err = abelian_entropy(&im(&[&[2]]), &[], &rm(&[&[0.0]])).unwrap_err();
        assert_eq!(err.code(), "NOT_SURJECTIVE");
    }

    #[test]
    fn nilpotent_examples() {
        assert_eq!(
            nilpotent_entropy(&IntegerMatrix::empty()).unwrap().value,
            0.0
        );
        assert!((nilpotent_entropy(&im(&[&[2]])).unwrap().value - 2f64.ln()).abs() < 1e-15);
        let c = nilpotent_entropy(&IntegerMatrix::identity(3)).unwrap();
        assert_eq!(c.value, 0.0);
        assert_eq!(c.trace.last().unwrap().rule, "NILPOTENT_REDUCTION");
    }

    #[test]
    fn semisimple_is_zero_and_bowen_on_adjoint_is_not() {
        let g = rm(&[&[2.0, 0.0], &[0.0, 0.5]]);
        for e in [
            ss(g.clone()),
            ss(RealMatrix::identity(2)),
            ss(rm(&[&[1.0, 3.0], &[0.0, 1.0]])),
        ] {
            let c = semisimple_entropy(&e).unwrap();
            assert_eq!(c.value, 0.0);
            assert!(!c.conjectural);
        }
        let bound = bowen_formula(&adjoint_matrix(&g).unwrap()).unwrap();
        assert!((bound.value - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn reductive_examples() {
        let center = abelian(im(&[&[3]]), RealMatrix::zeros(0));
        let derived = ss(rm(&[&[2.0, 1.0], &[1.0, 1.0]]));
        let c = reductive_entropy(&center, &derived, true).unwrap();
        assert!((c.value - 3f64.ln()).abs() < 1e-15);
        assert!(!c.conjectural);
        let c = reductive_entropy(&center, &derived, false).unwrap();
        assert!((c.value - 3f64.ln()).abs() < 1e-15);
        assert!(c.conjectural);
        assert!(c.trace.iter().any(|s| s.detail.starts_with("WARNING")));
        let vec_center = abelian(IntegerMatrix::empty(), RealMatrix::diagonal(&[2.0, 7.0]));
        assert_eq!(
            reductive_entropy(&vec_center, &derived, true)
                .unwrap()
                .value,
            0.0
        );
        let c = compact_entropy(&im(&[&[2]])).unwrap();
        assert_eq!(c.value, torus_entropy(&im(&[&[2]])).unwrap().value);
    }

    #[test]
    fn product_and_power_examples() {
        let dbl = torus_entropy(&im(&[&[2]])).unwrap();
        let zero = EntropyCertificate::zero(LogBase::Natural);
        assert_eq!(product_entropy(&dbl, &zero).value, dbl.value);
        let c = product_entropy(&torus_entropy(&cat()).unwrap(), &dbl);
        assert!((c.value - CAT - 2f64.ln()).abs() < 1e-12);
        assert_eq!(product_entropy(&zero, &zero).value, 0.0);

        assert_eq!(power_entropy(&dbl, 1).unwrap().value, dbl.value);
        let c = power_entropy(&dbl, 3).unwrap();
        assert!((c.value - 3.0 * 2f64.ln()).abs() < 1e-15);
        assert!((c.contributions[0].re - 8.0).abs() < 1e-12);
        assert!(c.consistency_gap() < 1e-12);
        assert_eq!(power_entropy(&zero, 7).unwrap().value, 0.0);
        assert!(power_entropy(&dbl, 0).is_err());
    }

    #[test]
    fn conjectural_examples() {
        let c = conjectural_general_entropy(&im(&[&[2]]), &im(&[&[1]])).unwrap();
        assert!((c.value - 2f64.ln()).abs() < 1e-15);
        assert!(c.conjectural);
        let c =
            conjectural_general_entropy(&IntegerMatrix::identity(2), &IntegerMatrix::identity(1))
                .unwrap();
        assert_eq!(c.value, 0.0);
        assert!(c.conjectural);
        let c = conjectural_general_entropy(&cat(), &im(&[&[3]])).unwrap();
        assert!((c.value - CAT - 3f64.ln()).abs() < 1e-12);
        assert!(c.trace.iter().any(|s| s.rule == "GENERAL_CONJECTURE"));
        assert_eq!(
            conjectural_general_entropy(&im(&[&[0]]), &im(&[&[1]]))
                .unwrap_err()
                .code(),
            "SINGULAR_LATTICE_MAP"
        );
    }

    #[test]
    fn compute_examples() {
        let c = compute(
            &GroupDescriptor::Compact { toral_dim: 1 },
            &EndoDescriptor::Compact {
                toral_map: im(&[&[2]]),
            },
        )
        .unwrap();
        assert!((c.value - 2f64.ln()).abs() < 1e-15);
        assert_eq!(c.trace[0].rule, "VALIDATED");
        assert!(c.trace[0].detail.contains("2-fold covering"));

        let g = rm(&[&[1.0, 2.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let c = compute(
            &GroupDescriptor::SemisimpleLinear { matrix_size: 3 },
            &EndoDescriptor::SemisimpleLinear(ss(g)),
        )
        .unwrap();
        assert_eq!(c.value, 0.0);

        let c = compute(
            &GroupDescriptor::Abelian { p: 1, q: 1 },
            &EndoDescriptor::Abelian(abelian(im(&[&[1]]), rm(&[&[5.0]]))),
        )
        .unwrap();
        assert_eq!(c.value, 0.0);

        let err = compute(
            &GroupDescriptor::Abelian { p: 1, q: 1 },
            &EndoDescriptor::Abelian(abelian(im(&[&[1]]), rm(&[&[0.0]]))),
        )
        .unwrap_err();
        assert_eq!(err.code(), "VALIDATION_FAILED");

        let c = compute(
            &GroupDescriptor::Reductive {
                center: AbelianDims { p: 1, q: 0 },
                derived: SemisimpleDims { matrix_size: 2 },
                pi_proper: false,
            },
            &EndoDescriptor::Reductive {
                center_endo: abelian(im(&[&[3]]), RealMatrix::zeros(0)),
                derived_endo: ss(RealMatrix::identity(2)),
            },
        )
        .unwrap();
        assert!(c.conjectural);
    }

    #[test]
    fn base_two_output() {
        let opts = Options {
            log_base: LogBase::Two,
            ..Options::default()
        };
        let c = torus_entropy_with(&im(&[&[2, 0], &[0, 4]]), &opts).unwrap();
        assert!((c.value - 3.0).abs() < 1e-12);
        assert!(c.consistency_gap() < 1e-12);
        let mixed = product_entropy(&torus_entropy(&im(&[&[2]])).unwrap(), &c);
        assert!((mixed.value - 4.0 * 2f64.ln()).abs() < 1e-12);
        assert!(mixed.consistency_gap() < 1e-12);
    }

    #[test]
    fn certificate_json_key_order() {
        let json = torus_entropy(&im(&[&[2]])).unwrap().to_json();
        let keys = [
            "\"value\"",
            "\"log_base\"",
            "\"conjectural\"",
            "\"contributions\"",
            "\"trace\"",
        ];
        let pos: Vec<usize> = keys.iter().map(|k| json.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        let back: EntropyCertificate = serde_json::from_str(&json).unwrap();
        assert_eq!(back, torus_entropy(&im(&[&[2]])).unwrap());
    }

    fn lattice_of(n: usize) -> impl Strategy<Value = IntegerMatrix> {
        prop::collection::vec(-3i64..=3, n * n)
            .prop_map(move |v| IntegerMatrix::new(n, v).unwrap())
            .prop_filter("nonzero determinant", |m| m.determinant().unwrap() != 0)
    }

    fn lattice(max_dim: usize) -> impl Strategy<Value = IntegerMatrix> {
        (1..=max_dim).prop_flat_map(lattice_of)
    }

    fn well_conditioned(n: usize) -> impl Strategy<Value = RealMatrix> {
        prop::collection::vec(-1.0f64..1.0, n * n).prop_map(move |v| {
            let m = RealMatrix::new(n, v).unwrap();
            RealMatrix::identity(n).scale(2.0).add(&m.scale(0.5))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn certificates_are_nonnegative_and_self_consistent(t in lattice(4)) {
            let c = torus_entropy(&t).unwrap();
            prop_assert!(c.value >= 0.0);
            prop_assert!(c.consistency_gap() <= 1e-12);
            for x in &c.contributions {
                prop_assert!(x.modulus > 1.0 + Tolerances::default().unit_band);
            }
        }

        #[test]
        fn product_formula(a in lattice(3), b in lattice(3)) {
            let whole = torus_entropy(&IntegerMatrix::direct_sum(&a, &b)).unwrap().value;
            let parts = torus_entropy(&a).unwrap().value + torus_entropy(&b).unwrap().value;
            prop_assert!((whole - parts).abs() <= 1e-9, "{whole} vs {parts}");
        }

        #[test]
        fn power_formula(a in lattice(3), k in 2u32..=5) {
            let direct = torus_entropy(&a.checked_pow(k).unwrap()).unwrap().value;
            let scaled = k as f64 * torus_entropy(&a).unwrap().value;
            prop_assert!((direct - scaled).abs() <= 1e-8 * k as f64, "{direct} vs {scaled}");
        }

        #[test]
        fn conjugation_invariance(
            (a, p) in (1usize..=3).prop_flat_map(|n| (lattice_of(n), well_conditioned(n))),
        ) {
            let m = a.to_real();
            let conj = &(&p * &m) * &p.inverse().unwrap();
            let x = bowen_formula(&m).unwrap().value;
            let y = bowen_formula(&conj).unwrap().value;
            prop_assert!((x - y).abs() <= 1e-6, "{x} vs {y}");
        }

        #[test]
        fn factor_inequality(
            a in lattice(2),
            d in lattice(2),
            c in prop::collection::vec(-3i64..=3, 4),
        ) {
            let c = &c[..a.dim() * d.dim()];
            let full = IntegerMatrix::block_upper(&a, c, &d).unwrap();
            let whole = torus_entropy(&full).unwrap().value;
            prop_assert!(torus_entropy(&d).unwrap().value <= whole + 1e-9);
        }
    }
}
