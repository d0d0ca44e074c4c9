//! Structural descriptors of connected Lie groups and their surjective
//! endomorphisms.
//!
//! A group is described only by the data the reduction theorems consume: the
//! dimensions of its toral and vector parts and, for the endomorphism, the
//! integer lattice map on the toral component plus whatever extra payload the
//! class carries (vector map, conjugating element, ...).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::{Options, Tolerances};
use crate::error::{Error, Result};
use crate::linalg::{IntegerMatrix, RealMatrix};

/// JSON Schema of the descriptor file format.
pub const DESCRIPTOR_SCHEMA: &str = include_str!("descriptor.schema.json");

/// Dimensions of `Tᵖ × ℝ^q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbelianDims {
    pub p: usize,
    pub q: usize,
}

/// A connected linear semi-simple group of `n × n` matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemisimpleDims {
    pub matrix_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupDescriptor {
    /// `Tᵖ`, the same as `abelian(p, 0)`.
    Torus {
        p: usize,
    },
    /// `ℝ^q`, the same as `abelian(0, q)`.
    Vector {
        q: usize,
    },
    Abelian {
        p: usize,
        q: usize,
    },
    /// Connected nilpotent group of dimension `algebra_dim` whose toral
    /// component has dimension `toral_dim`.
    Nilpotent {
        toral_dim: usize,
        algebra_dim: usize,
    },
    SemisimpleLinear {
        matrix_size: usize,
    },
    /// `G` covered by `Z(G)₀ × G'` through `π(z, g) = z·g`.
    Reductive {
        center: AbelianDims,
        derived: SemisimpleDims,
        pi_proper: bool,
    },
    Compact {
        toral_dim: usize,
    },
    /// A general connected group, known only through the toral components of
    /// `R'` and `R/R'` for the solvable radical `R`.
    GeneralConjecture {
        radical_toral_dim: usize,
        quotient_toral_dim: usize,
    },
}

impl GroupDescriptor {
    pub fn kind(&self) -> &'static str {
        match self {
            GroupDescriptor::Torus { .. } => "torus",
            GroupDescriptor::Vector { .. } => "vector",
            GroupDescriptor::Abelian { .. } => "abelian",
            GroupDescriptor::Nilpotent { .. } => "nilpotent",
            GroupDescriptor::SemisimpleLinear { .. } => "semisimple_linear",
            GroupDescriptor::Reductive { .. } => "reductive",
            GroupDescriptor::Compact { .. } => "compact",
            GroupDescriptor::GeneralConjecture { .. } => "general_conjecture",
        }
    }

    /// `(p, q)` for the abelian-shaped variants.
    fn abelian_dims(&self) -> Option<AbelianDims> {
        match *self {
            GroupDescriptor::Torus { p } => Some(AbelianDims { p, q: 0 }),
            GroupDescriptor::Vector { q } => Some(AbelianDims { p: 0, q }),
            GroupDescriptor::Abelian { p, q } => Some(AbelianDims { p, q }),
            _ => None,
        }
    }
}

/// `φ = [[T, B], [0, S]]` on `ℝᵖ/ℤᵖ × ℝ^q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbelianEndo {
    #[serde(default = "IntegerMatrix::empty")]
    pub lattice_map: IntegerMatrix,
    /// `p × q` block, row-major; may be omitted.
    #[serde(default)]
    pub coupling: Vec<Vec<f64>>,
    #[serde(default = "empty_real")]
    pub vector_map: RealMatrix,
}

/// `φᵏ = C_g`, conjugation by `g`, with `power = k` (1 when omitted).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemisimpleEndo {
    pub g: RealMatrix,
    #[serde(default = "one")]
    pub power: u32,
}

fn empty_real() -> RealMatrix {
    RealMatrix::zeros(0)
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EndoDescriptor {
    /// Used for the torus, vector and abelian groups.
    Abelian(AbelianEndo),
    Nilpotent {
        toral_map: IntegerMatrix,
        /// Differential at the identity; reported, never used for entropy.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        differential: Option<RealMatrix>,
    },
    SemisimpleLinear(SemisimpleEndo),
    Reductive {
        center_endo: AbelianEndo,
        derived_endo: SemisimpleEndo,
    },
    Compact {
        toral_map: IntegerMatrix,
    },
    GeneralConjecture {
        toral_r_prime: IntegerMatrix,
        toral_r_mod_r_prime: IntegerMatrix,
    },
}

impl EndoDescriptor {
    pub fn kind(&self) -> &'static str {
        match self {
            EndoDescriptor::Abelian(_) => "abelian",
            EndoDescriptor::Nilpotent { .. } => "nilpotent",
            EndoDescriptor::SemisimpleLinear(_) => "semisimple_linear",
            EndoDescriptor::Reductive { .. } => "reductive",
            EndoDescriptor::Compact { .. } => "compact",
            EndoDescriptor::GeneralConjecture { .. } => "general_conjecture",
        }
    }
}

/// Contents of a descriptor file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Descriptor {
    pub group: GroupDescriptor,
    pub endo: EndoDescriptor,
    #[serde(default)]
    pub options: Options,
}

impl Descriptor {
    /// Parses a descriptor, reporting the line and column of the first
    /// problem.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("descriptor serializes")
    }

    pub fn validate(&self) -> ValidationReport {
        validate_with(&self.group, &self.endo, &self.options.tolerances)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Severity {
    Info,
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Info => "INFO",
            Severity::Warning => "WARNING",
            Severity::Error => "ERROR",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub severity: Severity,
    pub code: String,
    pub message: String,
    /// The structural fact the check rests on.
    pub reference: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn error_count(&self) -> usize {
        self.count(Severity::Error)
    }

    pub fn count(&self, severity: Severity) -> usize {
        self.findings
            .iter()
            .filter(|f| f.severity == severity)
            .count()
    }

    pub fn has_code(&self, code: &str) -> bool {
        self.findings.iter().any(|f| f.code == code)
    }

    fn push(&mut self, severity: Severity, code: &str, message: String, reference: &str) {
        self.findings.push(Finding {
            severity,
            code: code.to_string(),
            message,
            reference: reference.to_string(),
        });
    }

    fn error(&mut self, code: &str, message: String, reference: &str) {
        self.push(Severity::Error, code, message, reference);
    }
}

const REF_PROPER: &str = "surjective homomorphisms with finite kernel are proper";
const REF_BLOCK_FORM: &str = "abelian endomorphisms are [[T, B], [0, S]] with S an isomorphism";
const REF_CONJUGATION: &str = "some power of a semi-simple endomorphism is a conjugation";
const REF_REDUCTIVE: &str = "reductive reduction assumes π: Z(G)₀ × G' → G is proper";
const REF_GENERAL: &str =
    "general formula assumes the bundle entropy sum for locally compact bundles";

/// Structural checks on a descriptor. Never fails: every problem, including a
/// group/endomorphism variant mismatch, becomes an `ERROR` finding.
pub fn validate(group: &GroupDescriptor, endo: &EndoDescriptor) -> ValidationReport {
    validate_with(group, endo, &Tolerances::default())
}

pub fn validate_with(
    group: &GroupDescriptor,
    endo: &EndoDescriptor,
    tol: &Tolerances,
) -> ValidationReport {
    let mut r = ValidationReport::default();
    match (group, endo) {
        (g, EndoDescriptor::Abelian(a)) if g.abelian_dims().is_some() => {
            check_abelian(&mut r, g.abelian_dims().unwrap(), a, "");
        }
        (
            GroupDescriptor::Nilpotent {
                toral_dim,
                algebra_dim,
            },
            EndoDescriptor::Nilpotent {
                toral_map,
                differential,
            },
        ) => {
            if toral_dim > algebra_dim {
                r.error(
                    "INVALID_DESCRIPTOR",
                    format!("toral_dim {toral_dim} exceeds algebra_dim {algebra_dim}"),
                    "the toral component is a subgroup",
                );
            }
            check_lattice(&mut r, "toral_map", toral_map, *toral_dim);
            if let Some(d) = differential {
                check_dim(&mut r, "differential", d.dim(), *algebra_dim);
            }
        }
        (
            GroupDescriptor::SemisimpleLinear { matrix_size },
            EndoDescriptor::SemisimpleLinear(s),
        ) => {
            check_semisimple(&mut r, *matrix_size, s, "", tol);
        }
        (
            GroupDescriptor::Reductive {
                center,
                derived,
                pi_proper,
            },
            EndoDescriptor::Reductive {
                center_endo,
                derived_endo,
            },
        ) => {
            check_abelian(&mut r, *center, center_endo, "center_endo.");
            check_semisimple(
                &mut r,
                derived.matrix_size,
                derived_endo,
                "derived_endo.",
                tol,
            );
            if !pi_proper {
                r.push(
                    Severity::Warning,
                    "PI_NOT_PROPER",
                    "π is not declared proper; the reduction to the toral component is \
                     only established for proper π, so the result will be marked conjectural"
                        .into(),
                    REF_REDUCTIVE,
                );
            }
        }
        (GroupDescriptor::Compact { toral_dim }, EndoDescriptor::Compact { toral_map }) => {
            check_lattice(&mut r, "toral_map", toral_map, *toral_dim);
        }
        (
            GroupDescriptor::GeneralConjecture {
                radical_toral_dim,
                quotient_toral_dim,
            },
            EndoDescriptor::GeneralConjecture {
                toral_r_prime,
                toral_r_mod_r_prime,
            },
        ) => {
            check_lattice(&mut r, "toral_r_prime", toral_r_prime, *radical_toral_dim);
            check_lattice(
                &mut r,
                "toral_r_mod_r_prime",
                toral_r_mod_r_prime,
                *quotient_toral_dim,
            );
            r.push(
                Severity::Info,
                "CONJECTURAL",
                "the general formula rests on an unproven step; results are marked conjectural"
                    .into(),
                REF_GENERAL,
            );
        }
        (g, e) => r.error(
            "VARIANT_MISMATCH",
            format!(
                "group `{}` cannot carry an endomorphism of kind `{}`",
                g.kind(),
                e.kind()
            ),
            "the endomorphism payload must match the group class",
        ),
    }
    r.ok = r.error_count() == 0;
    r
}

fn check_dim(r: &mut ValidationReport, name: &str, found: usize, expected: usize) -> bool {
    if found != expected {
        r.error(
            "DIMENSION_MISMATCH",
            format!("{name} is {found}×{found}, expected {expected}×{expected}"),
            "payload sizes follow the group dimensions",
        );
        return false;
    }
    true
}

fn check_lattice(r: &mut ValidationReport, name: &str, t: &IntegerMatrix, p: usize) {
    if !check_dim(r, name, t.dim(), p) {
        return;
    }
    match t.determinant() {
        Err(e) => r.error(e.code(), format!("{name}: {e}"), REF_PROPER),
        Ok(0) => r.error(
            "SINGULAR_LATTICE_MAP",
            format!("{name} has determinant 0, so the torus map is not surjective"),
            REF_PROPER,
        ),
        Ok(d) if d.abs() > 1 => r.push(
            Severity::Warning,
            "FINITE_COVERING",
            format!(
                "{name}: {}-fold covering; kernel finite, map proper",
                d.abs()
            ),
            REF_PROPER,
        ),
        Ok(_) => {}
    }
}

fn check_abelian(r: &mut ValidationReport, dims: AbelianDims, a: &AbelianEndo, prefix: &str) {
    check_lattice(r, &format!("{prefix}lattice_map"), &a.lattice_map, dims.p);
    if check_dim(
        r,
        &format!("{prefix}vector_map"),
        a.vector_map.dim(),
        dims.q,
    ) && !a.vector_map.is_invertible()
    {
        r.error(
            "NOT_SURJECTIVE",
            format!("{prefix}vector_map is singular; the vector part must be a linear isomorphism"),
            REF_BLOCK_FORM,
        );
    }
    if a.coupling.is_empty() {
        return;
    }
    let shape_ok = a.coupling.len() == dims.p
        && a.coupling
            .iter()
            .all(|row| row.len() == dims.q && row.iter().all(|x| x.is_finite()));
    if !shape_ok {
        r.error(
            "DIMENSION_MISMATCH",
            format!(
                "{prefix}coupling must be a finite {}×{} block",
                dims.p, dims.q
            ),
            REF_BLOCK_FORM,
        );
    } else if a.coupling.iter().flatten().any(|&x| x != 0.0) {
        r.push(
            Severity::Info,
            "COUPLING_IGNORED",
            format!("{prefix}coupling does not affect entropy"),
            REF_BLOCK_FORM,
        );
    }
}

fn check_semisimple(
    r: &mut ValidationReport,
    n: usize,
    s: &SemisimpleEndo,
    prefix: &str,
    tol: &Tolerances,
) {
    if n == 0 {
        r.error(
            "INVALID_DESCRIPTOR",
            "semi-simple matrix_size must be at least 1".into(),
            REF_CONJUGATION,
        );
    }
    if s.power == 0 {
        r.error(
            "INVALID_ARGUMENT",
            format!("{prefix}power must be a positive integer"),
            REF_CONJUGATION,
        );
    }
    if !check_dim(r, &format!("{prefix}g"), s.g.dim(), n) {
        return;
    }
    if !s.g.is_invertible() {
        r.error(
            "SINGULAR_MATRIX",
            format!("{prefix}g is singular; conjugation needs an invertible element"),
            REF_CONJUGATION,
        );
        return;
    }
    let det = s.g.determinant();
    if (det.abs() - 1.0).abs() > 1e-9_f64.max(tol.relative) {
        r.error(
            "NOT_UNIMODULAR",
            format!("{prefix}g has |det| = {det}, expected 1"),
            REF_CONJUGATION,
        );
    }
}

/// Lattice map of `φ` restricted to the toral component `T(G)`.
pub fn toral_component(group: &GroupDescriptor, endo: &EndoDescriptor) -> Result<IntegerMatrix> {
    match (group, endo) {
        (g, EndoDescriptor::Abelian(a)) if g.abelian_dims().is_some() => Ok(a.lattice_map.clone()),
        (GroupDescriptor::Nilpotent { .. }, EndoDescriptor::Nilpotent { toral_map, .. })
        | (GroupDescriptor::Compact { .. }, EndoDescriptor::Compact { toral_map }) => {
            Ok(toral_map.clone())
        }
        (GroupDescriptor::SemisimpleLinear { .. }, EndoDescriptor::SemisimpleLinear(_)) => {
            Ok(IntegerMatrix::empty())
        }
        (GroupDescriptor::Reductive { .. }, EndoDescriptor::Reductive { center_endo, .. }) => {
            Ok(center_endo.lattice_map.clone())
        }
        (GroupDescriptor::GeneralConjecture { .. }, EndoDescriptor::GeneralConjecture { .. }) => {
            Err(Error::UnsupportedVariant(
                "general_conjecture has no single toral component".into(),
            ))
        }
        (g, e) => Err(Error::VariantMismatch {
            group: g.kind().into(),
            endo: e.kind().into(),
        }),
    }
}
