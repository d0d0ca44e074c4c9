use serde::{Deserialize, Serialize};

/// Numeric slack used throughout the crate.
///
/// Every tolerance lives here so that callers can see (and tune) exactly how
/// far the floating-point answers are allowed to drift from the exact
/// statements they implement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative rank cutoff for null spaces and subspace intersections.
    pub relative: f64,
    /// Eigenvalues closer than `cluster * (1 + |λ|)` are one eigenvalue;
    /// within `cluster * (1 + ‖m‖)` they share a generalized eigenspace when
    /// their eigenvectors are numerically parallel.
    pub cluster: f64,
    /// Half-width of the band around the unit circle treated as modulus 1.
    pub unit_band: f64,
    /// Iteration cap for the QR and SVD sweeps.
    pub max_iterations: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            relative: 1e-9,
            cluster: 1e-7,
            unit_band: 1e-9,
            max_iterations: 10_000,
        }
    }
}

impl Tolerances {
    /// True when `modulus` lies inside the unit band.
    pub fn on_unit_circle(&self, modulus: f64) -> bool {
        (modulus - 1.0).abs() <= self.unit_band
    }

    /// True when `modulus` strictly exceeds the unit band, i.e. the eigenvalue
    /// contributes to entropy.
    pub fn is_expanding(&self, modulus: f64) -> bool {
        modulus > 1.0 + self.unit_band
    }
}

/// Logarithm base for entropy values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LogBase {
    #[default]
    #[serde(rename = "e")]
    Natural,
    #[serde(rename = "2")]
    Two,
}

impl LogBase {
    /// Converts a natural-log quantity into this base.
    pub fn convert(self, nats: f64) -> f64 {
        match self {
            LogBase::Natural => nats,
            LogBase::Two => nats / std::f64::consts::LN_2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LogBase::Natural => "e",
            LogBase::Two => "2",
        }
    }
}

impl std::str::FromStr for LogBase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "e" => Ok(LogBase::Natural),
            "2" => Ok(LogBase::Two),
            other => Err(format!("log base must be `e` or `2`, got `{other}`")),
        }
    }
}

/// Per-run options carried by a descriptor file.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    pub tolerances: Tolerances,
    pub log_base: LogBase,
    /// Decide zero entropy of small lattice maps exactly from the
    /// characteristic polynomial.
    pub exact_cyclotomic: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_base_parses_and_converts() {
        assert_eq!("2".parse::<LogBase>().unwrap(), LogBase::Two);
        assert!("10".parse::<LogBase>().is_err());
        assert!((LogBase::Two.convert(2f64.ln()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn options_default_when_fields_missing() {
        let o: Options = serde_json::from_str(r#"{"log_base": "2"}"#).unwrap();
        assert_eq!(o.log_base, LogBase::Two);
        assert_eq!(o.tolerances, Tolerances::default());
        assert!(serde_json::from_str::<Options>(r#"{"bogus": 1}"#).is_err());
    }
}
