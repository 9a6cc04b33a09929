//! JSON experiment configuration shared by every CLI subcommand.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::averaging::{NuKind, QuadratureConfig};
use crate::continuity::TrendConfig;
use crate::error::{argument, Error, Result};
use crate::ladder::Ladder;
use crate::operator::{CyclicVector, GeneratorKind, GeneratorSpec, RankOneFamily, SelfAdjointOperator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperatorSpec {
    Explicit(ExplicitOperator),
    Generated(GeneratorSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitOperator {
    pub n: usize,
    /// Row-major entries.
    pub entries: Vec<f64>,
    /// Normalized on load.
    pub phi: Vec<f64>,
}

impl OperatorSpec {
    pub fn build(&self) -> Result<RankOneFamily> {
        let (op, phi) = match self {
            OperatorSpec::Explicit(e) => (
                SelfAdjointOperator::new(e.n, e.entries.clone())?,
                CyclicVector::normalized(e.phi.clone())?,
            ),
            OperatorSpec::Generated(g) => g.build()?,
        };
        RankOneFamily::new(op, phi)
    }
}

/// `x` positions and `ε` scales of a grid of points `x + iε`. Missing `xs`
/// means `x_count` evenly spaced points across the spectrum of `A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub xs: Option<Vec<f64>>,
    #[serde(default = "default_count")]
    pub x_count: usize,
    #[serde(default = "default_eps_min")]
    pub eps_min: f64,
    #[serde(default = "default_eps_max")]
    pub eps_max: f64,
    #[serde(default = "default_count")]
    pub eps_count: usize,
}

fn default_count() -> usize {
    10
}

fn default_eps_min() -> f64 {
    1e-3
}

fn default_eps_max() -> f64 {
    1.0
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            xs: None,
            x_count: default_count(),
            eps_min: default_eps_min(),
            eps_max: default_eps_max(),
            eps_count: default_count(),
        }
    }
}

impl GridSpec {
    pub fn xs(&self, hull: (f64, f64)) -> Vec<f64> {
        if let Some(xs) = &self.xs {
            return xs.clone();
        }
        linspace(hull.0, hull.1, self.x_count)
    }

    /// Geometric scales from `eps_min` to `eps_max`.
    pub fn epsilons(&self) -> Vec<f64> {
        if self.eps_count == 1 {
            return vec![self.eps_max];
        }
        let (lo, hi) = (self.eps_min.ln(), self.eps_max.ln());
        (0..self.eps_count)
            .map(|k| (lo + (hi - lo) * k as f64 / (self.eps_count - 1) as f64).exp())
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps_min > 0.0 && self.eps_min <= self.eps_max && self.eps_max.is_finite()) {
            return argument("grid needs 0 < eps_min ≤ eps_max");
        }
        if self.eps_count == 0 || (self.xs.is_none() && self.x_count == 0) {
            return argument("grid needs at least one x and one ε");
        }
        Ok(())
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (a + b)],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Seed for randomized sampling; `--seed` overrides it together with
    /// the operator seed.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_operator")]
    pub operator: OperatorSpec,
    #[serde(default = "default_nu")]
    pub nu: NuKind,
    /// Measure examined by `transform`, `bound` and `continuity`; the
    /// spectral measure `μ` when absent.
    #[serde(default)]
    pub measure: Option<NuKind>,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default = "default_ladder")]
    pub ladder: Ladder,
    #[serde(default)]
    pub trend: TrendConfig,
    #[serde(default = "default_intervals")]
    pub intervals: Vec<(f64, f64)>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    /// Reference exponent; defaults to the dimension of `ν`.
    #[serde(default)]
    pub alpha: Option<f64>,
    /// UαH constant of `ν`; certified by an interval scan when absent.
    #[serde(default)]
    pub k: Option<f64>,
    #[serde(default = "default_deltas")]
    pub delta_targets: Vec<f64>,
    /// Evaluation points for `continuity` and `report`.
    #[serde(default)]
    pub points: Option<Vec<f64>>,
    /// Randomized samples per inequality suite.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Pass tolerance; each subcommand has its own default.
    #[serde(default)]
    pub tolerance: Option<f64>,
}

fn default_operator() -> OperatorSpec {
    OperatorSpec::Generated(GeneratorSpec {
        kind: GeneratorKind::DenseGaussian,
        n: 8,
        seed: 1,
        diagonal_distribution: Default::default(),
    })
}

fn default_nu() -> NuKind {
    NuKind::Lebesgue
}

fn default_ladder() -> Ladder {
    Ladder::new(1.0, 0.5, 30)
}

fn default_intervals() -> Vec<(f64, f64)> {
    vec![(-0.5, 0.7)]
}

fn default_lambdas() -> Vec<f64> {
    (0..25).map(|k| -4.9 + 0.4 * k as f64).collect()
}

fn default_deltas() -> Vec<f64> {
    vec![0.4]
}

fn default_samples() -> usize {
    100
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| {
            Error::Argument(format!("{origin}:{}:{}: {e}", e.line(), e.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Argument(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    /// Replace the sampling seed and the operator seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        if let OperatorSpec::Generated(g) = &mut self.operator {
            g.seed = seed;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.quadrature.validate()?;
        self.ladder.validate()?;
        self.grid.validate()?;
        if !(self.trend.factor > 1.0) {
            return argument("trend factor must exceed 1");
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0 && t.is_finite()) {
                return argument(format!("tolerance must be positive, got {t}"));
            }
        }
        if let Some(a) = self.alpha {
            if !(0.0..=1.0).contains(&a) {
                return argument(format!("alpha must lie in [0, 1], got {a}"));
            }
        }
        if let Some(k) = self.k {
            if !(k > 0.0 && k.is_finite()) {
                return argument(format!("k must be positive, got {k}"));
            }
        }
        for &(a, b) in &self.intervals {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return argument(format!("interval ({a}, {b}) must be bounded with a < b"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::default();
        let back = ExperimentConfig::from_json(&cfg.to_json().unwrap(), "test").unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn explicit_operator_parses() {
        let cfg = ExperimentConfig::from_json(
            r#"{"operator": {"n": 2, "entries": [0, 1, 1, 0], "phi": [1, 1]},
                "nu": {"kind": "uniform", "a": 0, "b": 1}}"#,
            "inline",
        )
        .unwrap();
        let fam = cfg.operator.build().unwrap();
        assert_eq!(fam.operator().dim(), 2);
        assert_eq!(cfg.nu, NuKind::Uniform { a: 0.0, b: 1.0 });
    }

    #[test]
    fn unknown_field_reports_position() {
        let err = ExperimentConfig::from_json("{\n  \"sead\": 3\n}", "cfg.json").unwrap_err();
        assert!(err.to_string().contains("cfg.json:2:"), "{err}");
    }

    #[test]
    fn seed_override_reaches_generator() {
        let cfg = ExperimentConfig::default().with_seed(99);
        match cfg.operator {
            OperatorSpec::Generated(g) => assert_eq!(g.seed, 99),
            _ => panic!("default operator is generated"),
        }
    }
}
