//! JSON experiment configuration.

use std::fs;
use std::path::{Path, PathBuf};

use layered_hill::{
    geometric_constants, Constraint64, ConstraintKind, GeometricConstants64, RadialFamily,
    RadialModel64, DEFAULT_REGIME_TOL,
};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    /// "power_law", "stable" or "frechet".
    pub family: String,
    pub alpha: f64,
    pub d: usize,
    #[serde(default)]
    pub poissonize: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSpec {
    /// "always_one", "pair_distance", "diameter" or "connectivity".
    pub kind: String,
    #[serde(default)]
    pub arity: Option<usize>,
    #[serde(default)]
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSpec {
    /// Defaults to `L{k}`.
    #[serde(default)]
    pub name: Option<String>,
    pub k: usize,
    pub constraint: ConstraintSpec,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default)]
    pub report: Option<PathBuf>,
    #[serde(default)]
    pub coverage: Option<PathBuf>,
    #[serde(default)]
    pub samples: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub n: usize,
    /// `m = round(n^beta)`; exactly one of `beta` and `m` is set.
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub m: Option<usize>,
    pub estimators: Vec<EstimatorSpec>,
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    pub master_seed: u64,
    /// Weights of the first two estimators in the Mix row.
    #[serde(default)]
    pub mix_weights: Option<[f64; 2]>,
    /// Defaults to the density tail exponent of the model.
    #[serde(default)]
    pub true_alpha: Option<f64>,
    #[serde(default = "default_regime_tol")]
    pub regime_tol: f64,
    #[serde(default)]
    pub xi: Option<f64>,
    /// Monte Carlo sample count for constants without a closed form.
    #[serde(default)]
    pub mc_samples: Option<usize>,
    #[serde(default)]
    pub outputs: Outputs,
}

fn default_deltas() -> Vec<f64> {
    vec![0.0]
}

fn default_replications() -> usize {
    500
}

fn default_gamma() -> f64 {
    0.95
}

fn default_regime_tol() -> f64 {
    DEFAULT_REGIME_TOL
}

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(HarnessError::Config(msg.into()))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.radial_model()?;
        if self.n == 0 {
            return invalid("n must be positive");
        }
        match (self.beta, self.m) {
            (Some(b), None) if b > 0.0 && b < 1.0 => {}
            (Some(b), None) => return invalid(format!("beta must lie in (0, 1), got {b}")),
            (None, Some(m)) if m >= 1 => {}
            (None, Some(_)) => return invalid("m must be positive"),
            _ => return invalid("set exactly one of beta and m"),
        }
        if self.estimators.is_empty() {
            return invalid("at least one estimator is required");
        }
        for (i, e) in self.estimators.iter().enumerate() {
            self.constraint(i)?;
            if e.k == 0 {
                return invalid("k must be positive");
            }
        }
        let mut names: Vec<String> = (0..self.estimators.len()).map(|i| self.estimator_name(i)).collect();
        names.sort();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return invalid("estimator names must be distinct");
        }
        if names.iter().any(|n| n == MIX_NAME) && self.mix_weights.is_some() {
            return invalid(format!("\"{MIX_NAME}\" is reserved for the mixture row"));
        }
        if self.deltas.is_empty() {
            return invalid("at least one delta is required");
        }
        if let Some(bad) = self.deltas.iter().find(|&&d| !(d >= 0.0) || !d.is_finite()) {
            return invalid(format!("missing rates must be finite and >= 0, got {bad}"));
        }
        if self.replications == 0 {
            return invalid("replications must be at least 1");
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return invalid(format!("gamma must lie in (0, 1), got {}", self.gamma));
        }
        if let Some([w1, w2]) = self.mix_weights {
            if self.estimators.len() < 2 {
                return invalid("mix_weights needs two estimators");
            }
            if !((w1 + w2 - 1.0).abs() <= 1e-9) || w1 < 0.0 || w2 < 0.0 {
                return invalid(format!("mix weights must be non-negative and sum to 1, got ({w1}, {w2})"));
            }
        }
        if let Some(a) = self.true_alpha {
            if !a.is_finite() {
                return invalid("true_alpha must be finite");
            }
        }
        if !(self.regime_tol >= 0.0) {
            return invalid("regime_tol must be >= 0");
        }
        if let Some(xi) = self.xi {
            if !(xi > 0.0) || !xi.is_finite() {
                return invalid("xi must be positive");
            }
        }
        let m = self.m();
        let max_remove = self.deltas.iter().map(|&d| (d * m as f64 + 0.5).floor()).fold(0.0, f64::max);
        if max_remove >= self.n as f64 {
            return invalid("the largest missing rate removes the whole cloud");
        }
        Ok(())
    }

    pub fn radial_model(&self) -> Result<RadialModel64> {
        let family = RadialFamily::parse(&self.model.family)
            .ok_or_else(|| HarnessError::Config(format!("unknown model family {:?}", self.model.family)))?;
        RadialModel64::new(family, self.model.alpha, self.model.d).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn m(&self) -> usize {
        match (self.m, self.beta) {
            (Some(m), _) => m,
            (None, Some(b)) => ((self.n as f64).powf(b).round() as usize).max(1),
            (None, None) => 1,
        }
    }

    /// `beta` as configured, or `log m / log n`.
    pub fn effective_beta(&self) -> f64 {
        match self.beta {
            Some(b) => b,
            None if self.n > 1 => (self.m() as f64).ln() / (self.n as f64).ln(),
            None => 0.0,
        }
    }

    pub fn true_alpha(&self) -> Result<f64> {
        match self.true_alpha {
            Some(a) => Ok(a),
            None => Ok(self.radial_model()?.density_tail_exponent()),
        }
    }

    pub fn estimator_name(&self, i: usize) -> String {
        let e = &self.estimators[i];
        e.name.clone().unwrap_or_else(|| format!("L{}", e.k))
    }

    pub fn constraint(&self, i: usize) -> Result<Constraint64> {
        let e = &self.estimators[i];
        let kind = ConstraintKind::parse(&e.constraint.kind)
            .ok_or_else(|| HarnessError::Config(format!("unknown constraint kind {:?}", e.constraint.kind)))?;
        let arity = e.constraint.arity.unwrap_or(e.k);
        if arity != e.k {
            return invalid(format!("constraint arity {arity} does not match k = {}", e.k));
        }
        Constraint64::new(kind, arity, e.constraint.radius).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn constants(&self, i: usize) -> Result<GeometricConstants64> {
        let c = self.constraint(i)?;
        let mc = if self.estimators[i].k > 2 { self.mc_samples } else { None };
        geometric_constants(&c, self.model.d, mc).map_err(|e| HarnessError::Config(e.to_string()))
    }
}

/// Name of the weighted-average row.
pub const MIX_NAME: &str = "Mix";

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const BASE: &str = r#"{
        "model": {"family": "power_law", "alpha": 2.5, "d": 2},
        "n": 10000,
        "beta": 0.5,
        "estimators": [
            {"k": 1, "constraint": {"kind": "always_one"}},
            {"k": 2, "constraint": {"kind": "pair_distance", "radius": 1.0}}
        ],
        "deltas": [0.0, 0.5, 1.0],
        "master_seed": 7,
        "mix_weights": [0.5, 0.5]
    }"#;

    fn with(patch: &str) -> Result<ExperimentConfig> {
        let mut v: serde_json::Value = serde_json::from_str(BASE).unwrap();
        let p: serde_json::Value = serde_json::from_str(patch).unwrap();
        for (k, x) in p.as_object().unwrap() {
            v[k] = x.clone();
        }
        ExperimentConfig::from_json(&v.to_string())
    }

    #[test]
    fn defaults() {
        let c = ExperimentConfig::from_json(BASE).unwrap();
        assert_eq!(c.replications, 500);
        assert_eq!(c.gamma, 0.95);
        assert_eq!(c.m(), 100);
        assert_eq!(c.true_alpha().unwrap(), 2.5);
        assert_eq!(c.estimator_name(1), "L2");
        assert_eq!(c.regime_tol, 0.02);
    }

    #[test]
    fn m_rounds() {
        assert_eq!(with(r#"{"beta": 0.3}"#).unwrap().m(), 16);
        assert_eq!(with(r#"{"beta": 0.1}"#).unwrap().m(), 3);
        let c = with(r#"{"beta": null, "m": 40}"#).unwrap();
        assert_eq!(c.m(), 40);
        assert!((c.effective_beta() - 40f64.ln() / 10000f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn stable_truth_is_density_exponent() {
        let c = with(r#"{"model": {"family": "stable", "alpha": 0.5, "d": 2}}"#).unwrap();
        assert_eq!(c.true_alpha().unwrap(), 2.5);
        let c = with(r#"{"model": {"family": "stable", "alpha": 0.5, "d": 2}, "true_alpha": 0.5}"#).unwrap();
        assert_eq!(c.true_alpha().unwrap(), 0.5);
    }

    #[test]
    fn rejects_bad_configs() {
        for patch in [
            r#"{"replications": 0}"#,
            r#"{"deltas": [-0.5]}"#,
            r#"{"deltas": []}"#,
            r#"{"mix_weights": [0.7, 0.7]}"#,
            r#"{"beta": 1.5}"#,
            r#"{"m": 10}"#,
            r#"{"beta": null}"#,
            r#"{"gamma": 1.0}"#,
            r#"{"model": {"family": "cauchy", "alpha": 2.5, "d": 2}}"#,
            r#"{"model": {"family": "power_law", "alpha": 1.5, "d": 2}}"#,
            r#"{"estimators": []}"#,
            r#"{"estimators": [{"k": 2, "constraint": {"kind": "always_one"}}]}"#,
            r#"{"estimators": [{"k": 2, "constraint": {"kind": "diameter", "arity": 3, "radius": 1}}]}"#,
            r#"{"estimators": [{"k": 1, "constraint": {"kind": "always_one"}}, {"k": 1, "constraint": {"kind": "always_one"}}]}"#,
            r#"{"n": 50, "beta": null, "m": 100}"#,
            r#"{"unknown_field": 1}"#,
        ] {
            let err = with(patch).unwrap_err();
            assert!(err.is_config(), "{patch}: {err}");
        }
    }

    #[test]
    fn malformed_json_is_a_config_error() {
        assert!(ExperimentConfig::from_json("{").unwrap_err().is_config());
    }
}
