use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::synth::Domain;

/// Parameters of one mechanism run or benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismConfig {
    pub domain: Domain,
    /// Metric privacy level. Exactly one of `alpha` and `epsilon` is set.
    pub alpha: Option<f64>,
    /// Differential privacy level; the mechanism then runs at `epsilon * n`.
    pub epsilon: Option<f64>,
    /// Net resolution; chosen from the privacy level when absent.
    pub delta: Option<f64>,
    pub seed: u64,
    pub trials: usize,
}

impl Default for MechanismConfig {
    fn default() -> Self {
        MechanismConfig {
            domain: Domain::Interval,
            alpha: None,
            epsilon: Some(1.0),
            delta: None,
            seed: 0,
            trials: 1,
        }
    }
}

fn positive(name: &str, value: Option<f64>) -> Result<()> {
    match value {
        Some(v) if !(v > 0.0) || !v.is_finite() => Err(Error::arg(format!("{name} must be positive, got {v}"))),
        _ => Ok(()),
    }
}

impl MechanismConfig {
    pub fn validate(&self) -> Result<()> {
        match (self.alpha, self.epsilon) {
            (Some(_), Some(_)) => return Err(Error::arg("set either alpha or epsilon, not both")),
            (None, None) => return Err(Error::arg("one of alpha or epsilon is required")),
            _ => {}
        }
        positive("alpha", self.alpha)?;
        positive("epsilon", self.epsilon)?;
        positive("delta", self.delta)?;
        if self.trials == 0 {
            return Err(Error::arg("trials must be at least 1"));
        }
        if let Domain::Cube { dim: 0 } = self.domain {
            return Err(Error::arg("cube dimension must be at least 1"));
        }
        Ok(())
    }

    /// The metric privacy level for a dataset of `n` points.
    pub fn privacy_level(&self, n: usize) -> Result<f64> {
        self.validate()?;
        Ok(match (self.alpha, self.epsilon) {
            (Some(a), _) => a,
            (_, Some(e)) => e * n as f64,
            _ => unreachable!("validated above"),
        })
    }
}
