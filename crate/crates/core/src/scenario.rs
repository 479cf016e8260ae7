//! Scenario files and the built-in presets.
//!
//! A scenario is one flat JSON object. Headings are in degrees, everything
//! else in SI-ish units (seconds, rad/s):
//!
//! ```json
//! {
//!   "theta0_deg": [0, 120],
//!   "gains": [3, -1],
//!   "r0": [[-1, -2], [5, -2]],
//!   "omega0": 0.0,
//!   "law": "balance",
//!   "dt": 0.001,
//!   "t_max": 200
//! }
//! ```
//!
//! Only `theta0_deg` and `gains` are required. Missing positions default to
//! `(2(k−1), 0)`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::control::{ControlLaw, LawKind};
use crate::model::{GainVector, Point, SwarmState};
use crate::sim::{IntegratorSettings, Method, Scenario};
use crate::{Error, Result};

fn default_dt() -> f64 {
    IntegratorSettings::default().dt
}
fn default_t_max() -> f64 {
    IntegratorSettings::default().t_max
}
fn default_tol() -> f64 {
    IntegratorSettings::default().balance_tol
}
fn default_stride() -> u64 {
    IntegratorSettings::default().record_stride
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Optional; checked against the list lengths when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub theta0_deg: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<Vec<[f64; 2]>>,
    pub gains: Vec<f64>,
    #[serde(default)]
    pub omega0: f64,
    #[serde(default)]
    pub law: LawKind,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default)]
    pub method: Method,
    #[serde(default = "default_tol")]
    pub balance_tol: f64,
    #[serde(default = "default_stride")]
    pub record_stride: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_name: Option<String>,
}

/// Names accepted by [`ScenarioConfig::preset`].
pub const PRESETS: &[&str] = &[
    "example1", "example2", "example2a", "example2b", "example3", "example3a", "example3b",
    "example4", "splay10", "fig5",
];

// Initial headings for the ten-agent splay preset, in degrees.
const SPLAY10_DEG: [f64; 10] = [5.0, 23.0, 61.0, 88.0, 140.0, 152.0, 199.0, 260.0, 301.0, 333.0];

impl ScenarioConfig {
    pub fn new(theta0_deg: Vec<f64>, gains: Vec<f64>) -> Self {
        let d = IntegratorSettings::default();
        ScenarioConfig {
            n: None,
            theta0_deg,
            r0: None,
            gains,
            omega0: 0.0,
            law: LawKind::Balance,
            dt: d.dt,
            t_max: d.t_max,
            method: d.method,
            balance_tol: d.balance_tol,
            record_stride: d.record_stride,
            seed_name: None,
        }
    }

    /// One of the pinned fixtures in [`PRESETS`].
    pub fn preset(name: &str) -> Result<Self> {
        let pair_r0 = Some(vec![[-1.0, -2.0], [5.0, -2.0]]);
        let mut cfg = match name {
            "example1" => ScenarioConfig::new(
                vec![-90.0, -60.0, -30.0, 0.0, 30.0, 60.0, 90.0],
                vec![2.0, 1.0, 0.0, 0.0, 0.0, 1.0, 2.0],
            ),
            "example2" | "example2a" => ScenarioConfig::new(vec![0.0, 30.0, 60.0], vec![2.0, 3.0, 6.0]),
            "example2b" => ScenarioConfig::new(vec![0.0, 30.0, 60.0], vec![6.0, 3.0, 1.0]),
            "example3" | "example3a" => ScenarioConfig {
                r0: pair_r0,
                ..ScenarioConfig::new(vec![0.0, 120.0], vec![3.0, -1.0])
            },
            "example3b" => ScenarioConfig {
                r0: pair_r0,
                ..ScenarioConfig::new(vec![0.0, 120.0], vec![-3.0, 5.0])
            },
            "example4" => ScenarioConfig {
                r0: pair_r0,
                ..ScenarioConfig::new(vec![0.0, 120.0], vec![1.0, 1.0])
            },
            "splay10" => ScenarioConfig {
                law: LawKind::Splay,
                ..ScenarioConfig::new(SPLAY10_DEG.to_vec(), (1..=10).map(f64::from).collect())
            },
            "fig5" => ScenarioConfig::new(vec![0.0, 30.0, 60.0], vec![-0.5, 4.0, 7.0]),
            other => return Err(Error::UnknownPreset(other.to_string())),
        };
        cfg.n = Some(cfg.theta0_deg.len());
        cfg.seed_name = Some(name.to_string());
        Ok(cfg)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn len(&self) -> usize {
        self.theta0_deg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta0_deg.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.theta0_deg.len();
        if n < 2 {
            return Err(Error::TooFewAgents { min: 2, got: n });
        }
        if let Some(declared) = self.n {
            if declared != n {
                return Err(Error::DimensionMismatch {
                    what: "theta0_deg",
                    expected: declared,
                    got: n,
                });
            }
        }
        if self.gains.len() != n {
            return Err(Error::DimensionMismatch {
                what: "gains",
                expected: n,
                got: self.gains.len(),
            });
        }
        if let Some(r0) = &self.r0 {
            if r0.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "r0",
                    expected: n,
                    got: r0.len(),
                });
            }
            if r0.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("r0"));
            }
        }
        if self.theta0_deg.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("theta0_deg"));
        }
        if self.gains.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("gains"));
        }
        if !self.omega0.is_finite() {
            return Err(Error::NonFinite("omega0"));
        }
        self.integrator().validate()
    }

    /// Initial headings in radians.
    pub fn theta0(&self) -> Vec<f64> {
        self.theta0_deg.iter().map(|d| d.to_radians()).collect()
    }

    pub fn positions(&self) -> Vec<Point> {
        match &self.r0 {
            Some(r0) => r0.iter().map(|&[x, y]| Point::new(x, y)).collect(),
            None => (0..self.len()).map(|k| Point::new(2.0 * k as f64, 0.0)).collect(),
        }
    }

    pub fn integrator(&self) -> IntegratorSettings {
        IntegratorSettings {
            dt: self.dt,
            t_max: self.t_max,
            method: self.method,
            balance_tol: self.balance_tol,
            record_stride: self.record_stride,
        }
    }

    pub fn gain_vector(&self) -> Result<GainVector> {
        GainVector::new(self.gains.clone())
    }

    pub fn law(&self) -> Result<ControlLaw> {
        Ok(ControlLaw {
            kind: self.law,
            omega0: self.omega0,
            gains: self.gain_vector()?,
        })
    }

    pub fn to_scenario(&self) -> Result<Scenario> {
        self.validate()?;
        let initial = SwarmState::new(0.0, self.positions(), self.theta0())?;
        Scenario::new(initial, self.law()?, self.integrator())
    }
}
