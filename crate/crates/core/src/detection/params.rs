use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pointcloud::Aabb;

/// How `epsilon` is interpreted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonMode {
    /// `epsilon` is a distance in meters.
    Absolute,
    /// `epsilon` is a fraction of the cloud's bounding-box width.
    BboxRatio,
}

/// Parameters of the randomized shape-detection stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectionParams {
    /// Minimum support: smallest accepted fragment, in points.
    pub min_support: usize,
    /// Maximum point-to-plane distance for an inlier.
    pub epsilon: f64,
    pub epsilon_mode: EpsilonMode,
    /// Sampling resolution: nominal spacing of neighbouring points, meters.
    pub sampling_resolution: f64,
    /// Maximum angle between a point normal and the plane normal, degrees.
    pub max_normal_deviation_deg: f64,
    /// Tolerated probability of overlooking the best candidate in a round.
    pub overlook_probability: f64,
    pub seed: u64,
    /// Hard cap on extraction rounds.
    pub max_rounds: usize,
    /// Hard cap on candidates drawn per round.
    pub max_candidates: usize,
    /// Neighbour radius for component extraction, as a multiple of
    /// `sampling_resolution`.
    pub connectivity: f64,
}

impl Default for DetectionParams {
    fn default() -> Self {
        DetectionParams::hillside()
    }
}

impl DetectionParams {
    /// Parameters used for the steep residential scan.
    pub fn hillside() -> DetectionParams {
        DetectionParams {
            min_support: 750,
            epsilon: 0.15,
            epsilon_mode: EpsilonMode::Absolute,
            sampling_resolution: 0.05,
            max_normal_deviation_deg: 12.5,
            overlook_probability: 0.1,
            seed: 0,
            max_rounds: 10_000,
            max_candidates: 100_000,
            connectivity: 3.0,
        }
    }

    /// Parameters used for the open plaza scan.
    pub fn courtyard() -> DetectionParams {
        DetectionParams {
            epsilon: 0.3,
            max_normal_deviation_deg: 25.0,
            ..DetectionParams::hillside()
        }
    }

    pub fn preset(name: &str) -> Result<DetectionParams> {
        match name {
            "hillside" => Ok(DetectionParams::hillside()),
            "courtyard" => Ok(DetectionParams::courtyard()),
            other => Err(Error::InvalidConfig(vec![format!(
                "unknown preset '{other}' (expected 'hillside' or 'courtyard')"
            )])),
        }
    }

    /// Lists every violated constraint.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.min_support < 3 {
            errs.push(format!("tau must be >= 3, got {}", self.min_support));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            errs.push(format!("epsilon must be > 0, got {}", self.epsilon));
        }
        if !(self.sampling_resolution > 0.0 && self.sampling_resolution.is_finite()) {
            errs.push(format!("r must be > 0, got {}", self.sampling_resolution));
        }
        if !(self.max_normal_deviation_deg > 0.0 && self.max_normal_deviation_deg < 90.0) {
            errs.push(format!("alpha must be in (0, 90) degrees, got {}", self.max_normal_deviation_deg));
        }
        if !(self.overlook_probability > 0.0 && self.overlook_probability < 1.0) {
            errs.push(format!("p_t must be in (0, 1), got {}", self.overlook_probability));
        }
        if self.max_rounds == 0 {
            errs.push("max_rounds must be >= 1".to_string());
        }
        if self.max_candidates == 0 {
            errs.push("max_candidates must be >= 1".to_string());
        }
        if !(self.connectivity > 0.0 && self.connectivity.is_finite()) {
            errs.push(format!("connectivity must be > 0, got {}", self.connectivity));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(errs))
        }
    }

    /// Inlier distance in meters for a cloud with bounding box `bbox`.
    pub fn effective_epsilon(&self, bbox: Option<&Aabb>) -> f64 {
        match self.epsilon_mode {
            EpsilonMode::Absolute => self.epsilon,
            EpsilonMode::BboxRatio => self.epsilon * bbox.map(Aabb::width).unwrap_or(0.0),
        }
    }

    pub fn component_radius(&self) -> f64 {
        self.connectivity * self.sampling_resolution
    }

    /// Sets one key from the key-value configuration vocabulary.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.trim()
                .parse()
                .map_err(|_| Error::InvalidConfig(vec![format!("{key}: cannot parse '{v}'")]))
        }
        match key {
            "tau" => self.min_support = num(key, value)?,
            "epsilon_m" => {
                self.epsilon = num(key, value)?;
                self.epsilon_mode = EpsilonMode::Absolute;
            }
            "epsilon_ratio" => {
                self.epsilon = num(key, value)?;
                self.epsilon_mode = EpsilonMode::BboxRatio;
            }
            "r_m" => self.sampling_resolution = num(key, value)?,
            "alpha_deg" => self.max_normal_deviation_deg = num(key, value)?,
            "p_t" => self.overlook_probability = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "max_rounds" => self.max_rounds = num(key, value)?,
            "max_candidates" => self.max_candidates = num(key, value)?,
            "connectivity" => self.connectivity = num(key, value)?,
            other => return Err(Error::InvalidConfig(vec![format!("unknown key '{other}'")])),
        }
        Ok(())
    }

    pub const KEYS: &'static [&'static str] = &[
        "tau",
        "epsilon_m",
        "epsilon_ratio",
        "r_m",
        "alpha_deg",
        "p_t",
        "seed",
        "max_rounds",
        "max_candidates",
        "connectivity",
    ];
}

/// Candidates needed so that a shape with `support` of the `remaining`
/// points is drawn at least once with probability `1 - overlook`, counting
/// a draw as three independent hits on the shape.
pub fn candidate_budget(support: usize, remaining: usize, overlook: f64) -> usize {
    if remaining == 0 || support >= remaining {
        return 1;
    }
    let q = (support as f64 / remaining as f64).powi(3);
    let t = overlook.ln() / (-q).ln_1p();
    if !t.is_finite() || t >= usize::MAX as f64 {
        usize::MAX
    } else {
        (t.ceil() as usize).max(1)
    }
}
