//! Flat key-value run configuration.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use affine_estimation::distribution::Window;
use affine_estimation::povm::SeedKind;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Which input state to prepare.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Vacuum,
    Coherent,
    DisplacedSqueezed,
    SampledFile,
}

impl FromStr for StateKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "vacuum" => Ok(Self::Vacuum),
            "coherent" => Ok(Self::Coherent),
            "displaced-squeezed" => Ok(Self::DisplacedSqueezed),
            "sampled-file" => Ok(Self::SampledFile),
            other => Err(format!(
                "unknown state '{other}' (expected vacuum, coherent, displaced-squeezed or sampled-file)"
            )),
        }
    }
}

/// Every setting of a run. Zero grid fields and `auto_window` pick defaults
/// from the state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// vacuum | coherent | displaced-squeezed | sampled-file
    pub state: String,
    pub a: f64,
    pub z: f64,
    /// CSV with columns `y,re,im` on a uniform midpoint grid.
    pub state_file: String,
    /// 0 selects a grid covering the state.
    pub y_max: f64,
    pub grid_nodes: usize,
    pub auto_window: bool,
    pub x_lo: f64,
    pub x_hi: f64,
    pub r_lo: f64,
    pub r_hi: f64,
    pub resolution_x: usize,
    pub resolution_r: usize,
    /// ml | srm | ml-parity
    pub seed_kind: String,
    pub convergence_tolerance: f64,
    pub lambda: f64,
    pub cutoff: usize,
    pub n_bar: f64,
    pub csv_path: String,
    /// Empty: the summary goes to stdout only.
    pub json_path: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            state: "coherent".into(),
            a: 10.0,
            z: 0.0,
            state_file: String::new(),
            y_max: 0.0,
            grid_nodes: 0,
            auto_window: true,
            x_lo: -4.0,
            x_hi: 4.0,
            r_lo: -0.6,
            r_hi: 0.6,
            resolution_x: 128,
            resolution_r: 128,
            seed_kind: "ml".into(),
            convergence_tolerance: 1e-5,
            lambda: 0.9,
            cutoff: 60,
            n_bar: 100.0,
            csv_path: "density.csv".into(),
            json_path: String::new(),
        }
    }
}

impl RunConfig {
    /// Defaults, overlaid by the optional file, overlaid by `key=value` pairs.
    pub fn load(file: Option<&Path>, sets: &[String]) -> Result<Self, CliError> {
        let mut table = toml::Table::try_from(Self::default()).map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            let overlay: toml::Table =
                toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            table.extend(overlay);
        }
        for set in sets {
            let (key, value) = set
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--set expects key=value, got '{set}'")))?;
            table.insert(key.trim().to_string(), parse_value(value.trim()));
        }
        let config: Self = table.try_into().map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config always serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        let floats = [
            ("a", self.a),
            ("z", self.z),
            ("y_max", self.y_max),
            ("x_lo", self.x_lo),
            ("x_hi", self.x_hi),
            ("r_lo", self.r_lo),
            ("r_hi", self.r_hi),
            ("convergence_tolerance", self.convergence_tolerance),
            ("lambda", self.lambda),
            ("n_bar", self.n_bar),
        ];
        if let Some((name, v)) = floats.iter().find(|(_, v)| !v.is_finite()) {
            return bad(format!("{name} must be finite, got {v}"));
        }
        self.state_kind()?;
        self.seed()?;
        if self.y_max < 0.0 {
            return bad(format!("y_max must be non-negative, got {}", self.y_max));
        }
        if self.resolution_x < 16 || self.resolution_r < 16 {
            return bad(format!("resolution must be at least 16, got {}x{}", self.resolution_x, self.resolution_r));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return bad(format!("lambda must lie in (0, 1), got {}", self.lambda));
        }
        if self.convergence_tolerance <= 0.0 {
            return bad("convergence_tolerance must be positive".into());
        }
        if self.state_kind()? == StateKind::SampledFile && self.state_file.is_empty() {
            return bad("state = \"sampled-file\" needs state_file".into());
        }
        Ok(())
    }

    pub fn state_kind(&self) -> Result<StateKind, CliError> {
        self.state.parse().map_err(CliError::Config)
    }

    pub fn seed(&self) -> Result<SeedKind, CliError> {
        self.seed_kind.parse().map_err(|e: affine_estimation::Error| CliError::Config(e.to_string()))
    }

    /// The explicit window; invalid bounds surface as a config error.
    pub fn explicit_window(&self) -> Result<Window, CliError> {
        Window::new(self.x_lo, self.x_hi, self.r_lo, self.r_hi).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn csv_path(&self) -> PathBuf {
        PathBuf::from(&self.csv_path)
    }
}

/// TOML literal if it parses as one, otherwise a bare string.
fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = RunConfig::default();
        let back: RunConfig = toml::from_str(&c.to_toml()).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn sets_override_and_coerce() {
        let sets = ["a=3".to_string(), "state=vacuum".into(), "lambda = 0.5".into(), "auto_window=false".into()];
        let c = RunConfig::load(None, &sets).unwrap();
        assert_eq!(c.a, 3.0);
        assert_eq!(c.state_kind().unwrap(), StateKind::Vacuum);
        assert_eq!(c.lambda, 0.5);
        assert!(!c.auto_window);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(RunConfig::load(None, &["alpha=3".into()]), Err(CliError::Config(_))));
    }

    #[test]
    fn invariants_are_enforced() {
        for set in ["resolution_x=8", "lambda=1.0", "state=thermal", "seed_kind=pgm", "a=nan", "state=sampled-file"] {
            assert!(RunConfig::load(None, &[set.to_string()]).is_err(), "{set}");
        }
    }
}
