//! Experiment configuration: defaults, TOML file overlay, flag overlay and
//! the provenance hash.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::ladders::SchemeKind;
use crate::manifolds::{SpaceOptions, DEFAULT_FIXED_STEP};
use crate::tolerance::ToleranceConfig;

/// Failures detected before any geometry runs (exit code 1).
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("config error: {0}")]
pub struct ConfigError(pub String);

/// Keys accepted in a config file. Every key is optional; flags override
/// file values, file values override defaults.
///
/// ```toml
/// manifold = "bump2d"
/// scheme = "pole_v2"
/// h_min = 0.02
/// h_max = 0.2
/// num_scales = 7
/// n_rungs = 1
/// seed = 42
/// tol_exactness = 1e-10
/// output = "sweep.csv"
/// fixed_step = 0.00390625
/// ```
///
/// Further keys: `beta`, `trials`, `membership_tol`, `log_tol`,
/// `ode_rel_tol`, `ode_abs_tol`, `max_shooting_iters`, and the coordinate
/// arrays `p`, `q`, `u` for single transports and engineered exactness trials.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub manifold: Option<String>,
    pub scheme: Option<String>,
    pub h_min: Option<f64>,
    pub h_max: Option<f64>,
    pub num_scales: Option<usize>,
    pub n_rungs: Option<usize>,
    pub seed: Option<u64>,
    pub tol_exactness: Option<f64>,
    pub output: Option<String>,
    pub fixed_step: Option<f64>,
    pub beta: Option<f64>,
    pub trials: Option<usize>,
    pub membership_tol: Option<f64>,
    pub log_tol: Option<f64>,
    pub ode_rel_tol: Option<f64>,
    pub ode_abs_tol: Option<f64>,
    pub max_shooting_iters: Option<usize>,
    pub p: Option<Vec<f64>>,
    pub q: Option<Vec<f64>>,
    pub u: Option<Vec<f64>>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(format!("bad config file: {e}")))
    }

    /// Keeps values of `self` and fills the gaps from `lower`.
    pub fn or(self, lower: ConfigFile) -> ConfigFile {
        ConfigFile {
            manifold: self.manifold.or(lower.manifold),
            scheme: self.scheme.or(lower.scheme),
            h_min: self.h_min.or(lower.h_min),
            h_max: self.h_max.or(lower.h_max),
            num_scales: self.num_scales.or(lower.num_scales),
            n_rungs: self.n_rungs.or(lower.n_rungs),
            seed: self.seed.or(lower.seed),
            tol_exactness: self.tol_exactness.or(lower.tol_exactness),
            output: self.output.or(lower.output),
            fixed_step: self.fixed_step.or(lower.fixed_step),
            beta: self.beta.or(lower.beta),
            trials: self.trials.or(lower.trials),
            membership_tol: self.membership_tol.or(lower.membership_tol),
            log_tol: self.log_tol.or(lower.log_tol),
            ode_rel_tol: self.ode_rel_tol.or(lower.ode_rel_tol),
            ode_abs_tol: self.ode_abs_tol.or(lower.ode_abs_tol),
            max_shooting_iters: self.max_shooting_iters.or(lower.max_shooting_iters),
            p: self.p.or(lower.p),
            q: self.q.or(lower.q),
            u: self.u.or(lower.u),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Transport,
    Convergence,
    BchCheck,
    Exactness,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Transport => "transport",
            Command::Convergence => "convergence",
            Command::BchCheck => "bch-check",
            Command::Exactness => "exactness",
        }
    }

    /// Default `(h_min, h_max)`. The series check uses a smaller window:
    /// on bump2d the degree-5 remainder still dominates near `h = 0.2`.
    pub fn default_scales(self) -> (f64, f64) {
        match self {
            Command::BchCheck => (0.005, 0.05),
            _ => (0.02, 0.2),
        }
    }

    fn default_manifold(self) -> &'static str {
        match self {
            Command::Transport => "sphere-2",
            Command::Convergence | Command::BchCheck => "bump2d",
            Command::Exactness => FLEET,
        }
    }
}

/// Manifold value selecting the whole locally symmetric fleet.
pub const FLEET: &str = "fleet";

/// Fully resolved experiment settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub manifold: String,
    pub scheme: SchemeKind,
    pub h_min: f64,
    pub h_max: f64,
    pub num_scales: usize,
    pub n_rungs: usize,
    pub seed: u64,
    pub tolerances: ToleranceConfig,
    pub output_path: Option<String>,
    /// Fixed RK4 step for chart spaces. Sweeps always integrate with a fixed
    /// step; this falls back to [`DEFAULT_FIXED_STEP`].
    pub fixed_step: Option<f64>,
    pub beta: f64,
    pub trials: usize,
    pub p: Option<Vec<f64>>,
    pub q: Option<Vec<f64>>,
    pub u: Option<Vec<f64>>,
}

impl ExperimentConfig {
    pub fn defaults(command: Command) -> Self {
        Self::resolve(command, ConfigFile::default()).expect("defaults are valid")
    }

    /// Applies defaults to the merged file/flag values and validates them.
    pub fn resolve(command: Command, raw: ConfigFile) -> Result<Self, ConfigError> {
        let mut tol = ToleranceConfig::default();
        if let Some(v) = raw.tol_exactness {
            tol.exactness_tol = v;
        }
        if let Some(v) = raw.membership_tol {
            tol.membership_tol = v;
        }
        if let Some(v) = raw.log_tol {
            tol.log_tol = v;
        }
        if let Some(v) = raw.ode_rel_tol {
            tol.ode_rel_tol = v;
        }
        if let Some(v) = raw.ode_abs_tol {
            tol.ode_abs_tol = v;
        }
        if let Some(v) = raw.max_shooting_iters {
            tol.max_shooting_iters = v;
        }
        let scheme = match raw.scheme.as_deref() {
            Some(s) => s.parse().map_err(|e| ConfigError(format!("{e}")))?,
            None => SchemeKind::PoleV2,
        };
        let cfg = ExperimentConfig {
            command,
            manifold: raw
                .manifold
                .unwrap_or_else(|| command.default_manifold().to_string()),
            scheme,
            h_min: raw.h_min.unwrap_or(command.default_scales().0),
            h_max: raw.h_max.unwrap_or(command.default_scales().1),
            num_scales: raw.num_scales.unwrap_or(7),
            n_rungs: raw.n_rungs.unwrap_or(1),
            seed: raw.seed.unwrap_or(42),
            tolerances: tol,
            output_path: raw.output,
            fixed_step: raw.fixed_step,
            beta: raw.beta.unwrap_or(1.0),
            trials: raw.trials.unwrap_or(100),
            p: raw.p,
            q: raw.q,
            u: raw.u,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.tolerances
            .validate()
            .map_err(|e| ConfigError(e.to_string()))?;
        if !(self.h_min > 0.0 && self.h_min < self.h_max && self.h_max.is_finite()) {
            return Err(ConfigError(format!(
                "need 0 < h_min < h_max, got h_min={} h_max={}",
                self.h_min, self.h_max
            )));
        }
        if self.n_rungs == 0 {
            return Err(ConfigError("n_rungs must be at least 1".into()));
        }
        if matches!(self.command, Command::Convergence | Command::BchCheck) && self.num_scales < 5 {
            return Err(ConfigError(format!(
                "num_scales must be at least 5, got {}",
                self.num_scales
            )));
        }
        if self.command == Command::Exactness && self.trials == 0 {
            return Err(ConfigError("trials must be at least 1".into()));
        }
        if let Some(step) = self.fixed_step {
            if !(step > 0.0 && step <= 1.0) {
                return Err(ConfigError(format!("fixed_step must lie in (0, 1], got {step}")));
            }
        }
        if !self.beta.is_finite() {
            return Err(ConfigError("beta must be finite".into()));
        }
        if self.manifold == FLEET && self.command != Command::Exactness {
            return Err(ConfigError(format!(
                "manifold \"{FLEET}\" is only valid for exactness"
            )));
        }
        Ok(())
    }

    /// Space options; `sweep` forces fixed-step integration.
    pub fn space_options(&self, sweep: bool) -> SpaceOptions {
        let fixed_step = match (self.fixed_step, sweep) {
            (Some(step), _) => Some(step),
            (None, true) => Some(DEFAULT_FIXED_STEP),
            (None, false) => None,
        };
        SpaceOptions {
            tolerances: self.tolerances,
            fixed_step,
            beta: self.beta,
        }
    }

    /// Canonical `key=value` rendering, one line per key in a fixed order.
    pub fn canonical(&self) -> String {
        let t = &self.tolerances;
        let list = |v: &Option<Vec<f64>>| match v {
            Some(xs) => xs.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(";"),
            None => "-".into(),
        };
        let mut s = String::new();
        let _ = writeln!(s, "command={}", self.command.as_str());
        let _ = writeln!(s, "manifold={}", self.manifold);
        let _ = writeln!(s, "scheme={}", self.scheme);
        let _ = writeln!(s, "h_min={:e}", self.h_min);
        let _ = writeln!(s, "h_max={:e}", self.h_max);
        let _ = writeln!(s, "num_scales={}", self.num_scales);
        let _ = writeln!(s, "n_rungs={}", self.n_rungs);
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "fixed_step={}", self.fixed_step.map_or("-".into(), |x| format!("{x:e}")));
        let _ = writeln!(s, "beta={:e}", self.beta);
        let _ = writeln!(s, "trials={}", self.trials);
        let _ = writeln!(s, "membership_tol={:e}", t.membership_tol);
        let _ = writeln!(s, "log_tol={:e}", t.log_tol);
        let _ = writeln!(s, "exactness_tol={:e}", t.exactness_tol);
        let _ = writeln!(s, "ode_rel_tol={:e}", t.ode_rel_tol);
        let _ = writeln!(s, "ode_abs_tol={:e}", t.ode_abs_tol);
        let _ = writeln!(s, "max_shooting_iters={}", t.max_shooting_iters);
        let _ = writeln!(s, "p={}", list(&self.p));
        let _ = writeln!(s, "q={}", list(&self.q));
        let _ = writeln!(s, "u={}", list(&self.u));
        s
    }

    /// First 16 hex digits of the SHA-256 of [`Self::canonical`]. The output
    /// path is not part of the hash.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_overlay_and_validation() {
        let file = ConfigFile::parse("manifold = \"spd-3\"\nh_min = 0.01\nseed = 7\n").unwrap();
        let flags = ConfigFile {
            seed: Some(9),
            ..Default::default()
        };
        let cfg = ExperimentConfig::resolve(Command::Convergence, flags.or(file)).unwrap();
        assert_eq!(cfg.manifold, "spd-3");
        assert_eq!(cfg.h_min, 0.01);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.scheme, SchemeKind::PoleV2);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_config_errors() {
        assert!(ConfigFile::parse("colour = 3").is_err());
        let bad = ConfigFile {
            h_min: Some(0.5),
            h_max: Some(0.1),
            ..Default::default()
        };
        assert!(ExperimentConfig::resolve(Command::Convergence, bad).is_err());
        let few = ConfigFile {
            num_scales: Some(4),
            ..Default::default()
        };
        assert!(ExperimentConfig::resolve(Command::Convergence, few.clone()).is_err());
        assert!(ExperimentConfig::resolve(Command::Transport, few).is_ok());
        let scheme = ConfigFile {
            scheme: Some("ladder".into()),
            ..Default::default()
        };
        assert!(ExperimentConfig::resolve(Command::Transport, scheme).is_err());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = ExperimentConfig::defaults(Command::Convergence);
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
        b.output_path = Some("x.csv".into());
        assert_eq!(a.hash(), b.hash());
        b.seed += 1;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn sweeps_force_fixed_step() {
        let cfg = ExperimentConfig::defaults(Command::Convergence);
        assert_eq!(cfg.space_options(true).fixed_step, Some(DEFAULT_FIXED_STEP));
        assert_eq!(cfg.space_options(false).fixed_step, None);
    }
}
