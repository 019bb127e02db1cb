use serde::{Deserialize, Serialize};

use crate::error::{AdhmError, Result};

/// Environment variable consulted by [`ToleranceConfig::from_env`].
pub const TOL_ENV_VAR: &str = "ADHMKIT_TOL";

/// Relative thresholds used by every numerical decision in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Singular values at or below `rank_rel_tol * sigma_max` count as zero.
    pub rank_rel_tol: f64,
    /// Relative threshold for residuals and entrywise equality.
    pub eq_rel_tol: f64,
    /// Radius under which binary-form roots are merged.
    pub root_cluster_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            rank_rel_tol: 1e-9,
            eq_rel_tol: 1e-8,
            root_cluster_tol: 1e-6,
        }
    }
}

fn check_one(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(AdhmError::Tolerance(format!("{name} = {v} must lie in (0, 1)")))
    }
}

impl ToleranceConfig {
    pub fn new(rank_rel_tol: f64, eq_rel_tol: f64, root_cluster_tol: f64) -> Result<Self> {
        let t = Self {
            rank_rel_tol,
            eq_rel_tol,
            root_cluster_tol,
        };
        t.validate()?;
        Ok(t)
    }

    /// Same threshold for all three fields.
    pub fn uniform(v: f64) -> Result<Self> {
        Self::new(v, v, v)
    }

    pub fn validate(&self) -> Result<()> {
        check_one("rank_rel_tol", self.rank_rel_tol)?;
        check_one("eq_rel_tol", self.eq_rel_tol)?;
        check_one("root_cluster_tol", self.root_cluster_tol)
    }

    /// Applies an override string on top of `self`.
    ///
    /// Accepted forms: a bare number (sets all three fields) or a comma
    /// separated list of `rank=..`, `eq=..`, `root=..` assignments.
    pub fn with_overrides(mut self, text: &str) -> Result<Self> {
        let text = text.trim();
        if let Ok(v) = text.parse::<f64>() {
            return Self::uniform(v);
        }
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| AdhmError::Tolerance(format!("cannot parse `{part}`")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| AdhmError::Tolerance(format!("cannot parse number in `{part}`")))?;
            match key.trim() {
                "rank" => self.rank_rel_tol = value,
                "eq" => self.eq_rel_tol = value,
                "root" => self.root_cluster_tol = value,
                other => return Err(AdhmError::Tolerance(format!("unknown field `{other}`"))),
            }
        }
        self.validate()?;
        Ok(self)
    }

    /// Defaults, overridden by `ADHMKIT_TOL` when it is set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(TOL_ENV_VAR) {
            Ok(s) => Self::default().with_overrides(&s),
            Err(_) => Ok(Self::default()),
        }
    }

    /// Threshold for greedy extraction of independent vectors: canonical forms,
    /// kernels at perturbed roots.
    pub(crate) fn selection_tol(&self) -> f64 {
        self.rank_rel_tol.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let t = ToleranceConfig::default();
        t.validate().unwrap();
        assert_eq!(t.rank_rel_tol, 1e-9);
        assert_eq!(t.eq_rel_tol, 1e-8);
        assert_eq!(t.root_cluster_tol, 1e-6);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(ToleranceConfig::new(0.0, 1e-8, 1e-6).is_err());
        assert!(ToleranceConfig::new(1e-9, 1.0, 1e-6).is_err());
        assert!(ToleranceConfig::new(1e-9, 1e-8, f64::NAN).is_err());
    }

    #[test]
    fn overrides() {
        let t = ToleranceConfig::default().with_overrides("1e-7").unwrap();
        assert_eq!(t, ToleranceConfig::uniform(1e-7).unwrap());
        let t = ToleranceConfig::default()
            .with_overrides("eq=1e-6, root=1e-4")
            .unwrap();
        assert_eq!(t.rank_rel_tol, 1e-9);
        assert_eq!(t.eq_rel_tol, 1e-6);
        assert_eq!(t.root_cluster_tol, 1e-4);
        assert!(ToleranceConfig::default().with_overrides("foo=1").is_err());
        assert!(ToleranceConfig::default().with_overrides("eq=2").is_err());
    }
}
