use std::collections::HashSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use minkowski::invariance::HarnessOptions;
use minkowski::{EpsSchedule, Exec, RealizedSet, SetSpec, VerdictPolicy};
use serde::{Deserialize, Serialize};

pub const DEFAULT_CONFIG: &str = include_str!("../configs/default.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
    pub sets: Vec<NamedSet>,
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleConfig {
    pub points_per_decade: u32,
    pub window_decades: f64,
    /// Overrides the per-set default range.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_min: Option<f64>,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            points_per_decade: 8,
            window_decades: 2.0,
            eps_max: None,
            eps_min: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative tolerance of every lift quadrature.
    pub quad: f64,
    /// Largest `upper / lower - 1` called measurable.
    pub measurability: f64,
    /// Allowed `|ratio - 1|` of normalized contents across the embedding.
    pub invariance: f64,
    pub growth_per_decade: f64,
    /// Absolute tolerance of the self-test's quadrature rows.
    pub selftest: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            quad: 1e-10,
            measurability: 0.02,
            invariance: 0.02,
            growth_per_decade: 1.05,
            selftest: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedSet {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_min: Option<f64>,
    #[serde(flatten)]
    pub spec: SetSpec,
}

impl ExperimentConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let text = match path {
            Some(p) => {
                std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?
            }
            None => DEFAULT_CONFIG.to_string(),
        };
        let config: ExperimentConfig =
            toml::from_str(&text).context("parsing the configuration")?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let mut names = HashSet::new();
        for s in &self.sets {
            ensure!(
                names.insert(s.name.as_str()),
                "duplicate set name {:?}",
                s.name
            );
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("quad", t.quad),
            ("measurability", t.measurability),
            ("invariance", t.invariance),
            ("selftest", t.selftest),
        ] {
            ensure!(
                v.is_finite() && v > 0.0,
                "tolerance {name} must be positive, got {v}"
            );
        }
        ensure!(t.growth_per_decade > 1.0, "growth_per_decade must exceed 1");
        let s = &self.schedule;
        ensure!(
            s.points_per_decade >= 4,
            "points_per_decade must be at least 4"
        );
        ensure!(
            s.window_decades.is_finite() && s.window_decades > 0.0,
            "window_decades must be positive"
        );
        if let (Some(hi), Some(lo)) = (s.eps_max, s.eps_min) {
            EpsSchedule::new(hi, lo, s.points_per_decade)?;
        }
        for set in &self.sets {
            if let (Some(hi), Some(lo)) = (set.eps_max, set.eps_min) {
                EpsSchedule::new(hi, lo, s.points_per_decade)
                    .with_context(|| format!("schedule of {}", set.name))?;
            }
        }
        Ok(())
    }

    pub fn set(&self, name: &str) -> Result<&NamedSet> {
        match self.sets.iter().find(|s| s.name == name) {
            Some(s) => Ok(s),
            None => bail!(
                "no set named {name:?}; known sets: {}",
                self.sets
                    .iter()
                    .map(|s| s.name.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        }
    }

    pub fn harness(&self) -> HarnessOptions {
        let t = &self.tolerances;
        HarnessOptions {
            quad_tol: t.quad,
            window_decades: self.schedule.window_decades,
            tol: t.invariance,
            policy: VerdictPolicy {
                rel_tol: t.measurability,
                growth_per_decade: t.growth_per_decade,
                ..VerdictPolicy::default()
            },
            exec: Exec::default(),
        }
    }

    /// The set's schedule: per-set bounds, then global bounds, then the
    /// set's defaults.
    pub fn schedule_for(&self, set: &NamedSet, realized: &RealizedSet) -> Result<EpsSchedule> {
        let ppd = self.schedule.points_per_decade;
        let default = realized.default_schedule(ppd);
        let hi = set.eps_max.or(self.schedule.eps_max);
        let lo = set.eps_min.or(self.schedule.eps_min);
        let sched = match (hi, lo) {
            (None, None) => default?,
            (hi, lo) => {
                let d = default.ok();
                let hi = hi
                    .or(d.map(|d| d.eps_max()))
                    .context("eps_max needed for this set")?;
                let lo = lo
                    .or(d.map(|d| d.eps_min()))
                    .context("eps_min needed for this set")?;
                EpsSchedule::new(hi, lo, ppd)?
            }
        };
        Ok(sched)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        let c = ExperimentConfig::load(None).unwrap();
        assert!(c.sets.len() >= 6);
        let text = toml::to_string(&c).unwrap();
        let back: ExperimentConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_duplicates_and_typos() {
        let dup = "[[sets]]\nname = \"a\"\nkind = \"cantor\"\n[[sets]]\nname = \"a\"\nkind = \"cantor\"\n";
        let c: ExperimentConfig = toml::from_str(dup).unwrap();
        assert!(c.validate().is_err());
        let typo = "[[sets]]\nname = \"a\"\nkind = \"cantor\"\ndepht_cap = 3\n";
        assert!(toml::from_str::<ExperimentConfig>(typo).is_err());
        let bad_tol = "[tolerances]\nquad = -1.0\n[[sets]]\nname = \"a\"\nkind = \"cantor\"\n";
        assert!(toml::from_str::<ExperimentConfig>(bad_tol)
            .unwrap()
            .validate()
            .is_err());
    }
}
