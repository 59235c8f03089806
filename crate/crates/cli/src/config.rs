//! Sweep configuration: a flat JSON file and command-line flags merged into
//! a validated [`SweepConfig`].

use std::path::{Path, PathBuf};

use serde::Deserialize;
use starnet_core::DetectorModel;

use crate::dataset::OutputFormat;
use crate::error::{CliError, CliResult};

pub const DEFAULT_GAMMA_DB_PER_KM: f64 = 0.2;
pub const DEFAULT_DARK_COUNT: f64 = 1e-7;
pub const DEFAULT_DET_EFFICIENCY: f64 = 0.8;
pub const DEFAULT_DMIN_KM: f64 = 0.0;
pub const DEFAULT_DMAX_KM: f64 = 200.0;
pub const DEFAULT_STEP_KM: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[clap(rename_all = "snake_case")]
pub enum Scenario {
    IdealW,
    IdealDicke,
    GaussianW,
    BenchmarkDirect,
    BenchmarkSquashed,
    FixedFidelityCurve,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::IdealW => "ideal_w",
            Scenario::IdealDicke => "ideal_dicke",
            Scenario::GaussianW => "gaussian_w",
            Scenario::BenchmarkDirect => "benchmark_direct",
            Scenario::BenchmarkSquashed => "benchmark_squashed",
            Scenario::FixedFidelityCurve => "fixed_fidelity_curve",
        }
    }
}

/// A single number or a list of numbers.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum NumberList {
    One(f64),
    Many(Vec<f64>),
}

impl NumberList {
    pub fn into_vec(self) -> Vec<f64> {
        match self {
            NumberList::One(x) => vec![x],
            NumberList::Many(v) => v,
        }
    }
}

/// Unvalidated settings. Keys mirror the flag names; both `dmin_km` and
/// `dmin-km` spellings are accepted in files.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub scenario: Option<Scenario>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub b: Option<NumberList>,
    pub fidelity: Option<NumberList>,
    #[serde(alias = "squeezing-db")]
    pub squeezing_db: Option<NumberList>,
    #[serde(alias = "dmin-km")]
    pub dmin_km: Option<f64>,
    #[serde(alias = "dmax-km")]
    pub dmax_km: Option<f64>,
    #[serde(alias = "step-km")]
    pub step_km: Option<f64>,
    #[serde(alias = "gamma-db-per-km")]
    pub gamma_db_per_km: Option<f64>,
    #[serde(alias = "dark-count")]
    pub dark_count: Option<f64>,
    #[serde(alias = "det-efficiency")]
    pub det_efficiency: Option<f64>,
    pub cutoff: Option<u32>,
    pub format: Option<OutputFormat>,
    pub out: Option<PathBuf>,
}

impl Settings {
    pub fn from_json_str(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::usage(format!("config: {e}")))
    }

    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        Self::from_json_str(&text).map_err(|e| match e {
            CliError::Usage(msg) => CliError::usage(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Values set in `self` win over those in `base`.
    pub fn over(self, base: Settings) -> Settings {
        Settings {
            scenario: self.scenario.or(base.scenario),
            n: self.n.or(base.n),
            m: self.m.or(base.m),
            b: self.b.or(base.b),
            fidelity: self.fidelity.or(base.fidelity),
            squeezing_db: self.squeezing_db.or(base.squeezing_db),
            dmin_km: self.dmin_km.or(base.dmin_km),
            dmax_km: self.dmax_km.or(base.dmax_km),
            step_km: self.step_km.or(base.step_km),
            gamma_db_per_km: self.gamma_db_per_km.or(base.gamma_db_per_km),
            dark_count: self.dark_count.or(base.dark_count),
            det_efficiency: self.det_efficiency.or(base.det_efficiency),
            cutoff: self.cutoff.or(base.cutoff),
            format: self.format.or(base.format),
            out: self.out.or(base.out),
        }
    }
}

/// Evenly spaced distances `min + i * step` up to `max` inclusive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceGrid {
    pub min_km: f64,
    pub max_km: f64,
    pub step_km: f64,
}

impl DistanceGrid {
    pub fn new(min_km: f64, max_km: f64, step_km: f64) -> CliResult<Self> {
        if !(min_km.is_finite() && min_km >= 0.0) {
            return Err(CliError::usage(format!("dmin_km must be a non-negative number, got {min_km}")));
        }
        if !(max_km.is_finite() && max_km >= min_km) {
            return Err(CliError::usage(format!("dmax_km must be at least dmin_km ({min_km}), got {max_km}")));
        }
        if !(step_km.is_finite() && step_km > 0.0) {
            return Err(CliError::usage(format!("step_km must be positive, got {step_km}")));
        }
        Ok(Self { min_km, max_km, step_km })
    }

    pub fn points(&self) -> Vec<f64> {
        let count = ((self.max_km - self.min_km) / self.step_km + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.min_km + i as f64 * self.step_km).collect()
    }
}

/// The swept source parameter.
#[derive(Clone, Debug, PartialEq)]
pub enum SourceParameter {
    /// Source amplitudes `b`.
    Amplitude(Vec<f64>),
    /// Target fidelities, from which `b` or the squeezing is derived.
    Fidelity(Vec<f64>),
    /// Squeezing in dB.
    SqueezingDb(Vec<f64>),
    None,
}

/// A validated sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub scenario: Scenario,
    pub n_parties: usize,
    pub herald_photons: usize,
    pub source: SourceParameter,
    pub grid: DistanceGrid,
    pub gamma_db_per_km: f64,
    pub detector: DetectorModel,
    /// Source cutoff for the truncated-Fock cross-check; `None` skips it.
    pub cutoff: Option<u32>,
}

fn reject(present: bool, key: &str, scenario: Scenario) -> CliResult<()> {
    if present {
        Err(CliError::usage(format!("{key} is not accepted by scenario {}", scenario.name())))
    } else {
        Ok(())
    }
}

fn checked_list(values: Option<NumberList>, key: &str, valid: impl Fn(f64) -> bool, range: &str) -> CliResult<Option<Vec<f64>>> {
    let Some(values) = values else { return Ok(None) };
    let values = values.into_vec();
    if values.is_empty() {
        return Err(CliError::usage(format!("{key} must list at least one value")));
    }
    if let Some(bad) = values.iter().find(|&&x| !valid(x)) {
        return Err(CliError::usage(format!("{key} values must lie in {range}, got {bad}")));
    }
    Ok(Some(values))
}

impl SweepConfig {
    pub fn from_settings(s: Settings) -> CliResult<Self> {
        let scenario = s.scenario.ok_or_else(|| CliError::usage("scenario is required"))?;
        let gaussian = scenario == Scenario::GaussianW;
        reject(!gaussian && s.dark_count.is_some(), "dark_count", scenario)?;
        reject(!gaussian && s.det_efficiency.is_some(), "det_efficiency", scenario)?;
        reject(!gaussian && s.cutoff.is_some(), "cutoff", scenario)?;

        let n_parties = match (scenario, s.n) {
            (Scenario::BenchmarkSquashed, None) => 3,
            (_, None) => return Err(CliError::usage("n is required")),
            (_, Some(n)) => n,
        };
        let min_n = match scenario {
            Scenario::BenchmarkDirect => 1,
            _ => 2,
        };
        if n_parties < min_n {
            return Err(CliError::usage(format!("n must be at least {min_n} for scenario {}, got {n_parties}", scenario.name())));
        }
        match scenario {
            Scenario::BenchmarkSquashed if n_parties != 3 => {
                return Err(CliError::usage(format!("n must be 3 for benchmark_squashed, got {n_parties}")));
            }
            Scenario::GaussianW if !(2..=4).contains(&n_parties) => {
                return Err(CliError::usage(format!("n must be 2, 3 or 4 for gaussian_w, got {n_parties}")));
            }
            Scenario::IdealW | Scenario::IdealDicke if n_parties > 16 => {
                return Err(CliError::usage(format!("n must be at most 16 for {}, got {n_parties}", scenario.name())));
            }
            _ => {}
        }

        let herald_photons = match (scenario, s.m) {
            (Scenario::IdealW, None | Some(1)) => 1,
            (Scenario::IdealW, Some(m)) => {
                return Err(CliError::usage(format!("m must be 1 for ideal_w, got {m}; use ideal_dicke")));
            }
            (Scenario::IdealDicke, None) => return Err(CliError::usage("m is required for ideal_dicke")),
            (Scenario::IdealDicke, Some(m)) if m == 0 || m > n_parties => {
                return Err(CliError::usage(format!("m must lie in 1..={n_parties}, got {m}")));
            }
            (Scenario::IdealDicke, Some(m)) => m,
            (_, Some(_)) => return Err(CliError::usage(format!("m is not accepted by scenario {}", scenario.name()))),
            (_, None) => 1,
        };

        let b = checked_list(s.b, "b", |x| x > 0.0 && x <= 1.0, "(0, 1]")?;
        let fidelity = checked_list(s.fidelity, "fidelity", |x| x > 0.0 && x < 1.0, "(0, 1)")?;
        let squeezing = checked_list(s.squeezing_db, "squeezing_db", |x| x > 0.0 && x.is_finite(), "(0, inf)")?;
        let supplied: Vec<&str> = [("b", b.is_some()), ("fidelity", fidelity.is_some()), ("squeezing_db", squeezing.is_some())]
            .into_iter()
            .filter_map(|(k, p)| p.then_some(k))
            .collect();
        let allowed: &[&str] = match scenario {
            Scenario::IdealW | Scenario::IdealDicke => &["b", "fidelity"],
            Scenario::GaussianW => &["fidelity", "squeezing_db"],
            Scenario::FixedFidelityCurve => &["fidelity"],
            Scenario::BenchmarkDirect | Scenario::BenchmarkSquashed => &[],
        };
        if let Some(bad) = supplied.iter().find(|k| !allowed.contains(k)) {
            return Err(CliError::usage(format!("{bad} is not accepted by scenario {}", scenario.name())));
        }
        if supplied.len() > 1 {
            return Err(CliError::usage(format!("supply only one of {}", supplied.join(", "))));
        }
        if !allowed.is_empty() && supplied.is_empty() {
            return Err(CliError::usage(format!("scenario {} requires one of {}", scenario.name(), allowed.join(", "))));
        }
        if scenario == Scenario::IdealDicke && fidelity.is_some() && herald_photons == n_parties {
            return Err(CliError::usage("fidelity cannot set b when m equals n; supply b"));
        }
        let source = match (b, fidelity, squeezing) {
            (Some(v), _, _) => SourceParameter::Amplitude(v),
            (_, Some(v), _) => SourceParameter::Fidelity(v),
            (_, _, Some(v)) => SourceParameter::SqueezingDb(v),
            _ => SourceParameter::None,
        };

        let grid = DistanceGrid::new(
            s.dmin_km.unwrap_or(DEFAULT_DMIN_KM),
            s.dmax_km.unwrap_or(DEFAULT_DMAX_KM),
            s.step_km.unwrap_or(DEFAULT_STEP_KM),
        )?;
        let gamma_db_per_km = s.gamma_db_per_km.unwrap_or(DEFAULT_GAMMA_DB_PER_KM);
        if !(gamma_db_per_km.is_finite() && gamma_db_per_km >= 0.0) {
            return Err(CliError::usage(format!("gamma_db_per_km must be non-negative, got {gamma_db_per_km}")));
        }
        let dark_count = s.dark_count.unwrap_or(DEFAULT_DARK_COUNT);
        if !(0.0..1.0).contains(&dark_count) {
            return Err(CliError::usage(format!("dark_count must lie in [0, 1), got {dark_count}")));
        }
        let efficiency = s.det_efficiency.unwrap_or(DEFAULT_DET_EFFICIENCY);
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            return Err(CliError::usage(format!("det_efficiency must lie in (0, 1], got {efficiency}")));
        }
        let detector = DetectorModel::new(dark_count, efficiency)
            .map_err(|e| CliError::usage(format!("detector: {e}")))?;
        if s.cutoff == Some(0) {
            return Err(CliError::usage("cutoff must be positive"));
        }

        Ok(Self { scenario, n_parties, herald_photons, source, grid, gamma_db_per_km, detector, cutoff: s.cutoff })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(json: &str) -> Settings {
        Settings::from_json_str(json).unwrap()
    }

    fn usage_message(json: &str) -> String {
        match SweepConfig::from_settings(settings(json)) {
            Err(CliError::Usage(msg)) => msg,
            other => panic!("expected usage error, got {other:?}"),
        }
    }

    #[test]
    fn grid_points_include_both_ends() {
        assert_eq!(DistanceGrid::new(0.0, 300.0, 5.0).unwrap().points().len(), 61);
        assert_eq!(DistanceGrid::new(0.0, 0.3, 0.1).unwrap().points().len(), 4);
        assert_eq!(DistanceGrid::new(10.0, 10.0, 1.0).unwrap().points(), vec![10.0]);
        assert!(DistanceGrid::new(0.0, 10.0, 0.0).is_err());
        assert!(DistanceGrid::new(5.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn file_keys_accept_both_spellings_and_lists() {
        let s = settings(r#"{"scenario":"gaussian_w","n":2,"squeezing-db":[0.87,1.3],"dmax_km":50,"dark-count":0}"#);
        assert_eq!(s.squeezing_db.unwrap().into_vec(), vec![0.87, 1.3]);
        assert_eq!(s.dmax_km, Some(50.0));
        assert_eq!(s.dark_count, Some(0.0));
        let single = settings(r#"{"fidelity":0.95}"#);
        assert_eq!(single.fidelity.unwrap().into_vec(), vec![0.95]);
    }

    #[test]
    fn unknown_keys_are_usage_errors() {
        let err = Settings::from_json_str(r#"{"scenario":"ideal_w","bogus":1}"#).unwrap_err();
        assert!(matches!(&err, CliError::Usage(m) if m.contains("bogus")), "{err}");
    }

    #[test]
    fn flags_override_file() {
        let file = settings(r#"{"scenario":"ideal_w","n":3,"b":0.1}"#);
        let flags = Settings { n: Some(4), ..Default::default() };
        let merged = flags.over(file);
        assert_eq!(merged.n, Some(4));
        assert_eq!(merged.scenario, Some(Scenario::IdealW));
    }

    #[test]
    fn validation_names_the_offending_key() {
        assert!(usage_message(r#"{"n":2}"#).contains("scenario"));
        assert!(usage_message(r#"{"scenario":"ideal_w","b":0.1}"#).contains("n "));
        assert!(usage_message(r#"{"scenario":"ideal_w","n":2,"b":0.1,"fidelity":0.9}"#).contains("only one"));
        assert!(usage_message(r#"{"scenario":"ideal_w","n":2}"#).contains("b, fidelity"));
        assert!(usage_message(r#"{"scenario":"ideal_w","n":2,"b":0.1,"m":2}"#).contains("m "));
        assert!(usage_message(r#"{"scenario":"ideal_w","n":2,"b":1.5}"#).contains("b values"));
        assert!(usage_message(r#"{"scenario":"gaussian_w","n":5,"squeezing_db":1}"#).contains("n must be 2, 3 or 4"));
        assert!(usage_message(r#"{"scenario":"gaussian_w","n":2,"b":0.1}"#).contains("b is not accepted"));
        assert!(usage_message(r#"{"scenario":"benchmark_direct","n":2,"dark_count":0}"#).contains("dark_count"));
        assert!(usage_message(r#"{"scenario":"benchmark_squashed","n":4}"#).contains("n must be 3"));
        assert!(usage_message(r#"{"scenario":"fixed_fidelity_curve","n":3,"fidelity":1.0}"#).contains("fidelity values"));
        assert!(usage_message(r#"{"scenario":"ideal_dicke","n":4,"b":0.1}"#).contains("m is required"));
        assert!(usage_message(r#"{"scenario":"benchmark_direct","n":2,"step_km":-1}"#).contains("step_km"));
        assert!(usage_message(r#"{"scenario":"gaussian_w","n":2,"squeezing_db":1,"det_efficiency":0}"#).contains("det_efficiency"));
    }

    #[test]
    fn defaults_are_applied() {
        let c = SweepConfig::from_settings(settings(r#"{"scenario":"gaussian_w","n":3,"squeezing_db":1.3}"#)).unwrap();
        assert_eq!(c.gamma_db_per_km, 0.2);
        assert_eq!(c.detector.dark_count_prob(), 1e-7);
        assert_eq!(c.detector.efficiency(), 0.8);
        assert_eq!(c.source, SourceParameter::SqueezingDb(vec![1.3]));
        let sq = SweepConfig::from_settings(settings(r#"{"scenario":"benchmark_squashed"}"#)).unwrap();
        assert_eq!(sq.n_parties, 3);
        assert_eq!(sq.source, SourceParameter::None);
    }
}
