//! Evaluation of a [`SweepConfig`] over its distance grid.

use rayon::prelude::*;
use starnet_core::benchmarks::{direct_rate, squashed_bound_w3};
use starnet_core::gaussian::{solve_squeezing_for_fidelity, FockEngine};
use starnet_core::protocol::{
    b_for_fidelity, conditional_fidelity, fixed_fidelity_asymptote, herald_probability_leading, rate_at_fixed_fidelity,
    single_detector_pattern, single_detector_rate,
};
use starnet_core::{DickeSpec, Error, GaussianScenario, LossChannel, ProtocolParams, SqueezingSpec, StarChannel};

use crate::config::{Scenario, SourceParameter, SweepConfig};
use crate::dataset::{Cell, Dataset};
use crate::error::CliResult;

const COMMON: [&str; 5] = ["distance_km", "arm_transmittance", "rate", "fidelity", "n_parties"];

/// Column names produced by [`run_sweep`] for `config`.
pub fn columns(config: &SweepConfig) -> Vec<&'static str> {
    let extra: &[&'static str] = match config.scenario {
        Scenario::IdealW | Scenario::IdealDicke => &["herald_photons", "b", "target_fidelity"],
        Scenario::GaussianW if config.cutoff.is_some() => {
            &["squeezing_db", "r", "no_click_probability", "target_fidelity", "fock_rate", "fock_fidelity"]
        }
        Scenario::GaussianW => &["squeezing_db", "r", "no_click_probability", "target_fidelity"],
        Scenario::FixedFidelityCurve => &["b", "asymptote", "single_detector_rate"],
        Scenario::BenchmarkDirect | Scenario::BenchmarkSquashed => &[],
    };
    COMMON.iter().chain(extra).copied().collect()
}

/// One row per (source value, distance) pair, source values outermost.
/// Gaussian fidelity targets that cannot be reached at a distance yield no row.
pub fn run_sweep(config: &SweepConfig) -> CliResult<Dataset> {
    let values: Vec<Option<f64>> = match &config.source {
        SourceParameter::Amplitude(v) | SourceParameter::Fidelity(v) | SourceParameter::SqueezingDb(v) => {
            v.iter().copied().map(Some).collect()
        }
        SourceParameter::None => vec![None],
    };
    let jobs: Vec<(Option<f64>, f64)> =
        values.iter().flat_map(|&v| config.grid.points().into_iter().map(move |d| (v, d))).collect();
    let rows: Vec<CliResult<Option<Vec<Cell>>>> = jobs.par_iter().map(|&(v, d)| row(config, v, d)).collect();
    let mut out = Dataset::new(columns(config));
    for r in rows {
        if let Some(cells) = r? {
            out.push(cells);
        }
    }
    Ok(out)
}

fn row(config: &SweepConfig, value: Option<f64>, distance_km: f64) -> CliResult<Option<Vec<Cell>>> {
    let channel = LossChannel::from_fiber(distance_km, config.gamma_db_per_km)?;
    let t = channel.transmittance();
    let n = config.n_parties;
    let head = |rate: f64, fidelity: Cell| vec![distance_km.into(), t.into(), rate.into(), fidelity, n.into()];
    let value = || value.expect("scenario carries a source value");
    let cells = match config.scenario {
        Scenario::IdealW | Scenario::IdealDicke => {
            let m = config.herald_photons;
            let (b, target) = match config.source {
                SourceParameter::Fidelity(_) => (b_for_fidelity(n, m, value())?, Some(value())),
                _ => (value(), None),
            };
            let params = ProtocolParams::new(n, m, b, channel)?;
            let rate = single_detector_rate(&params)?;
            let fidelity =
                match conditional_fidelity(&params, &single_detector_pattern(&params, 0), &DickeSpec::new(n, m)?) {
                    Ok(f) => Cell::Float(f),
                    Err(Error::ZeroProbability) => Cell::Empty,
                    Err(e) => return Err(e.into()),
                };
            let mut cells = head(rate, fidelity);
            cells.extend([m.into(), b.into(), target.into()]);
            cells
        }
        Scenario::GaussianW => {
            let (squeezing, target) = match config.source {
                SourceParameter::Fidelity(_) => {
                    match solve_squeezing_for_fidelity(n, value(), &channel, &config.detector) {
                        Ok(s) => (s, Some(value())),
                        Err(Error::FidelityCeiling { .. }) => return Ok(None),
                        Err(e) => return Err(e.into()),
                    }
                }
                _ => (SqueezingSpec::from_db(value())?, None),
            };
            let scenario = GaussianScenario { n_parties: n, squeezing, channel, detector: config.detector };
            let point = scenario.evaluate()?;
            let mut cells = head(point.click_probability, point.fidelity.into());
            cells.extend([
                squeezing.db().into(),
                squeezing.r().into(),
                point.no_click_probability.into(),
                target.into(),
            ]);
            if let Some(cutoff) = config.cutoff {
                let engine = FockEngine::new(n, squeezing, channel, config.detector, cutoff)?;
                cells.extend([engine.click_probability()?.into(), engine.w_fidelity()?.into()]);
            }
            cells
        }
        Scenario::FixedFidelityCurve => {
            let f = value();
            let b = b_for_fidelity(n, 1, f)?;
            let single = herald_probability_leading(&ProtocolParams::new(n, 1, b, channel)?);
            let mut cells = head(rate_at_fixed_fidelity(n, f, &channel)?, f.into());
            cells.extend([b.into(), fixed_fidelity_asymptote(f, &channel).into(), single.into()]);
            cells
        }
        Scenario::BenchmarkDirect => head(direct_rate(n, &StarChannel::new(t, n)?)?, 1.0.into()),
        Scenario::BenchmarkSquashed => head(squashed_bound_w3(t)?, Cell::Empty),
    };
    Ok(Some(cells))
}
