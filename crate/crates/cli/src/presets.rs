//! Parameter bundles reproducing the data behind each figure.
//! Every preset yields one dataset whose `series` column labels the curves.

use starnet_core::protocol::{fixed_fidelity_asymptote, rate_at_fixed_fidelity};
use starnet_core::LossChannel;

use crate::config::{
    DistanceGrid, Scenario, SourceParameter, SweepConfig, DEFAULT_DARK_COUNT, DEFAULT_DET_EFFICIENCY,
    DEFAULT_GAMMA_DB_PER_KM,
};
use crate::dataset::Dataset;
use crate::error::{CliError, CliResult};
use crate::sweep::run_sweep;

pub const PRESETS: [&str; 10] = ["fig3", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11", "fig12", "fig13"];

/// Squeezing values of the Gaussian rate and fidelity figures, in dB.
pub const GAUSSIAN_SQUEEZING_DB: [f64; 7] = [0.87, 1.3, 1.74, 2.17, 2.61, 3.04, 3.47];

/// Fidelity of the repeater curves in the ideal-source comparisons.
pub const IDEAL_FIDELITY: f64 = 0.95;

fn config(scenario: Scenario, n: usize, m: usize, source: SourceParameter, grid: DistanceGrid) -> SweepConfig {
    SweepConfig {
        scenario,
        n_parties: n,
        herald_photons: m,
        source,
        grid,
        gamma_db_per_km: DEFAULT_GAMMA_DB_PER_KM,
        detector: starnet_core::DetectorModel::new(DEFAULT_DARK_COUNT, DEFAULT_DET_EFFICIENCY)
            .expect("default detector is valid"),
        cutoff: None,
    }
}

fn grid(max_km: f64, step_km: f64) -> DistanceGrid {
    DistanceGrid::new(0.0, max_km, step_km).expect("preset grid is valid")
}

fn fidelities(v: &[f64]) -> SourceParameter {
    SourceParameter::Fidelity(v.to_vec())
}

fn run_all(parts: Vec<(String, SweepConfig)>) -> CliResult<Dataset> {
    let data = parts
        .into_iter()
        .map(|(label, cfg)| run_sweep(&cfg).map(|d| (label, d)))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Dataset::stack(data))
}

/// Ideal-source repeater at fixed fidelity against direct transmission.
fn ideal_comparison(n_values: &[usize]) -> Vec<(String, SweepConfig)> {
    let g = grid(300.0, 5.0);
    n_values
        .iter()
        .flat_map(|&n| {
            [
                (format!("repeater_w{n}"), config(Scenario::FixedFidelityCurve, n, 1, fidelities(&[IDEAL_FIDELITY]), g)),
                (format!("direct_w{n}"), config(Scenario::BenchmarkDirect, n, 1, SourceParameter::None, g)),
            ]
        })
        .collect()
}

/// Gaussian fixed-fidelity curves, one series per target, plus direct transmission.
fn gaussian_fixed_fidelity(n: usize, targets: &[f64]) -> Vec<(String, SweepConfig)> {
    let g = grid(400.0, 5.0);
    let mut parts: Vec<(String, SweepConfig)> = targets
        .iter()
        .map(|&f| (format!("gaussian_w{n}_f{f}"), config(Scenario::GaussianW, n, 1, fidelities(&[f]), g)))
        .collect();
    parts.push((format!("direct_w{n}"), config(Scenario::BenchmarkDirect, n, 1, SourceParameter::None, g)));
    parts
}

fn gaussian_squeezing_sweep() -> Vec<(String, SweepConfig)> {
    let g = grid(400.0, 5.0);
    GAUSSIAN_SQUEEZING_DB
        .iter()
        .map(|&db| {
            (format!("gaussian_w2_{db}dB"), config(Scenario::GaussianW, 2, 1, SourceParameter::SqueezingDb(vec![db]), g))
        })
        .collect()
}

/// Repeater rate against the number of parties at 50 km per arm.
fn rate_versus_parties() -> CliResult<Dataset> {
    let distance_km = 50.0;
    let channel = LossChannel::from_fiber(distance_km, DEFAULT_GAMMA_DB_PER_KM)?;
    let mut d = Dataset::new(["series", "n_parties", "distance_km", "arm_transmittance", "rate", "fidelity", "asymptote"]);
    for n in 2..=64usize {
        d.push(vec![
            "repeater".into(),
            n.into(),
            distance_km.into(),
            channel.transmittance().into(),
            rate_at_fixed_fidelity(n, IDEAL_FIDELITY, &channel)?.into(),
            IDEAL_FIDELITY.into(),
            fixed_fidelity_asymptote(IDEAL_FIDELITY, &channel).into(),
        ]);
    }
    Ok(d)
}

/// Runs the named preset.
pub fn reproduce(name: &str) -> CliResult<Dataset> {
    let parts = match name {
        "fig3" => {
            let g = grid(300.0, 5.0);
            vec![
                ("repeater".into(), config(Scenario::FixedFidelityCurve, 3, 1, fidelities(&[IDEAL_FIDELITY]), g)),
                ("direct".into(), config(Scenario::BenchmarkDirect, 3, 1, SourceParameter::None, g)),
                ("squashed".into(), config(Scenario::BenchmarkSquashed, 3, 1, SourceParameter::None, g)),
            ]
        }
        "fig5" => return rate_versus_parties(),
        "fig6" => ideal_comparison(&[2, 3, 4]),
        "fig7" => {
            let g = grid(300.0, 5.0);
            let mut parts = Vec::new();
            for f in [0.95, 0.99] {
                parts.push((format!("repeater_w4_f{f}"), config(Scenario::IdealW, 4, 1, fidelities(&[f]), g)));
                parts.push((format!("repeater_d42_f{f}"), config(Scenario::IdealDicke, 4, 2, fidelities(&[f]), g)));
            }
            parts.push(("direct_w4".into(), config(Scenario::BenchmarkDirect, 4, 1, SourceParameter::None, g)));
            parts
        }
        "fig8" => {
            let mut parts = gaussian_squeezing_sweep();
            parts.push(("leading_f0.99".into(), config(Scenario::FixedFidelityCurve, 2, 1, fidelities(&[0.99]), grid(400.0, 5.0))));
            parts
        }
        "fig9" => gaussian_squeezing_sweep(),
        "fig10" => gaussian_fixed_fidelity(2, &[0.85, 0.9, 0.95, 0.97]),
        "fig11" => gaussian_fixed_fidelity(3, &[0.85, 0.9, 0.95, 0.97, 0.99]),
        "fig12" => gaussian_fixed_fidelity(4, &[0.85, 0.9, 0.95, 0.97, 0.99]),
        "fig13" => {
            let g = grid(400.0, 5.0);
            [2, 3, 4]
                .into_iter()
                .map(|n| (format!("gaussian_w{n}_f0.99"), config(Scenario::GaussianW, n, 1, fidelities(&[0.99]), g)))
                .collect()
        }
        other => {
            return Err(CliError::usage(format!("unknown preset {other}; expected one of {}", PRESETS.join(", "))));
        }
    };
    run_all(parts)
}
