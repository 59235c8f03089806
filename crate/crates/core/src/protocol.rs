//! Heralded Dicke/W state distribution over a lossy star network.
//!
//! Each of the `N` parties prepares `a|00> + b|11>` on a retained mode `X_i`
//! and a shared mode `X'_i`. The shared modes travel through identical lossy
//! arms to a central station, are mixed by a Hadamard tree and detected. A
//! pattern with `M` photons heralds the retained register close to the
//! Dicke state `D(N, M)`.
//!
//! Two routes are provided for every probability: closed forms summing
//! permanents over input combinations, and an exact state-vector simulation
//! ([`simulate_station`]) that keeps the loss environments as explicit modes.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::fock::{enumerate_single_occupancy, DickeSpec, OccupationVector, PureFockState};
use crate::linear_optics::{apply_interferometer, apply_loss, hadamard_tree, transition_amplitude, InterferometerMatrix, LossChannel};
use crate::math::{binomial, factorial, next_power_of_two};

pub const RETAINED: &str = "X";
pub const SHARED: &str = "X'";
pub const ENVIRONMENT: &str = "E";

/// Parameters of one protocol run.
#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolParams {
    n_parties: usize,
    herald_photons: usize,
    b: f64,
    channel: LossChannel,
    interferometer: InterferometerMatrix,
}

impl ProtocolParams {
    /// Uses the Hadamard tree on the next power of two above `n_parties`;
    /// unused tree inputs stay in vacuum.
    pub fn new(n_parties: usize, herald_photons: usize, b: f64, channel: LossChannel) -> Result<Self> {
        if n_parties == 0 {
            return domain("at least one party is required");
        }
        let tree = hadamard_tree(next_power_of_two(n_parties))?;
        Self::with_interferometer(n_parties, herald_photons, b, channel, tree)
    }

    /// Custom mixing circuit; its dimension must be at least `n_parties`.
    pub fn with_interferometer(
        n_parties: usize,
        herald_photons: usize,
        b: f64,
        channel: LossChannel,
        interferometer: InterferometerMatrix,
    ) -> Result<Self> {
        if n_parties == 0 {
            return domain("at least one party is required");
        }
        if herald_photons > n_parties {
            return domain(format!("herald photons M={herald_photons} exceed parties N={n_parties}"));
        }
        if !(0.0..=1.0).contains(&b) {
            return domain(format!("source amplitude b must lie in [0, 1], got {b}"));
        }
        if interferometer.dim() < n_parties {
            return domain(format!(
                "interferometer has {} modes, fewer than {n_parties} parties",
                interferometer.dim()
            ));
        }
        if b * b > 0.5 {
            log::warn!("b^2 = {} > 0.5: small-b approximations are unreliable", b * b);
        }
        Ok(Self { n_parties, herald_photons, b, channel, interferometer })
    }

    pub fn n_parties(&self) -> usize {
        self.n_parties
    }

    pub fn herald_photons(&self) -> usize {
        self.herald_photons
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `a = √(1 - b²)`.
    pub fn a(&self) -> f64 {
        (1.0 - self.b * self.b).sqrt()
    }

    pub fn channel(&self) -> &LossChannel {
        &self.channel
    }

    pub fn transmittance(&self) -> f64 {
        self.channel.transmittance()
    }

    pub fn interferometer(&self) -> &InterferometerMatrix {
        &self.interferometer
    }

    /// Number of detectors (interferometer outputs).
    pub fn n_detectors(&self) -> usize {
        self.interferometer.dim()
    }

    /// Same run with a different herald photon number.
    pub fn with_herald_photons(&self, herald_photons: usize) -> Result<Self> {
        Self::with_interferometer(self.n_parties, herald_photons, self.b, self.channel, self.interferometer.clone())
    }

    pub fn with_channel(&self, channel: LossChannel) -> Self {
        Self { channel, ..self.clone() }
    }

    /// Amplitude `a^(N-K) b^K` of a `K`-photon source term.
    fn source_amplitude(&self, k: usize) -> f64 {
        self.a().powi((self.n_parties - k) as i32) * self.b.powi(k as i32)
    }

    /// Embeds a party-indexed vector into the detector-sized shared register.
    fn embed(&self, parties: &OccupationVector) -> OccupationVector {
        let mut counts = parties.counts().to_vec();
        counts.resize(self.n_detectors(), 0);
        OccupationVector::new(counts)
    }

    fn check_pattern(&self, pattern: &OccupationVector) -> Result<()> {
        if pattern.n_modes() != self.n_detectors() {
            return Err(Error::RegisterMismatch(format!(
                "pattern {pattern} has {} entries, the station has {} detectors",
                pattern.n_modes(),
                self.n_detectors()
            )));
        }
        if pattern.total() as usize != self.herald_photons {
            return Err(Error::PhotonNumber { expected: self.herald_photons as u32, found: pattern.total() });
        }
        Ok(())
    }
}

/// Joint state of the retained modes `X`, the shared modes `X'` after the
/// lossy arms, and the loss environments `E`.
pub fn build_network_state(params: &ProtocolParams) -> Result<PureFockState> {
    let n = params.n_parties;
    let d = params.n_detectors();
    let layout = [(RETAINED, n), (SHARED, d), (ENVIRONMENT, n)];
    let terms = (0..=n).flat_map(|k| {
        let amp = Complex64::new(params.source_amplitude(k), 0.0);
        enumerate_single_occupancy(n, k)
            .expect("k <= n")
            .into_iter()
            .map(move |f| {
                let shared = params.embed(&f);
                let env = OccupationVector::vacuum(n);
                (f.concat(&shared).concat(&env), amp)
            })
    });
    let mut state = PureFockState::from_terms(&layout, terms)?;
    for party in 0..n {
        state = apply_loss(&params.channel, &state, n + party, n + d + party)?;
    }
    Ok(state)
}

/// The network state after the station's interferometer, before detection.
pub fn simulate_station(params: &ProtocolParams) -> Result<PureFockState> {
    let state = build_network_state(params)?;
    apply_interferometer(&params.interferometer, &state, SHARED)
}

/// One heralding event obtained from the exact simulation.
#[derive(Clone, Debug, PartialEq)]
pub struct HeraldOutcome {
    pub pattern: OccupationVector,
    pub probability: f64,
    /// Normalised conditional state on `X ⊗ E`; the environment purifies the
    /// mixed state of the retained modes.
    pub conditional_state: PureFockState,
    /// Phase-optimised fidelity of the retained modes with `D(N, M)`.
    pub fidelity_to_dicke: f64,
}

/// Projects a simulated station state onto a detection pattern.
pub fn herald_from_station(params: &ProtocolParams, station: &PureFockState, pattern: &OccupationVector) -> Result<HeraldOutcome> {
    params.check_pattern(pattern)?;
    if params.herald_photons == 0 {
        return Err(Error::UninformativeHerald);
    }
    let remainder = station.partial_projection(SHARED, pattern)?;
    let probability = remainder.norm_sqr();
    if probability == 0.0 {
        return Err(Error::ZeroProbability);
    }
    let conditional_state = remainder.normalize()?;
    let fidelity_to_dicke = phase_optimized_fidelity(&conditional_state, params.n_parties, params.herald_photons)?;
    Ok(HeraldOutcome { pattern: pattern.clone(), probability, conditional_state, fidelity_to_dicke })
}

/// Exact simulation of a single heralding event.
pub fn simulate_herald(params: &ProtocolParams, pattern: &OccupationVector) -> Result<HeraldOutcome> {
    params.check_pattern(pattern)?;
    herald_from_station(params, &simulate_station(params)?, pattern)
}

/// Best overlap of the retained modes with any generalised Dicke state:
/// only the vacuum-environment branch has `M` retained photons, and the
/// optimal phases align every term of that branch.
fn phase_optimized_fidelity(conditional: &PureFockState, n: usize, m: usize) -> Result<f64> {
    let branch = conditional.partial_projection(ENVIRONMENT, &OccupationVector::vacuum(n))?;
    let basis = enumerate_single_occupancy(n, m)?;
    let sum: f64 = basis.iter().map(|f| branch.amplitude(f).norm()).sum();
    Ok(sum * sum / basis.len() as f64 / conditional.norm_sqr())
}

/// Closed-form probability of detecting `pattern`:
///
/// `p_s = Σ_K (a^(N-K) b^K)² T^M (1-T)^(K-M) Σ_k Σ_m |<s|U|g_m^(k)>|²`
///
/// where `k` runs over the `K`-party emission sets and `g_m^(k)` over the
/// `M`-photon subsets of each that survive the arms.
pub fn herald_probability_exact(params: &ProtocolParams, pattern: &OccupationVector) -> Result<f64> {
    params.check_pattern(pattern)?;
    let n = params.n_parties;
    let m = params.herald_photons;
    let t = params.transmittance();
    let mut survivor_weight: HashMap<OccupationVector, f64> = HashMap::new();
    let mut total = 0.0;
    for k in m..=n {
        let weight = params.source_amplitude(k).powi(2) * t.powi(m as i32) * (1.0 - t).powi((k - m) as i32);
        if weight == 0.0 {
            continue;
        }
        let mut inner = 0.0;
        for emitted in enumerate_single_occupancy(n, k)? {
            let modes = emitted.mode_list();
            for subset in enumerate_single_occupancy(k, m)? {
                let mut survivors = vec![0u32; n];
                for (slot, &present) in subset.counts().iter().enumerate() {
                    survivors[modes[slot]] = present;
                }
                let survivors = OccupationVector::new(survivors);
                let p = match survivor_weight.get(&survivors) {
                    Some(&p) => p,
                    None => {
                        let amp = transition_amplitude(&params.interferometer, &params.embed(&survivors), pattern)?;
                        *survivor_weight.entry(survivors).or_insert(amp.norm_sqr())
                    }
                };
                inner += p;
            }
        }
        total += weight * inner;
    }
    Ok(total)
}

/// Leading small-`T` rate of a single-detector `M`-photon herald:
/// `T^M b^(2M) C(N,M) M! / D^M`, with `D` the number of detectors
/// (`D = N` for power-of-two `N`).
pub fn herald_probability_leading(params: &ProtocolParams) -> f64 {
    let n = params.n_parties;
    let m = params.herald_photons;
    let d = params.n_detectors() as f64;
    params.transmittance().powi(m as i32)
        * params.b.powi(2 * m as i32)
        * binomial(n, m) as f64
        * factorial(m as u32)
        / d.powi(m as i32)
}

/// Probability that exactly `M` photons reach the station.
pub fn arrival_probability(params: &ProtocolParams) -> f64 {
    let n = params.n_parties;
    let m = params.herald_photons;
    let t = params.transmittance();
    (m..=n)
        .map(|k| {
            let amp = params.source_amplitude(k) * t.sqrt().powi(m as i32) * (1.0 - t).sqrt().powi((k - m) as i32);
            amp * amp * binomial(n, k) as f64 * binomial(k, m) as f64
        })
        .sum()
}

/// Fidelity of the heralded retained state with a Dicke target.
///
/// Without target phases the fidelity is maximised over the generalised
/// Dicke family (each overlap enters by magnitude); with phases the overlap
/// is taken with that fixed state.
pub fn conditional_fidelity(params: &ProtocolParams, pattern: &OccupationVector, target: &DickeSpec) -> Result<f64> {
    params.check_pattern(pattern)?;
    let n = params.n_parties;
    let m = params.herald_photons;
    if m == 0 {
        return Err(Error::UninformativeHerald);
    }
    if target.n_modes() != n || target.n_photons() != m {
        return domain(format!(
            "target D({}, {}) does not match N={n}, M={m}",
            target.n_modes(),
            target.n_photons()
        ));
    }
    let p_s = herald_probability_exact(params, pattern)?;
    if p_s <= 0.0 {
        return Err(Error::ZeroProbability);
    }
    let basis = enumerate_single_occupancy(n, m)?;
    let amplitudes: Vec<Complex64> = basis
        .iter()
        .map(|f| transition_amplitude(&params.interferometer, &params.embed(f), pattern))
        .collect::<Result<_>>()?;
    let overlap_sqr = match target.phases() {
        None => amplitudes.iter().map(|a| a.norm()).sum::<f64>().powi(2),
        Some(phases) => amplitudes
            .iter()
            .zip(phases)
            .map(|(a, &phi)| a * Complex64::from_polar(1.0, -phi))
            .sum::<Complex64>()
            .norm_sqr(),
    };
    let prefactor = params.source_amplitude(m).powi(2) * params.transmittance().powi(m as i32);
    Ok((prefactor * overlap_sqr / basis.len() as f64 / p_s).min(1.0))
}

/// Source amplitude `b` whose small-`T` fidelity `a^(2(N-M))` equals `fidelity`.
pub fn b_for_fidelity(n_parties: usize, herald_photons: usize, fidelity: f64) -> Result<f64> {
    if !(fidelity > 0.0 && fidelity < 1.0) {
        return domain(format!("fidelity must lie in (0, 1), got {fidelity}"));
    }
    if herald_photons >= n_parties {
        return domain("fidelity is independent of b when M = N");
    }
    let exponent = 1.0 / (n_parties - herald_photons) as f64;
    Ok((1.0 - fidelity.powf(exponent)).sqrt())
}

/// Aggregate single-photon click rate at fixed small-`T` fidelity:
/// `N (1 - F^(1/(N-1))) T`.
pub fn rate_at_fixed_fidelity(n_parties: usize, fidelity: f64, channel: &LossChannel) -> Result<f64> {
    if n_parties < 2 {
        return domain(format!("fixed-fidelity rate needs N >= 2, got {n_parties}"));
    }
    if !(fidelity > 0.0 && fidelity < 1.0) {
        return domain(format!("fidelity must lie in (0, 1), got {fidelity}"));
    }
    let n = n_parties as f64;
    Ok(n * (1.0 - fidelity.powf(1.0 / (n - 1.0))) * channel.transmittance())
}

/// `T ln(1/F)`, the large-`N` limit of [`rate_at_fixed_fidelity`].
pub fn fixed_fidelity_asymptote(fidelity: f64, channel: &LossChannel) -> f64 {
    channel.transmittance() * (1.0 / fidelity).ln()
}

/// Per-party phase flips (`0` or `π`) that turn the W state heralded by a
/// single click into the all-positive W state: party `k` flips iff
/// `<s|U|k>` is negative.
pub fn feedforward_correction(n_parties: usize, pattern: &OccupationVector) -> Result<Vec<f64>> {
    if n_parties == 0 {
        return domain("at least one party is required");
    }
    let tree = hadamard_tree(next_power_of_two(n_parties))?;
    if pattern.n_modes() != tree.dim() {
        return Err(Error::RegisterMismatch(format!(
            "pattern {pattern} does not match {} detectors",
            tree.dim()
        )));
    }
    if pattern.total() != 1 {
        return Err(Error::Unsupported(format!(
            "feed-forward correction is defined for single-photon heralds, got {pattern}"
        )));
    }
    let detector = pattern.mode_list()[0];
    Ok((0..n_parties)
        .map(|k| if tree.entry(detector, k).re < 0.0 { std::f64::consts::PI } else { 0.0 })
        .collect())
}

/// Total rate of single-detector `M`-photon heralds summed over detectors.
pub fn single_detector_rate(params: &ProtocolParams) -> Result<f64> {
    let d = params.n_detectors();
    (0..d)
        .map(|det| {
            let mut counts = vec![0u32; d];
            counts[det] = params.herald_photons as u32;
            herald_probability_exact(params, &OccupationVector::new(counts))
        })
        .sum()
}

/// Pattern with all `M` photons on detector `detector`.
pub fn single_detector_pattern(params: &ProtocolParams, detector: usize) -> OccupationVector {
    let mut counts = vec![0u32; params.n_detectors()];
    counts[detector] = params.herald_photons as u32;
    OccupationVector::new(counts)
}
