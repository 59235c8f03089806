//! Repeaterless baselines for the star network: direct transmission of an
//! `N`-photon entangled state from the centre, and an upper bound on the
//! rate of distilling tripartite W states from such transmissions.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::fock::{enumerate_single_occupancy, OccupationVector, PureFockState};
use crate::linear_optics::{apply_loss, fiber_transmittance, LossChannel};

/// Identical arms of transmittance `η` joining the centre to `m` receivers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StarChannel {
    arm_transmittance: f64,
    n_arms: usize,
}

impl StarChannel {
    pub fn new(arm_transmittance: f64, n_arms: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&arm_transmittance) {
            return domain(format!("arm transmittance must lie in [0, 1], got {arm_transmittance}"));
        }
        Ok(Self { arm_transmittance, n_arms })
    }

    pub fn from_fiber(distance_km: f64, gamma_db_per_km: f64, n_arms: usize) -> Result<Self> {
        let ch = LossChannel::from_fiber(distance_km, gamma_db_per_km)?;
        Self::new(ch.transmittance(), n_arms)
    }

    pub fn arm_transmittance(&self) -> f64 {
        self.arm_transmittance
    }

    pub fn n_arms(&self) -> usize {
        self.n_arms
    }
}

/// Success probability `η^N` of sending one photon down each of `N` arms.
pub fn direct_rate(n_parties: usize, channel: &StarChannel) -> Result<f64> {
    if n_parties == 0 {
        return domain("direct transmission needs at least one party");
    }
    Ok(channel.arm_transmittance.powi(n_parties as i32))
}

/// Direct rate for a fibre of `distance_km` per arm.
pub fn direct_rate_fiber(n_parties: usize, distance_km: f64, gamma_db_per_km: f64) -> Result<f64> {
    direct_rate(n_parties, &StarChannel::new(fiber_transmittance(distance_km, gamma_db_per_km), n_parties)?)
}

fn plogp(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

/// Shannon binary entropy in bits.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return domain(format!("binary entropy needs x in [0, 1], got {x}"));
    }
    Ok(plogp(x) + plogp(1.0 - x))
}

/// `-Σ λ log2 λ` over a spectrum. Round-off negatives down to -1e-12 are
/// treated as zero.
pub fn von_neumann_entropy(eigenvalues: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    for &l in eigenvalues {
        if l < -1e-12 || !l.is_finite() {
            return domain(format!("eigenvalue {l} is not a probability"));
        }
        sum += l.max(0.0);
    }
    if sum > 1.0 + 1e-12 {
        return domain(format!("eigenvalues sum to {sum} > 1"));
    }
    Ok(eigenvalues.iter().map(|&l| plogp(l.max(0.0))).sum())
}

/// Squashed-entanglement bound on the W₃ distillation rate after direct
/// transmission through arms of transmittance `eta`, using a fixed 50:50
/// squashing channel on the environment.
pub fn squashed_bound_w3(eta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta) {
        return domain(format!("eta must lie in [0, 1], got {eta}"));
    }
    let h_ae = von_neumann_entropy(&[(3.0 - eta) / 6.0, (3.0 + eta) / 6.0])?;
    // ρ_E and ρ_SE share this spectrum
    let h_e = von_neumann_entropy(&[(1.0 - eta) / 2.0, (1.0 + eta) / 2.0])?;
    let h_se = h_e;
    let norm = 3.0 * binary_entropy(1.0 / 3.0)?;
    Ok((3.0 * h_ae - 2.0 * h_e - h_se) / norm)
}

/// Converts a squashed-entanglement value into a bound on the rate of
/// distilling `m`-partite W states: `2 E_sq / (m h₂(1/m))`.
pub fn squashed_bound_general(m: usize, e_sq: f64) -> Result<f64> {
    if m < 2 {
        return domain(format!("need at least two parties, got {m}"));
    }
    if e_sq.is_nan() || e_sq < 0.0 {
        return domain(format!("squashed entanglement must be non-negative, got {e_sq}"));
    }
    Ok(2.0 * e_sq / (m as f64 * binary_entropy(1.0 / m as f64)?))
}

/// The purified state behind [`squashed_bound_w3`], built mode by mode: a W₃
/// state on receivers `A1 A2 A3` loses photons to `E` with transmittance `eta`,
/// and each `E_i` is split 50:50 with a fresh vacuum `E'_i`.
pub fn squashing_purification(eta: f64) -> Result<PureFockState> {
    if !(0.0..=1.0).contains(&eta) {
        return domain(format!("eta must lie in [0, 1], got {eta}"));
    }
    let amp = Complex64::new(1.0 / 3f64.sqrt(), 0.0);
    let terms = enumerate_single_occupancy(3, 1)?
        .into_iter()
        .map(|w| (w.concat(&OccupationVector::vacuum(6)), amp));
    let mut state = PureFockState::from_terms(&[("A1", 1), ("A2", 1), ("A3", 1), ("E", 3), ("E'", 3)], terms)?;
    let arm = LossChannel::new(eta)?;
    let squash = LossChannel::new(0.5)?;
    for i in 0..3 {
        state = apply_loss(&arm, &state, i, 3 + i)?;
    }
    for i in 0..3 {
        state = apply_loss(&squash, &state, 3 + i, 6 + i)?;
    }
    Ok(state)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_spectrum(rho: &DMatrix<Complex64>) -> Vec<f64> {
    let mut eig: Vec<f64> = rho.clone().symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig
}
