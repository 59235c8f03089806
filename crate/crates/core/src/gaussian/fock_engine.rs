//! Truncated Fock-space reference for the continuous-variable protocol.
//!
//! Each source is expanded as `√(1-λ²) Σ_{n≤c} λⁿ |n⟩_X |n⟩_X'`. The shared
//! modes are propagated photon by photon: arm loss, the beam-splitter tree
//! and the detector's efficiency loss, each purified into its own
//! environment mode.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::fock::{enumerate_single_occupancy, OccupationVector, PureFockState};
use crate::gaussian::{DetectorModel, SqueezingSpec};
use crate::linear_optics::{
    apply_layers, apply_loss, hadamard_tree, hadamard_tree_layers, permanent_repeated, BeamSplitterStep, LossChannel,
};
use crate::math::{binomial, factorial, next_power_of_two};
use crate::protocol::SHARED;

/// Default per-source tail mass beyond the cutoff.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-10;

/// Arm-loss outcomes lighter than this are dropped from the click sum.
const NEGLIGIBLE_WEIGHT: f64 = 1e-18;

/// Truncated-Fock model of one operating point, heralded on the first
/// detector.
#[derive(Clone, Debug)]
pub struct FockEngine {
    n_parties: usize,
    n_detectors: usize,
    lambda: f64,
    arm: LossChannel,
    detector: DetectorModel,
    source_cutoff: u32,
    layers: Vec<Vec<BeamSplitterStep>>,
    /// `U† diag(1-η, 1, ..., 1) U`: single-photon no-click operator.
    no_click_operator: DMatrix<Complex64>,
}

impl FockEngine {
    pub fn new(
        n_parties: usize,
        squeezing: SqueezingSpec,
        arm: LossChannel,
        detector: DetectorModel,
        source_cutoff: u32,
    ) -> Result<Self> {
        if n_parties < 2 {
            return domain(format!("need at least two parties, got {n_parties}"));
        }
        let n_detectors = next_power_of_two(n_parties);
        let u = hadamard_tree(n_detectors)?;
        let mut damp = DMatrix::<Complex64>::identity(n_detectors, n_detectors);
        damp[(0, 0)] = Complex64::new(1.0 - detector.efficiency(), 0.0);
        let no_click_operator = u.matrix().adjoint() * damp * u.matrix();
        Ok(Self {
            n_parties,
            n_detectors,
            lambda: squeezing.lambda(),
            arm,
            detector,
            source_cutoff,
            layers: hadamard_tree_layers(n_detectors)?,
            no_click_operator,
        })
    }

    /// Cutoff `c` is the smallest with per-source tail mass `λ^{2(c+1)} < tolerance`.
    pub fn with_tail_tolerance(
        n_parties: usize,
        squeezing: SqueezingSpec,
        arm: LossChannel,
        detector: DetectorModel,
        tolerance: f64,
    ) -> Result<Self> {
        if !(tolerance > 0.0 && tolerance < 1.0) {
            return domain(format!("tail tolerance must lie in (0, 1), got {tolerance}"));
        }
        Self::new(n_parties, squeezing, arm, detector, cutoff_for_tail(squeezing.lambda(), tolerance))
    }

    pub fn source_cutoff(&self) -> u32 {
        self.source_cutoff
    }

    /// Source amplitude `√(1-λ²) λⁿ`.
    fn source_amplitude(&self, n: u32) -> f64 {
        (1.0 - self.lambda * self.lambda).sqrt() * self.lambda.powi(n as i32)
    }

    /// Probability that `m` of `n` photons survive the arm.
    fn survival(&self, n: u32, m: u32) -> f64 {
        let t = self.arm.transmittance();
        binomial(n as usize, m as usize) as f64 * t.powi(m as i32) * (1.0 - t).powi((n - m) as i32)
    }

    /// Probability of finding `m` photons in one shared mode at the station.
    fn arrival_weight(&self, m: u32) -> f64 {
        (m..=self.source_cutoff)
            .map(|n| self.source_amplitude(n).powi(2) * self.survival(n, m))
            .sum()
    }

    /// No-click probability given `arrived` photons at the tree inputs:
    /// `<m|Γ(V)|m> = perm(V_(m,m)) / m!` for the single-photon operator `V`.
    fn no_click_given_arrival(&self, arrived: &[u32]) -> f64 {
        let mut counts = arrived.to_vec();
        counts.resize(self.n_detectors, 0);
        let fact: f64 = counts.iter().map(|&k| factorial(k)).product();
        permanent_repeated(&self.no_click_operator, &counts, &counts).re / fact
    }

    /// Same quantity by propagating the Fock state through the splitters.
    pub fn no_click_by_propagation(&self, arrived: &[u32]) -> Result<f64> {
        let mut counts = arrived.to_vec();
        counts.resize(self.n_detectors, 0);
        let input = PureFockState::from_terms(
            &[(SHARED, self.n_detectors)],
            [(OccupationVector::new(counts), Complex64::new(1.0, 0.0))],
        )?;
        let out = apply_layers(&self.layers, &input, SHARED)?;
        let miss = 1.0 - self.detector.efficiency();
        Ok(out.terms().map(|(occ, a)| a.norm_sqr() * miss.powi(occ.get(0) as i32)).sum())
    }

    /// Physical click probability `Σ q(m) (1 - P₀(m))` over the retained
    /// arrival patterns. Truncation only removes mass, so this is a lower
    /// bound on the untruncated value.
    pub fn detection_probability(&self) -> Result<f64> {
        let weights: Vec<f64> = (0..=self.source_cutoff).map(|m| self.arrival_weight(m)).collect();
        let mut patterns: Vec<(Vec<u32>, f64)> = Vec::new();
        let mut counts = vec![0u32; self.n_parties];
        loop {
            let q: f64 = counts.iter().map(|&m| weights[m as usize]).product();
            if q >= NEGLIGIBLE_WEIGHT && counts.iter().any(|&m| m > 0) {
                patterns.push((counts.clone(), q));
            }
            // odometer over 0..=cutoff per party
            let mut i = 0;
            loop {
                if i == counts.len() {
                    return self.sum_patterns(patterns);
                }
                counts[i] += 1;
                if counts[i] <= self.source_cutoff {
                    break;
                }
                counts[i] = 0;
                i += 1;
            }
        }
    }

    fn sum_patterns(&self, patterns: Vec<(Vec<u32>, f64)>) -> Result<f64> {
        let terms: Vec<f64> = patterns.par_iter().map(|(m, q)| q * (1.0 - self.no_click_given_arrival(m))).collect();
        Ok(terms.iter().sum())
    }

    /// `1 - p₀ + p_dc` with `1 - p₀` from [`Self::detection_probability`].
    pub fn click_probability(&self) -> Result<f64> {
        Ok(self.detection_probability()? + self.detector.dark_count_prob())
    }

    /// State of the station and environments given `n` photons sent from
    /// each source: registers `X'`, arm environment `E`, detector loss `L`.
    pub fn propagate(&self, sent: &OccupationVector) -> Result<PureFockState> {
        if sent.n_modes() != self.n_parties {
            return Err(Error::RegisterMismatch(format!(
                "{} sources, vector has {} modes",
                self.n_parties,
                sent.n_modes()
            )));
        }
        let d = self.n_detectors;
        let mut counts = sent.counts().to_vec();
        counts.resize(d + self.n_parties + 1, 0);
        let mut state = PureFockState::from_terms(
            &[(SHARED, d), ("E", self.n_parties), ("L", 1)],
            [(OccupationVector::new(counts), Complex64::new(1.0, 0.0))],
        )?;
        for i in 0..self.n_parties {
            state = apply_loss(&self.arm, &state, i, d + i)?;
        }
        state = apply_layers(&self.layers, &state, SHARED)?;
        apply_loss(&LossChannel::new(self.detector.efficiency())?, &state, 0, d + self.n_parties)
    }

    fn vacuum_on_detector(state: &PureFockState) -> PureFockState {
        let kept: BTreeMap<OccupationVector, Complex64> =
            state.terms().filter(|(occ, _)| occ.get(0) == 0).map(|(o, a)| (o.clone(), *a)).collect();
        state.with_terms(kept)
    }

    fn check(&self, v: &OccupationVector) -> Result<f64> {
        if v.n_modes() != self.n_parties {
            return Err(Error::RegisterMismatch(format!("vector {v} does not fit {} parties", self.n_parties)));
        }
        if let Some(&too_many) = v.counts().iter().find(|&&c| c > self.source_cutoff) {
            return Err(Error::CutoffExceeded { requested: too_many, cutoff: self.source_cutoff });
        }
        Ok(v.counts().iter().map(|&n| self.source_amplitude(n)).product())
    }

    /// Matrix elements of `ρ_X` and of `Tr_{X'}(ρ |0⟩⟨0|)` on the first
    /// detector, in that order.
    pub fn reduced_elements(
        &self,
        bras: &[OccupationVector],
        kets: &[OccupationVector],
    ) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
        let mut cache: HashMap<OccupationVector, (f64, PureFockState, PureFockState)> = HashMap::new();
        for v in bras.iter().chain(kets) {
            if !cache.contains_key(v) {
                let c = self.check(v)?;
                let full = self.propagate(v)?;
                let projected = Self::vacuum_on_detector(&full);
                cache.insert(v.clone(), (c, full, projected));
            }
        }
        let mut rho = DMatrix::zeros(bras.len(), kets.len());
        let mut proj = DMatrix::zeros(bras.len(), kets.len());
        for (i, bra) in bras.iter().enumerate() {
            for (j, ket) in kets.iter().enumerate() {
                let (cb, full_b, proj_b) = &cache[bra];
                let (ck, full_k, proj_k) = &cache[ket];
                // <bra|ρ|ket> = c_bra c_ket <Φ_ket|Φ_bra>
                rho[(i, j)] = full_k.inner(full_b)? * (cb * ck);
                proj[(i, j)] = proj_k.inner(proj_b)? * (cb * ck);
            }
        }
        Ok((rho, proj))
    }

    /// Fock elements of the heralded state `σ_X`.
    pub fn conditional_state_fock_elements(
        &self,
        bras: &[OccupationVector],
        kets: &[OccupationVector],
    ) -> Result<DMatrix<Complex64>> {
        let (rho, proj) = self.reduced_elements(bras, kets)?;
        let norm = self.click_probability()?;
        if norm.is_nan() || norm <= 0.0 {
            return Err(Error::ZeroProbability);
        }
        let p_dc = self.detector.dark_count_prob();
        Ok((rho * Complex64::new(1.0 + p_dc, 0.0) - proj) / Complex64::new(norm, 0.0))
    }

    /// Fidelity of `σ_X` with the zero-phase `W_N`.
    pub fn w_fidelity(&self) -> Result<f64> {
        let singles = enumerate_single_occupancy(self.n_parties, 1)?;
        let m = self.conditional_state_fock_elements(&singles, &singles)?;
        Ok(m.sum().re / self.n_parties as f64)
    }
}

/// Smallest `c` with `λ^{2(c+1)} < tolerance`.
pub fn cutoff_for_tail(lambda: f64, tolerance: f64) -> u32 {
    if lambda == 0.0 {
        return 0;
    }
    let mut c = 0u32;
    while lambda.powi(2 * (c as i32 + 1)) >= tolerance {
        c += 1;
    }
    c
}
