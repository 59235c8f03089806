//! Continuous-variable version of the protocol: two-mode squeezed vacuum
//! sources, Gaussian propagation through loss and the mixing circuit, an
//! on/off detector with dark counts and inefficiency, and the fidelity of the
//! heralded state to `W_N`.
//!
//! Covariances use interleaved quadratures `(x_1, p_1, ..., x_n, p_n)` with
//! the vacuum covariance equal to the identity. All states are zero-mean.

pub mod fock_engine;
pub mod hafnian;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::fock::{build_layout, enumerate_single_occupancy, find_register, OccupationVector, Register};
use crate::linear_optics::{hadamard_tree, InterferometerMatrix, LossChannel};
use crate::math::next_power_of_two;
use crate::protocol::{RETAINED, SHARED};

pub use fock_engine::FockEngine;
pub use hafnian::{hafnian, GaussianFockElements};

/// Tolerance on the smallest eigenvalue of `σ + iΩ`.
pub const PHYSICALITY_TOLERANCE: f64 = 1e-10;

/// Squeezing of one two-mode squeezed vacuum source.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezingSpec {
    r: f64,
}

impl SqueezingSpec {
    pub fn from_r(r: f64) -> Result<Self> {
        if !r.is_finite() || r < 0.0 {
            return domain(format!("squeezing parameter must be finite and >= 0, got {r}"));
        }
        Ok(Self { r })
    }

    pub fn from_db(db: f64) -> Result<Self> {
        Self::from_r(db * std::f64::consts::LN_10 / 20.0)
    }

    pub fn from_lambda(lambda: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&lambda) {
            return domain(format!("lambda must lie in [0, 1), got {lambda}"));
        }
        Self::from_r(lambda.atanh())
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `10 log10 e^{2r}`.
    pub fn db(&self) -> f64 {
        20.0 * self.r / std::f64::consts::LN_10
    }

    /// `tanh r`.
    pub fn lambda(&self) -> f64 {
        self.r.tanh()
    }
}

/// Threshold detector preceded by an efficiency loss.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectorModel {
    dark_count_prob: f64,
    efficiency: f64,
    photon_number_resolving: bool,
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self { dark_count_prob: 1e-7, efficiency: 0.8, photon_number_resolving: false }
    }
}

impl DetectorModel {
    pub fn new(dark_count_prob: f64, efficiency: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&dark_count_prob) {
            return domain(format!("dark-count probability must lie in [0, 1], got {dark_count_prob}"));
        }
        if !(0.0..=1.0).contains(&efficiency) {
            return domain(format!("detector efficiency must lie in [0, 1], got {efficiency}"));
        }
        Ok(Self { dark_count_prob, efficiency, photon_number_resolving: false })
    }

    /// Unit efficiency, no dark counts.
    pub fn ideal() -> Self {
        Self { dark_count_prob: 0.0, efficiency: 1.0, photon_number_resolving: false }
    }

    pub fn dark_count_prob(&self) -> f64 {
        self.dark_count_prob
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    pub fn photon_number_resolving(&self) -> bool {
        self.photon_number_resolving
    }
}

/// Zero-mean Gaussian state over named registers.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState {
    registers: Vec<Register>,
    n_modes: usize,
    covariance: DMatrix<f64>,
    mean: DVector<f64>,
}

impl GaussianState {
    pub fn vacuum(layout: &[(&str, usize)]) -> Result<Self> {
        let registers = build_layout(layout)?;
        let n_modes = registers.iter().map(|r| r.width()).sum();
        Ok(Self {
            registers,
            n_modes,
            covariance: DMatrix::identity(2 * n_modes, 2 * n_modes),
            mean: DVector::zeros(2 * n_modes),
        })
    }

    /// Validates symmetry and the uncertainty principle.
    pub fn from_covariance(layout: &[(&str, usize)], covariance: DMatrix<f64>) -> Result<Self> {
        let registers = build_layout(layout)?;
        let n_modes: usize = registers.iter().map(|r| r.width()).sum();
        if covariance.nrows() != 2 * n_modes || covariance.ncols() != 2 * n_modes {
            return Err(Error::RegisterMismatch(format!(
                "covariance is {}x{}, layout needs {}x{}",
                covariance.nrows(),
                covariance.ncols(),
                2 * n_modes,
                2 * n_modes
            )));
        }
        let asym = (&covariance - covariance.transpose()).amax();
        if asym > 1e-12 * covariance.amax().max(1.0) {
            return Err(Error::NonPhysical(format!("covariance is not symmetric (defect {asym:e})")));
        }
        let state = Self { registers, n_modes, covariance, mean: DVector::zeros(2 * n_modes) };
        let margin = state.physicality_margin();
        if margin < -PHYSICALITY_TOLERANCE {
            return Err(Error::NonPhysical(format!("σ + iΩ has eigenvalue {margin:e}")));
        }
        Ok(state)
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn register(&self, name: &str) -> Result<&Register> {
        find_register(&self.registers, name)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    /// Smallest eigenvalue of `σ + iΩ`.
    pub fn physicality_margin(&self) -> f64 {
        let n = 2 * self.n_modes;
        let mut h = self.covariance.map(|x| Complex64::new(x, 0.0));
        for k in 0..self.n_modes {
            h[(2 * k, 2 * k + 1)] += Complex64::new(0.0, 1.0);
            h[(2 * k + 1, 2 * k)] -= Complex64::new(0.0, 1.0);
        }
        if n == 0 {
            return f64::INFINITY;
        }
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_physical(&self) -> bool {
        self.physicality_margin() >= -PHYSICALITY_TOLERANCE
    }

    /// Covariance of the listed modes, in the listed order.
    pub fn marginal(&self, modes: &[usize]) -> Result<DMatrix<f64>> {
        for &m in modes {
            self.check_mode(m)?;
        }
        let idx: Vec<usize> = modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        Ok(DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.covariance[(idx[i], idx[j])]))
    }

    /// Direct sum with `other`; register names must stay distinct.
    pub fn tensor(&self, other: &GaussianState) -> Result<Self> {
        let layout: Vec<(&str, usize)> = self
            .registers
            .iter()
            .chain(other.registers.iter())
            .map(|r| (r.name(), r.width()))
            .collect();
        let registers = build_layout(&layout)?;
        let n_modes = self.n_modes + other.n_modes;
        let mut covariance = DMatrix::zeros(2 * n_modes, 2 * n_modes);
        let a = 2 * self.n_modes;
        covariance.view_mut((0, 0), (a, a)).copy_from(&self.covariance);
        covariance.view_mut((a, a), (2 * other.n_modes, 2 * other.n_modes)).copy_from(&other.covariance);
        Ok(Self { registers, n_modes, covariance, mean: DVector::zeros(2 * n_modes) })
    }

    /// Absolute index of `offset` within register `name`.
    pub fn mode(&self, name: &str, offset: usize) -> Result<usize> {
        let reg = self.register(name)?;
        if offset >= reg.width() {
            return Err(Error::RegisterMismatch(format!("offset {offset} outside register `{name}`")));
        }
        Ok(reg.mode(offset))
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes {
            return Err(Error::RegisterMismatch(format!("mode {mode} out of range for {} modes", self.n_modes)));
        }
        Ok(())
    }

    fn with_covariance(&self, covariance: DMatrix<f64>) -> Self {
        Self { registers: self.registers.clone(), n_modes: self.n_modes, covariance, mean: self.mean.clone() }
    }
}

/// Two-mode squeezed vacuum on registers `A` and `B`.
pub fn tmsv(spec: SqueezingSpec) -> GaussianState {
    let mut state = GaussianState::vacuum(&[("A", 1), ("B", 1)]).expect("fixed layout");
    set_tmsv(&mut state.covariance, 0, 1, spec.r());
    state
}

fn set_tmsv(cov: &mut DMatrix<f64>, a: usize, b: usize, r: f64) {
    let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    for m in [a, b] {
        cov[(2 * m, 2 * m)] = ch;
        cov[(2 * m + 1, 2 * m + 1)] = ch;
    }
    cov[(2 * a, 2 * b)] = sh;
    cov[(2 * b, 2 * a)] = sh;
    cov[(2 * a + 1, 2 * b + 1)] = -sh;
    cov[(2 * b + 1, 2 * a + 1)] = -sh;
}

/// Pure loss of power transmittance `transmittance` on one mode.
pub fn gaussian_loss(state: &GaussianState, mode: usize, transmittance: f64) -> Result<GaussianState> {
    state.check_mode(mode)?;
    if !(0.0..=1.0).contains(&transmittance) {
        return domain(format!("transmittance must lie in [0, 1], got {transmittance}"));
    }
    let t = transmittance.sqrt();
    let mut cov = state.covariance.clone();
    let n = cov.nrows();
    for q in [2 * mode, 2 * mode + 1] {
        for j in 0..n {
            cov[(q, j)] *= t;
            cov[(j, q)] *= t;
        }
        cov[(q, q)] += 1.0 - transmittance;
    }
    Ok(state.with_covariance(cov))
}

/// Passive interferometer on a register, `a_out = U a_in`.
pub fn gaussian_unitary(state: &GaussianState, u: &InterferometerMatrix, register: &str) -> Result<GaussianState> {
    let reg = state.register(register)?;
    if reg.width() != u.dim() {
        return Err(Error::RegisterMismatch(format!(
            "interferometer has {} modes, register {register} has {}",
            u.dim(),
            reg.width()
        )));
    }
    let n = 2 * state.n_modes;
    let mut s = DMatrix::<f64>::identity(n, n);
    let start = reg.start();
    for out in 0..u.dim() {
        for inp in 0..u.dim() {
            let z = u.entry(out, inp);
            let (r, c) = (2 * (start + out), 2 * (start + inp));
            s[(r, c)] = z.re;
            s[(r, c + 1)] = -z.im;
            s[(r + 1, c)] = z.im;
            s[(r + 1, c + 1)] = z.re;
        }
    }
    let cov = &s * &state.covariance * s.transpose();
    Ok(state.with_covariance((&cov + cov.transpose()) * 0.5))
}

/// `(Var(x_a - x_b) + Var(p_a + p_b)) / 4`, equal to `e^{-2r}` for a TMSV.
pub fn epr_variance(state: &GaussianState, mode_a: usize, mode_b: usize) -> Result<f64> {
    state.check_mode(mode_a)?;
    state.check_mode(mode_b)?;
    let c = &state.covariance;
    let (xa, pa, xb, pb) = (2 * mode_a, 2 * mode_a + 1, 2 * mode_b, 2 * mode_b + 1);
    let var_x = c[(xa, xa)] + c[(xb, xb)] - 2.0 * c[(xa, xb)];
    let var_p = c[(pa, pa)] + c[(pb, pb)] + 2.0 * c[(pa, pb)];
    Ok((var_x + var_p) / 4.0)
}

fn det2(m: &DMatrix<f64>) -> f64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

/// Vacuum probability of `mode` after the detector's efficiency loss.
pub fn no_click_probability(state: &GaussianState, mode: usize, detector: &DetectorModel) -> Result<f64> {
    let lossy = gaussian_loss(state, mode, detector.efficiency)?;
    let marg = lossy.marginal(&[mode])?;
    let det = det2(&(marg + DMatrix::identity(2, 2)));
    if det.is_nan() || det < 4.0 - 1e-12 {
        return Err(Error::NonPhysical(format!("detected marginal has det(σ + I) = {det}")));
    }
    Ok((2.0 / det.sqrt()).min(1.0))
}

/// `1 - p₀ + p_dc`.
pub fn click_probability(state: &GaussianState, mode: usize, detector: &DetectorModel) -> Result<f64> {
    Ok(1.0 - no_click_probability(state, mode, detector)? + detector.dark_count_prob)
}

/// Unnormalised reduced state on `X` and the vacuum-projected one, both as
/// Gaussian Fock-element evaluators, with the no-click probability.
struct ConditionalParts {
    retained: GaussianFockElements,
    projected: GaussianFockElements,
    p0: f64,
}

fn conditional_parts(state: &GaussianState, click_mode: usize, detector: &DetectorModel) -> Result<ConditionalParts> {
    let x = state.register(RETAINED)?;
    if x.range().contains(&click_mode) {
        return domain(format!("click mode {click_mode} lies in the retained register"));
    }
    let lossy = gaussian_loss(state, click_mode, detector.efficiency)?;
    let x_modes: Vec<usize> = x.range().collect();
    let a = lossy.marginal(&x_modes)?;
    let b = lossy.marginal(&[click_mode])?;
    let k = 2 * x_modes.len();
    let mut c = DMatrix::<f64>::zeros(k, 2);
    for (i, &m) in x_modes.iter().enumerate() {
        for q in 0..2 {
            for p in 0..2 {
                c[(2 * i + q, p)] = lossy.covariance[(2 * m + q, 2 * click_mode + p)];
            }
        }
    }
    let bi = b + DMatrix::identity(2, 2);
    let det = det2(&bi);
    let inv = bi
        .try_inverse()
        .ok_or_else(|| Error::NonPhysical("detected marginal is singular".into()))?;
    let conditioned = &a - &c * inv * c.transpose();
    let conditioned = (&conditioned + conditioned.transpose()) * 0.5;
    Ok(ConditionalParts {
        retained: GaussianFockElements::new(&a)?,
        projected: GaussianFockElements::new(&conditioned)?,
        p0: (2.0 / det.sqrt()).min(1.0),
    })
}

fn check_vectors(vectors: &[OccupationVector], width: usize, cutoff: u32) -> Result<()> {
    for v in vectors {
        if v.n_modes() != width {
            return Err(Error::RegisterMismatch(format!("vector {v} does not fit a {width}-mode register")));
        }
        if v.total() > cutoff {
            return Err(Error::CutoffExceeded { requested: v.total(), cutoff });
        }
    }
    Ok(())
}

/// Fock elements `<bra|σ_X|ket>` of the state heralded by a click on
/// `click_mode`, with `σ_X = [(1 + p_dc) ρ_X - Tr_{X'}(ρ |0><0|)] / (1 - p₀ + p_dc)`.
pub fn conditional_state_fock_elements(
    state: &GaussianState,
    click_mode: usize,
    detector: &DetectorModel,
    bras: &[OccupationVector],
    kets: &[OccupationVector],
    cutoff: u32,
) -> Result<DMatrix<Complex64>> {
    let width = state.register(RETAINED)?.width();
    check_vectors(bras, width, cutoff)?;
    check_vectors(kets, width, cutoff)?;
    let mut parts = conditional_parts(state, click_mode, detector)?;
    let norm = 1.0 - parts.p0 + detector.dark_count_prob;
    if norm.is_nan() || norm <= 0.0 {
        return Err(Error::ZeroProbability);
    }
    let mut out = DMatrix::zeros(bras.len(), kets.len());
    for (i, bra) in bras.iter().enumerate() {
        for (j, ket) in kets.iter().enumerate() {
            let rho = parts.retained.element(bra, ket)?;
            let proj = parts.projected.element(bra, ket)?;
            out[(i, j)] = (rho * (1.0 + detector.dark_count_prob) - proj * parts.p0) / norm;
        }
    }
    Ok(out)
}

/// `σ_X` on every `X` occupation vector with at most `cutoff` photons,
/// ordered by total photon number. Returns the basis and the matrix.
pub fn conditional_state_matrix(
    state: &GaussianState,
    click_mode: usize,
    detector: &DetectorModel,
    cutoff: u32,
) -> Result<(Vec<OccupationVector>, DMatrix<Complex64>)> {
    let width = state.register(RETAINED)?.width();
    let basis = fock_basis(width, cutoff);
    let m = conditional_state_fock_elements(state, click_mode, detector, &basis, &basis, cutoff)?;
    Ok((basis, m))
}

/// Spectral summary of a truncated heralded state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationReport {
    /// Largest total photon number kept.
    pub cutoff: u32,
    pub trace: f64,
    pub min_eigenvalue: f64,
    /// Largest `|σ - σ†|` entry.
    pub hermiticity_defect: f64,
}

/// Builds `σ_X` block by block in total photon number until the missing
/// trace falls below `trace_tolerance` or `max_cutoff` is reached.
/// Elements between different photon numbers vanish for phase-symmetric
/// states; otherwise the full truncated matrix is diagonalised at the end.
pub fn conditional_state_report(
    state: &GaussianState,
    click_mode: usize,
    detector: &DetectorModel,
    trace_tolerance: f64,
    max_cutoff: u32,
) -> Result<TruncationReport> {
    let width = state.register(RETAINED)?.width();
    let mut parts = conditional_parts(state, click_mode, detector)?;
    let norm = 1.0 - parts.p0 + detector.dark_count_prob;
    if norm.is_nan() || norm <= 0.0 {
        return Err(Error::ZeroProbability);
    }
    let symmetric = parts.retained.phase_symmetric() && parts.projected.phase_symmetric();
    let mut report =
        TruncationReport { cutoff: 0, trace: 0.0, min_eigenvalue: f64::INFINITY, hermiticity_defect: 0.0 };
    let p_dc = detector.dark_count_prob;
    if symmetric {
        for p in 0..=max_cutoff {
            let (_, rho) = parts.retained.number_block(p)?;
            let (_, proj) = parts.projected.number_block(p)?;
            let m = (rho * Complex64::new(1.0 + p_dc, 0.0) - proj * Complex64::new(parts.p0, 0.0)) / Complex64::new(norm, 0.0);
            report.cutoff = p;
            report.hermiticity_defect = report.hermiticity_defect.max((&m - m.adjoint()).camax());
            report.trace += m.trace().re;
            report.min_eigenvalue = report.min_eigenvalue.min(min_hermitian_eigenvalue(&m));
            if 1.0 - report.trace < trace_tolerance {
                break;
            }
        }
        return Ok(report);
    }
    let mut basis: Vec<OccupationVector> = Vec::new();
    for p in 0..=max_cutoff {
        basis.extend(crate::fock::enumerate_detection_patterns(width, p));
        report.cutoff = p;
        report.trace = 0.0;
        for v in &basis {
            let rho = parts.retained.element(v, v)?;
            let proj = parts.projected.element(v, v)?;
            report.trace += ((rho * (1.0 + p_dc) - proj * parts.p0) / norm).re;
        }
        if 1.0 - report.trace < trace_tolerance {
            break;
        }
    }
    let mut m = DMatrix::<Complex64>::zeros(basis.len(), basis.len());
    for (i, bra) in basis.iter().enumerate() {
        for (j, ket) in basis.iter().enumerate() {
            let rho = parts.retained.element(bra, ket)?;
            let proj = parts.projected.element(bra, ket)?;
            m[(i, j)] = (rho * (1.0 + p_dc) - proj * parts.p0) / norm;
        }
    }
    report.hermiticity_defect = (&m - m.adjoint()).camax();
    report.min_eigenvalue = min_hermitian_eigenvalue(&m);
    Ok(report)
}

/// Smallest eigenvalue of a Hermitian matrix; real matrices take the
/// cheaper real symmetric path.
fn min_hermitian_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    let eig = if m.iter().all(|z| z.im == 0.0) {
        m.map(|z| z.re).symmetric_eigenvalues()
    } else {
        m.symmetric_eigenvalues()
    };
    eig.iter().copied().fold(f64::INFINITY, f64::min)
}

/// All `width`-mode occupation vectors with at most `cutoff` photons.
pub fn fock_basis(width: usize, cutoff: u32) -> Vec<OccupationVector> {
    (0..=cutoff)
        .flat_map(|p| crate::fock::enumerate_detection_patterns(width, p))
        .collect()
}

/// Fidelity of the heralded state with the zero-phase `W_N` on `X`.
pub fn w_fidelity(state: &GaussianState, click_mode: usize, detector: &DetectorModel, n_parties: usize) -> Result<f64> {
    let width = state.register(RETAINED)?.width();
    if n_parties != width {
        return Err(Error::RegisterMismatch(format!("retained register has {width} modes, expected {n_parties}")));
    }
    let singles = enumerate_single_occupancy(n_parties, 1)?;
    let m = conditional_state_fock_elements(state, click_mode, detector, &singles, &singles, 1)?;
    Ok(m.sum().re / n_parties as f64)
}

/// Star-network state before detection: one source per party with `X_i`
/// kept and `X'_i` sent through `channel`, then the Hadamard tree on `X'`.
/// `X'` is padded with vacuum up to a power of two.
pub fn star_network_state(n_parties: usize, squeezing: SqueezingSpec, channel: &LossChannel) -> Result<GaussianState> {
    if n_parties < 2 {
        return domain(format!("need at least two parties, got {n_parties}"));
    }
    let d = next_power_of_two(n_parties);
    let mut state = GaussianState::vacuum(&[(RETAINED, n_parties), (SHARED, d)])?;
    for i in 0..n_parties {
        set_tmsv(&mut state.covariance, i, n_parties + i, squeezing.r());
    }
    for i in 0..n_parties {
        state = gaussian_loss(&state, n_parties + i, channel.transmittance())?;
    }
    gaussian_unitary(&state, &hadamard_tree(d)?, SHARED)
}

/// One operating point of the continuous-variable protocol, heralded on the
/// first detector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianScenario {
    pub n_parties: usize,
    pub squeezing: SqueezingSpec,
    pub channel: LossChannel,
    pub detector: DetectorModel,
}

/// Click probability and fidelity at one operating point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianPoint {
    pub click_probability: f64,
    pub no_click_probability: f64,
    pub fidelity: f64,
}

impl GaussianScenario {
    pub fn state(&self) -> Result<GaussianState> {
        star_network_state(self.n_parties, self.squeezing, &self.channel)
    }

    /// Absolute index of the monitored detector mode.
    pub fn click_mode(&self) -> usize {
        self.n_parties
    }

    pub fn evaluate(&self) -> Result<GaussianPoint> {
        let state = self.state()?;
        let p0 = no_click_probability(&state, self.click_mode(), &self.detector)?;
        let fidelity = w_fidelity(&state, self.click_mode(), &self.detector, self.n_parties)?;
        Ok(GaussianPoint {
            click_probability: 1.0 - p0 + self.detector.dark_count_prob,
            no_click_probability: p0,
            fidelity,
        })
    }
}

/// Squeezing whose heralded `W_N` fidelity equals `target`. Of the two
/// roots the larger-`r` one is returned, since it has the higher click rate.
pub fn solve_squeezing_for_fidelity(
    n_parties: usize,
    target: f64,
    channel: &LossChannel,
    detector: &DetectorModel,
) -> Result<SqueezingSpec> {
    if !(0.0..=1.0).contains(&target) {
        return domain(format!("target fidelity must lie in [0, 1], got {target}"));
    }
    let fid = |r: f64| -> Result<f64> {
        GaussianScenario { n_parties, squeezing: SqueezingSpec::from_r(r)?, channel: *channel, detector: *detector }
            .evaluate()
            .map(|p| p.fidelity)
    };
    const R_MAX: f64 = 2.0;
    const STEPS: usize = 200;
    let grid: Vec<(f64, f64)> = (1..=STEPS)
        .map(|i| {
            let r = R_MAX * i as f64 / STEPS as f64;
            fid(r).map(|f| (r, f))
        })
        .collect::<Result<_>>()?;
    let (best_idx, _) = grid
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .expect("non-empty grid");
    // golden-section refinement of the peak
    let lo_r = if best_idx == 0 { 1e-9 } else { grid[best_idx - 1].0 };
    let hi_r = grid[(best_idx + 1).min(STEPS - 1)].0;
    let (mut a, mut b) = (lo_r, hi_r);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (fid(c)?, fid(d)?);
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = fid(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = fid(d)?;
        }
    }
    let (r_peak, f_peak) = if fc > fd { (c, fc) } else { (d, fd) };
    let f_peak = f_peak.max(grid[best_idx].1);
    if target > f_peak {
        return Err(Error::FidelityCeiling { target, max_achievable: f_peak });
    }
    // fidelity falls from the peak; find the first grid point below target
    let upper = grid.iter().find(|&&(r, f)| r > r_peak && f < target).map(|&(r, _)| r);
    let Some(mut hi) = upper else {
        return Err(Error::FidelityCeiling { target, max_achievable: f_peak });
    };
    let mut lo = r_peak;
    let mut r = 0.5 * (lo + hi);
    for _ in 0..200 {
        r = 0.5 * (lo + hi);
        let f = fid(r)?;
        if (f - target).abs() <= 1e-9 || hi - lo < 1e-15 {
            break;
        }
        if f > target {
            lo = r;
        } else {
            hi = r;
        }
    }
    SqueezingSpec::from_r(r)
}
