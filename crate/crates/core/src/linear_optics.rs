//! Passive linear optics on Fock states.
//!
//! An [`InterferometerMatrix`] `U` acts on single-photon kets as
//! `U|k> = Σ_s U[s][k] |s>`: column `k` is the input mode and row `s` the
//! output mode, so `<s|U|k> = U[s][k]`. Multi-photon amplitudes follow from
//! permanents of submatrices with rows taken from the output pattern and
//! columns from the input pattern, repeated by multiplicity.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::fock::{enumerate_detection_patterns, OccupationVector, PureFockState};
use crate::math::{binomial, factorial};

const UNITARITY_TOLERANCE: f64 = 1e-12;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// A 2×2 passive transform, indexed `[output][input]`.
pub type TwoModeMatrix = [[Complex64; 2]; 2];

/// The 50:50 beam splitter `(1/√2) [[1, 1], [-1, 1]]`.
pub fn balanced_beam_splitter() -> TwoModeMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [[c(h), c(h)], [c(-h), c(h)]]
}

/// Square unitary matrix describing a passive multimode interferometer.
#[derive(Clone, Debug, PartialEq)]
pub struct InterferometerMatrix(DMatrix<Complex64>);

impl InterferometerMatrix {
    /// Checks that `matrix` is square and unitary to 1e-12.
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() {
            return domain(format!(
                "interferometer must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            ));
        }
        let candidate = Self(matrix);
        let err = candidate.unitarity_error();
        if err > UNITARITY_TOLERANCE {
            return domain(format!("matrix is not unitary (max |UU† - I| = {err:.3e})"));
        }
        Ok(candidate)
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    /// `<output|U|input>` for single photons.
    pub fn entry(&self, output: usize, input: usize) -> Complex64 {
        self.0[(output, input)]
    }

    /// `max |(U U†)_ij - δ_ij|`.
    pub fn unitarity_error(&self) -> f64 {
        let prod = &self.0 * self.0.adjoint();
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, j)] - target).norm());
            }
        }
        worst
    }

    /// Product `self · other`: `other` acts first.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return domain("cannot compose interferometers of different size");
        }
        Ok(Self(&self.0 * &other.0))
    }
}

/// `u^{⊗n}` for `n_modes = 2^n`: the cascade of 50:50 splitters that spreads
/// each input photon uniformly over all outputs. Every entry is `±1/√N`.
pub fn hadamard_tree(n_modes: usize) -> Result<InterferometerMatrix> {
    if n_modes == 0 || !n_modes.is_power_of_two() {
        return domain(format!("Hadamard tree needs a power-of-two mode count, got {n_modes}"));
    }
    let u = balanced_beam_splitter();
    let u = DMatrix::from_row_slice(2, 2, &[u[0][0], u[0][1], u[1][0], u[1][1]]);
    let mut acc = DMatrix::<Complex64>::identity(1, 1);
    for _ in 0..n_modes.trailing_zeros() {
        acc = acc.kronecker(&u);
    }
    Ok(InterferometerMatrix(acc))
}

/// A 50:50 splitter between two modes of a register; `first` plays the role
/// of index 0 in [`balanced_beam_splitter`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BeamSplitterStep {
    pub first: usize,
    pub second: usize,
}

/// The tree as explicit layers of beam splitters, adjacent pairs first:
/// layer `l` couples modes `i` and `i + 2^l`.
pub fn hadamard_tree_layers(n_modes: usize) -> Result<Vec<Vec<BeamSplitterStep>>> {
    if n_modes == 0 || !n_modes.is_power_of_two() {
        return domain(format!("Hadamard tree needs a power-of-two mode count, got {n_modes}"));
    }
    let depth = n_modes.trailing_zeros();
    Ok((0..depth)
        .map(|layer| {
            let stride = 1usize << layer;
            (0..n_modes)
                .filter(|i| i & stride == 0)
                .map(|i| BeamSplitterStep { first: i, second: i + stride })
                .collect()
        })
        .collect())
}

/// Multiplies out a layered circuit of balanced splitters.
pub fn compose_layers(n_modes: usize, layers: &[Vec<BeamSplitterStep>]) -> InterferometerMatrix {
    let u = balanced_beam_splitter();
    let mut total = DMatrix::<Complex64>::identity(n_modes, n_modes);
    for layer in layers {
        let mut m = DMatrix::<Complex64>::identity(n_modes, n_modes);
        for step in layer {
            let (a, b) = (step.first, step.second);
            m[(a, a)] = u[0][0];
            m[(a, b)] = u[0][1];
            m[(b, a)] = u[1][0];
            m[(b, b)] = u[1][1];
        }
        total = m * total;
    }
    InterferometerMatrix(total)
}

/// Matrix permanent by Ryser's formula with Gray-code ordering.
///
/// The empty matrix has permanent 1.
pub fn permanent(m: &DMatrix<Complex64>) -> Complex64 {
    assert!(m.is_square(), "permanent needs a square matrix");
    let n = m.nrows();
    if n == 0 {
        return c(1.0);
    }
    assert!(n <= 30, "permanent dimension {n} too large for Ryser enumeration");
    let mut row_sums = vec![c(0.0); n];
    let mut total = c(0.0);
    let mut gray: u64 = 0;
    for k in 1u64..(1u64 << n) {
        let bit = k.trailing_zeros() as usize;
        gray ^= 1 << bit;
        let adding = gray & (1 << bit) != 0;
        for (i, s) in row_sums.iter_mut().enumerate() {
            if adding {
                *s += m[(i, bit)];
            } else {
                *s -= m[(i, bit)];
            }
        }
        let prod = row_sums.iter().fold(c(1.0), |acc, s| acc * s);
        if gray.count_ones().is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
    }
    if n.is_multiple_of(2) {
        total
    } else {
        -total
    }
}

/// Permanent of the matrix that repeats row `i` of `m` `rows[i]` times and
/// column `j` `cols[j]` times, by Ryser's formula summed over column
/// multiplicities. Costs `Π (c_j + 1)` steps over the cheaper side. Zero when
/// the totals differ.
pub fn permanent_repeated(m: &DMatrix<Complex64>, rows: &[u32], cols: &[u32]) -> Complex64 {
    assert_eq!(m.nrows(), rows.len(), "row multiplicities must match the matrix");
    assert_eq!(m.ncols(), cols.len(), "column multiplicities must match the matrix");
    let total: u32 = rows.iter().sum();
    if total != cols.iter().sum::<u32>() {
        return c(0.0);
    }
    if total == 0 {
        return c(1.0);
    }
    let cost = |v: &[u32]| v.iter().map(|&x| x as f64 + 1.0).product::<f64>();
    if cost(rows) < cost(cols) {
        return permanent_repeated(&m.transpose(), cols, rows);
    }
    let active_rows: Vec<usize> = (0..rows.len()).filter(|&i| rows[i] > 0).collect();
    let active_cols: Vec<usize> = (0..cols.len()).filter(|&j| cols[j] > 0).collect();
    let mut k = vec![0u32; active_cols.len()];
    let mut sums = vec![c(0.0); active_rows.len()];
    let mut chosen = 0u32;
    let mut acc = c(0.0);
    loop {
        // advance the odometer over k_j in 0..=cols[j]
        let mut pos = 0;
        loop {
            if pos == k.len() {
                return if total.is_multiple_of(2) { acc } else { -acc };
            }
            let j = active_cols[pos];
            if k[pos] < cols[j] {
                k[pos] += 1;
                chosen += 1;
                for (s, &i) in sums.iter_mut().zip(&active_rows) {
                    *s += m[(i, j)];
                }
                break;
            }
            let back = k[pos] as f64;
            chosen -= k[pos];
            k[pos] = 0;
            for (s, &i) in sums.iter_mut().zip(&active_rows) {
                *s -= m[(i, j)] * back;
            }
            pos += 1;
        }
        let weight: f64 = k
            .iter()
            .zip(&active_cols)
            .map(|(&kj, &j)| binomial(cols[j] as usize, kj as usize) as f64)
            .product();
        let prod = sums.iter().zip(&active_rows).fold(c(1.0), |p, (s, &i)| p * s.powu(rows[i]));
        if chosen.is_multiple_of(2) {
            acc += prod * weight;
        } else {
            acc -= prod * weight;
        }
    }
}

/// `<output| Û |input>` for the multi-photon representation of `u`.
pub fn transition_amplitude(
    u: &InterferometerMatrix,
    input: &OccupationVector,
    output: &OccupationVector,
) -> Result<Complex64> {
    let n = u.dim();
    if input.n_modes() != n || output.n_modes() != n {
        return Err(Error::RegisterMismatch(format!(
            "patterns must have {n} modes (input {}, output {})",
            input.n_modes(),
            output.n_modes()
        )));
    }
    if input.total() != output.total() {
        return Err(Error::PhotonNumber { expected: input.total(), found: output.total() });
    }
    Ok(transition_amplitude_unchecked(u, input, output))
}

fn transition_amplitude_unchecked(
    u: &InterferometerMatrix,
    input: &OccupationVector,
    output: &OccupationVector,
) -> Complex64 {
    let rows = output.mode_list();
    let cols = input.mode_list();
    let sub = DMatrix::from_fn(rows.len(), cols.len(), |i, j| u.0[(rows[i], cols[j])]);
    permanent(&sub) / (input.factorial_product() * output.factorial_product()).sqrt()
}

/// Image of a Fock vector under `u`: every output pattern with its amplitude.
pub fn output_distribution(u: &InterferometerMatrix, input: &OccupationVector) -> Result<Vec<(OccupationVector, Complex64)>> {
    if input.n_modes() != u.dim() {
        return Err(Error::RegisterMismatch(format!(
            "input has {} modes, interferometer has {}",
            input.n_modes(),
            u.dim()
        )));
    }
    Ok(enumerate_detection_patterns(u.dim(), input.total())
        .into_iter()
        .map(|out| {
            let amp = transition_amplitude_unchecked(u, input, &out);
            (out, amp)
        })
        .collect())
}

/// Replaces `range` of `base` by `part`.
fn splice(base: &OccupationVector, start: usize, part: &[u32]) -> OccupationVector {
    let mut counts = base.counts().to_vec();
    counts[start..start + part.len()].copy_from_slice(part);
    OccupationVector::new(counts)
}

/// Exact action of `u` on the modes of `register`.
pub fn apply_interferometer(
    u: &InterferometerMatrix,
    state: &PureFockState,
    register: &str,
) -> Result<PureFockState> {
    let reg = state.register(register)?.clone();
    if reg.width() != u.dim() {
        return Err(Error::RegisterMismatch(format!(
            "register `{register}` has {} modes, interferometer has {}",
            reg.width(),
            u.dim()
        )));
    }
    let range = reg.range();
    let mut images: HashMap<Vec<u32>, Vec<(OccupationVector, Complex64)>> = HashMap::new();
    let mut out: BTreeMap<OccupationVector, Complex64> = BTreeMap::new();
    for (occ, amp) in state.amplitudes() {
        let sub = &occ.counts()[range.clone()];
        let image = match images.get(sub) {
            Some(img) => img,
            None => {
                let img: Vec<_> = output_distribution(u, &OccupationVector::from(sub))?
                    .into_iter()
                    .filter(|(_, a)| a.norm() > 0.0)
                    .collect();
                images.entry(sub.to_vec()).or_insert(img)
            }
        };
        for (target, t_amp) in image {
            *out.entry(splice(occ, range.start, target.counts())).or_default() += amp * t_amp;
        }
    }
    Ok(state.with_terms(out))
}

/// Fock-space action of a 2×2 transform on occupations `(p, q)`:
/// returns amplitudes of `(k, p + q - k)` for `k = 0..=p+q`.
fn two_mode_image(v: &TwoModeMatrix, p: u32, q: u32) -> Vec<Complex64> {
    let n = p + q;
    let mut amps = vec![c(0.0); n as usize + 1];
    for i in 0..=p {
        // i photons from mode a go to output a, the rest to output b
        let from_a = v[0][0].powu(i) * v[1][0].powu(p - i) * binomial(p as usize, i as usize) as f64;
        for j in 0..=q {
            let from_b = v[0][1].powu(j) * v[1][1].powu(q - j) * binomial(q as usize, j as usize) as f64;
            amps[(i + j) as usize] += from_a * from_b;
        }
    }
    let inv = 1.0 / (factorial(p) * factorial(q)).sqrt();
    for (k, a) in amps.iter_mut().enumerate() {
        *a *= (factorial(k as u32) * factorial(n - k as u32)).sqrt() * inv;
    }
    amps
}

/// Applies a 2×2 passive transform to absolute modes `mode_a`, `mode_b`.
pub fn apply_two_mode(
    v: &TwoModeMatrix,
    state: &PureFockState,
    mode_a: usize,
    mode_b: usize,
) -> Result<PureFockState> {
    let n = state.n_modes();
    if mode_a >= n || mode_b >= n || mode_a == mode_b {
        return domain(format!("invalid mode pair ({mode_a}, {mode_b}) for {n} modes"));
    }
    let mut cache: HashMap<(u32, u32), Vec<Complex64>> = HashMap::new();
    let mut out: BTreeMap<OccupationVector, Complex64> = BTreeMap::new();
    for (occ, amp) in state.amplitudes() {
        let p = occ.get(mode_a);
        let q = occ.get(mode_b);
        let image = cache.entry((p, q)).or_insert_with(|| two_mode_image(v, p, q));
        for (k, t_amp) in image.iter().enumerate() {
            if t_amp.norm() == 0.0 {
                continue;
            }
            let mut counts = occ.counts().to_vec();
            counts[mode_a] = k as u32;
            counts[mode_b] = p + q - k as u32;
            *out.entry(OccupationVector::new(counts)).or_default() += amp * t_amp;
        }
    }
    Ok(state.with_terms(out))
}

/// Runs a layered splitter circuit on `register`, one two-mode step at a time.
pub fn apply_layers(
    layers: &[Vec<BeamSplitterStep>],
    state: &PureFockState,
    register: &str,
) -> Result<PureFockState> {
    let reg = state.register(register)?.clone();
    let u = balanced_beam_splitter();
    let mut current = state.clone();
    for layer in layers {
        for step in layer {
            if step.first >= reg.width() || step.second >= reg.width() {
                return Err(Error::RegisterMismatch(format!(
                    "splitter ({}, {}) outside register `{register}`",
                    step.first, step.second
                )));
            }
            current = apply_two_mode(&u, &current, reg.mode(step.first), reg.mode(step.second))?;
        }
    }
    Ok(current)
}

/// Fibre span length and attenuation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiberSpan {
    pub distance_km: f64,
    pub gamma_db_per_km: f64,
}

/// Power transmittance of a fibre: `10^(-γ d / 10)`.
pub fn fiber_transmittance(distance_km: f64, gamma_db_per_km: f64) -> f64 {
    10f64.powf(-gamma_db_per_km * distance_km / 10.0)
}

/// Pure-loss channel with power transmittance `T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossChannel {
    transmittance: f64,
    fiber: Option<FiberSpan>,
}

impl LossChannel {
    pub fn new(transmittance: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmittance) {
            return domain(format!("transmittance must lie in [0, 1], got {transmittance}"));
        }
        Ok(Self { transmittance, fiber: None })
    }

    pub fn from_fiber(distance_km: f64, gamma_db_per_km: f64) -> Result<Self> {
        if !(distance_km >= 0.0 && distance_km.is_finite()) {
            return domain(format!("distance must be non-negative, got {distance_km}"));
        }
        if !(gamma_db_per_km >= 0.0 && gamma_db_per_km.is_finite()) {
            return domain(format!("loss coefficient must be non-negative, got {gamma_db_per_km}"));
        }
        Ok(Self {
            transmittance: fiber_transmittance(distance_km, gamma_db_per_km),
            fiber: Some(FiberSpan { distance_km, gamma_db_per_km }),
        })
    }

    pub fn transmittance(&self) -> f64 {
        self.transmittance
    }

    /// `√T`.
    pub fn amplitude_transmittance(&self) -> f64 {
        self.transmittance.sqrt()
    }

    pub fn fiber(&self) -> Option<FiberSpan> {
        self.fiber
    }
}

/// Purified loss on absolute `mode`, dumping lost photons into the vacuum
/// mode `environment_mode`: `|n>|0> -> Σ_k √C(n,k) t^k r^(n-k) |k>|n-k>`.
pub fn apply_loss(
    channel: &LossChannel,
    state: &PureFockState,
    mode: usize,
    environment_mode: usize,
) -> Result<PureFockState> {
    if environment_mode >= state.n_modes() {
        return domain(format!("environment mode {environment_mode} outside the state"));
    }
    if state.terms().any(|(occ, _)| occ.get(environment_mode) != 0) {
        return domain(format!("environment mode {environment_mode} is not in vacuum"));
    }
    let t = channel.amplitude_transmittance();
    let r = (1.0 - channel.transmittance()).sqrt();
    let v = [[c(t), c(-r)], [c(r), c(t)]];
    apply_two_mode(&v, state, mode, environment_mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ov(v: &[u32]) -> OccupationVector {
        OccupationVector::from(v)
    }

    fn real(rows: usize, data: &[f64]) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(rows, rows, &data.iter().map(|&x| c(x)).collect::<Vec<_>>())
    }

    #[test]
    fn repeated_permanent_matches_expanded_matrix() {
        let m = DMatrix::from_fn(3, 3, |i, j| Complex64::new(0.3 * i as f64 - 0.2 * j as f64 + 0.5, 0.1 * (i * j) as f64));
        for (rows, cols) in [
            (vec![1, 1, 1], vec![1, 1, 1]),
            (vec![2, 0, 1], vec![0, 3, 0]),
            (vec![2, 1, 2], vec![1, 2, 2]),
            (vec![0, 0, 0], vec![0, 0, 0]),
            (vec![3, 0, 1], vec![1, 1, 2]),
        ] {
            let ri: Vec<usize> = rows.iter().enumerate().flat_map(|(i, &k)| std::iter::repeat_n(i, k as usize)).collect();
            let ci: Vec<usize> = cols.iter().enumerate().flat_map(|(i, &k)| std::iter::repeat_n(i, k as usize)).collect();
            let expanded = DMatrix::from_fn(ri.len(), ci.len(), |a, b| m[(ri[a], ci[b])]);
            let expected = permanent(&expanded);
            let got = permanent_repeated(&m, &rows, &cols);
            assert!((got - expected).norm() < 1e-12, "{rows:?} {cols:?}: {got} vs {expected}");
        }
        assert_eq!(permanent_repeated(&m, &[1, 0, 0], &[1, 1, 0]), c(0.0));
    }

    #[test]
    fn tree_sizes_and_entries() {
        let u2 = hadamard_tree(2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(u2.matrix(), &real(2, &[h, h, -h, h]));
        assert_eq!(hadamard_tree(1).unwrap().matrix(), &real(1, &[1.0]));
        for n in [1, 2, 4, 8, 16] {
            let u = hadamard_tree(n).unwrap();
            assert!(u.unitarity_error() <= 1e-12);
            let scale = 1.0 / (n as f64).sqrt();
            assert!(u.matrix().iter().all(|e| (e.norm() - scale).abs() < 1e-14 && e.im == 0.0));
        }
        assert!(hadamard_tree(3).is_err());
        assert!(hadamard_tree(0).is_err());
    }

    #[test]
    fn layered_cascade_equals_kronecker_power() {
        for n in [2, 4, 8, 16] {
            let layered = compose_layers(n, &hadamard_tree_layers(n).unwrap());
            let direct = hadamard_tree(n).unwrap();
            let diff = (layered.matrix() - direct.matrix()).camax();
            assert!(diff < 1e-14, "n={n}: {diff}");
        }
        assert_eq!(hadamard_tree_layers(8).unwrap().len(), 3);
    }

    #[test]
    fn permanent_small_cases() {
        assert_eq!(permanent(&real(1, &[1.0])), c(1.0));
        assert_abs_diff_eq!(permanent(&real(2, &[1.0, 2.0, 3.0, 4.0])).re, 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(permanent(&DMatrix::from_element(3, 3, c(1.0))).re, 6.0, epsilon = 1e-12);
        assert_eq!(permanent(&DMatrix::<Complex64>::zeros(0, 0)), c(1.0));
    }

    #[test]
    fn transition_amplitudes() {
        let u4 = hadamard_tree(4).unwrap();
        let amp = transition_amplitude(&u4, &ov(&[1, 1, 0, 0]), &ov(&[2, 0, 0, 0])).unwrap();
        assert_abs_diff_eq!(amp.norm(), 2f64.sqrt() / 4.0, epsilon = 1e-14);
        let u2 = hadamard_tree(2).unwrap();
        let amp = transition_amplitude(&u2, &ov(&[1, 0]), &ov(&[1, 0])).unwrap();
        assert_abs_diff_eq!(amp.norm(), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        // Hong-Ou-Mandel
        let amp = transition_amplitude(&u2, &ov(&[1, 1]), &ov(&[1, 1])).unwrap();
        assert_abs_diff_eq!(amp.norm(), 0.0, epsilon = 1e-15);
        assert!(matches!(
            transition_amplitude(&u2, &ov(&[1, 1]), &ov(&[1, 0])),
            Err(Error::PhotonNumber { .. })
        ));
    }

    #[test]
    fn single_photon_spreads_uniformly() {
        let state = PureFockState::from_terms(&[("X'", 4)], [(ov(&[1, 0, 0, 0]), c(1.0))]).unwrap();
        let out = apply_interferometer(&hadamard_tree(4).unwrap(), &state, "X'").unwrap();
        assert_eq!(out.len(), 4);
        for (_, a) in out.terms() {
            assert_abs_diff_eq!(a.norm(), 0.5, epsilon = 1e-15);
        }
        let vac = PureFockState::vacuum(&[("X'", 4)]).unwrap();
        assert_eq!(apply_interferometer(&hadamard_tree(4).unwrap(), &vac, "X'").unwrap(), vac);
        assert!(apply_interferometer(&hadamard_tree(2).unwrap(), &vac, "X'").is_err());
    }

    #[test]
    fn antisymmetric_pair_keeps_norm() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = PureFockState::from_terms(&[("A", 2)], [(ov(&[1, 0]), c(h)), (ov(&[0, 1]), c(-h))]).unwrap();
        let out = apply_interferometer(&hadamard_tree(2).unwrap(), &s, "A").unwrap();
        assert_abs_diff_eq!(out.norm_sqr(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn layered_and_permanent_routes_agree() {
        let state = PureFockState::from_terms(
            &[("A", 4)],
            [
                (ov(&[1, 1, 0, 1]), c(0.6)),
                (ov(&[0, 2, 1, 0]), Complex64::new(0.0, 0.8)),
            ],
        )
        .unwrap();
        let by_perm = apply_interferometer(&hadamard_tree(4).unwrap(), &state, "A").unwrap();
        let by_layers = apply_layers(&hadamard_tree_layers(4).unwrap(), &state, "A").unwrap();
        let overlap = by_perm.inner(&by_layers).unwrap();
        assert_abs_diff_eq!(overlap.re, 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(overlap.im, 0.0, epsilon = 1e-13);
    }

    #[test]
    fn loss_on_single_photon() {
        let s = PureFockState::from_terms(&[("A", 1), ("E", 1)], [(ov(&[1, 0]), c(1.0))]).unwrap();
        let kept = apply_loss(&LossChannel::new(1.0).unwrap(), &s, 0, 1).unwrap();
        assert_eq!(kept, s);
        let lossy = apply_loss(&LossChannel::new(0.25).unwrap(), &s, 0, 1).unwrap();
        assert_abs_diff_eq!(lossy.amplitude(&ov(&[1, 0])).re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(lossy.amplitude(&ov(&[0, 1])).re, 0.75f64.sqrt(), epsilon = 1e-15);
        let occupied = PureFockState::from_terms(&[("A", 1), ("E", 1)], [(ov(&[1, 1]), c(1.0))]).unwrap();
        assert!(apply_loss(&LossChannel::new(0.5).unwrap(), &occupied, 0, 1).is_err());
    }

    #[test]
    fn loss_on_two_arms() {
        let t = 0.3;
        let ch = LossChannel::new(t).unwrap();
        let s = PureFockState::from_terms(&[("A", 2), ("E", 2)], [(ov(&[1, 1, 0, 0]), c(1.0))]).unwrap();
        let s = apply_loss(&ch, &s, 0, 2).unwrap();
        let s = apply_loss(&ch, &s, 1, 3).unwrap();
        assert_abs_diff_eq!(s.amplitude(&ov(&[1, 1, 0, 0])).re, t, epsilon = 1e-15);
        assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn fiber_channel() {
        let ch = LossChannel::from_fiber(50.0, 0.2).unwrap();
        assert_abs_diff_eq!(ch.transmittance(), 0.1, epsilon = 1e-15);
        assert!(LossChannel::new(1.5).is_err());
        assert!(LossChannel::from_fiber(-1.0, 0.2).is_err());
    }
}
