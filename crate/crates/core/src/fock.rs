//! Occupation-number combinatorics and sparse pure states over multimode Fock space.
//!
//! States carry named, contiguous mode registers (for example the retained
//! modes `X`, the shared modes `X'` and the loss environments `E`) so that
//! projections and partial traces can be expressed by register name.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::math::{binomial, factorial};

/// Amplitudes with magnitude below this value are dropped.
pub const DEFAULT_PRUNE_THRESHOLD: f64 = 1e-15;

/// Photon counts, one entry per mode.
///
/// The derived ordering is lexicographic in the counts.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OccupationVector(Vec<u32>);

impl OccupationVector {
    pub fn new(counts: Vec<u32>) -> Self {
        Self(counts)
    }

    pub fn vacuum(n_modes: usize) -> Self {
        Self(vec![0; n_modes])
    }

    /// One photon in `mode`, vacuum elsewhere.
    pub fn single(n_modes: usize, mode: usize) -> Self {
        let mut counts = vec![0; n_modes];
        counts[mode] = 1;
        Self(counts)
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn n_modes(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn get(&self, mode: usize) -> u32 {
        self.0[mode]
    }

    pub fn concat(&self, other: &OccupationVector) -> OccupationVector {
        let mut counts = Vec::with_capacity(self.0.len() + other.0.len());
        counts.extend_from_slice(&self.0);
        counts.extend_from_slice(&other.0);
        Self(counts)
    }

    pub fn slice(&self, range: Range<usize>) -> OccupationVector {
        Self(self.0[range].to_vec())
    }

    pub fn is_single_occupancy(&self) -> bool {
        self.0.iter().all(|&c| c <= 1)
    }

    /// Mode indices listed once per photon, in ascending order.
    pub fn mode_list(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(mode, &c)| std::iter::repeat_n(mode, c as usize))
            .collect()
    }

    /// Product of the factorials of the entries.
    pub fn factorial_product(&self) -> f64 {
        self.0.iter().map(|&c| factorial(c)).product()
    }

    /// Position of a single-occupancy vector in the canonical order of
    /// [`enumerate_single_occupancy`].
    pub fn combination_index(&self) -> Option<usize> {
        if !self.is_single_occupancy() {
            return None;
        }
        let n = self.0.len();
        let positions = self.mode_list();
        let k = positions.len();
        let mut rank = 0usize;
        let mut next = 0usize;
        for (i, &p) in positions.iter().enumerate() {
            for skipped in next..p {
                rank += binomial(n - 1 - skipped, k - 1 - i) as usize;
            }
            next = p + 1;
        }
        Some(rank)
    }

    /// Inverse of [`OccupationVector::combination_index`].
    pub fn from_combination_index(n_modes: usize, n_photons: usize, index: usize) -> Result<Self> {
        if n_photons > n_modes {
            return domain(format!("{n_photons} photons do not fit in {n_modes} modes singly"));
        }
        let count = binomial(n_modes, n_photons) as usize;
        if index >= count {
            return domain(format!("combination index {index} out of range 0..{count}"));
        }
        let mut counts = vec![0; n_modes];
        let mut remaining = index;
        let mut mode = 0usize;
        for left in (1..=n_photons).rev() {
            loop {
                let block = binomial(n_modes - 1 - mode, left - 1) as usize;
                if remaining < block {
                    break;
                }
                remaining -= block;
                mode += 1;
            }
            counts[mode] = 1;
            mode += 1;
        }
        Ok(Self(counts))
    }
}

impl From<Vec<u32>> for OccupationVector {
    fn from(counts: Vec<u32>) -> Self {
        Self(counts)
    }
}

impl From<&[u32]> for OccupationVector {
    fn from(counts: &[u32]) -> Self {
        Self(counts.to_vec())
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// All vectors with `n_photons` ones and `n_modes - n_photons` zeros.
///
/// Ordered by the ascending positions of the occupied modes, so `(4, 2)`
/// starts `1100, 1010, 1001, ...`. The position in this list is the
/// combination index `k`.
pub fn enumerate_single_occupancy(n_modes: usize, n_photons: usize) -> Result<Vec<OccupationVector>> {
    if n_photons > n_modes {
        return domain(format!(
            "cannot place {n_photons} photons singly in {n_modes} modes"
        ));
    }
    let mut out = Vec::with_capacity(binomial(n_modes, n_photons) as usize);
    let mut positions: Vec<usize> = (0..n_photons).collect();
    loop {
        let mut counts = vec![0; n_modes];
        for &p in &positions {
            counts[p] = 1;
        }
        out.push(OccupationVector(counts));

        // advance to the next combination in lexicographic order
        let mut i = n_photons;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if positions[i] < n_modes - n_photons + i {
                break;
            }
        }
        positions[i] += 1;
        for j in i + 1..n_photons {
            positions[j] = positions[j - 1] + 1;
        }
    }
}

/// All distributions of `n_photons` over `n_modes` detectors, first mode
/// most occupied first: `(2, 2)` gives `(2,0), (1,1), (0,2)`.
pub fn enumerate_detection_patterns(n_modes: usize, n_photons: u32) -> Vec<OccupationVector> {
    fn fill(prefix: &mut Vec<u32>, modes_left: usize, photons_left: u32, out: &mut Vec<OccupationVector>) {
        if modes_left == 1 {
            prefix.push(photons_left);
            out.push(OccupationVector(prefix.clone()));
            prefix.pop();
            return;
        }
        for c in (0..=photons_left).rev() {
            prefix.push(c);
            fill(prefix, modes_left - 1, photons_left - c, out);
            prefix.pop();
        }
    }

    let mut out = Vec::new();
    if n_modes == 0 {
        if n_photons == 0 {
            out.push(OccupationVector::default());
        }
        return out;
    }
    fill(&mut Vec::with_capacity(n_modes), n_modes, n_photons, &mut out);
    out
}

/// Generalised Dicke state: `n_photons` excitations spread symmetrically
/// over `n_modes`, with optional per-term phases.
#[derive(Clone, Debug, PartialEq)]
pub struct DickeSpec {
    n_modes: usize,
    n_photons: usize,
    phases: Option<Vec<f64>>,
}

impl DickeSpec {
    pub fn new(n_modes: usize, n_photons: usize) -> Result<Self> {
        if n_modes == 0 {
            return domain("a Dicke state needs at least one mode");
        }
        if n_photons > n_modes {
            return domain(format!("Dicke state needs K <= N, got K={n_photons}, N={n_modes}"));
        }
        Ok(Self { n_modes, n_photons, phases: None })
    }

    /// W state on `n_modes` modes.
    pub fn w(n_modes: usize) -> Result<Self> {
        Self::new(n_modes, 1)
    }

    /// Attach one phase per combination, in canonical combination order.
    pub fn with_phases(mut self, phases: Vec<f64>) -> Result<Self> {
        let terms = self.n_terms();
        if phases.len() != terms {
            return domain(format!("expected {terms} phases, got {}", phases.len()));
        }
        self.phases = Some(phases);
        Ok(self)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_photons(&self) -> usize {
        self.n_photons
    }

    pub fn phases(&self) -> Option<&[f64]> {
        self.phases.as_deref()
    }

    pub fn n_terms(&self) -> usize {
        binomial(self.n_modes, self.n_photons) as usize
    }
}

/// Normalised Dicke state on a single register named `X`.
pub fn dicke_state(spec: &DickeSpec) -> PureFockState {
    let basis = enumerate_single_occupancy(spec.n_modes, spec.n_photons)
        .expect("DickeSpec guarantees K <= N");
    let norm = 1.0 / (basis.len() as f64).sqrt();
    let terms = basis.into_iter().enumerate().map(|(k, occ)| {
        let phase = spec.phases.as_ref().map_or(0.0, |p| p[k]);
        (occ, Complex64::from_polar(norm, phase))
    });
    PureFockState::from_terms(&[("X", spec.n_modes)], terms).expect("layout is consistent")
}

/// A named contiguous range of modes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Register {
    name: String,
    start: usize,
    width: usize,
}

impl Register {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn range(&self) -> Range<usize> {
        self.start..self.start + self.width
    }

    /// Absolute index of the `offset`-th mode of this register.
    pub fn mode(&self, offset: usize) -> usize {
        assert!(offset < self.width, "mode {offset} outside register {}", self.name);
        self.start + offset
    }
}

pub(crate) fn build_layout(layout: &[(&str, usize)]) -> Result<Vec<Register>> {
    let mut registers: Vec<Register> = Vec::with_capacity(layout.len());
    let mut start = 0;
    for &(name, width) in layout {
        if registers.iter().any(|r| r.name == name) {
            return Err(Error::RegisterMismatch(format!("duplicate register name `{name}`")));
        }
        registers.push(Register { name: name.to_string(), start, width });
        start += width;
    }
    Ok(registers)
}

pub(crate) fn find_register<'a>(registers: &'a [Register], name: &str) -> Result<&'a Register> {
    registers
        .iter()
        .find(|r| r.name == name)
        .ok_or_else(|| Error::RegisterMismatch(format!("no register named `{name}`")))
}

/// Sparse pure state: occupation vector to complex amplitude.
///
/// States may be sub-normalised; `normalize` restores unit norm.
#[derive(Clone, Debug, PartialEq)]
pub struct PureFockState {
    registers: Vec<Register>,
    n_modes: usize,
    amplitudes: BTreeMap<OccupationVector, Complex64>,
    prune_threshold: f64,
}

impl PureFockState {
    /// All-vacuum state over the given `(name, width)` registers.
    pub fn vacuum(layout: &[(&str, usize)]) -> Result<Self> {
        let registers = build_layout(layout)?;
        let n_modes = registers.iter().map(|r| r.width).sum();
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(OccupationVector::vacuum(n_modes), Complex64::new(1.0, 0.0));
        Ok(Self { registers, n_modes, amplitudes, prune_threshold: DEFAULT_PRUNE_THRESHOLD })
    }

    /// Sum of the given terms; repeated vectors accumulate.
    pub fn from_terms(
        layout: &[(&str, usize)],
        terms: impl IntoIterator<Item = (OccupationVector, Complex64)>,
    ) -> Result<Self> {
        let registers = build_layout(layout)?;
        Self::from_registers(registers, terms, DEFAULT_PRUNE_THRESHOLD)
    }

    pub(crate) fn from_registers(
        registers: Vec<Register>,
        terms: impl IntoIterator<Item = (OccupationVector, Complex64)>,
        prune_threshold: f64,
    ) -> Result<Self> {
        let n_modes = registers.iter().map(|r| r.width).sum();
        let mut amplitudes = BTreeMap::new();
        for (occ, amp) in terms {
            if occ.n_modes() != n_modes {
                return Err(Error::RegisterMismatch(format!(
                    "vector {occ} has {} modes, layout has {n_modes}",
                    occ.n_modes()
                )));
            }
            *amplitudes.entry(occ).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        let mut state = Self { registers, n_modes, amplitudes, prune_threshold };
        state.prune();
        Ok(state)
    }

    /// Same registers and prune threshold, new amplitudes.
    pub(crate) fn with_terms(&self, amplitudes: BTreeMap<OccupationVector, Complex64>) -> Self {
        let mut state = Self {
            registers: self.registers.clone(),
            n_modes: self.n_modes,
            amplitudes,
            prune_threshold: self.prune_threshold,
        };
        state.prune();
        state
    }

    pub fn with_prune_threshold(mut self, threshold: f64) -> Self {
        self.prune_threshold = threshold;
        self.prune();
        self
    }

    fn prune(&mut self) {
        let threshold = self.prune_threshold;
        self.amplitudes.retain(|_, a| a.norm() >= threshold);
    }

    pub fn prune_threshold(&self) -> f64 {
        self.prune_threshold
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

    /// Number of stored terms.
    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OccupationVector, &Complex64)> {
        self.amplitudes.iter()
    }

    pub fn amplitude(&self, occ: &OccupationVector) -> Complex64 {
        self.amplitudes.get(occ).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    fn same_layout(&self, other: &Self) -> Result<()> {
        if self.registers != other.registers {
            return Err(Error::RegisterMismatch(
                "states are defined over different registers".into(),
            ));
        }
        Ok(())
    }

    /// `<self|other>`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.same_layout(other)?;
        let (small, large, flip) = if self.len() <= other.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (occ, a) in &small.amplitudes {
            if let Some(b) = large.amplitudes.get(occ) {
                acc += if flip { b.conj() * a } else { a.conj() * b };
            }
        }
        Ok(acc)
    }

    pub fn normalize(&self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 {
            return domain("cannot normalise the zero vector");
        }
        Ok(self.scale(Complex64::new(1.0 / norm, 0.0)))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let amplitudes = self.amplitudes.iter().map(|(o, a)| (o.clone(), a * factor)).collect();
        self.with_terms(amplitudes)
    }

    /// `self ⊗ other`; the registers of `other` follow those of `self`.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut layout: Vec<(&str, usize)> =
            self.registers.iter().map(|r| (r.name.as_str(), r.width)).collect();
        layout.extend(other.registers.iter().map(|r| (r.name.as_str(), r.width)));
        let registers = build_layout(&layout)?;
        let mut amplitudes = BTreeMap::new();
        for (oa, a) in &self.amplitudes {
            for (ob, b) in &other.amplitudes {
                amplitudes.insert(oa.concat(ob), a * b);
            }
        }
        let threshold = self.prune_threshold.min(other.prune_threshold);
        let mut state = Self { registers, n_modes: self.n_modes + other.n_modes, amplitudes, prune_threshold: threshold };
        state.prune();
        Ok(state)
    }

    /// Append a vacuum register.
    pub fn with_vacuum_register(&self, name: &str, width: usize) -> Result<Self> {
        let vac = Self::vacuum(&[(name, width)])?.with_prune_threshold(self.prune_threshold);
        self.tensor(&vac)
    }

    /// Projects `register` onto the Fock vector `pattern` and returns the
    /// unnormalised state of the remaining registers. Its squared norm is the
    /// probability of the outcome.
    pub fn partial_projection(&self, register: &str, pattern: &OccupationVector) -> Result<Self> {
        let reg = self.register(register)?.clone();
        if pattern.n_modes() != reg.width {
            return Err(Error::RegisterMismatch(format!(
                "pattern {pattern} has {} modes, register `{register}` has {}",
                pattern.n_modes(),
                reg.width
            )));
        }
        let remaining: Vec<(&str, usize)> = self
            .registers
            .iter()
            .filter(|r| r.name != reg.name)
            .map(|r| (r.name.as_str(), r.width))
            .collect();
        let registers = build_layout(&remaining)?;
        let range = reg.range();
        let mut amplitudes = BTreeMap::new();
        for (occ, amp) in &self.amplitudes {
            if occ.0[range.clone()] == pattern.0[..] {
                let mut rest = Vec::with_capacity(self.n_modes - reg.width);
                rest.extend_from_slice(&occ.0[..range.start]);
                rest.extend_from_slice(&occ.0[range.end..]);
                amplitudes.insert(OccupationVector(rest), *amp);
            }
        }
        let mut state = Self {
            registers,
            n_modes: self.n_modes - reg.width,
            amplitudes,
            prune_threshold: self.prune_threshold,
        };
        state.prune();
        Ok(state)
    }

    /// Squared norm of the terms whose `register` part equals `pattern`.
    pub fn outcome_probability(&self, register: &str, pattern: &OccupationVector) -> Result<f64> {
        let reg = self.register(register)?;
        if pattern.n_modes() != reg.width {
            return Err(Error::RegisterMismatch(format!(
                "pattern {pattern} does not fit register `{register}`"
            )));
        }
        let range = reg.range();
        Ok(self
            .amplitudes
            .iter()
            .filter(|(occ, _)| occ.0[range.clone()] == pattern.0[..])
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Multiplies each term by `exp(i Σ_k n_k φ_k)` over the modes of `register`.
    pub fn apply_phases(&self, register: &str, phases: &[f64]) -> Result<Self> {
        let reg = self.register(register)?;
        if phases.len() != reg.width {
            return Err(Error::RegisterMismatch(format!(
                "{} phases for a register of width {}",
                phases.len(),
                reg.width
            )));
        }
        let range = reg.range();
        let amplitudes = self
            .amplitudes
            .iter()
            .map(|(occ, a)| {
                let angle: f64 = occ.0[range.clone()]
                    .iter()
                    .zip(phases)
                    .map(|(&n, &phi)| n as f64 * phi)
                    .sum();
                (occ.clone(), a * Complex64::from_polar(1.0, angle))
            })
            .collect();
        Ok(self.with_terms(amplitudes))
    }

    /// Applies the annihilation operator of an absolute mode index.
    pub fn annihilate(&self, mode: usize) -> Result<Self> {
        if mode >= self.n_modes {
            return domain(format!("mode {mode} outside a {}-mode state", self.n_modes));
        }
        let mut amplitudes = BTreeMap::new();
        for (occ, a) in &self.amplitudes {
            let n = occ.0[mode];
            if n == 0 {
                continue;
            }
            let mut lowered = occ.clone();
            lowered.0[mode] -= 1;
            amplitudes.insert(lowered, a * (n as f64).sqrt());
        }
        Ok(self.with_terms(amplitudes))
    }

    /// Reduced density matrix of the listed registers, in the basis of the
    /// occupation vectors that appear (sorted). Other registers are traced out.
    pub fn reduced_density_matrix(&self, keep: &[&str]) -> Result<(Vec<OccupationVector>, DMatrix<Complex64>)> {
        let kept: Vec<Range<usize>> =
            keep.iter().map(|name| self.register(name).map(|r| r.range())).collect::<Result<_>>()?;
        let is_kept = |mode: usize| kept.iter().any(|r| r.contains(&mode));

        // group amplitudes by the traced-out configuration
        let mut by_rest: BTreeMap<Vec<u32>, Vec<(Vec<u32>, Complex64)>> = BTreeMap::new();
        let mut basis_set = std::collections::BTreeSet::new();
        for (occ, amp) in &self.amplitudes {
            let mut sys = Vec::new();
            let mut rest = Vec::new();
            for (mode, &c) in occ.0.iter().enumerate() {
                if is_kept(mode) {
                    sys.push(c);
                } else {
                    rest.push(c);
                }
            }
            basis_set.insert(sys.clone());
            by_rest.entry(rest).or_default().push((sys, *amp));
        }
        let basis: Vec<OccupationVector> = basis_set.into_iter().map(OccupationVector).collect();
        let index: BTreeMap<&[u32], usize> =
            basis.iter().enumerate().map(|(i, o)| (o.counts(), i)).collect();
        let dim = basis.len();
        let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
        for group in by_rest.values() {
            for (si, ai) in group {
                let i = index[si.as_slice()];
                for (sj, aj) in group {
                    let j = index[sj.as_slice()];
                    rho[(i, j)] += ai * aj.conj();
                }
            }
        }
        Ok((basis, rho))
    }

    /// `<target| Tr_rest(ρ) |target> / Tr(ρ)` where `ρ = |self><self|` and
    /// `target` lives on `register`.
    pub fn fidelity_with_pure(&self, register: &str, target: &PureFockState) -> Result<f64> {
        let reg = self.register(register)?;
        if target.n_modes != reg.width {
            return Err(Error::RegisterMismatch(format!(
                "target has {} modes, register `{register}` has {}",
                target.n_modes, reg.width
            )));
        }
        let norm = self.norm_sqr();
        if norm == 0.0 {
            return Err(Error::ZeroProbability);
        }
        let range = reg.range();
        let mut overlaps: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
        for (occ, amp) in &self.amplitudes {
            let sys = OccupationVector(occ.0[range.clone()].to_vec());
            let t = target.amplitude(&sys);
            if t == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mut rest = Vec::with_capacity(self.n_modes - reg.width);
            rest.extend_from_slice(&occ.0[..range.start]);
            rest.extend_from_slice(&occ.0[range.end..]);
            *overlaps.entry(rest).or_default() += t.conj() * amp;
        }
        let target_norm = target.norm_sqr();
        Ok(overlaps.values().map(|o| o.norm_sqr()).sum::<f64>() / (norm * target_norm))
    }

    pub(crate) fn amplitudes(&self) -> &BTreeMap<OccupationVector, Complex64> {
        &self.amplitudes
    }
}
