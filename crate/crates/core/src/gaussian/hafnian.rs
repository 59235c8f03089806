//! Fock-basis matrix elements of zero-mean Gaussian states.
//!
//! With `Q = σ_c + I/2` the Husimi covariance in the `(a, a†)` ordering and
//! `B = (I - Q⁻¹) X` (`X` swaps the two halves), the element
//! `<m|ρ|n> = haf(B_(m,n)) / (√det Q √(m! n!))`, where `B_(m,n)` repeats the
//! bra indices by `m` and the ket indices by `n`. The hafnians are evaluated
//! by a memoised row expansion
//! `haf(B_(k+e_i)) = Σ_j B_ij k_j haf(B_(k-e_j))`.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{enumerate_detection_patterns, OccupationVector};
use crate::linear_optics::permanent_repeated;

/// Hafnian by expansion over perfect matchings. Odd dimension gives 0 and
/// the empty matrix gives 1. Intended for small matrices.
pub fn hafnian(m: &DMatrix<Complex64>) -> Complex64 {
    assert!(m.is_square(), "hafnian needs a square matrix");
    let n = m.nrows();
    if n % 2 == 1 {
        return Complex64::new(0.0, 0.0);
    }
    fn expand(m: &DMatrix<Complex64>, remaining: &mut Vec<usize>) -> Complex64 {
        if remaining.is_empty() {
            return Complex64::new(1.0, 0.0);
        }
        let first = remaining.remove(0);
        let mut total = Complex64::new(0.0, 0.0);
        for idx in 0..remaining.len() {
            let partner = remaining.remove(idx);
            let w = m[(first, partner)];
            if w.norm() != 0.0 {
                total += w * expand(m, remaining);
            }
            remaining.insert(idx, partner);
        }
        remaining.insert(0, first);
        total
    }
    expand(m, &mut (0..n).collect())
}

/// Complex `(a, a†)` covariance `σ_c` of a real quadrature covariance with
/// interleaved `(x_i, p_i)` ordering and vacuum equal to the identity.
pub fn complex_covariance(cov: &DMatrix<f64>) -> DMatrix<Complex64> {
    let k = cov.nrows() / 2;
    let mut out = DMatrix::<Complex64>::zeros(2 * k, 2 * k);
    for i in 0..k {
        for j in 0..k {
            let xx = cov[(2 * i, 2 * j)];
            let xp = cov[(2 * i, 2 * j + 1)];
            let px = cov[(2 * i + 1, 2 * j)];
            let pp = cov[(2 * i + 1, 2 * j + 1)];
            // ½<{a_i, a_j†}> and ½<{a_i, a_j}>
            let normal = Complex64::new(xx + pp, px - xp) / 4.0;
            let anomalous = Complex64::new(xx - pp, xp + px) / 4.0;
            out[(i, j)] = normal;
            out[(i, k + j)] = anomalous;
            out[(k + i, j)] = anomalous.conj();
            out[(k + i, k + j)] = normal.conj();
        }
    }
    out
}

/// Lazily evaluated Fock elements of one Gaussian state.
pub struct GaussianFockElements {
    n_modes: usize,
    b: DMatrix<Complex64>,
    /// Bra-ket block of `B`.
    cross: DMatrix<Complex64>,
    prefactor: f64,
    phase_symmetric: bool,
    memo: HashMap<Vec<u32>, Complex64>,
    /// Last photon-number block built by [`Self::number_block`].
    block: Option<(u32, Vec<OccupationVector>, DMatrix<Complex64>)>,
}

impl GaussianFockElements {
    pub fn new(cov: &DMatrix<f64>) -> Result<Self> {
        if !cov.is_square() || !cov.nrows().is_multiple_of(2) {
            return Err(Error::Domain("covariance must be square with even dimension".into()));
        }
        let k = cov.nrows() / 2;
        let sigma = complex_covariance(cov);
        let q = &sigma + DMatrix::<Complex64>::identity(2 * k, 2 * k) * Complex64::new(0.5, 0.0);
        let det = q.determinant();
        if det.re.is_nan() || det.re <= 0.0 {
            return Err(Error::NonPhysical(format!("Husimi covariance has determinant {det}")));
        }
        let q_inv = q
            .try_inverse()
            .ok_or_else(|| Error::NonPhysical("Husimi covariance is singular".into()))?;
        let m = DMatrix::<Complex64>::identity(2 * k, 2 * k) - q_inv;
        // (I - Q⁻¹) X: swap the column halves
        let mut b = DMatrix::<Complex64>::zeros(2 * k, 2 * k);
        for r in 0..2 * k {
            for col in 0..2 * k {
                let src = if col < k { col + k } else { col - k };
                b[(r, col)] = m[(r, src)];
            }
        }
        let b = (&b + b.transpose()) * Complex64::new(0.5, 0.0);
        let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let b = b.map(|z| if z.norm() <= 1e-15 * scale { Complex64::new(0.0, 0.0) } else { z });
        let anomalous = (0..k)
            .flat_map(|i| (0..k).map(move |j| (i, j)))
            .map(|(i, j)| sigma[(i, k + j)].norm())
            .fold(0.0, f64::max);
        let cross = b.view((0, k), (k, k)).clone_owned();
        Ok(Self {
            n_modes: k,
            b,
            cross,
            prefactor: 1.0 / det.re.sqrt(),
            phase_symmetric: anomalous <= 1e-14,
            memo: HashMap::new(),
            block: None,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// True when the state commutes with a global phase rotation; then
    /// elements between different total photon numbers vanish.
    pub fn phase_symmetric(&self) -> bool {
        self.phase_symmetric
    }

    /// `<bra|ρ|ket>`.
    pub fn element(&mut self, bra: &OccupationVector, ket: &OccupationVector) -> Result<Complex64> {
        if bra.n_modes() != self.n_modes || ket.n_modes() != self.n_modes {
            return Err(Error::RegisterMismatch(format!(
                "vectors must have {} modes",
                self.n_modes
            )));
        }
        if (bra.total() + ket.total()) % 2 == 1 || (self.phase_symmetric && bra.total() != ket.total()) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if self.phase_symmetric {
            // only bra-ket pairings survive, so the hafnian is a permanent
            let perm = permanent_repeated(&self.cross, bra.counts(), ket.counts());
            return Ok(perm * self.prefactor / (bra.factorial_product() * ket.factorial_product()).sqrt());
        }
        Ok(self.element_by_recursion(bra, ket))
    }

    /// All elements between `p`-photon vectors, in the order of
    /// [`enumerate_detection_patterns`]. Phase-symmetric states only. Each
    /// block is built from the previous one by
    /// `E(m, n) = Σ_j A_ij √(n_j / m_i) E(m - e_i, n - e_j)`.
    pub fn number_block(&mut self, p: u32) -> Result<(Vec<OccupationVector>, DMatrix<Complex64>)> {
        if !self.phase_symmetric {
            return Err(Error::Unsupported("photon-number blocks need a phase-symmetric state".into()));
        }
        let k = self.n_modes;
        let (mut level, mut basis, mut m) = match self.block.take() {
            Some((q, b, m)) if q <= p => (q, b, m),
            _ => (0, vec![OccupationVector::vacuum(k)], DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0))),
        };
        while level < p {
            let index: HashMap<&OccupationVector, usize> = basis.iter().enumerate().map(|(i, v)| (v, i)).collect();
            let next = enumerate_detection_patterns(k, level + 1);
            let mut out = DMatrix::<Complex64>::zeros(next.len(), next.len());
            for (r, bra) in next.iter().enumerate() {
                let i = bra.counts().iter().position(|&c| c > 0).expect("non-vacuum");
                let mut lower = bra.counts().to_vec();
                lower[i] -= 1;
                let row = index[&OccupationVector::new(lower)];
                let mi = bra.get(i) as f64;
                for (col, ket) in next.iter().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for j in 0..k {
                        let nj = ket.get(j);
                        if nj == 0 {
                            continue;
                        }
                        let mut lower_ket = ket.counts().to_vec();
                        lower_ket[j] -= 1;
                        let c = index[&OccupationVector::new(lower_ket)];
                        acc += self.cross[(i, j)] * (nj as f64 / mi).sqrt() * m[(row, c)];
                    }
                    out[(r, col)] = acc;
                }
            }
            level += 1;
            basis = next;
            m = out;
        }
        let scaled = &m * Complex64::new(self.prefactor, 0.0);
        self.block = Some((level, basis.clone(), m));
        Ok((basis, scaled))
    }

    fn element_by_recursion(&mut self, bra: &OccupationVector, ket: &OccupationVector) -> Complex64 {
        let mut key = bra.counts().to_vec();
        key.extend_from_slice(ket.counts());
        self.normalized_hafnian(key) * self.prefactor
    }

    /// `haf(B_k) / √(k!)`.
    fn normalized_hafnian(&mut self, key: Vec<u32>) -> Complex64 {
        let Some(i) = key.iter().position(|&c| c > 0) else {
            return Complex64::new(1.0, 0.0);
        };
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let ki = key[i];
        let mut reduced = key.clone();
        reduced[i] -= 1;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..reduced.len() {
            let count = reduced[j];
            if count == 0 {
                continue;
            }
            let w = self.b[(i, j)];
            if w.norm() == 0.0 {
                continue;
            }
            let mut next = reduced.clone();
            next[j] -= 1;
            acc += w * (count as f64).sqrt() * self.normalized_hafnian(next);
        }
        let value = acc / (ki as f64).sqrt();
        self.memo.insert(key, value);
        value
    }
}
