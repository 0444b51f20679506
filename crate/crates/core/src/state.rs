//! Dense statevectors for registers of D-level sites.
//!
//! A register of `sites` qudits with local dimension `dim` is stored as a
//! dense vector of `dim^sites` complex amplitudes. Basis states are indexed
//! lexicographically with site 0 as the most significant digit, so for a
//! two-qutrit register the index of |s0 s1> is `3*s0 + s1`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Hard cap on the number of amplitudes a state may hold. Keeps accidental
/// `dim^sites` blowups from attempting multi-terabyte allocations.
const MAX_AMPLITUDES: usize = 1 << 31;

/// Checked computation of `dim^sites` as a vector length.
pub fn space_size(dim: u32, sites: usize) -> Result<usize> {
    if dim < 2 {
        return Err(Error::BadDimension(dim));
    }
    let mut len: usize = 1;
    for _ in 0..sites {
        len = len
            .checked_mul(dim as usize)
            .filter(|&l| l <= MAX_AMPLITUDES)
            .ok_or(Error::Capacity { dim, sites })?;
    }
    Ok(len)
}

/// Table of the D-th roots of unity, `omega^k` for `k in 0..dim`.
pub(crate) fn omega_table(dim: u32) -> Vec<Complex64> {
    (0..dim)
        .map(|k| Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / dim as f64))
        .collect()
}

/// Pure state of a qudit register.
#[derive(Debug, Clone, PartialEq)]
pub struct QuditState {
    dim: u32,
    sites: usize,
    amps: Vec<Complex64>,
}

impl QuditState {
    /// Builds a state from an explicit amplitude vector. The length must be
    /// exactly `dim^sites`; amplitudes are taken as given and are not
    /// renormalized.
    pub fn from_amps(dim: u32, sites: usize, amps: Vec<Complex64>) -> Result<Self> {
        let len = space_size(dim, sites)?;
        if amps.len() != len {
            return Err(Error::ShapeMismatch {
                dim,
                sites,
                got: amps.len(),
            });
        }
        Ok(QuditState { dim, sites, amps })
    }

    /// The computational basis state with the given index.
    pub fn basis_state(dim: u32, sites: usize, index: usize) -> Result<Self> {
        let len = space_size(dim, sites)?;
        if index >= len {
            return Err(Error::Invalid(format!(
                "basis index {index} out of range for space of size {len}"
            )));
        }
        let mut amps = vec![Complex64::ZERO; len];
        amps[index] = Complex64::ONE;
        Ok(QuditState { dim, sites, amps })
    }

    /// Uniform superposition `|+>^N`, the product of single-site Fourier
    /// states. Every amplitude equals `dim^(-sites/2)`.
    pub fn plus_state(dim: u32, sites: usize) -> Result<Self> {
        let len = space_size(dim, sites)?;
        let a = Complex64::new(1.0 / (len as f64).sqrt(), 0.0);
        Ok(QuditState {
            dim,
            sites,
            amps: vec![a; len],
        })
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amps(self) -> Vec<Complex64> {
        self.amps
    }

    /// Stride of the given site: adjacent values of that digit are this far
    /// apart in the amplitude vector.
    pub fn stride(&self, site: usize) -> usize {
        (self.dim as usize).pow((self.sites - 1 - site) as u32)
    }

    /// Digit of `index` at `site`.
    pub fn digit(&self, index: usize, site: usize) -> u32 {
        digit_of(index, self.dim, self.sites, site)
    }

    /// Basis index of a digit string (site 0 first).
    pub fn basis_index(&self, digits: &[u32]) -> Result<usize> {
        if digits.len() != self.sites {
            return Err(Error::Invalid(format!(
                "digit string has length {}, expected {}",
                digits.len(),
                self.sites
            )));
        }
        let mut idx = 0usize;
        for &d in digits {
            if d >= self.dim {
                return Err(Error::Invalid(format!(
                    "digit {d} out of range for dimension {}",
                    self.dim
                )));
            }
            idx = idx * self.dim as usize + d as usize;
        }
        Ok(idx)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Absolute deviation of the norm from 1.
    pub fn norm_error(&self) -> f64 {
        (self.norm_sqr().sqrt() - 1.0).abs()
    }

    /// Fails unless the state is normalized to within `tol`.
    pub fn require_normalized(&self, tol: f64) -> Result<()> {
        let deviation = self.norm_error();
        if deviation > tol {
            return Err(Error::NotNormalized { deviation });
        }
        Ok(())
    }

    /// Inner product `<self|other>`.
    pub fn overlap(&self, other: &QuditState) -> Result<Complex64> {
        if self.dim != other.dim || self.sites != other.sites {
            return Err(Error::Invalid(
                "overlap requires states of identical shape".into(),
            ));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Probability of finding the register in the given basis state.
    pub fn basis_probability(&self, index: usize) -> f64 {
        self.amps[index].norm_sqr()
    }

    /// Tensor product `self (x) other`, with `self` occupying the leading
    /// (most significant) sites.
    pub fn tensor(&self, other: &QuditState) -> Result<QuditState> {
        if self.dim != other.dim {
            return Err(Error::Invalid(
                "tensor product requires matching local dimensions".into(),
            ));
        }
        let sites = self.sites + other.sites;
        let len = space_size(self.dim, sites)?;
        let mut amps = Vec::with_capacity(len);
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(QuditState {
            dim: self.dim,
            sites,
            amps,
        })
    }

    /// Multiplies each amplitude by `exp(-i * angle * diag[k])`. This is the
    /// propagator of a diagonal Hamiltonian for time `angle` and preserves
    /// the norm exactly.
    pub fn diagonal_phase_evolve(&mut self, diag: &[f64], angle: f64) -> Result<()> {
        if diag.len() != self.amps.len() {
            return Err(Error::Invalid(format!(
                "diagonal has length {}, state has {}",
                diag.len(),
                self.amps.len()
            )));
        }
        for (a, &d) in self.amps.iter_mut().zip(diag) {
            *a *= Complex64::from_polar(1.0, -angle * d);
        }
        Ok(())
    }
}

pub(crate) fn digit_of(index: usize, dim: u32, sites: usize, site: usize) -> u32 {
    let stride = (dim as usize).pow((sites - 1 - site) as u32);
    ((index / stride) % dim as usize) as u32
}

/// Writes the digit string of `index` into `out` (site 0 first).
pub(crate) fn digits_of(index: usize, dim: u32, sites: usize, out: &mut [u32]) {
    debug_assert_eq!(out.len(), sites);
    let d = dim as usize;
    let mut rest = index;
    for site in (0..sites).rev() {
        out[site] = (rest % d) as u32;
        rest /= d;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn space_size_checks_capacity() {
        assert_eq!(space_size(2, 4).unwrap(), 16);
        assert_eq!(space_size(3, 3).unwrap(), 27);
        assert!(matches!(space_size(1, 2), Err(Error::BadDimension(1))));
        assert!(matches!(
            space_size(2, 64),
            Err(Error::Capacity { dim: 2, sites: 64 })
        ));
    }

    #[test]
    fn indexing_is_site_zero_major() {
        let s = QuditState::plus_state(3, 2).unwrap();
        assert_eq!(s.basis_index(&[1, 0]).unwrap(), 3);
        assert_eq!(s.basis_index(&[2, 1]).unwrap(), 7);
        assert_eq!(s.digit(7, 0), 2);
        assert_eq!(s.digit(7, 1), 1);
        assert_eq!(s.stride(0), 3);
        assert_eq!(s.stride(1), 1);
    }

    #[test]
    fn plus_state_is_uniform_and_normalized() {
        let s = QuditState::plus_state(2, 4).unwrap();
        assert_eq!(s.len(), 16);
        for a in s.amps() {
            assert_abs_diff_eq!(a.re, 0.25, epsilon = 1e-15);
            assert_eq!(a.im, 0.0);
        }
        assert!(s.norm_error() < 1e-12);
    }

    #[test]
    fn basis_state_has_single_amplitude() {
        let s = QuditState::basis_state(3, 2, 5).unwrap();
        assert_eq!(s.amps()[5], Complex64::ONE);
        assert_eq!(s.norm_sqr(), 1.0);
        assert!(QuditState::basis_state(3, 2, 9).is_err());
    }

    #[test]
    fn tensor_orders_leading_sites_first() {
        let a = QuditState::basis_state(2, 1, 1).unwrap();
        let b = QuditState::basis_state(2, 1, 0).unwrap();
        let ab = a.tensor(&b).unwrap();
        // |1> (x) |0> = |10>, index 2
        assert_eq!(ab.amps()[2], Complex64::ONE);
    }

    #[test]
    fn diagonal_phase_matches_closed_form() {
        // Single qubit, diag = (+1, -1): exp(-i t diag) = diag(e^{-it}, e^{+it}).
        let mut s = QuditState::plus_state(2, 1).unwrap();
        let t = 0.7;
        s.diagonal_phase_evolve(&[1.0, -1.0], t).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(s.amps()[0].re, r * t.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(s.amps()[0].im, -r * t.sin(), epsilon = 1e-15);
        assert_abs_diff_eq!(s.amps()[1].im, r * t.sin(), epsilon = 1e-15);
        assert!(s.norm_error() < 1e-15);
    }

    #[test]
    fn diagonal_phase_rejects_wrong_length() {
        let mut s = QuditState::plus_state(2, 2).unwrap();
        assert!(s.diagonal_phase_evolve(&[1.0, 2.0], 0.1).is_err());
    }
}
