//! Generalized Pauli operators `X^v1 Z^v2` and their expectation values.
//!
//! A Pauli on an N-site register is labelled by two exponent strings
//! `v1, v2 in {0..D-1}^N`. The flat label index is v1-major:
//! `label = flat(v1) * D^N + flat(v2)`, with `flat` using the same site-0
//! most significant digit order as basis states. No phase convention is
//! attached: the operator is literally `prod_i X_i^(v1_i) Z_i^(v2_i)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::{digits_of, omega_table, space_size, QuditState};

/// Number of Pauli labels, `D^(2 sites)`.
pub fn label_count(dim: u32, sites: usize) -> Result<usize> {
    space_size(dim, 2 * sites)
}

/// Flat index of an exponent string.
pub fn flat_exponent(dim: u32, digits: &[u32]) -> usize {
    digits
        .iter()
        .fold(0usize, |acc, &d| acc * dim as usize + d as usize)
}

/// Flat label of the Pauli `X^v1 Z^v2`.
pub fn label_index(dim: u32, sites: usize, v1: &[u32], v2: &[u32]) -> Result<usize> {
    if v1.len() != sites || v2.len() != sites {
        return Err(Error::Invalid(format!(
            "exponent strings have lengths {} and {}, expected {sites}",
            v1.len(),
            v2.len()
        )));
    }
    if v1.iter().chain(v2).any(|&d| d >= dim) {
        return Err(Error::Invalid(format!(
            "exponent digit out of range for dimension {dim}"
        )));
    }
    let dn = space_size(dim, sites)?;
    Ok(flat_exponent(dim, v1) * dn + flat_exponent(dim, v2))
}

/// Inverse of `label_index`.
pub fn label_from_index(dim: u32, sites: usize, label: usize) -> Result<(Vec<u32>, Vec<u32>)> {
    let dn = space_size(dim, sites)?;
    if label >= dn * dn {
        return Err(Error::Invalid(format!(
            "label {label} out of range for {} operators",
            dn * dn
        )));
    }
    let mut v1 = vec![0u32; sites];
    let mut v2 = vec![0u32; sites];
    digits_of(label / dn, dim, sites, &mut v1);
    digits_of(label % dn, dim, sites, &mut v2);
    Ok((v1, v2))
}

/// Expectation value `<psi| X^v1 Z^v2 |psi>`.
///
/// Equals `sum_s omega^(v2.s) conj(psi[s + v1]) psi[s]`, where `s + v1` is
/// digit-wise addition mod D.
pub fn pauli_expectation(state: &QuditState, v1: &[u32], v2: &[u32]) -> Result<Complex64> {
    let sites = state.sites();
    let dim = state.dim();
    if v1.len() != sites || v2.len() != sites {
        return Err(Error::Invalid(format!(
            "exponent strings have lengths {} and {}, expected {sites}",
            v1.len(),
            v2.len()
        )));
    }
    if v1.iter().chain(v2).any(|&d| d >= dim) {
        return Err(Error::Invalid(format!(
            "exponent digit out of range for dimension {dim}"
        )));
    }
    let d = dim as usize;
    let amps = state.amps();
    let mut digits = vec![0u32; sites];
    let mut acc = Complex64::ZERO;
    let omega = omega_table(dim);
    for (s, &a) in amps.iter().enumerate() {
        digits_of(s, dim, sites, &mut digits);
        let mut shifted = 0usize;
        let mut phase = 0usize;
        for i in 0..sites {
            shifted = shifted * d + (digits[i] as usize + v1[i] as usize) % d;
            phase += v2[i] as usize * digits[i] as usize;
        }
        acc += omega[phase % d] * amps[shifted].conj() * a;
    }
    Ok(acc)
}
