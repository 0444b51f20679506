//! Closed-form order-2 stabilizer entropy for superpositions of two or three
//! computational basis states.
//!
//! The closed forms are independent of the register size and of which basis
//! states carry the weight; only the weights and relative phases enter. The
//! builders place the amplitudes explicitly so tests can verify that
//! embedding independence.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::QuditState;

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) || !v.is_finite() {
        return Err(Error::Invalid(format!("{name} = {v} outside [0, 1]")));
    }
    Ok(())
}

/// Entropy of `sqrt(F)|a> + e^(i theta) sqrt(1-F)|b>` on qubits:
/// `-log2[1 - 4x + 2x^2 (7 + cos 4 theta)]` with `x = F(1-F)`.
/// Symmetric under F -> 1-F; for fixed F minimal at theta = 0 and maximal at
/// theta = pi/4, with period pi/2.
pub fn sre2_two_state_qubit(f: f64, theta: f64) -> Result<f64> {
    check_unit("fidelity", f)?;
    let x = f * (1.0 - f);
    Ok(-(1.0 - 4.0 * x + 2.0 * x * x * (7.0 + (4.0 * theta).cos())).log2())
}

/// Lower envelope of `sre2_two_state_qubit` over the phase (theta = 0).
pub fn sre2_two_state_qubit_min(f: f64) -> Result<f64> {
    check_unit("fidelity", f)?;
    let x = f * (1.0 - f);
    Ok(-(1.0 - 4.0 * x + 16.0 * x * x).log2())
}

/// Upper envelope of `sre2_two_state_qubit` over the phase (theta = pi/4).
pub fn sre2_two_state_qubit_max(f: f64) -> Result<f64> {
    check_unit("fidelity", f)?;
    let x = f * (1.0 - f);
    Ok(-(1.0 - 4.0 * x + 12.0 * x * x).log2())
}

/// Entropy of `sqrt(F)|a> + e^(i theta1) sqrt(p)|b> + e^(i theta2) sqrt(q)|c>`
/// on qubits, with `q = 1 - F - p`.
///
/// Reduces to the two-state form at p = 0 (with phase theta2) and at q = 0
/// (with phase theta1).
pub fn sre2_three_state_qubit(f: f64, p: f64, theta1: f64, theta2: f64) -> Result<f64> {
    check_unit("fidelity", f)?;
    check_unit("p", p)?;
    let q = 1.0 - f - p;
    if q < -1e-12 {
        return Err(Error::Invalid(format!(
            "weights sum above one: F = {f}, p = {p}"
        )));
    }
    let q = q.max(0.0);
    let quartic = |v: f64| v * v * v * v;
    let diag = 0.25
        * (quartic(f + p + q)
            + quartic(f + p - q)
            + quartic(f - p + q)
            + quartic(f - p - q));
    let cross = 2.0 * f * f * p * p * (3.0 + (4.0 * theta1).cos())
        + 2.0 * f * f * q * q * (3.0 + (4.0 * theta2).cos())
        + 2.0 * p * p * q * q * (3.0 + (4.0 * (theta1 - theta2)).cos());
    Ok(-(diag + cross).log2())
}

/// Entropy of `sqrt(F)|a> + e^(i phi) sqrt(1-F)|b>` for a pair of distinct
/// qutrit digits `a != b`; independent of the relative phase phi.
///
/// `-log2[(1 + |w^a F + (1-F) w^b|^4 + |w^(2a) F + (1-F) w^(2b)|^4
///         + 6 F^2 (1-F)^2) / 3]` with `w = e^(2 pi i / 3)`.
pub fn sre2_two_state_qutrit(f: f64, a: u32, b: u32) -> Result<f64> {
    check_unit("fidelity", f)?;
    if a == b || a >= 3 || b >= 3 {
        return Err(Error::Invalid(format!(
            "basis pair ({a}, {b}) must be distinct digits below 3"
        )));
    }
    let w = |k: u32| Complex64::from_polar(1.0, std::f64::consts::TAU * (k % 3) as f64 / 3.0);
    let q = 1.0 - f;
    let z1 = w(a) * f + w(b) * q;
    let z2 = w(2 * a) * f + w(2 * b) * q;
    let sum = 1.0
        + z1.norm_sqr() * z1.norm_sqr()
        + z2.norm_sqr() * z2.norm_sqr()
        + 6.0 * f * f * q * q;
    Ok(-(sum / 3.0).log2())
}

/// Builds `sqrt(F)|a> + e^(i theta) sqrt(1-F)|b>` on an explicit register.
pub fn two_level_state(
    dim: u32,
    sites: usize,
    idx_a: usize,
    idx_b: usize,
    f: f64,
    theta: f64,
) -> Result<QuditState> {
    check_unit("fidelity", f)?;
    if idx_a == idx_b {
        return Err(Error::Invalid("basis indices must be distinct".into()));
    }
    let mut s = QuditState::basis_state(dim, sites, idx_a)?;
    if idx_b >= s.len() {
        return Err(Error::Invalid(format!("basis index {idx_b} out of range")));
    }
    let amps = s.amps_mut();
    amps[idx_a] = Complex64::new(f.sqrt(), 0.0);
    amps[idx_b] = Complex64::from_polar((1.0 - f).sqrt(), theta);
    Ok(s)
}

/// Builds `sqrt(F)|a> + e^(i theta1) sqrt(p)|b> + e^(i theta2) sqrt(q)|c>`.
pub fn three_level_state(
    dim: u32,
    sites: usize,
    idx: [usize; 3],
    f: f64,
    p: f64,
    theta1: f64,
    theta2: f64,
) -> Result<QuditState> {
    check_unit("fidelity", f)?;
    check_unit("p", p)?;
    let q = 1.0 - f - p;
    if q < -1e-12 {
        return Err(Error::Invalid(format!(
            "weights sum above one: F = {f}, p = {p}"
        )));
    }
    if idx[0] == idx[1] || idx[0] == idx[2] || idx[1] == idx[2] {
        return Err(Error::Invalid("basis indices must be distinct".into()));
    }
    let mut s = QuditState::basis_state(dim, sites, idx[0])?;
    if idx.iter().any(|&i| i >= s.len()) {
        return Err(Error::Invalid("basis index out of range".into()));
    }
    let amps = s.amps_mut();
    amps[idx[0]] = Complex64::new(f.sqrt(), 0.0);
    amps[idx[1]] = Complex64::from_polar(p.sqrt(), theta1);
    amps[idx[2]] = Complex64::from_polar(q.max(0.0).sqrt(), theta2);
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::magic::sre2;
    use approx::assert_abs_diff_eq;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_state_reference_points() {
        assert_abs_diff_eq!(sre2_two_state_qubit(1.0, 0.3).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sre2_two_state_qubit(0.5, 0.0).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            sre2_two_state_qubit(0.5, std::f64::consts::FRAC_PI_4).unwrap(),
            -(0.75f64).log2(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn two_state_symmetry_and_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let f: f64 = rng.random();
            let theta = rng.random::<f64>() * std::f64::consts::TAU;
            let a = sre2_two_state_qubit(f, theta).unwrap();
            let b = sre2_two_state_qubit(1.0 - f, theta).unwrap();
            assert_eq!(a, b);
            let lo = sre2_two_state_qubit_min(f).unwrap();
            let hi = sre2_two_state_qubit_max(f).unwrap();
            assert!(a >= lo - 1e-12 && a <= hi + 1e-12);
            // period pi/2
            let shifted = sre2_two_state_qubit(f, theta + std::f64::consts::FRAC_PI_2).unwrap();
            assert_abs_diff_eq!(a, shifted, epsilon = 1e-12);
        }
    }

    #[test]
    fn two_state_matches_embedded_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let f: f64 = rng.random();
            let theta = rng.random::<f64>() * std::f64::consts::TAU;
            let sites = rng.random_range(1..4usize);
            let len = 1usize << sites;
            let ia = rng.random_range(0..len);
            let mut ib = rng.random_range(0..len - 1);
            if ib >= ia {
                ib += 1;
            }
            let state = two_level_state(2, sites, ia, ib, f, theta).unwrap();
            let direct = sre2(&state).unwrap();
            let formula = sre2_two_state_qubit(f, theta).unwrap();
            assert_abs_diff_eq!(direct, formula, epsilon = 1e-11);
        }
    }

    #[test]
    fn three_state_reduces_to_two_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let f: f64 = rng.random();
            let t1 = rng.random::<f64>() * std::f64::consts::TAU;
            let t2 = rng.random::<f64>() * std::f64::consts::TAU;
            // p = 0 leaves weights F and q with phase theta2
            let a = sre2_three_state_qubit(f, 0.0, t1, t2).unwrap();
            assert_abs_diff_eq!(a, sre2_two_state_qubit(f, t2).unwrap(), epsilon = 1e-12);
            // q = 0 leaves weights F and p with phase theta1
            let b = sre2_three_state_qubit(f, 1.0 - f, t1, t2).unwrap();
            assert_abs_diff_eq!(b, sre2_two_state_qubit(f, t1).unwrap(), epsilon = 1e-12);
        }
    }

    #[test]
    fn three_state_symmetric_point() {
        // F = p = q = 1/3, zero phases: bracket evaluates to 45/81.
        let v = sre2_three_state_qubit(1.0 / 3.0, 1.0 / 3.0, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(v, -(45.0f64 / 81.0).log2(), epsilon = 1e-13);
    }

    #[test]
    fn three_state_matches_embedded_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let f: f64 = rng.random();
            let p = rng.random::<f64>() * (1.0 - f);
            let t1 = rng.random::<f64>() * std::f64::consts::TAU;
            let t2 = rng.random::<f64>() * std::f64::consts::TAU;
            let sites = rng.random_range(2..4usize);
            let len = 1usize << sites;
            let mut idx = [0usize; 3];
            idx[0] = rng.random_range(0..len);
            loop {
                idx[1] = rng.random_range(0..len);
                if idx[1] != idx[0] {
                    break;
                }
            }
            loop {
                idx[2] = rng.random_range(0..len);
                if idx[2] != idx[0] && idx[2] != idx[1] {
                    break;
                }
            }
            let state = three_level_state(2, sites, idx, f, p, t1, t2).unwrap();
            let direct = sre2(&state).unwrap();
            let formula = sre2_three_state_qubit(f, p, t1, t2).unwrap();
            assert_abs_diff_eq!(direct, formula, epsilon = 1e-11);
        }
    }

    #[test]
    fn qutrit_reference_points() {
        assert_abs_diff_eq!(sre2_two_state_qutrit(1.0, 0, 1).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sre2_two_state_qutrit(0.0, 0, 2).unwrap(), 0.0, epsilon = 1e-15);
        // Equal weights give exactly one bit.
        assert_abs_diff_eq!(sre2_two_state_qutrit(0.5, 0, 1).unwrap(), 1.0, epsilon = 1e-13);
    }

    #[test]
    fn qutrit_formula_is_pair_independent_and_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pairs = [(0u32, 1u32), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)];
        for _ in 0..40 {
            let f: f64 = rng.random();
            let phi = rng.random::<f64>() * std::f64::consts::TAU;
            let base = sre2_two_state_qutrit(f, 0, 1).unwrap();
            for &(a, b) in &pairs {
                assert_abs_diff_eq!(
                    sre2_two_state_qutrit(f, a, b).unwrap(),
                    base,
                    epsilon = 1e-12
                );
            }
            // phase independence of the actual state
            let state = two_level_state(3, 1, 0, 2, f, phi).unwrap();
            assert_abs_diff_eq!(sre2(&state).unwrap(), base, epsilon = 1e-11);
            // and on a two-qutrit register
            let state2 = two_level_state(3, 2, 4, 7, f, phi).unwrap();
            assert_abs_diff_eq!(sre2(&state2).unwrap(), base, epsilon = 1e-11);
        }
    }

    #[test]
    fn invalid_parameters_are_refused() {
        assert!(sre2_two_state_qubit(1.2, 0.0).is_err());
        assert!(sre2_three_state_qubit(0.7, 0.5, 0.0, 0.0).is_err());
        assert!(sre2_two_state_qutrit(0.5, 1, 1).is_err());
        assert!(two_level_state(2, 2, 3, 3, 0.5, 0.0).is_err());
    }
}
