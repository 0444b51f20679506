//! Gate application on dense qudit registers.
//!
//! Named gates (shift, clock, Fourier, quadratic phase, controlled sum) are
//! applied through exact fast paths. Arbitrary single-site matrices are
//! checked for unitarity before use.

use num_complex::Complex64;
use rand::{Rng, RngExt};

use crate::error::{Error, Result};
use crate::state::{omega_table, QuditState};

/// How far a supplied matrix may deviate from unitarity before it is refused.
const UNITARITY_TOL: f64 = 1e-12;

/// One gate acting on a register.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    /// `X^power` on one site: adds `power` to the digit, mod D.
    Shift { site: usize, power: u32 },
    /// `Z^power` on one site: phase `omega^(power * digit)`.
    Clock { site: usize, power: u32 },
    /// Discrete Fourier transform on one site, `F|j> = D^(-1/2) sum_k omega^(jk) |k>`.
    Fourier { site: usize },
    /// Inverse of `Fourier`.
    FourierInv { site: usize },
    /// Quadratic phase gate. `diag(1, i)` for qubits, `omega^(k(k-1)/2)` for odd D.
    Phase { site: usize },
    /// Adds the control digit to the target digit, mod D.
    Csum { control: usize, target: usize },
    /// Arbitrary row-major D x D unitary on one site.
    SingleSite { site: usize, matrix: Vec<Complex64> },
}

pub fn apply_gate(state: &mut QuditState, gate: &Gate) -> Result<()> {
    match gate {
        Gate::Shift { site, power } => apply_shift(state, *site, *power),
        Gate::Clock { site, power } => apply_clock(state, *site, *power),
        Gate::Fourier { site } => {
            let m = fourier_matrix(state.dim());
            check_site(state, *site)?;
            apply_single_site_unchecked(state, *site, &m);
            Ok(())
        }
        Gate::FourierInv { site } => {
            let m = dagger(&fourier_matrix(state.dim()), state.dim() as usize);
            check_site(state, *site)?;
            apply_single_site_unchecked(state, *site, &m);
            Ok(())
        }
        Gate::Phase { site } => {
            let diag = phase_gate_diag(state.dim())?;
            check_site(state, *site)?;
            apply_diag_site(state, *site, &diag);
            Ok(())
        }
        Gate::Csum { control, target } => apply_csum(state, *control, *target),
        Gate::SingleSite { site, matrix } => apply_single_site(state, *site, matrix),
    }
}

pub fn apply_circuit(state: &mut QuditState, gates: &[Gate]) -> Result<()> {
    for g in gates {
        apply_gate(state, g)?;
    }
    Ok(())
}

/// Applies the phase-free product `prod_i X_i^(v1_i) Z_i^(v2_i)`.
/// Z acts first, matching the operator order `X^v1 Z^v2`.
pub fn apply_pauli(state: &mut QuditState, v1: &[u32], v2: &[u32]) -> Result<()> {
    let sites = state.sites();
    if v1.len() != sites || v2.len() != sites {
        return Err(Error::Invalid(format!(
            "exponent strings have lengths {} and {}, expected {sites}",
            v1.len(),
            v2.len()
        )));
    }
    for site in 0..sites {
        apply_clock(state, site, v2[site])?;
    }
    for site in 0..sites {
        apply_shift(state, site, v1[site])?;
    }
    Ok(())
}

fn check_site(state: &QuditState, site: usize) -> Result<()> {
    if site >= state.sites() {
        return Err(Error::SiteOutOfRange {
            site,
            sites: state.sites(),
        });
    }
    Ok(())
}

/// Row-major Fourier matrix, `F[k][j] = omega^(jk) / sqrt(D)`.
pub fn fourier_matrix(dim: u32) -> Vec<Complex64> {
    let d = dim as usize;
    let omega = omega_table(dim);
    let scale = 1.0 / (d as f64).sqrt();
    let mut m = vec![Complex64::ZERO; d * d];
    for k in 0..d {
        for j in 0..d {
            m[k * d + j] = omega[(j * k) % d] * scale;
        }
    }
    m
}

/// Diagonal of the quadratic phase gate.
pub fn phase_gate_diag(dim: u32) -> Result<Vec<Complex64>> {
    if dim == 2 {
        return Ok(vec![Complex64::ONE, Complex64::I]);
    }
    if dim.is_multiple_of(2) {
        return Err(Error::UnsupportedDimension {
            op: "phase gate",
            requirement: "dimension 2 or odd",
            dim,
        });
    }
    let d = dim as usize;
    let omega = omega_table(dim);
    // k(k-1) is always even, so the exponent is an integer.
    Ok((0..d)
        .map(|k| omega[k * k.saturating_sub(1) / 2 % d])
        .collect())
}

fn dagger(m: &[Complex64], d: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::ZERO; d * d];
    for i in 0..d {
        for j in 0..d {
            out[i * d + j] = m[j * d + i].conj();
        }
    }
    out
}

/// Largest entry of `U^dag U - I`.
pub fn unitarity_defect(matrix: &[Complex64], d: usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let mut dot = Complex64::ZERO;
            for k in 0..d {
                dot += matrix[k * d + i].conj() * matrix[k * d + j];
            }
            if i == j {
                dot -= Complex64::ONE;
            }
            worst = worst.max(dot.norm());
        }
    }
    worst
}

/// Applies a validated D x D unitary to one site.
pub fn apply_single_site(state: &mut QuditState, site: usize, matrix: &[Complex64]) -> Result<()> {
    check_site(state, site)?;
    let d = state.dim() as usize;
    if matrix.len() != d * d {
        return Err(Error::Invalid(format!(
            "matrix has {} entries, expected {}",
            matrix.len(),
            d * d
        )));
    }
    let deviation = unitarity_defect(matrix, d);
    if deviation > UNITARITY_TOL {
        return Err(Error::NonUnitary { deviation });
    }
    apply_single_site_unchecked(state, site, matrix);
    Ok(())
}

/// Dense single-site apply without the unitarity check. Callers are expected
/// to pass matrices that are unitary by construction.
pub(crate) fn apply_single_site_unchecked(
    state: &mut QuditState,
    site: usize,
    matrix: &[Complex64],
) {
    let d = state.dim() as usize;
    let stride = state.stride(site);
    let block = stride * d;
    let len = state.len();
    let amps = state.amps_mut();
    let mut fiber = vec![Complex64::ZERO; d];
    for base in (0..len).step_by(block) {
        for off in 0..stride {
            let lo = base + off;
            for (k, f) in fiber.iter_mut().enumerate() {
                *f = amps[lo + k * stride];
            }
            for k in 0..d {
                let mut acc = Complex64::ZERO;
                let row = &matrix[k * d..(k + 1) * d];
                for (j, f) in fiber.iter().enumerate() {
                    acc += row[j] * f;
                }
                amps[lo + k * stride] = acc;
            }
        }
    }
}

fn apply_diag_site(state: &mut QuditState, site: usize, diag: &[Complex64]) {
    let d = state.dim() as usize;
    let stride = state.stride(site);
    let block = stride * d;
    let len = state.len();
    let amps = state.amps_mut();
    for base in (0..len).step_by(block) {
        for (k, &phase) in diag.iter().enumerate() {
            let lo = base + k * stride;
            for a in &mut amps[lo..lo + stride] {
                *a *= phase;
            }
        }
    }
    debug_assert_eq!(block * (len / block), len);
}

fn apply_shift(state: &mut QuditState, site: usize, power: u32) -> Result<()> {
    check_site(state, site)?;
    let d = state.dim() as usize;
    let shift = (power % state.dim()) as usize;
    if shift == 0 {
        return Ok(());
    }
    let stride = state.stride(site);
    let block = stride * d;
    let len = state.len();
    let amps = state.amps_mut();
    let mut fiber = vec![Complex64::ZERO; d];
    for base in (0..len).step_by(block) {
        for off in 0..stride {
            let lo = base + off;
            for (k, f) in fiber.iter_mut().enumerate() {
                *f = amps[lo + k * stride];
            }
            for k in 0..d {
                amps[lo + (k + shift) % d * stride] = fiber[k];
            }
        }
    }
    Ok(())
}

fn apply_clock(state: &mut QuditState, site: usize, power: u32) -> Result<()> {
    check_site(state, site)?;
    let dim = state.dim();
    let omega = omega_table(dim);
    let d = dim as usize;
    let p = (power % dim) as usize;
    let diag: Vec<Complex64> = (0..d).map(|k| omega[k * p % d]).collect();
    apply_diag_site(state, site, &diag);
    Ok(())
}

fn apply_csum(state: &mut QuditState, control: usize, target: usize) -> Result<()> {
    check_site(state, control)?;
    check_site(state, target)?;
    if control == target {
        return Err(Error::Invalid(
            "controlled sum requires distinct control and target".into(),
        ));
    }
    let d = state.dim() as usize;
    let sc = state.stride(control);
    let st = state.stride(target);
    let old = state.amps().to_vec();
    let amps = state.amps_mut();
    // Scatter: each source index maps to a unique destination.
    for (idx, &a) in old.iter().enumerate() {
        let c = idx / sc % d;
        let t = idx / st % d;
        let nt = (t + c) % d;
        amps[idx - t * st + nt * st] = a;
    }
    Ok(())
}

/// Uniformly random circuit over the gate set that maps stabilizer states to
/// stabilizer states: Fourier, quadratic phase, controlled sum, and bare
/// shift/clock operators on random sites.
pub fn random_clifford_circuit<R: Rng>(
    dim: u32,
    sites: usize,
    gate_count: usize,
    rng: &mut R,
) -> Vec<Gate> {
    let mut gates = Vec::with_capacity(gate_count);
    for _ in 0..gate_count {
        let site = rng.random_range(0..sites);
        let kind_count = if sites >= 2 { 5 } else { 4 };
        match rng.random_range(0..kind_count) {
            0 => gates.push(Gate::Fourier { site }),
            1 => gates.push(Gate::Phase { site }),
            2 => gates.push(Gate::Shift {
                site,
                power: rng.random_range(1..dim),
            }),
            3 => gates.push(Gate::Clock {
                site,
                power: rng.random_range(1..dim),
            }),
            _ => {
                let mut other = rng.random_range(0..sites - 1);
                if other >= site {
                    other += 1;
                }
                gates.push(Gate::Csum {
                    control: site,
                    target: other,
                });
            }
        }
    }
    gates
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(dim: u32, sites: usize, seed: u64) -> QuditState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = crate::state::space_size(dim, sites).unwrap();
        let mut amps: Vec<Complex64> = (0..len)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        QuditState::from_amps(dim, sites, amps).unwrap()
    }

    fn max_diff(a: &QuditState, b: &QuditState) -> f64 {
        a.amps()
            .iter()
            .zip(b.amps())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn fourier_sends_zero_to_uniform() {
        for dim in [2u32, 3, 5] {
            let mut s = QuditState::basis_state(dim, 1, 0).unwrap();
            apply_gate(&mut s, &Gate::Fourier { site: 0 }).unwrap();
            let plus = QuditState::plus_state(dim, 1).unwrap();
            assert!(max_diff(&s, &plus) < 1e-14);
        }
    }

    #[test]
    fn fourier_inverse_roundtrips() {
        for dim in [2u32, 3] {
            let s0 = random_state(dim, 3, 7);
            let mut s = s0.clone();
            apply_gate(&mut s, &Gate::Fourier { site: 1 }).unwrap();
            apply_gate(&mut s, &Gate::FourierInv { site: 1 }).unwrap();
            assert!(max_diff(&s, &s0) < 1e-14);
        }
    }

    #[test]
    fn pauli_action_on_basis_states() {
        // X^a Z^b |j> = omega^(b j) |j + a>
        let dim = 3u32;
        let omega = omega_table(dim);
        for j in 0..3usize {
            for a in 0..3u32 {
                for b in 0..3u32 {
                    let mut s = QuditState::basis_state(dim, 1, j).unwrap();
                    apply_pauli(&mut s, &[a], &[b]).unwrap();
                    let target = (j + a as usize) % 3;
                    let expect = omega[(b as usize * j) % 3];
                    assert!((s.amps()[target] - expect).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn csum_adds_control_into_target() {
        let dim = 3u32;
        for c in 0..3usize {
            for t in 0..3usize {
                let idx = c * 3 + t;
                let mut s = QuditState::basis_state(dim, 2, idx).unwrap();
                apply_gate(&mut s, &Gate::Csum { control: 0, target: 1 }).unwrap();
                let expect = c * 3 + (t + c) % 3;
                assert_eq!(s.amps()[expect], Complex64::ONE);
            }
        }
    }

    #[test]
    fn phase_gate_conjugates_shift_to_shift_clock() {
        // S X S^dag = X Z for odd dimension.
        for dim in [3u32, 5] {
            let d = dim as usize;
            let sdag: Vec<Complex64> = {
                let diag = phase_gate_diag(dim).unwrap();
                let mut m = vec![Complex64::ZERO; d * d];
                for k in 0..d {
                    m[k * d + k] = diag[k].conj();
                }
                m
            };
            let s0 = random_state(dim, 1, 11);
            let mut left = s0.clone();
            apply_gate(&mut left, &Gate::SingleSite { site: 0, matrix: sdag }).unwrap();
            apply_gate(&mut left, &Gate::Shift { site: 0, power: 1 }).unwrap();
            apply_gate(&mut left, &Gate::Phase { site: 0 }).unwrap();
            let mut right = s0.clone();
            apply_pauli(&mut right, &[1], &[1]).unwrap();
            assert!(max_diff(&left, &right) < 1e-14);
        }
    }

    #[test]
    fn qubit_phase_gate_is_sqrt_of_clock() {
        let s0 = random_state(2, 2, 3);
        let mut twice = s0.clone();
        apply_gate(&mut twice, &Gate::Phase { site: 1 }).unwrap();
        apply_gate(&mut twice, &Gate::Phase { site: 1 }).unwrap();
        let mut clock = s0.clone();
        apply_gate(&mut clock, &Gate::Clock { site: 1, power: 1 }).unwrap();
        assert!(max_diff(&twice, &clock) < 1e-14);
    }

    #[test]
    fn clock_powers_compose() {
        let s0 = random_state(3, 2, 5);
        let mut a = s0.clone();
        apply_gate(&mut a, &Gate::Clock { site: 0, power: 1 }).unwrap();
        apply_gate(&mut a, &Gate::Clock { site: 0, power: 1 }).unwrap();
        let mut b = s0.clone();
        apply_gate(&mut b, &Gate::Clock { site: 0, power: 2 }).unwrap();
        assert!(max_diff(&a, &b) < 1e-14);
    }

    #[test]
    fn non_unitary_matrix_is_refused() {
        let mut s = QuditState::plus_state(2, 1).unwrap();
        let m = vec![
            Complex64::ONE,
            Complex64::ONE,
            Complex64::ZERO,
            Complex64::ONE,
        ];
        match apply_single_site(&mut s, 0, &m) {
            Err(Error::NonUnitary { deviation }) => assert!(deviation > 0.5),
            other => panic!("expected NonUnitary, got {other:?}"),
        }
    }

    #[test]
    fn random_circuits_preserve_norm() {
        for (dim, sites) in [(2u32, 4usize), (3, 3)] {
            for seed in 0..5u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let circuit = random_clifford_circuit(dim, sites, 60, &mut rng);
                let mut s = QuditState::basis_state(dim, sites, 0).unwrap();
                apply_circuit(&mut s, &circuit).unwrap();
                assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = 1e-12);
            }
        }
    }
}
