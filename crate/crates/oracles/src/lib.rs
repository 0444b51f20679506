//! Slow dense-matrix reference implementations used only by test suites.
//!
//! Everything here favors being obviously correct over being fast: operators
//! are materialized as full matrices and quantities are computed straight
//! from their definitions. Nothing in this crate is used at runtime.

use magopt_core::pauli::{label_count, label_from_index};
use magopt_core::QuditState;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn omega(dim: u32) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU / dim as f64)
}

/// Clock matrix `Z = diag(1, omega, omega^2, ...)`.
pub fn clock(dim: u32) -> DMatrix<Complex64> {
    let w = omega(dim);
    DMatrix::from_fn(dim as usize, dim as usize, |i, j| {
        if i == j {
            w.powu(i as u32)
        } else {
            Complex64::ZERO
        }
    })
}

/// Shift matrix `X |j> = |j+1 mod D>`.
pub fn shift(dim: u32) -> DMatrix<Complex64> {
    let d = dim as usize;
    DMatrix::from_fn(d, d, |i, j| {
        if i == (j + 1) % d {
            Complex64::ONE
        } else {
            Complex64::ZERO
        }
    })
}

/// Single-site generalized Pauli `X^a Z^b`, phase free.
pub fn pauli_site(dim: u32, a: u32, b: u32) -> DMatrix<Complex64> {
    let mut m = DMatrix::identity(dim as usize, dim as usize);
    for _ in 0..b {
        m = clock(dim) * m;
    }
    for _ in 0..a {
        m = shift(dim) * m;
    }
    m
}

/// Kronecker product over all sites, site 0 leftmost.
pub fn kron_all(factors: &[DMatrix<Complex64>]) -> DMatrix<Complex64> {
    let mut out = DMatrix::identity(1, 1);
    for f in factors {
        out = out.kronecker(f);
    }
    out
}

/// Multi-site Pauli `prod_i X_i^(v1_i) Z_i^(v2_i)` as a dense matrix.
pub fn pauli_operator(dim: u32, v1: &[u32], v2: &[u32]) -> DMatrix<Complex64> {
    let factors: Vec<_> = v1
        .iter()
        .zip(v2)
        .map(|(&a, &b)| pauli_site(dim, a, b))
        .collect();
    kron_all(&factors)
}

/// `<psi| M |psi>` for a dense operator.
pub fn expectation(op: &DMatrix<Complex64>, amps: &[Complex64]) -> Complex64 {
    let v = DVector::from_column_slice(amps);
    (v.adjoint() * op * &v)[(0, 0)]
}

/// Order-2 stabilizer entropy straight from the definition: enumerate every
/// Pauli, materialize it, take the expectation value.
pub fn sre2_brute(state: &QuditState) -> f64 {
    let dim = state.dim();
    let sites = state.sites();
    let labels = label_count(dim, sites).unwrap();
    let mut sum4 = 0.0;
    for label in 0..labels {
        let (v1, v2) = label_from_index(dim, sites, label).unwrap();
        let op = pauli_operator(dim, &v1, &v2);
        let e = expectation(&op, state.amps());
        sum4 += e.norm_sqr() * e.norm_sqr();
    }
    -(sum4 / state.len() as f64).log2()
}

/// Heisenberg-Weyl operator `T_v = tau^(v1.v2) X^v1 Z^v2` with
/// `tau = omega^((D+1)/2)`. Requires odd D; satisfies `T_v^dag = T_(-v)`.
pub fn hw_operator(dim: u32, v1: &[u32], v2: &[u32]) -> DMatrix<Complex64> {
    assert!(dim % 2 == 1, "Heisenberg-Weyl phases need odd dimension");
    let tau = omega(dim).powu(dim.div_ceil(2));
    let dot: u32 = v1.iter().zip(v2).map(|(&a, &b)| a * b).sum();
    let phase = tau.powu(dot % dim);
    pauli_operator(dim, v1, v2) * phase
}

/// Phase-space point operator
/// `A_u = D^(-N) sum_v omega^(u2.v1 - u1.v2) T_v`.
pub fn point_operator(dim: u32, sites: usize, u1: &[u32], u2: &[u32]) -> DMatrix<Complex64> {
    let d = dim as i64;
    let labels = label_count(dim, sites).unwrap();
    let dn = (dim as usize).pow(sites as u32);
    let w = omega(dim);
    let mut acc = DMatrix::<Complex64>::zeros(dn, dn);
    for label in 0..labels {
        let (v1, v2) = label_from_index(dim, sites, label).unwrap();
        let mut e: i64 = 0;
        for i in 0..sites {
            e += u2[i] as i64 * v1[i] as i64 - u1[i] as i64 * v2[i] as i64;
        }
        let phase = w.powu(e.rem_euclid(d) as u32);
        acc += hw_operator(dim, &v1, &v2) * phase;
    }
    acc / Complex64::new(dn as f64, 0.0)
}

/// Phase-space function from point operators: `W(u) = D^(-N) <A_u>`,
/// flattened in the same (u1-major, u2-minor) order as Pauli labels.
pub fn wigner_brute(state: &QuditState) -> Vec<f64> {
    let dim = state.dim();
    let sites = state.sites();
    let labels = label_count(dim, sites).unwrap();
    let dn = state.len() as f64;
    (0..labels)
        .map(|label| {
            let (u1, u2) = label_from_index(dim, sites, label).unwrap();
            let a = point_operator(dim, sites, &u1, &u2);
            let e = expectation(&a, state.amps());
            assert!(e.im.abs() < 1e-10, "point operator expectation not real");
            e.re / dn
        })
        .collect()
}

/// `log2 sum |W|` from the brute-force phase-space function.
pub fn mana_brute(state: &QuditState) -> f64 {
    wigner_brute(state).iter().map(|w| w.abs()).sum::<f64>().log2()
}

/// Propagator `exp(-i t H)` of a dense Hermitian matrix, via full
/// eigendecomposition.
pub fn expm_hermitian(h: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    let n = h.nrows();
    let eig = h.clone().symmetric_eigen();
    let mut out = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        let phase = Complex64::from_polar(1.0, -t * eig.eigenvalues[k]);
        let v = eig.eigenvectors.column(k);
        out += (v * v.adjoint()) * phase;
    }
    out
}

/// Lowest eigenpair of a dense real symmetric matrix.
pub fn ground_dense(h: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let eig = h.clone().symmetric_eigen();
    let mut k = 0;
    for i in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[i] < eig.eigenvalues[k] {
            k = i;
        }
    }
    (eig.eigenvalues[k], eig.eigenvectors.column(k).into_owned())
}

/// Mixing Hamiltonian as a dense matrix: `-sum_i X_i` for qubits,
/// `-sum_i (X_i + X_i^dag)` otherwise.
pub fn mixer_dense(dim: u32, sites: usize) -> DMatrix<Complex64> {
    let dn = (dim as usize).pow(sites as u32);
    let x = shift(dim);
    let xh: DMatrix<Complex64> = if dim == 2 {
        x.clone()
    } else {
        &x + x.adjoint()
    };
    let id = DMatrix::<Complex64>::identity(dim as usize, dim as usize);
    let mut acc = DMatrix::<Complex64>::zeros(dn, dn);
    for site in 0..sites {
        let factors: Vec<_> = (0..sites)
            .map(|i| if i == site { xh.clone() } else { id.clone() })
            .collect();
        acc -= kron_all(&factors);
    }
    acc
}

/// Normalized pseudo-random state with a fixed seed, shared by test suites.
pub fn random_state(dim: u32, sites: usize, seed: u64) -> QuditState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = (dim as usize).pow(sites as u32);
    let mut amps: Vec<Complex64> = (0..len)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    QuditState::from_amps(dim, sites, amps).unwrap()
}
