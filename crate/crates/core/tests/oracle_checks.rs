//! Cross-checks of every fast-path operation against dense-matrix reference
//! implementations, at sizes where materializing full operators is cheap.

use magopt_core::anneal::instantaneous_ground_state;
use magopt_core::magic::{mana, sre2, wigner_function};
use magopt_core::pauli::{label_count, label_from_index, pauli_expectation};
use magopt_core::qaoa::{mixer_evolve, run_circuit, tqa_init};
use magopt_core::sk::generate_instance;
use magopt_core::QuditState;
use magopt_oracles as oracle;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

fn shapes() -> Vec<(u32, usize)> {
    vec![(2, 1), (2, 2), (2, 3), (3, 1), (3, 2)]
}

fn as_dvector(state: &QuditState) -> DVector<Complex64> {
    DVector::from_column_slice(state.amps())
}

fn max_amp_diff(a: &QuditState, b: &DVector<Complex64>) -> f64 {
    a.amps()
        .iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Dense cost operator: couplings enter as Z_i Z_j^dag + h.c., bias fields
/// as Z_i + Z_i^dag and -i (Z_i - Z_i^dag).
fn cost_dense(inst: &magopt_core::sk::SkInstance) -> DMatrix<Complex64> {
    let d = inst.dim;
    let n = inst.sites;
    let dn = (d as usize).pow(n as u32);
    let mut h = DMatrix::<Complex64>::zeros(dn, dn);
    let z_exponent = |pairs: &[(usize, u32)]| {
        let mut v2 = vec![0u32; n];
        for &(site, e) in pairs {
            v2[site] = e;
        }
        oracle::pauli_operator(d, &vec![0; n], &v2)
    };
    for &(i, j, v) in &inst.couplings {
        let zz = z_exponent(&[(i, 1), (j, d - 1)]);
        h += (&zz + zz.adjoint()) * Complex64::new(v, 0.0);
    }
    for (i, &hx) in inst.bias_h.iter().enumerate() {
        let z = z_exponent(&[(i, 1)]);
        h += (&z + z.adjoint()) * Complex64::new(hx, 0.0);
    }
    for (i, &hp) in inst.bias_hp.iter().enumerate() {
        let z = z_exponent(&[(i, 1)]);
        h += (&z - z.adjoint()) * Complex64::new(0.0, -hp);
    }
    h
}

#[test]
fn pauli_expectations_match_dense_operators() {
    for (dim, sites) in shapes() {
        let state = oracle::random_state(dim, sites, 40 + dim as u64 + sites as u64);
        for label in 0..label_count(dim, sites).unwrap() {
            let (v1, v2) = label_from_index(dim, sites, label).unwrap();
            let fast = pauli_expectation(&state, &v1, &v2).unwrap();
            let dense = oracle::expectation(&oracle::pauli_operator(dim, &v1, &v2), state.amps());
            assert!(
                (fast - dense).norm() < 1e-12,
                "D={dim} N={sites} label={label}: {fast} vs {dense}"
            );
        }
    }
}

#[test]
fn fast_sre2_matches_brute_force() {
    for (dim, sites) in shapes() {
        for seed in 0..4u64 {
            let state = oracle::random_state(dim, sites, 100 + seed);
            let fast = sre2(&state).unwrap();
            let brute = oracle::sre2_brute(&state);
            assert!(
                (fast - brute).abs() < 1e-10,
                "D={dim} N={sites} seed={seed}: {fast} vs {brute}"
            );
        }
    }
}

#[test]
fn wigner_and_mana_match_point_operator_definition() {
    for sites in [1usize, 2] {
        for seed in 0..3u64 {
            let state = oracle::random_state(3, sites, 200 + seed);
            let fast = wigner_function(&state).unwrap();
            let brute = oracle::wigner_brute(&state);
            assert_eq!(fast.len(), brute.len());
            for (k, (f, b)) in fast.iter().zip(&brute).enumerate() {
                assert!((f - b).abs() < 1e-12, "N={sites} seed={seed} point {k}");
            }
            let m_fast = mana(&state).unwrap();
            let m_brute = oracle::mana_brute(&state);
            assert!((m_fast - m_brute).abs() < 1e-10);
        }
    }
}

#[test]
fn cost_diagonal_matches_dense_operator() {
    for (dim, sites) in [(2u32, 4usize), (3, 3)] {
        let inst = generate_instance(dim, sites, 7, 0.3, None).unwrap();
        let spectrum = inst.cost_diagonal().unwrap();
        let dense = cost_dense(&inst);
        for k in 0..spectrum.diag.len() {
            for l in 0..spectrum.diag.len() {
                let expect = if k == l { spectrum.diag[k] } else { 0.0 };
                let got = dense[(k, l)];
                assert!(
                    (got - Complex64::new(expect, 0.0)).norm() < 1e-10,
                    "D={dim} N={sites} entry ({k},{l}): {got} vs {expect}"
                );
            }
        }
    }
}

#[test]
fn cost_layer_matches_dense_propagator() {
    let gamma = 0.37;
    for (dim, sites) in [(2u32, 2usize), (3, 2)] {
        let inst = generate_instance(dim, sites, 11, 0.3, None).unwrap();
        let spectrum = inst.cost_diagonal().unwrap();
        let mut state = oracle::random_state(dim, sites, 300);
        let reference = oracle::expm_hermitian(&cost_dense(&inst), gamma) * as_dvector(&state);
        state.diagonal_phase_evolve(&spectrum.diag, gamma).unwrap();
        assert!(max_amp_diff(&state, &reference) < 1e-12, "D={dim} N={sites}");
    }
}

#[test]
fn mixer_step_matches_dense_propagator() {
    let beta = 0.81;
    for (dim, sites) in [(2u32, 2usize), (2, 3), (3, 2)] {
        let mut state = oracle::random_state(dim, sites, 400 + dim as u64);
        let reference =
            oracle::expm_hermitian(&oracle::mixer_dense(dim, sites), beta) * as_dvector(&state);
        mixer_evolve(&mut state, beta).unwrap();
        assert!(max_amp_diff(&state, &reference) < 1e-12, "D={dim} N={sites}");
    }
}

#[test]
fn full_circuit_matches_dense_evolution() {
    for (dim, sites, depth) in [(2u32, 3usize, 3usize), (3, 2, 2)] {
        let inst = generate_instance(dim, sites, 13, 0.3, None).unwrap();
        let params = tqa_init(depth, 0.7).unwrap();
        let fast = run_circuit(&inst, &params).unwrap();

        let cost = cost_dense(&inst);
        let mix = oracle::mixer_dense(dim, sites);
        let mut psi = as_dvector(&QuditState::plus_state(dim, sites).unwrap());
        for p in 0..depth {
            psi = oracle::expm_hermitian(&cost, params.gammas[p]) * psi;
            psi = oracle::expm_hermitian(&mix, params.betas[p]) * psi;
        }
        assert!(max_amp_diff(&fast, &psi) < 1e-10, "D={dim} N={sites} d={depth}");
    }
}

#[test]
fn instantaneous_ground_matches_dense_diagonalization() {
    for (dim, sites) in [(2u32, 3usize), (3, 2)] {
        let inst = generate_instance(dim, sites, 17, 0.3, None).unwrap();
        let cost = cost_dense(&inst).map(|c| c.re);
        let mix = oracle::mixer_dense(dim, sites).map(|c| c.re);
        for lambda in [0.0, 0.3, 0.65, 1.0] {
            let (state, energy, residual) = instantaneous_ground_state(&inst, lambda).unwrap();
            let h = &cost * lambda + &mix * (1.0 - lambda);
            let (e0, v0) = oracle::ground_dense(&h);
            assert!(residual < 1e-8);
            assert!(
                (energy - e0).abs() < 1e-8,
                "D={dim} N={sites} lambda={lambda}: {energy} vs {e0}"
            );
            let overlap: f64 = state
                .amps()
                .iter()
                .zip(v0.iter())
                .map(|(a, &b)| a.re * b)
                .sum();
            assert!(
                (overlap.abs() - 1.0).abs() < 1e-10,
                "D={dim} N={sites} lambda={lambda}: overlap {overlap}"
            );
        }
    }
}
