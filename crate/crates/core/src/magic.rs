//! Magic monotones: the order-2 stabilizer Renyi entropy and, for odd local
//! dimension, the phase-space negativity (mana).
//!
//! Both are computed from the full set of D^(2N) Pauli expectation values,
//! but never by materializing operators. For each shift string `a` the
//! products `c_a[s] = conj(psi[s + a]) psi[s]` are formed in O(D^N), and the
//! expectations `<X^a Z^b>` for all `b` follow from N single-axis DFT passes.
//! Total cost is O(N D^(2N+1)) with O(D^N) working memory per thread.
//!
//! All reductions run over fixed-size chunks of the shift range combined in
//! index order, so results are bit-identical regardless of thread count.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pauli::label_count;
use crate::state::{digits_of, omega_table, space_size, QuditState};

/// States must be normalized to this accuracy before magic is evaluated.
const NORM_TOL: f64 = 1e-8;
/// Largest admissible Pauli label space, D^(2N). Admits 14 qubits or 8
/// qutrits; beyond that the enumeration is impractical anyway.
const LABEL_CAP: usize = 1 << 28;
/// Phase-space values must be real to this accuracy.
const WIGNER_IM_TOL: f64 = 1e-10;
/// The phase-space function must sum to 1 to this accuracy.
const WIGNER_SUM_TOL: f64 = 1e-8;

fn check_size(state: &QuditState) -> Result<usize> {
    let labels = label_count(state.dim(), state.sites())?;
    if labels > LABEL_CAP {
        return Err(Error::Capacity {
            dim: state.dim(),
            sites: state.sites(),
        });
    }
    state.require_normalized(NORM_TOL)?;
    Ok(labels)
}

fn strides(dim: u32, sites: usize) -> Vec<usize> {
    (0..sites)
        .map(|i| (dim as usize).pow((sites - 1 - i) as u32))
        .collect()
}

/// Fills `out[s] = conj(psi[s (+) a]) * psi[s]` where `(+)` adds the shift
/// string digit-wise mod D. Runs in O(len) via an odometer over the digits.
fn shifted_product(
    psi: &[Complex64],
    dim: usize,
    strides: &[usize],
    a_digits: &[u32],
    offsets: &mut [usize],
    digits: &mut [u32],
    out: &mut [Complex64],
) {
    let n = strides.len();
    for i in 0..n {
        for k in 0..dim {
            offsets[i * dim + k] = (k + a_digits[i] as usize) % dim * strides[i];
        }
    }
    digits.fill(0);
    let mut shifted: usize = (0..n).map(|i| offsets[i * dim]).sum();
    for (s, &a) in psi.iter().enumerate() {
        out[s] = psi[shifted].conj() * a;
        let mut i = n;
        while i > 0 {
            i -= 1;
            let k = digits[i] as usize;
            if k + 1 < dim {
                digits[i] = (k + 1) as u32;
                shifted = shifted + offsets[i * dim + k + 1] - offsets[i * dim + k];
                break;
            }
            digits[i] = 0;
            shifted = shifted + offsets[i * dim] - offsets[i * dim + dim - 1];
        }
    }
}

/// In-place transform of one tensor axis: `new[b] = sum_s kernel[b][s] old[s]`
/// for every fiber along the axis with the given stride.
fn axis_transform(
    buf: &mut [Complex64],
    d: usize,
    stride: usize,
    kernel: &[Complex64],
    fiber: &mut [Complex64],
) {
    let block = stride * d;
    for base in (0..buf.len()).step_by(block) {
        for off in 0..stride {
            let lo = base + off;
            for (k, f) in fiber.iter_mut().enumerate().take(d) {
                *f = buf[lo + k * stride];
            }
            for b in 0..d {
                let row = &kernel[b * d..(b + 1) * d];
                let mut acc = Complex64::ZERO;
                for s in 0..d {
                    acc += row[s] * fiber[s];
                }
                buf[lo + b * stride] = acc;
            }
        }
    }
}

/// Plain DFT kernel `K[b][s] = omega^(b s)`.
fn dft_kernel(dim: u32) -> Vec<Complex64> {
    let d = dim as usize;
    let omega = omega_table(dim);
    let mut k = vec![Complex64::ZERO; d * d];
    for b in 0..d {
        for s in 0..d {
            k[b * d + s] = omega[b * s % d];
        }
    }
    k
}

/// Shift range partition used for deterministic parallel reduction. Depends
/// only on the problem size, never on the thread count.
fn chunk_size(shifts: usize) -> usize {
    (shifts / 128).max(1)
}

struct Workspace {
    c: Vec<Complex64>,
    fiber: Vec<Complex64>,
    offsets: Vec<usize>,
    digits: Vec<u32>,
    a_digits: Vec<u32>,
}

impl Workspace {
    fn new(dim: usize, sites: usize, len: usize) -> Self {
        Workspace {
            c: vec![Complex64::ZERO; len],
            fiber: vec![Complex64::ZERO; dim],
            offsets: vec![0; dim * sites],
            digits: vec![0; sites],
            a_digits: vec![0; sites],
        }
    }
}

/// Sums of |<P>|^2 and |<P>|^4 over all D^(2N) Paulis.
fn char_moments(state: &QuditState) -> Result<(f64, f64)> {
    check_size(state)?;
    let dim = state.dim();
    let d = dim as usize;
    let sites = state.sites();
    let len = state.len();
    let psi = state.amps();
    let strides = strides(dim, sites);
    let kernel = dft_kernel(dim);
    let chunk = chunk_size(len);
    let n_chunks = len.div_ceil(chunk);
    let partials: Vec<(f64, f64)> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let mut ws = Workspace::new(d, sites, len);
            let mut sum2 = 0.0f64;
            let mut sum4 = 0.0f64;
            let lo = ci * chunk;
            let hi = (lo + chunk).min(len);
            for a in lo..hi {
                digits_of(a, dim, sites, &mut ws.a_digits);
                shifted_product(
                    psi,
                    d,
                    &strides,
                    &ws.a_digits,
                    &mut ws.offsets,
                    &mut ws.digits,
                    &mut ws.c,
                );
                for &stride in &strides {
                    axis_transform(&mut ws.c, d, stride, &kernel, &mut ws.fiber);
                }
                for v in &ws.c {
                    let m = v.norm_sqr();
                    sum2 += m;
                    sum4 += m * m;
                }
            }
            (sum2, sum4)
        })
        .collect();
    let mut sum2 = 0.0;
    let mut sum4 = 0.0;
    for (s2, s4) in partials {
        sum2 += s2;
        sum4 += s4;
    }
    Ok((sum2, sum4))
}

/// Order-2 stabilizer Renyi entropy in bits:
/// `-log2( sum_P |<P>|^4 / D^N )`. Zero exactly on stabilizer states,
/// positive otherwise, additive over tensor products.
pub fn sre2(state: &QuditState) -> Result<f64> {
    let (_, sum4) = char_moments(state)?;
    Ok(-(sum4 / state.len() as f64).log2())
}

/// `sum_P |<P>|^2`, which equals D^N for any normalized pure state.
pub fn pauli_norm_sum(state: &QuditState) -> Result<f64> {
    let (sum2, _) = char_moments(state)?;
    Ok(sum2)
}

/// All Pauli expectation values in flat label order (v1-major, v2-minor).
pub fn pauli_expectation_table(state: &QuditState) -> Result<Vec<Complex64>> {
    let labels = check_size(state)?;
    let dim = state.dim();
    let d = dim as usize;
    let sites = state.sites();
    let len = state.len();
    let psi = state.amps();
    let strides = strides(dim, sites);
    let kernel = dft_kernel(dim);
    let mut table = vec![Complex64::ZERO; labels];
    table
        .par_chunks_mut(len)
        .enumerate()
        .for_each(|(a, block)| {
            let mut ws = Workspace::new(d, sites, len);
            digits_of(a, dim, sites, &mut ws.a_digits);
            shifted_product(
                psi,
                d,
                &strides,
                &ws.a_digits,
                &mut ws.offsets,
                &mut ws.digits,
                block,
            );
            for &stride in &strides {
                axis_transform(block, d, stride, &kernel, &mut ws.fiber);
            }
        });
    Ok(table)
}

/// Discrete phase-space representation over the D^(2N) points `(u1, u2)`,
/// in the same flat order as Pauli labels. Requires odd local dimension.
///
/// The value at `u` is `D^(-2N) sum_v omega^(u2.v1 - u1.v2) chi(v)` with
/// `chi(v) = tau^(v1.v2) <X^v1 Z^v2>` and `tau = omega^((D+1)/2)`, the
/// unique root with `tau^2 = omega` and `tau^D = 1`.
pub fn wigner_function(state: &QuditState) -> Result<Vec<f64>> {
    let dim = state.dim();
    if dim.is_multiple_of(2) {
        return Err(Error::UnsupportedDimension {
            op: "phase-space representation",
            requirement: "odd local dimension",
            dim,
        });
    }
    let labels = check_size(state)?;
    let d = dim as usize;
    let sites = state.sites();
    let len = state.len();
    let psi = state.amps();
    let strides = strides(dim, sites);
    let omega = omega_table(dim);

    // Stage 1: chi table, block per shift. The tau phases are fused into the
    // per-axis kernels: K_a[b][s] = tau^(a b) omega^(b s), selected by the
    // shift digit at that axis.
    let half = d.div_ceil(2);
    let tau = |e: usize| omega[half * e % d];
    let mut fused = vec![Complex64::ZERO; d * d * d];
    for a in 0..d {
        for b in 0..d {
            for s in 0..d {
                fused[a * d * d + b * d + s] = tau(a * b) * omega[b * s % d];
            }
        }
    }
    let mut table = vec![Complex64::ZERO; labels];
    table
        .par_chunks_mut(len)
        .enumerate()
        .for_each(|(a, block)| {
            let mut ws = Workspace::new(d, sites, len);
            digits_of(a, dim, sites, &mut ws.a_digits);
            shifted_product(
                psi,
                d,
                &strides,
                &ws.a_digits,
                &mut ws.offsets,
                &mut ws.digits,
                block,
            );
            for (i, &stride) in strides.iter().enumerate() {
                let ai = ws.a_digits[i] as usize;
                let kernel = &fused[ai * d * d..(ai + 1) * d * d];
                axis_transform(block, d, stride, kernel, &mut ws.fiber);
            }
        });

    // Stage 2: symplectic Fourier transform. The v2 axes (low half) use
    // kernel omega^(-u1 v2); the v1 axes (high half) use omega^(+u2 v1).
    let mut k_minus = vec![Complex64::ZERO; d * d];
    let mut k_plus = vec![Complex64::ZERO; d * d];
    for u in 0..d {
        for v in 0..d {
            k_minus[u * d + v] = omega[u * v % d].conj();
            k_plus[u * d + v] = omega[u * v % d];
        }
    }
    let mut fiber = vec![Complex64::ZERO; d];
    for &stride in &strides {
        axis_transform(&mut table, d, stride, &k_minus, &mut fiber);
    }
    for &stride in &strides {
        axis_transform(&mut table, d, stride * len, &k_plus, &mut fiber);
    }

    // Stage 3: scale, check realness, transpose to (u1-major, u2-minor).
    let scale = 1.0 / (labels as f64);
    let mut worst_im = 0.0f64;
    for v in &table {
        worst_im = worst_im.max(v.im.abs() * scale);
    }
    if worst_im > WIGNER_IM_TOL {
        return Err(Error::ResidualTooLarge {
            what: "imaginary part of phase-space function",
            value: worst_im,
            limit: WIGNER_IM_TOL,
        });
    }
    let mut out = vec![0.0f64; labels];
    for u2 in 0..len {
        for u1 in 0..len {
            out[u1 * len + u2] = table[u2 * len + u1].re * scale;
        }
    }
    let total: f64 = out.iter().sum();
    if (total - 1.0).abs() > WIGNER_SUM_TOL {
        return Err(Error::ResidualTooLarge {
            what: "phase-space normalization defect",
            value: (total - 1.0).abs(),
            limit: WIGNER_SUM_TOL,
        });
    }
    Ok(out)
}

/// Mana in bits: `log2 sum_u |W(u)|`. Zero exactly on stabilizer states.
pub fn mana(state: &QuditState) -> Result<f64> {
    let w = wigner_function(state)?;
    let total: f64 = w.iter().map(|v| v.abs()).sum();
    Ok(total.log2())
}

/// Ensemble average of the order-2 stabilizer entropy over Haar-random pure
/// states, used as a saturation reference.
pub fn haar_sre2_reference(dim: u32, sites: usize) -> Result<f64> {
    let dn = space_size(dim, sites)? as f64;
    match dim {
        2 => Ok(-(4.0 / (dn + 3.0)).log2()),
        3 => Ok(-(3.0 / (dn + 2.0)).log2()),
        _ => Err(Error::UnsupportedDimension {
            op: "Haar reference",
            requirement: "dimension 2 or 3",
            dim,
        }),
    }
}
