//! Matrix-free extremal eigensolver for real symmetric operators: Lanczos
//! with full reorthogonalization and restarts. The projected tridiagonal
//! problem is solved by Sturm-sequence bisection plus inverse iteration, so
//! convergence checks stay O(k) per step.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Residual the sweep machinery asks for by default.
pub const TARGET_RESIDUAL: f64 = 1e-9;
/// Residual above which the solve is reported as failed.
pub const ENFORCE_RESIDUAL: f64 = 1e-8;

const MAX_KRYLOV: usize = 320;
const MAX_RESTARTS: usize = 12;
const CHECK_EVERY: usize = 4;

#[derive(Debug, Clone)]
pub struct GroundPair {
    pub energy: f64,
    /// Unit-norm eigenvector in the computational basis.
    pub vector: Vec<f64>,
    /// Verified two-norm of `H v - E v`.
    pub residual: f64,
}

/// Number of eigenvalues of the tridiagonal (alpha, beta) strictly below x,
/// by the sign count of the LDL^T pivots.
fn count_below(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let bmax = beta.iter().fold(0.0f64, |m, b| m.max(b.abs()));
    let pivmin = (f64::EPSILON * bmax * bmax).max(f64::MIN_POSITIVE);
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..alpha.len() {
        let off = if i == 0 {
            0.0
        } else {
            beta[i - 1] * beta[i - 1] / d
        };
        d = alpha[i] - x - off;
        if d.abs() < pivmin {
            d = -pivmin;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest eigenvalue of the tridiagonal by bisection.
fn tridiag_smallest(alpha: &[f64], beta: &[f64]) -> f64 {
    let n = alpha.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { beta[i - 1].abs() } else { 0.0 }
            + if i < n - 1 { beta[i].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    let scale = lo.abs().max(hi.abs()).max(1.0);
    while hi - lo > 1e-15 * scale {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(alpha, beta, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves (T - sigma I) out = rhs for tridiagonal T by elimination with
/// partial pivoting (the shifted matrix is near-singular by design).
/// Pivoting introduces one extra superdiagonal of fill-in.
fn solve_shifted_tridiag(alpha: &[f64], beta: &[f64], sigma: f64, rhs: &mut [f64]) {
    let n = alpha.len();
    let scale = alpha.iter().fold(0.0f64, |m, a| m.max(a.abs())).max(1.0);
    let pivmin = 1e-30 * scale;
    let mut d: Vec<f64> = alpha.iter().map(|a| a - sigma).collect();
    let mut u1: Vec<f64> = beta.to_vec();
    let mut u2 = vec![0.0; n.saturating_sub(2)];
    for i in 0..n - 1 {
        // row i   : (d[i], u1[i], 0) at columns i, i+1, i+2
        // row i+1 : (sub, d[i+1], u1[i+1]) at the same columns
        let mut sub = beta[i];
        if sub.abs() > d[i].abs() {
            rhs.swap(i, i + 1);
            let old_d = d[i];
            let old_u1 = u1[i];
            d[i] = sub;
            u1[i] = d[i + 1];
            sub = old_d;
            d[i + 1] = old_u1;
            if i + 2 < n {
                u2[i] = u1[i + 1];
                u1[i + 1] = 0.0;
            }
        }
        if d[i].abs() < pivmin {
            d[i] = if d[i] < 0.0 { -pivmin } else { pivmin };
        }
        let m = sub / d[i];
        d[i + 1] -= m * u1[i];
        if i + 2 < n {
            u1[i + 1] -= m * u2[i];
        }
        rhs[i + 1] -= m * rhs[i];
    }
    for i in (0..n).rev() {
        let mut v = rhs[i];
        if i + 1 < n {
            v -= u1[i] * rhs[i + 1];
        }
        if i + 2 < n {
            v -= u2[i] * rhs[i + 2];
        }
        let mut piv = d[i];
        if piv.abs() < pivmin {
            piv = if piv < 0.0 { -pivmin } else { pivmin };
        }
        rhs[i] = v / piv;
    }
}

/// Unit eigenvector of the tridiagonal for its smallest eigenvalue, by
/// inverse iteration from a fixed start.
fn tridiag_ground_vector(alpha: &[f64], beta: &[f64], theta: f64) -> Vec<f64> {
    let n = alpha.len();
    if n == 1 {
        return vec![1.0];
    }
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.3 * ((i as f64 * 0.7).sin()))
        .collect();
    normalize(&mut v);
    for _ in 0..3 {
        solve_shifted_tridiag(alpha, beta, theta, &mut v);
        normalize(&mut v);
    }
    v
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn pseudo_random(n: usize, salt: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6c61_6e63_7a6f_7321 ^ salt);
    let normal = StandardNormal;
    let mut v: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
    normalize(&mut v);
    v
}

fn krylov_pass<F>(apply: &F, q0: Vec<f64>, max_dim: usize, target: f64) -> Vec<f64>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = q0.len();
    let mut basis = vec![q0];
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    let mut w = vec![0.0; n];
    loop {
        let k = alpha.len();
        let q = &basis[k];
        apply(q, &mut w);
        let a = dot(q, &w);
        alpha.push(a);
        for (wi, qi) in w.iter_mut().zip(q) {
            *wi -= a * qi;
        }
        if k > 0 {
            let b = beta[k - 1];
            for (wi, qi) in w.iter_mut().zip(&basis[k - 1]) {
                *wi -= b * qi;
            }
        }
        // full reorthogonalization, two passes
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let b = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let breakdown = b < 1e-14 * alpha[0].abs().max(1.0);
        let full = alpha.len() >= max_dim.min(n);
        let check = breakdown || full || alpha.len() % CHECK_EVERY == 0;
        if check {
            let theta = tridiag_smallest(&alpha, &beta);
            let s = tridiag_ground_vector(&alpha, &beta, theta);
            let est = if breakdown {
                0.0
            } else {
                (b * s[s.len() - 1]).abs()
            };
            if est < 0.5 * target || breakdown || full {
                let mut ritz = vec![0.0; n];
                for (si, q) in s.iter().zip(&basis) {
                    for (ri, qi) in ritz.iter_mut().zip(q) {
                        *ri += si * qi;
                    }
                }
                normalize(&mut ritz);
                return ritz;
            }
        }
        beta.push(b);
        let mut next = w.clone();
        for x in next.iter_mut() {
            *x /= b;
        }
        basis.push(next);
    }
}

/// Lowest eigenpair of the symmetric operator `apply` (y = H x) on an
/// n-dimensional space. Restarts from the current Ritz vector until the true
/// residual drops below `target`; fails only if it cannot reach the enforced
/// ceiling.
pub fn lowest_eigenpair<F>(
    n: usize,
    apply: F,
    warm_start: Option<&[f64]>,
    target: f64,
) -> Result<GroundPair>
where
    F: Fn(&[f64], &mut [f64]),
{
    if n == 0 {
        return Err(Error::Invalid("empty operator".into()));
    }
    let mut q0 = match warm_start {
        Some(v) if v.len() == n => {
            let mut q = v.to_vec();
            if normalize(&mut q) == 0.0 {
                pseudo_random(n, 0)
            } else {
                q
            }
        }
        Some(_) => {
            return Err(Error::Invalid("warm start has wrong length".into()));
        }
        None => pseudo_random(n, 0),
    };

    let mut hx = vec![0.0; n];
    let mut best: Option<GroundPair> = None;
    for restart in 0..MAX_RESTARTS {
        let x = krylov_pass(&apply, q0.clone(), MAX_KRYLOV, target);
        apply(&x, &mut hx);
        let energy = dot(&x, &hx);
        let mut res_sq = 0.0;
        for (h, v) in hx.iter().zip(&x) {
            let r = h - energy * v;
            res_sq += r * r;
        }
        let residual = res_sq.sqrt();
        let pair = GroundPair {
            energy,
            vector: x,
            residual,
        };
        let improved = best.as_ref().is_none_or(|b| residual < b.residual);
        if improved {
            best = Some(pair.clone());
        }
        if residual < target {
            return Ok(pair);
        }
        // restart from the Ritz vector; nudge it if the pass stalled
        q0 = best.as_ref().unwrap().vector.clone();
        if !improved {
            let noise = pseudo_random(n, restart as u64 + 1);
            for (q, p) in q0.iter_mut().zip(&noise) {
                *q += 1e-6 * p;
            }
            normalize(&mut q0);
        }
    }
    let best = best.expect("at least one restart ran");
    if best.residual < ENFORCE_RESIDUAL {
        Ok(best)
    } else {
        Err(Error::Eigensolver {
            target,
            achieved: best.residual,
            context: String::new(),
        })
    }
}

/// Lowest eigenpair plus the next eigenvalue, obtained by deflating the
/// found eigenvector with a rank-one shift and solving again.
pub fn lowest_two<F>(
    n: usize,
    apply: F,
    warm_start: Option<&[f64]>,
    target: f64,
) -> Result<(GroundPair, f64)>
where
    F: Fn(&[f64], &mut [f64]),
{
    let ground = lowest_eigenpair(n, &apply, warm_start, target)?;
    let shift = (2.0 * (ground.energy.abs() + 1.0)).max(10.0);
    let v0 = ground.vector.clone();
    let deflated = |x: &[f64], y: &mut [f64]| {
        apply(x, y);
        let proj = dot(&v0, x);
        for (yi, vi) in y.iter_mut().zip(&v0) {
            *yi += shift * proj * vi;
        }
    };
    // start orthogonal to the ground vector so the second solve cannot stall
    // on the shifted copy of the first
    let mut start = pseudo_random(n, 0xdef1);
    let c = dot(&start, &v0);
    for (s, v) in start.iter_mut().zip(&v0) {
        *s -= c * v;
    }
    normalize(&mut start);
    let second = lowest_eigenpair(n, deflated, Some(&start), target)?;
    Ok((ground, second.energy))
}
