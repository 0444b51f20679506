//! Nelder-Mead simplex minimizer. Used where the objective is cheap and
//! non-smooth (data-collapse residuals); the circuit optimizer uses the
//! trust-region method instead.

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub best: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    /// True when the simplex diameter fell below the tolerance.
    pub converged: bool,
}

/// Minimizes `f` from `start` with per-coordinate initial steps. Objectives
/// may return infinity to veto a region. Stops when the simplex diameter
/// (max-norm spread around the best vertex) drops below `diameter_tol` or
/// the evaluation budget runs out.
pub fn nelder_mead<F>(
    f: F,
    start: &[f64],
    steps: &[f64],
    diameter_tol: f64,
    max_evals: usize,
) -> SimplexResult
where
    F: Fn(&[f64]) -> f64,
{
    let n = start.len();
    assert!(n > 0, "empty parameter vector");
    assert_eq!(steps.len(), n, "one step per coordinate");
    assert!(diameter_tol > 0.0);

    let mut evals = 0usize;
    let eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    // vertices kept sorted by value, best first
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(start, &mut evals);
    simplex.push((start.to_vec(), v0));
    for i in 0..n {
        let mut x = start.to_vec();
        x[i] += steps[i];
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));

    let diameter = |simplex: &[(Vec<f64>, f64)]| -> f64 {
        let best = &simplex[0].0;
        simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(best)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max)
            })
            .fold(0.0f64, f64::max)
    };

    let mut converged = false;
    while evals + 2 <= max_evals {
        if diameter(&simplex) < diameter_tol {
            converged = true;
            break;
        }
        // centroid of all but the worst
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let lerp = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let reflected = lerp(1.0);
        let fr = eval(&reflected, &mut evals);
        if fr < simplex[0].1 {
            let expanded = lerp(2.0);
            let fe = eval(&expanded, &mut evals);
            simplex[n] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let contracted = if fr < worst.1 { lerp(0.5) } else { lerp(-0.5) };
            let fc = eval(&contracted, &mut evals);
            if fc < worst.1.min(fr) {
                simplex[n] = (contracted, fc);
            } else {
                // shrink toward the best vertex
                let best = simplex[0].0.clone();
                for k in 1..=n {
                    let x: Vec<f64> = simplex[k]
                        .0
                        .iter()
                        .zip(&best)
                        .map(|(xi, bi)| bi + 0.5 * (xi - bi))
                        .collect();
                    let v = eval(&x, &mut evals);
                    simplex[k] = (x, v);
                    if evals >= max_evals {
                        break;
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    }
    if !converged && diameter(&simplex) < diameter_tol {
        converged = true;
    }

    let (best, value) = simplex.swap_remove(0);
    SimplexResult {
        best,
        value,
        evals,
        converged,
    }
}
