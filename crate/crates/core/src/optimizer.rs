//! Derivative-free minimization by linear-approximation trust region, with
//! best-seen bookkeeping so callers always get the lowest evaluated point.

use std::cell::RefCell;

use cobyla::{minimize, Func, RhoBeg, StopTols, SuccessStatus};

/// Parameters are effectively unbounded; the method requires a box.
const BOUND: f64 = 1e6;

/// Initial trust-region radius. Ramp-seeded angles are order one, so half a
/// radian explores without leaving the basin immediately.
const INITIAL_STEP: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct TrustRegionResult {
    /// Lowest-energy parameters seen across all evaluations.
    pub best_params: Vec<f64>,
    pub best_energy: f64,
    pub evals: usize,
    /// True when the trust-region radius shrank below the tolerance;
    /// false when the evaluation budget ran out first.
    pub converged: bool,
}

/// Minimizes `objective` starting from `start`, stopping when the
/// trust-region radius falls below `tol` or after `max_evals` evaluations.
/// `on_eval` observes every evaluation in call order.
pub fn minimize_trust_region<F, O>(
    objective: F,
    start: &[f64],
    tol: f64,
    max_evals: usize,
    on_eval: O,
) -> TrustRegionResult
where
    F: Fn(&[f64]) -> f64,
    O: Fn(&[f64], f64),
{
    assert!(tol > 0.0, "tolerance must be positive");
    assert!(!start.is_empty(), "no parameters to optimize");
    let n = start.len();

    struct Tracker {
        best_params: Vec<f64>,
        best_energy: f64,
        evals: usize,
    }
    let tracker = RefCell::new(Tracker {
        best_params: start.to_vec(),
        best_energy: f64::INFINITY,
        evals: 0,
    });

    let wrapped = |x: &[f64], _: &mut ()| {
        let value = objective(x);
        on_eval(x, value);
        let mut t = tracker.borrow_mut();
        t.evals += 1;
        if value < t.best_energy {
            t.best_energy = value;
            t.best_params.clear();
            t.best_params.extend_from_slice(x);
        }
        value
    };

    let bounds = vec![(-BOUND, BOUND); n];
    let cons: Vec<&dyn Func<()>> = Vec::new();
    let stop = StopTols {
        xtol_abs: vec![tol; n],
        ..StopTols::default()
    };
    let outcome = minimize(
        wrapped,
        start,
        &bounds,
        &cons,
        (),
        max_evals,
        RhoBeg::All(INITIAL_STEP),
        Some(stop),
    );
    let converged = matches!(outcome, Ok((SuccessStatus::XtolReached, _, _)));

    let t = tracker.into_inner();
    TrustRegionResult {
        best_params: t.best_params,
        best_energy: t.best_energy,
        evals: t.evals,
        converged,
    }
}
