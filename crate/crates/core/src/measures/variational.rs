//! The `(alpha, tau)` form as an infimum over an auxiliary output law `Q_Y`:
//!
//! ```text
//! 1/(alpha-1) log sum_{x,y} P~(x) P(y|x)^alpha (Q(y)^tau P(y|x')^(1-tau))^(1-alpha)
//! ```
//!
//! minimized by `Q(y) ∝ C(y)^(1/(1-gamma))` with `gamma = tau (1 - alpha)` and
//! `C(y) = sum_x P~(x) P(y|x)^alpha P(y|x')^((1-tau)(1-alpha))`.

use crate::channel::Channel;
use crate::error::{LeakageError, Result};
use crate::logsum::{log_sum_exp, scaled_log};
use crate::order::TauParameter;
use crate::simplex::SimplexPoint;

fn check(channel: &Channel, x_prime: usize, p_tilde: &SimplexPoint, alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 1.0) {
        return Err(LeakageError::InvalidOrder(format!("alpha must be finite and exceed 1, got {alpha}")));
    }
    if x_prime >= channel.inputs() {
        return Err(LeakageError::ShapeError(format!("x' = {x_prime} out of range")));
    }
    if p_tilde.dim() != channel.inputs() {
        return Err(LeakageError::ShapeError(format!(
            "P~ has dimension {}, channel has {} inputs",
            p_tilde.dim(),
            channel.inputs()
        )));
    }
    Ok(())
}

/// Log-domain evaluation of the variational objective for a given `Q_Y`.
pub fn variational_objective(
    channel: &Channel,
    x_prime: usize,
    p_tilde: &SimplexPoint,
    q_y: &SimplexPoint,
    alpha: f64,
    tau: TauParameter,
) -> Result<f64> {
    check(channel, x_prime, p_tilde, alpha)?;
    if q_y.dim() != channel.outputs() {
        return Err(LeakageError::ShapeError(format!(
            "Q_Y has dimension {}, channel has {} outputs",
            q_y.dim(),
            channel.outputs()
        )));
    }
    let tau = tau.value();
    let q_exp = tau * (1.0 - alpha);
    let prime_exp = (1.0 - tau) * (1.0 - alpha);
    let mut terms = Vec::with_capacity(channel.inputs() * channel.outputs());
    for (x, &w) in p_tilde.weights().iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for y in 0..channel.outputs() {
            let p = channel.prob(x, y);
            if p == 0.0 {
                continue;
            }
            terms.push(
                w.ln()
                    + alpha * p.ln()
                    + scaled_log(q_exp, q_y.weights()[y].ln())
                    + scaled_log(prime_exp, channel.prob(x_prime, y).ln()),
            );
        }
    }
    Ok(log_sum_exp(terms) / (alpha - 1.0))
}

/// Closed-form minimizer of [`variational_objective`] over `Q_Y`.
///
/// When some `C(y)` is infinite (an output impossible under `x'` but reached
/// by `P~`), every `Q_Y` gives `+inf`; the uniform law over those outputs is
/// returned.
pub fn optimal_q_y(
    channel: &Channel,
    x_prime: usize,
    p_tilde: &SimplexPoint,
    alpha: f64,
    tau: TauParameter,
) -> Result<SimplexPoint> {
    check(channel, x_prime, p_tilde, alpha)?;
    let tau = tau.value();
    let gamma = tau * (1.0 - alpha);
    let prime_exp = (1.0 - tau) * (1.0 - alpha);
    let ln_c: Vec<f64> = (0..channel.outputs())
        .map(|y| {
            let ln_inner = log_sum_exp(
                p_tilde
                    .weights()
                    .iter()
                    .enumerate()
                    .filter(|(x, w)| **w > 0.0 && channel.prob(*x, y) > 0.0)
                    .map(|(x, w)| w.ln() + alpha * channel.prob(x, y).ln()),
            );
            if ln_inner == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                ln_inner + scaled_log(prime_exp, channel.prob(x_prime, y).ln())
            }
        })
        .collect();

    if ln_c.iter().all(|c| *c == f64::NEG_INFINITY) {
        return Err(LeakageError::DegenerateInput("every C(y) is zero".into()));
    }
    if ln_c.iter().any(|c| *c == f64::INFINITY) {
        let weights = ln_c.iter().map(|c| if *c == f64::INFINITY { 1.0 } else { 0.0 }).collect();
        return SimplexPoint::from_unnormalized(weights);
    }
    let ln_q: Vec<f64> = ln_c.iter().map(|c| c / (1.0 - gamma)).collect();
    let ln_norm = log_sum_exp(ln_q.iter().copied());
    SimplexPoint::from_unnormalized(ln_q.iter().map(|l| (l - ln_norm).exp()).collect())
}
