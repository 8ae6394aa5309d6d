//! The objective inside the outer maximum over `x'`:
//!
//! ```text
//! f(P~) = alpha / ((alpha - 1) beta) * log sum_y P(y|x')^(1-beta) (sum_x P~(x) P(y|x)^alpha)^(beta/alpha)
//! ```
//!
//! evaluated in the log domain. It is concave in `P~` for `beta <= alpha`.

use crate::channel::Channel;
use crate::error::{LeakageError, Result};
use crate::logsum::{log_sum_exp, scaled_log};
use crate::optim::ConcaveObjective;
use crate::order::OrderPair;
use crate::simplex::SimplexPoint;

/// Precomputed logs for one `(channel, x', alpha, beta)`; evaluates the
/// objective and its gradient at any `P~`.
#[derive(Debug, Clone)]
pub(crate) struct InnerProblem {
    outputs: usize,
    ln_p: Vec<f64>,
    /// `(1 - beta) ln P(y|x')`, `+inf` where `P(y|x') = 0 < beta - 1`.
    ln_weight: Vec<f64>,
    alpha: f64,
    beta: f64,
    ln_inner: Vec<f64>,
}

impl InnerProblem {
    pub(crate) fn new(channel: &Channel, x_prime: usize, alpha: f64, beta: f64) -> Result<Self> {
        if x_prime >= channel.inputs() {
            return Err(LeakageError::ShapeError(format!(
                "x' = {x_prime} out of range for {} inputs",
                channel.inputs()
            )));
        }
        let ln_p = channel.log_probs();
        let ln_weight = (0..channel.outputs())
            .map(|y| scaled_log(1.0 - beta, ln_p[x_prime * channel.outputs() + y]))
            .collect();
        Ok(Self {
            outputs: channel.outputs(),
            ln_p,
            ln_weight,
            alpha,
            beta,
            ln_inner: vec![0.0; channel.outputs()],
        })
    }

    fn prefactor(&self) -> f64 {
        self.alpha / ((self.alpha - 1.0) * self.beta)
    }

    /// `ln sum_y ...`, the log of the quantity inside the logarithm. Leaves
    /// `ln sum_x P~(x) P(y|x)^alpha` in `self.ln_inner`.
    fn ln_outer(&mut self, p_tilde: &[f64]) -> f64 {
        let (outputs, alpha, beta) = (self.outputs, self.alpha, self.beta);
        for y in 0..outputs {
            let ln_p = &self.ln_p;
            self.ln_inner[y] = log_sum_exp(
                p_tilde
                    .iter()
                    .enumerate()
                    .filter(|(_, w)| **w > 0.0)
                    .map(move |(x, w)| w.ln() + alpha * ln_p[x * outputs + y]),
            );
        }
        let ln_inner = &self.ln_inner;
        let ln_weight = &self.ln_weight;
        log_sum_exp((0..outputs).map(move |y| {
            if ln_inner[y] == f64::NEG_INFINITY {
                // Nothing reaches y under P~: the term is zero whatever P(y|x') is.
                f64::NEG_INFINITY
            } else {
                ln_weight[y] + (beta / alpha) * ln_inner[y]
            }
        }))
    }

    pub(crate) fn value(&mut self, p_tilde: &[f64]) -> f64 {
        self.prefactor() * self.ln_outer(p_tilde)
    }

    /// Value and gradient of the scale-invariant extension `f(p / sum p)`:
    /// the raw partials
    /// `1/(alpha-1) * sum_y w_y A_y^(beta/alpha - 1) P(y|x)^alpha / S`
    /// minus their `P~`-weighted mean. Moves along the simplex see the same
    /// directional derivatives either way.
    pub(crate) fn value_and_gradient(&mut self, p_tilde: &[f64], gradient: &mut [f64]) -> f64 {
        let ln_s = self.ln_outer(p_tilde);
        let exponent = self.beta / self.alpha - 1.0;
        let scale = 1.0 / (self.alpha - 1.0);
        for (x, g) in gradient.iter_mut().enumerate() {
            let mut ln_terms = Vec::with_capacity(self.outputs);
            for y in 0..self.outputs {
                let ln_pxy = self.ln_p[x * self.outputs + y];
                if ln_pxy == f64::NEG_INFINITY {
                    continue;
                }
                ln_terms.push(
                    self.ln_weight[y] + scaled_log(exponent, self.ln_inner[y]) + self.alpha * ln_pxy - ln_s,
                );
            }
            *g = scale * log_sum_exp(ln_terms).exp();
        }
        let mean: f64 = p_tilde.iter().zip(gradient.iter()).filter(|(w, _)| **w > 0.0).map(|(w, g)| w * g).sum();
        if mean.is_finite() {
            gradient.iter_mut().for_each(|g| *g -= mean);
        }
        self.prefactor() * ln_s
    }
}

impl ConcaveObjective for InnerProblem {
    fn evaluate(&mut self, point: &[f64], gradient: &mut [f64]) -> f64 {
        self.value_and_gradient(point, gradient)
    }
}

fn check_dims(channel: &Channel, p_tilde: &SimplexPoint) -> Result<()> {
    if p_tilde.dim() != channel.inputs() {
        return Err(LeakageError::ShapeError(format!(
            "P~ has dimension {}, channel has {} inputs",
            p_tilde.dim(),
            channel.inputs()
        )));
    }
    Ok(())
}

/// The inner objective for finite orders, in nats. May be `+inf` when
/// `beta > 1` and some output is impossible under `x'` but reachable under
/// `P~`.
pub fn inner_objective(channel: &Channel, x_prime: usize, p_tilde: &SimplexPoint, order: OrderPair) -> Result<f64> {
    let (alpha, beta) = order
        .finite_pair()
        .ok_or_else(|| LeakageError::InvalidOrder("inner objective needs finite alpha and beta".into()))?;
    check_dims(channel, p_tilde)?;
    let mut problem = InnerProblem::new(channel, x_prime, alpha, beta)?;
    Ok(problem.value(p_tilde.weights()))
}

/// Analytic gradient of [`inner_objective`] with respect to `P~`. Requires
/// `beta <= alpha` (the concave regime) and a `P~` that charges every input
/// whose row could otherwise leave an output unreached.
pub fn inner_gradient(channel: &Channel, x_prime: usize, p_tilde: &SimplexPoint, order: OrderPair) -> Result<Vec<f64>> {
    let (alpha, beta) = order
        .finite_pair()
        .ok_or_else(|| LeakageError::InvalidOrder("inner gradient needs finite alpha and beta".into()))?;
    if beta > alpha {
        return Err(LeakageError::InvalidOrder(format!(
            "gradient is only used in the concave regime beta <= alpha, got beta = {beta} > alpha = {alpha}"
        )));
    }
    check_dims(channel, p_tilde)?;
    let mut problem = InnerProblem::new(channel, x_prime, alpha, beta)?;
    let mut gradient = vec![0.0; channel.inputs()];
    let value = problem.value_and_gradient(p_tilde.weights(), &mut gradient);
    if !value.is_finite() || gradient.iter().any(|g| !g.is_finite()) {
        return Err(LeakageError::NumericalFailure(format!(
            "non-finite objective or gradient (value {value}, gradient {gradient:?})"
        )));
    }
    Ok(gradient)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(a: f64, b: f64) -> OrderPair {
        OrderPair::finite(a, b).unwrap()
    }

    #[test]
    fn constant_rows_give_zero() {
        let c = Channel::constant(3, &[0.2, 0.3, 0.5]).unwrap();
        let p = SimplexPoint::new(vec![0.1, 0.6, 0.3], 1e-9).unwrap();
        for x_prime in 0..3 {
            for (a, b) in [(2.0, 1.0), (4.0, 2.0), (1.5, 7.0)] {
                assert!(inner_objective(&c, x_prime, &p, pair(a, b)).unwrap().abs() < 1e-14);
            }
        }
    }

    #[test]
    fn beta_one_ignores_x_prime() {
        let c = Channel::new(vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.1, 0.8]], 1e-9).unwrap();
        let p = SimplexPoint::new(vec![0.4, 0.6], 1e-9).unwrap();
        let a = inner_objective(&c, 0, &p, pair(3.0, 1.0)).unwrap();
        let b = inner_objective(&c, 1, &p, pair(3.0, 1.0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bsc_vertex_value() {
        // (1/1) log(0.2^2/0.8 + 0.8^2/0.2) = log 3.25
        let c = Channel::bsc(0.2).unwrap();
        let v = inner_objective(&c, 0, &SimplexPoint::point_mass(2, 1), pair(2.0, 2.0)).unwrap();
        assert!((v - 3.25f64.ln()).abs() < 1e-14);
        assert!((v - 1.17865).abs() < 1e-5);
    }

    #[test]
    fn structural_zero_conventions() {
        let c = Channel::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]], 1e-9).unwrap();
        let u = SimplexPoint::uniform(2);
        // y = 1 is impossible under x' = 0 but reachable: infinite for beta > 1.
        assert_eq!(inner_objective(&c, 0, &u, pair(2.0, 1.5)).unwrap(), f64::INFINITY);
        // beta = 1 drops the P(y|x') factor.
        assert!(inner_objective(&c, 0, &u, pair(2.0, 1.0)).unwrap().is_finite());
        // If P~ never reaches y = 1 the term is zero.
        let v = inner_objective(&c, 0, &SimplexPoint::point_mass(2, 0), pair(2.0, 1.5)).unwrap();
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn argument_checks() {
        let c = Channel::bsc(0.2).unwrap();
        let u = SimplexPoint::uniform(2);
        assert!(matches!(inner_objective(&c, 2, &u, pair(2.0, 2.0)), Err(LeakageError::ShapeError(_))));
        assert!(matches!(
            inner_objective(&c, 0, &SimplexPoint::uniform(3), pair(2.0, 2.0)),
            Err(LeakageError::ShapeError(_))
        ));
        let inf = OrderPair::new(crate::Order::Infinite, crate::Order::Finite(2.0)).unwrap();
        assert!(matches!(inner_objective(&c, 0, &u, inf), Err(LeakageError::InvalidOrder(_))));
        assert!(matches!(inner_gradient(&c, 0, &u, pair(2.0, 3.0)), Err(LeakageError::InvalidOrder(_))));
    }

    #[test]
    fn constant_rows_have_zero_gradient() {
        let c = Channel::constant(3, &[0.25, 0.75]).unwrap();
        let g = inner_gradient(&c, 1, &SimplexPoint::new(vec![0.2, 0.3, 0.5], 1e-9).unwrap(), pair(3.0, 2.0)).unwrap();
        for gi in &g {
            assert!(gi.abs() < 1e-14);
        }
    }

    #[test]
    fn symmetric_channel_symmetric_gradient() {
        let c = Channel::new(
            vec![vec![0.6, 0.2, 0.2], vec![0.2, 0.6, 0.2], vec![0.2, 0.2, 0.6]],
            1e-9,
        )
        .unwrap();
        let g = inner_gradient(&c, 0, &SimplexPoint::uniform(3), pair(3.0, 2.0)).unwrap();
        assert!((g[1] - g[2]).abs() < 1e-14);
    }

    #[test]
    fn gradient_infinite_at_starved_boundary_is_reported() {
        let c = Channel::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], 1e-9).unwrap();
        let r = inner_gradient(&c, 0, &SimplexPoint::point_mass(2, 0), pair(3.0, 1.0));
        assert!(matches!(r, Err(LeakageError::NumericalFailure(_))));
    }
}
