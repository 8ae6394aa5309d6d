//! Leakage functionals on a [`Channel`].
//!
//! [`maximal_alpha_beta_leakage`] is the general entry point. Its value is
//!
//! ```text
//! max_x' sup_P~ alpha/((alpha-1) beta) log sum_y P(y|x')^(1-beta) (sum_x P~(x) P(y|x)^alpha)^(beta/alpha)
//! ```
//!
//! and the evaluation route depends on the orders:
//!
//! | orders                 | route                                                     |
//! |------------------------|-----------------------------------------------------------|
//! | `1 <= beta < alpha`    | concave maximization over `P~` for every `x'`             |
//! | `beta >= alpha`        | vertex closed form (scaled LRDP of order `beta`)          |
//! | `alpha = inf`, finite `beta` | [`lrdp_variant`]                                    |
//! | `alpha = beta = inf`   | [`ldp`]                                                   |
//! | finite `alpha`, `beta = inf` | `alpha/(alpha-1)` times [`ldp`] (the `beta -> inf` limit) |

mod capacity;
mod closed_form;
mod inner;
mod variational;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::Channel;
use crate::error::{LeakageError, Result};
use crate::optim::{maximize_on_simplex, OptimizerConfig, OptimizerReport};
use crate::order::{LeakageValue, Order, OrderPair, TauParameter};
use crate::random::dirichlet_point;
use crate::simplex::SimplexPoint;

pub use capacity::shannon_capacity;
pub use closed_form::{ldp, lrdp, lrdp_variant, maximal_leakage};
pub use inner::{inner_gradient, inner_objective};
pub use variational::{optimal_q_y, variational_objective};

use closed_form::PairMax;
use inner::InnerProblem;

/// Random interior starting points added to the configured one.
const RANDOM_RESTARTS: usize = 2;
const RESTART_SEED: u64 = 0x00ab_1eac_5eed;

/// Outcome of a leakage computation.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureResult {
    pub value: LeakageValue,
    /// The maximizing `x'` of the outer maximum.
    pub maximizing_x_prime: usize,
    /// `P~` from the concave route, or a point mass on the maximizing input
    /// for the pairwise closed forms. `None` when no single `P~` attains the
    /// value (the `alpha = inf` variant and maximal leakage).
    pub maximizing_distribution: Option<SimplexPoint>,
    /// Optimizer report for the maximizing `x'` (concave route only).
    pub report: Option<OptimizerReport>,
    /// False if any optimizer run behind this value stopped short of its gap
    /// tolerance. Closed forms are always converged.
    pub converged: bool,
}

impl MeasureResult {
    fn closed(value: f64, maximizing_x_prime: usize, maximizing_distribution: Option<SimplexPoint>) -> Result<Self> {
        Ok(Self {
            value: LeakageValue::from_nats(value)?,
            maximizing_x_prime,
            maximizing_distribution,
            report: None,
            converged: true,
        })
    }

    fn from_pair(channel: &Channel, best: PairMax) -> Result<Self> {
        Self::closed(best.nats, best.x_prime, Some(SimplexPoint::point_mass(channel.inputs(), best.x)))
    }

    pub fn nats(&self) -> f64 {
        self.value.nats()
    }
}

/// Maximal α,β-leakage of `channel`.
///
/// On the concave route a non-converged optimizer run does not fail the call:
/// the best value found is returned with `converged = false`.
pub fn maximal_alpha_beta_leakage(channel: &Channel, order: OrderPair, config: &OptimizerConfig) -> Result<MeasureResult> {
    config.validate()?;
    match (order.alpha(), order.beta()) {
        (Order::Finite(alpha), Order::Finite(beta)) if beta >= alpha => {
            MeasureResult::from_pair(channel, closed_form::scaled_lrdp_pair(channel, alpha, beta))
        }
        (Order::Finite(alpha), Order::Finite(beta)) => concave_route(channel, alpha, beta, config),
        (Order::Infinite, Order::Finite(beta)) if beta == 1.0 => {
            MeasureResult::closed(maximal_leakage(channel).nats(), 0, None)
        }
        (Order::Infinite, Order::Finite(beta)) => {
            let (x_prime, nats) = closed_form::lrdp_variant_max(channel, beta);
            MeasureResult::closed(nats, x_prime, None)
        }
        (Order::Infinite, Order::Infinite) => MeasureResult::from_pair(channel, closed_form::ldp_pair(channel)),
        (Order::Finite(alpha), Order::Infinite) => {
            MeasureResult::from_pair(channel, closed_form::beta_infinite_pair(channel, alpha))
        }
    }
}

/// `beta < alpha`: for every `x'`, maximize the concave inner objective over
/// `P~` from several starting points and keep the best.
fn concave_route(channel: &Channel, alpha: f64, beta: f64, config: &OptimizerConfig) -> Result<MeasureResult> {
    let dim = channel.inputs();
    // With beta = 1 the objective does not depend on x'.
    let candidates = if beta == 1.0 { 1 } else { dim };
    let mut best: Option<MeasureResult> = None;
    let mut all_converged = true;

    for x_prime in 0..candidates {
        let mut problem = InnerProblem::new(channel, x_prime, alpha, beta)?;
        let start = config.initial_point.clone().unwrap_or_else(|| SimplexPoint::uniform(dim));
        if start.dim() != dim {
            return Err(LeakageError::ShapeError(format!(
                "initial point has dimension {}, channel has {dim} inputs",
                start.dim()
            )));
        }
        let uniform = SimplexPoint::uniform(dim);
        if problem.value(uniform.weights()) == f64::INFINITY {
            // An output impossible under x' but reachable from a full-support P~.
            return MeasureResult::closed(f64::INFINITY, x_prime, Some(uniform));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(RESTART_SEED ^ x_prime as u64);
        let starts = std::iter::once(start)
            .chain((0..RANDOM_RESTARTS).map(|_| dirichlet_point(&mut rng, dim)))
            .collect::<Vec<_>>();
        let mut best_here: Option<OptimizerReport> = None;
        for start in starts {
            let run_config = OptimizerConfig { initial_point: Some(start), ..config.clone() };
            let report = maximize_on_simplex(&mut problem, dim, &run_config)?;
            if best_here.as_ref().map_or(true, |b| report.value > b.value) {
                best_here = Some(report);
            }
        }
        let report = best_here.expect("at least one start");
        // The best start must be certified; the other starts only guard it.
        all_converged &= report.converged;
        if best.as_ref().map_or(true, |b| report.value > b.nats()) {
            best = Some(MeasureResult {
                value: LeakageValue::from_nats(report.value)?,
                maximizing_x_prime: x_prime,
                maximizing_distribution: Some(report.maximizer.clone()),
                report: Some(report),
                converged: true,
            });
        }
    }
    let mut result = best.expect("channel has at least one input");
    result.converged = all_converged;
    Ok(result)
}

/// Maximal α-leakage: the `beta = 1` member. `alpha = inf` gives maximal
/// leakage.
pub fn maximal_alpha_leakage(channel: &Channel, alpha: Order, config: &OptimizerConfig) -> Result<MeasureResult> {
    let order = OrderPair::new(alpha, Order::Finite(1.0))?;
    maximal_alpha_beta_leakage(channel, order, config)
}

/// The `(alpha, tau)` reparameterization with `beta = alpha / (1 - tau (1 - alpha))`.
/// Since `beta <= alpha` throughout, only `tau = 0` (where `beta = alpha`)
/// avoids the optimizer.
pub fn alpha_tau_leakage(channel: &Channel, alpha: f64, tau: TauParameter, config: &OptimizerConfig) -> Result<MeasureResult> {
    if !(alpha.is_finite() && alpha > 1.0) {
        return Err(LeakageError::InvalidOrder(format!("alpha must be finite and exceed 1, got {alpha}")));
    }
    let order = OrderPair::finite(alpha, tau.beta_for(alpha))?;
    maximal_alpha_beta_leakage(channel, order, config)
}
