//! Maximal α,β-leakage of finite channels and the leakage measures it
//! connects: maximal leakage, maximal α-leakage, local differential privacy,
//! local Rényi differential privacy and its α = ∞ variant, plus Shannon
//! capacity as the α → 1 limit.
//!
//! All values are in nats.

mod error;
mod logsum;

pub mod channel;
pub mod cli;
pub mod measures;
pub mod optim;
pub mod oracle;
pub mod order;
pub mod random;
pub mod simplex;

pub use channel::{Channel, DEFAULT_ROW_TOLERANCE};
pub use error::{LeakageError, Result};
pub use measures::{
    alpha_tau_leakage, inner_gradient, inner_objective, ldp, lrdp, lrdp_variant, maximal_alpha_beta_leakage,
    maximal_alpha_leakage, maximal_leakage, optimal_q_y, shannon_capacity, variational_objective, MeasureResult,
};
pub use optim::{maximize_on_simplex, ConcaveObjective, OptimizerConfig, OptimizerReport};
pub use order::{LeakageValue, Order, OrderPair, TauParameter};
pub use simplex::SimplexPoint;
