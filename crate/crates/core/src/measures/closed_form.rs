//! Measures with closed forms over the channel rows.

use crate::channel::Channel;
use crate::error::{LeakageError, Result};
use crate::logsum::{log_sum_exp, scaled_log};
use crate::order::LeakageValue;

/// `(x', x)` attaining a pairwise maximum, with its value in nats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct PairMax {
    pub x_prime: usize,
    pub x: usize,
    pub nats: f64,
}

/// Scans every ordered pair and keeps the first maximum (lowest `x'`, then
/// lowest `x`).
fn max_over_pairs(inputs: usize, mut f: impl FnMut(usize, usize) -> f64) -> PairMax {
    let mut best = PairMax { x_prime: 0, x: 0, nats: f64::NEG_INFINITY };
    for x_prime in 0..inputs {
        for x in 0..inputs {
            let v = f(x_prime, x);
            if v > best.nats {
                best = PairMax { x_prime, x, nats: v };
            }
        }
    }
    best
}

/// `ln sum_y P(y|x')^(1-order) P(y|x)^order`, with `0^0 = 1` and a `+inf`
/// term whenever `P(y|x') = 0 < P(y|x)` and `order > 1`.
/// Identical rows give exactly zero rather than the rounded log of a row sum.
fn ln_power_sum(ln_prime: &[f64], ln_row: &[f64], order: f64) -> f64 {
    if ln_prime == ln_row {
        return 0.0;
    }
    log_sum_exp(ln_prime.iter().zip(ln_row).filter(|(_, lr)| **lr > f64::NEG_INFINITY).map(|(lp, lr)| {
        scaled_log(1.0 - order, *lp) + order * lr
    }))
}

fn log_rows(channel: &Channel) -> Vec<Vec<f64>> {
    channel.rows().map(|r| r.iter().map(|p| p.ln()).collect()).collect()
}

/// Maximal leakage: `log sum_y max_x P(y|x)`.
pub fn maximal_leakage(channel: &Channel) -> LeakageValue {
    let total: f64 = (0..channel.outputs())
        .map(|y| (0..channel.inputs()).map(|x| channel.prob(x, y)).fold(0.0, f64::max))
        .sum();
    LeakageValue::from_nats(total.ln()).expect("column maxima sum to at least one")
}

pub(crate) fn ldp_pair(channel: &Channel) -> PairMax {
    max_over_pairs(channel.inputs(), |x_prime, x| {
        let mut worst = f64::NEG_INFINITY;
        for y in 0..channel.outputs() {
            let (num, den) = (channel.prob(x, y), channel.prob(x_prime, y));
            if num > 0.0 {
                let r = if den == 0.0 { f64::INFINITY } else { (num / den).ln() };
                worst = worst.max(r);
            }
        }
        worst
    })
}

/// Local differential privacy: the largest log-likelihood ratio
/// `log P(y|x) / P(y|x')` over pairs with `P(y|x) > 0`; `+inf` if some output
/// possible under one input is impossible under another.
pub fn ldp(channel: &Channel) -> LeakageValue {
    LeakageValue::from_nats(ldp_pair(channel).nats).expect("log-likelihood ratios have a nonnegative maximum")
}

pub(crate) fn lrdp_pair(channel: &Channel, alpha: f64) -> PairMax {
    let ln_rows = log_rows(channel);
    let scale = 1.0 / (alpha - 1.0);
    max_over_pairs(channel.inputs(), |x_prime, x| scale * ln_power_sum(&ln_rows[x_prime], &ln_rows[x], alpha))
}

/// Local Rényi differential privacy of order `alpha`: the largest Rényi
/// divergence `D_alpha(P(.|x) || P(.|x'))` over input pairs.
pub fn lrdp(channel: &Channel, alpha: f64) -> Result<LeakageValue> {
    if !(alpha.is_finite() && alpha > 1.0) {
        return Err(LeakageError::InvalidOrder(format!("LRDP needs a finite alpha > 1, got {alpha}")));
    }
    LeakageValue::from_nats(lrdp_pair(channel, alpha).nats)
}

/// `beta >= alpha`: the supremum over `P~` sits at a vertex, giving
/// `alpha/((alpha-1) beta) log sum_y P(y|x')^(1-beta) P(y|x)^beta` maximized
/// over pairs.
pub(crate) fn scaled_lrdp_pair(channel: &Channel, alpha: f64, beta: f64) -> PairMax {
    let ln_rows = log_rows(channel);
    let scale = alpha / ((alpha - 1.0) * beta);
    max_over_pairs(channel.inputs(), |x_prime, x| scale * ln_power_sum(&ln_rows[x_prime], &ln_rows[x], beta))
}

/// `alpha` finite, `beta = inf`: the `beta -> inf` limit of the vertex form,
/// `alpha/(alpha-1) log max_{y: P(y|x) > 0} P(y|x)/P(y|x')`, maximized over
/// pairs. Equals `alpha/(alpha-1)` times LDP.
pub(crate) fn beta_infinite_pair(channel: &Channel, alpha: f64) -> PairMax {
    let ldp = ldp_pair(channel);
    PairMax { nats: alpha / (alpha - 1.0) * ldp.nats, ..ldp }
}

/// Returns the maximizing `x'` and the value in nats.
pub(crate) fn lrdp_variant_max(channel: &Channel, beta: f64) -> (usize, f64) {
    let ln_col_max: Vec<f64> = (0..channel.outputs())
        .map(|y| (0..channel.inputs()).map(|x| channel.prob(x, y)).fold(0.0, f64::max).ln())
        .collect();
    let ln_rows = log_rows(channel);
    let mut best = (0, f64::NEG_INFINITY);
    for (x_prime, ln_prime) in ln_rows.iter().enumerate() {
        let v = ln_power_sum(ln_prime, &ln_col_max, beta) / beta;
        if v > best.1 {
            best = (x_prime, v);
        }
    }
    best
}

/// The `alpha = inf` member of the family:
/// `max_x' (1/beta) log sum_y P(y|x')^(1-beta) max_x P(y|x)^beta`.
/// The inner maximum over inputs sits inside the sum over outputs.
pub fn lrdp_variant(channel: &Channel, beta: f64) -> Result<LeakageValue> {
    if !(beta.is_finite() && beta >= 1.0) {
        return Err(LeakageError::InvalidOrder(format!("variant needs a finite beta >= 1, got {beta}")));
    }
    LeakageValue::from_nats(lrdp_variant_max(channel, beta).1)
}
