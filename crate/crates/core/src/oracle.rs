//! Brute-force ground truth for the leakage computations in [`crate::measures`].
//!
//! Nothing here shares code with the optimizer path. Arithmetic is plain
//! `powf` in the linear domain, which is adequate for the small alphabets and
//! moderate orders these oracles are meant for.
//!
//! * [`grid_search_inner`] evaluates the inner objective on every point of a
//!   regular simplex grid.
//! * [`definitional_leakage`] starts from the operational definition: it
//!   splits each input `x` into `|U_x|` equiprobable latent symbols, solves the
//!   two estimator maximizations in closed form, and searches over input laws
//!   and split sizes.

use crate::channel::Channel;
use crate::error::{LeakageError, Result};
use crate::order::{LeakageValue, OrderPair};
use crate::simplex::SimplexPoint;

/// Largest input alphabet accepted by [`grid_search_inner`].
pub const GRID_MAX_INPUTS: usize = 4;
/// Largest input or output alphabet accepted by [`definitional_leakage`].
pub const DEFINITIONAL_MAX_ALPHABET: usize = 3;
/// Default bound on the total number of latent symbols in a [`ShatterSpec`].
pub const DEFAULT_SHATTER_TOTAL: usize = 64;
/// Objective evaluations allowed per call before giving up.
pub const MAX_CELLS: u64 = 20_000_000;

/// Sizes `|U_x|` of the latent alphabets in the shattering construction:
/// given `X = x`, `U` is uniform on a block of `|U_x|` symbols owned by `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShatterSpec {
    sizes: Vec<usize>,
}

impl ShatterSpec {
    pub fn new(sizes: Vec<usize>, total_cap: usize) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(LeakageError::InvalidParameter(format!("shatter sizes must be positive, got {sizes:?}")));
        }
        let total: usize = sizes.iter().sum();
        if total > total_cap {
            return Err(LeakageError::BudgetExceeded(format!(
                "shatter sizes {sizes:?} total {total} exceeds the cap {total_cap}"
            )));
        }
        Ok(Self { sizes })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// `P_U` induced by `P_X`, listed block by block in input order.
    pub fn latent_law(&self, p_x: &[f64]) -> Vec<f64> {
        self.sizes
            .iter()
            .zip(p_x)
            .flat_map(|(&s, &p)| std::iter::repeat(p / s as f64).take(s))
            .collect()
    }

    /// Owning input of each latent symbol, aligned with [`Self::latent_law`].
    pub fn owners(&self) -> Vec<usize> {
        self.sizes.iter().enumerate().flat_map(|(x, &s)| std::iter::repeat(x).take(s)).collect()
    }
}

/// `(sum_u P_U(u)^alpha)^(1/alpha)`: the best expected gain
/// `sum_u P_U(u) P_Û(u)^((alpha-1)/alpha)` of a blind estimator `Û`, attained
/// at `P_Û ∝ P_U^alpha`.
pub fn estimator_gain_denominator(p_u: &SimplexPoint, alpha: f64) -> f64 {
    p_u.weights().iter().map(|p| p.powf(alpha)).sum::<f64>().powf(1.0 / alpha)
}

/// Calls `visit` with every vector of `parts` nonnegative integers summing to
/// `total`, each at least `min`, in lexicographic order.
fn for_each_composition(parts: usize, total: usize, min: usize, visit: &mut impl FnMut(&[usize])) {
    fn recurse(buf: &mut Vec<usize>, parts: usize, left: usize, min: usize, visit: &mut impl FnMut(&[usize])) {
        if buf.len() + 1 == parts {
            buf.push(left);
            visit(buf);
            buf.pop();
            return;
        }
        let reserve = min * (parts - buf.len() - 1);
        for k in min..=left.saturating_sub(reserve) {
            buf.push(k);
            recurse(buf, parts, left - k, min, visit);
            buf.pop();
        }
    }
    if total < min * parts {
        return;
    }
    recurse(&mut Vec::with_capacity(parts), parts, total, min, visit);
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn finite_orders(order: OrderPair) -> Result<(f64, f64)> {
    order
        .finite_pair()
        .ok_or_else(|| LeakageError::InvalidOrder("oracles need finite alpha and beta; approach infinity with a large order".into()))
}

/// Naive linear-domain inner objective. `0^0 = 1`; outputs nothing reaches
/// under `p_tilde` contribute zero.
fn naive_inner(channel: &Channel, x_prime: usize, p_tilde: &[f64], alpha: f64, beta: f64) -> f64 {
    let mut total = 0.0;
    for y in 0..channel.outputs() {
        let inner: f64 = (0..channel.inputs()).map(|x| p_tilde[x] * channel.prob(x, y).powf(alpha)).sum();
        if inner == 0.0 {
            continue;
        }
        total += channel.prob(x_prime, y).powf(1.0 - beta) * inner.powf(beta / alpha);
    }
    alpha / ((alpha - 1.0) * beta) * total.ln()
}

/// Maximum of the inner objective over `x'` and over every simplex point with
/// coordinates in `{0, 1/resolution, ..., 1}`.
///
/// Grids at resolution `r` are contained in those at any multiple of `r`, so
/// refining by an integer factor never lowers the result.
pub fn grid_search_inner(channel: &Channel, order: OrderPair, resolution: usize) -> Result<LeakageValue> {
    let (alpha, beta) = finite_orders(order)?;
    let n = channel.inputs();
    if resolution == 0 {
        return Err(LeakageError::InvalidParameter("resolution must be positive".into()));
    }
    if n > GRID_MAX_INPUTS {
        return Err(LeakageError::BudgetExceeded(format!(
            "grid search supports at most {GRID_MAX_INPUTS} inputs, channel has {n}"
        )));
    }
    let points = binomial((resolution + n - 1) as u64, (n - 1) as u64);
    let cells = points.saturating_mul(n as u64);
    if cells > MAX_CELLS {
        return Err(LeakageError::BudgetExceeded(format!(
            "{cells} grid evaluations at resolution {resolution} exceed the budget of {MAX_CELLS}"
        )));
    }

    let mut best = f64::NEG_INFINITY;
    let mut p_tilde = vec![0.0; n];
    let scale = resolution as f64;
    for_each_composition(n, resolution, 0, &mut |counts| {
        for (p, &c) in p_tilde.iter_mut().zip(counts) {
            *p = c as f64 / scale;
        }
        for x_prime in 0..n {
            let v = naive_inner(channel, x_prime, &p_tilde, alpha, beta);
            if v > best {
                best = v;
            }
        }
    });
    LeakageValue::from_nats(best)
}

/// The leakage expression for one input law and one shattering, built from the
/// explicit latent variable `U`:
///
/// ```text
/// alpha/(alpha-1) * log( [sum_y P_Y(y)^(1-beta) (sum_u P_UY(u,y)^alpha)^(beta/alpha)]^(1/beta)
///                        / (sum_u P_U(u)^alpha)^(1/alpha) )
/// ```
fn shattered_value(channel: &Channel, p_x: &[f64], shatter: &ShatterSpec, alpha: f64, beta: f64) -> f64 {
    let p_u = shatter.latent_law(p_x);
    let owners = shatter.owners();
    let mut numerator = 0.0;
    for y in 0..channel.outputs() {
        let p_y: f64 = p_x.iter().enumerate().map(|(x, p)| p * channel.prob(x, y)).sum();
        if p_y == 0.0 {
            continue;
        }
        let joint: f64 = p_u.iter().zip(&owners).map(|(pu, &x)| (pu * channel.prob(x, y)).powf(alpha)).sum();
        numerator += p_y.powf(1.0 - beta) * joint.powf(beta / alpha);
    }
    let denominator = estimator_gain_denominator(&SimplexPoint::from_trusted(p_u), alpha);
    alpha / (alpha - 1.0) * (numerator.powf(1.0 / beta) / denominator).ln()
}

/// Lower bound on the leakage straight from its operational definition.
///
/// Searches every full-support `P_X` with coordinates in multiples of
/// `1/px_grid` and every [`ShatterSpec`] with sizes in `1..=shatter_cap` and
/// at most [`DEFAULT_SHATTER_TOTAL`] latent symbols in total. Each candidate
/// is a feasible point of the definition, so the result never exceeds the true
/// leakage. Raising `shatter_cap` never lowers it, and neither does multiplying
/// `px_grid` by an integer.
///
/// Full support caps how skewed the output law can be, and for `beta > 1`
/// the optimum wants a degenerate one, so convergence there is slow.
pub fn definitional_leakage(channel: &Channel, order: OrderPair, px_grid: usize, shatter_cap: usize) -> Result<LeakageValue> {
    let (alpha, beta) = finite_orders(order)?;
    let n = channel.inputs();
    if px_grid < n {
        return Err(LeakageError::InvalidParameter(format!(
            "px_grid {px_grid} is too coarse for a full-support law on {n} inputs"
        )));
    }
    if shatter_cap == 0 {
        return Err(LeakageError::InvalidParameter("shatter_cap must be positive".into()));
    }
    if n > DEFINITIONAL_MAX_ALPHABET || channel.outputs() > DEFINITIONAL_MAX_ALPHABET {
        return Err(LeakageError::BudgetExceeded(format!(
            "definitional oracle supports at most {DEFINITIONAL_MAX_ALPHABET} inputs and outputs, channel is {n}x{}",
            channel.outputs()
        )));
    }

    let mut shatters = Vec::new();
    let mut sizes = vec![1usize; n];
    loop {
        if let Ok(spec) = ShatterSpec::new(sizes.clone(), DEFAULT_SHATTER_TOTAL) {
            shatters.push(spec);
        }
        // Odometer over 1..=shatter_cap per input.
        let Some(pos) = sizes.iter().rposition(|&s| s < shatter_cap) else { break };
        sizes[pos] += 1;
        sizes[pos + 1..].iter_mut().for_each(|s| *s = 1);
    }

    let laws = binomial((px_grid - 1) as u64, (n - 1) as u64);
    let cells = laws.saturating_mul(shatters.len() as u64);
    if cells > MAX_CELLS {
        return Err(LeakageError::BudgetExceeded(format!(
            "{cells} (P_X, shattering) pairs exceed the budget of {MAX_CELLS}"
        )));
    }

    let mut best = f64::NEG_INFINITY;
    let mut p_x = vec![0.0; n];
    for_each_composition(n, px_grid, 1, &mut |counts| {
        for (p, &c) in p_x.iter_mut().zip(counts) {
            *p = c as f64 / px_grid as f64;
        }
        for shatter in &shatters {
            let v = shattered_value(channel, &p_x, shatter, alpha, beta);
            if v > best {
                best = v;
            }
        }
    });
    LeakageValue::from_nats(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{lrdp, maximal_alpha_beta_leakage};
    use crate::optim::OptimizerConfig;
    use crate::random::{dirichlet_point, random_channel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pair(a: f64, b: f64) -> OrderPair {
        OrderPair::finite(a, b).unwrap()
    }

    #[test]
    fn compositions_are_complete_and_ordered() {
        let mut seen = Vec::new();
        for_each_composition(3, 2, 0, &mut |c| seen.push(c.to_vec()));
        assert_eq!(seen, vec![vec![0, 0, 2], vec![0, 1, 1], vec![0, 2, 0], vec![1, 0, 1], vec![1, 1, 0], vec![2, 0, 0]]);
        let mut count = 0;
        for_each_composition(3, 10, 1, &mut |c| {
            assert!(c.iter().all(|&k| k >= 1));
            count += 1;
        });
        assert_eq!(count, binomial(9, 2));
    }

    #[test]
    fn shatter_spec_checks() {
        assert!(ShatterSpec::new(vec![1, 0], 64).is_err());
        assert!(matches!(ShatterSpec::new(vec![40, 30], 64), Err(LeakageError::BudgetExceeded(_))));
        let s = ShatterSpec::new(vec![2, 1], 64).unwrap();
        assert_eq!(s.latent_law(&[0.6, 0.4]), vec![0.3, 0.3, 0.4]);
        assert_eq!(s.owners(), vec![0, 0, 1]);
        assert_eq!(s.total(), 3);
    }

    #[test]
    fn denominator_examples() {
        assert_eq!(estimator_gain_denominator(&SimplexPoint::point_mass(4, 2), 3.0), 1.0);
        let k = 5.0f64;
        let v = estimator_gain_denominator(&SimplexPoint::uniform(5), 2.5);
        assert!((v - k.powf(-1.5 / 2.5)).abs() < 1e-15);
        let v = estimator_gain_denominator(&SimplexPoint::new(vec![0.7, 0.3], 1e-12).unwrap(), 2.0);
        assert!((v - 0.58f64.sqrt()).abs() < 1e-15);
        assert!((v - 0.76158).abs() < 1e-5);
    }

    fn gain(p_u: &[f64], p_hat: &[f64], alpha: f64) -> f64 {
        p_u.iter().zip(p_hat).map(|(p, q)| p * q.powf((alpha - 1.0) / alpha)).sum()
    }

    /// Zooming grid search over estimator laws `P_Û` on three symbols: a
    /// 100x100 grid over a window around the incumbent, shrinking the window
    /// fivefold per round.
    fn gain_by_search(p_u: &[f64], alpha: f64) -> f64 {
        let (mut center, mut half) = ([0.5, 0.5], 0.5);
        let mut best = gain(p_u, &[1.0 / 3.0; 3], alpha);
        for _ in 0..12 {
            let mut next = center;
            for i in 0..=100 {
                for j in 0..=100 {
                    let a = center[0] - half + 2.0 * half * i as f64 / 100.0;
                    let b = center[1] - half + 2.0 * half * j as f64 / 100.0;
                    if a < 0.0 || b < 0.0 || a + b > 1.0 {
                        continue;
                    }
                    let g = gain(p_u, &[a, b, 1.0 - a - b], alpha);
                    if g > best {
                        best = g;
                        next = [a, b];
                    }
                }
            }
            center = next;
            half /= 5.0;
        }
        best
    }

    #[test]
    fn denominator_matches_estimator_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for alpha in [1.5, 2.0, 4.0] {
            for _ in 0..3 {
                let p = dirichlet_point(&mut rng, 3);
                let closed = estimator_gain_denominator(&p, alpha);
                let found = gain_by_search(p.weights(), alpha);
                assert!(found <= closed + 1e-12 && closed - found < 1e-6, "alpha {alpha}: {found} vs {closed}");
            }
        }
    }

    #[test]
    fn grid_constant_rows_give_zero() {
        let c = Channel::constant(3, &[0.2, 0.8]).unwrap();
        for r in [1, 7, 50] {
            assert!(grid_search_inner(&c, pair(3.0, 2.0), r).unwrap().nats() < 1e-14);
        }
    }

    #[test]
    fn grid_equal_orders_hit_the_vertex() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let c = random_channel(&mut rng, 3, 3, false);
        for a in [1.5, 2.0, 4.0] {
            let g = grid_search_inner(&c, pair(a, a), 9).unwrap().nats();
            assert!((g - lrdp(&c, a).unwrap().nats()).abs() < 1e-9);
        }
    }

    #[test]
    fn grid_agrees_with_optimizer() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = random_channel(&mut rng, 3, 3, false);
        let order = pair(4.0, 2.0);
        let grid = grid_search_inner(&c, order, 200).unwrap().nats();
        let opt = maximal_alpha_beta_leakage(&c, order, &OptimizerConfig::default()).unwrap().nats();
        assert!(grid <= opt + 1e-9 && opt - grid < 1e-4, "{grid} vs {opt}");
    }

    #[test]
    fn grid_refinement_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let c = random_channel(&mut rng, 3, 2, false);
        let order = pair(3.0, 1.5);
        let mut last = f64::NEG_INFINITY;
        for r in [5, 10, 20, 40, 80] {
            let v = grid_search_inner(&c, order, r).unwrap().nats();
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn grid_budget_and_order_checks() {
        let c = Channel::identity(4);
        assert!(matches!(grid_search_inner(&c, pair(2.0, 1.0), 10_000), Err(LeakageError::BudgetExceeded(_))));
        assert!(matches!(grid_search_inner(&Channel::identity(5), pair(2.0, 1.0), 2), Err(LeakageError::BudgetExceeded(_))));
        let inf = OrderPair::new(crate::Order::Infinite, crate::Order::Finite(1.0)).unwrap();
        assert!(matches!(grid_search_inner(&c, inf, 2), Err(LeakageError::InvalidOrder(_))));
        assert!(grid_search_inner(&c, pair(2.0, 1.0), 0).is_err());
    }

    #[test]
    fn definitional_constant_rows_give_zero() {
        let c = Channel::constant(2, &[0.35, 0.65]).unwrap();
        let v = definitional_leakage(&c, pair(2.0, 1.5), 10, 4).unwrap().nats();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn definitional_noiseless_binary_near_maximal_leakage() {
        let v = definitional_leakage(&Channel::identity(2), pair(50.0, 1.0), 40, 8).unwrap().nats();
        assert!(v <= 2f64.ln() + 1e-9 && 2f64.ln() - v < 0.02, "{v}");
    }

    #[test]
    fn definitional_is_a_lower_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..3 {
            let c = random_channel(&mut rng, 2, 2, false);
            for (a, b) in [(2.0, 1.0), (2.0, 2.0), (4.0, 2.0)] {
                let d = definitional_leakage(&c, pair(a, b), 20, 6).unwrap().nats();
                let t = maximal_alpha_beta_leakage(&c, pair(a, b), &OptimizerConfig::default()).unwrap().nats();
                assert!(d <= t + 1e-9, "({a},{b}): {d} > {t}");
            }
        }
    }

    #[test]
    fn definitional_refinement_is_monotone() {
        let c = Channel::bsc(0.2).unwrap();
        let order = pair(2.0, 2.0);
        let coarse = definitional_leakage(&c, order, 10, 4).unwrap().nats();
        let finer_grid = definitional_leakage(&c, order, 20, 4).unwrap().nats();
        let finer_cap = definitional_leakage(&c, order, 10, 8).unwrap().nats();
        assert!(finer_grid >= coarse && finer_cap >= coarse);
    }

    #[test]
    fn definitional_argument_checks() {
        let c = Channel::identity(2);
        assert!(definitional_leakage(&c, pair(2.0, 1.0), 1, 4).is_err());
        assert!(definitional_leakage(&c, pair(2.0, 1.0), 10, 0).is_err());
        assert!(matches!(
            definitional_leakage(&Channel::identity(4), pair(2.0, 1.0), 10, 2),
            Err(LeakageError::BudgetExceeded(_))
        ));
    }
}
