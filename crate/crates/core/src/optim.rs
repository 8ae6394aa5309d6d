//! Concave maximization over the probability simplex.
//!
//! The solver is Frank–Wolfe with away steps and an exact line search on the
//! directional derivative. Linear subproblems on the simplex reduce to picking
//! a vertex, iterates stay feasible without projection, and the Frank–Wolfe
//! gap `max_k g_k - <g, p>` bounds the suboptimality of a concave objective,
//! so it doubles as the convergence certificate.

use crate::error::{LeakageError, Result};
use crate::simplex::SimplexPoint;

/// A concave, differentiable objective on the simplex. `evaluate` returns the
/// value at `point` and writes the gradient into `gradient`.
///
/// Gradient components may be `+inf` on coordinates where `point` is zero
/// (an unbounded marginal gain at the boundary); everything else must be
/// finite for points with full support.
pub trait ConcaveObjective {
    fn evaluate(&mut self, point: &[f64], gradient: &mut [f64]) -> f64;
}

impl<F> ConcaveObjective for F
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    fn evaluate(&mut self, point: &[f64], gradient: &mut [f64]) -> f64 {
        self(point, gradient)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub max_iterations: usize,
    /// Duality-gap threshold in nats.
    pub tolerance: f64,
    /// Starting point; uniform when `None`.
    pub initial_point: Option<SimplexPoint>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { max_iterations: 10_000, tolerance: 1e-9, initial_point: None }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(LeakageError::InvalidParameter(format!(
                "optimizer tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(LeakageError::InvalidParameter("max_iterations must be at least 1".into()));
        }
        Ok(())
    }

    pub fn with_initial_point(mut self, point: SimplexPoint) -> Self {
        self.initial_point = Some(point);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerReport {
    /// Objective value at `maximizer`.
    pub value: f64,
    pub maximizer: SimplexPoint,
    pub iterations: usize,
    /// Frank–Wolfe gap at `maximizer`; an upper bound on `max f - value`.
    pub certified_gap: f64,
    pub converged: bool,
}

/// Consecutive steps without a strict value increase before giving up.
const MAX_STALLED_STEPS: usize = 50;

fn rounding_slack(value: f64) -> f64 {
    16.0 * f64::EPSILON * value.abs().max(1.0)
}

/// Which vertex direction a step moves along.
enum Step {
    Toward(usize),
    Away(usize),
}

/// Maximizes `objective` over the `dim`-dimensional simplex.
///
/// Returns once the certified gap is at most `config.tolerance`, or with
/// `converged = false` and the best iterate after `config.max_iterations`
/// steps (or when line search stops making progress).
pub fn maximize_on_simplex<O>(objective: &mut O, dim: usize, config: &OptimizerConfig) -> Result<OptimizerReport>
where
    O: ConcaveObjective + ?Sized,
{
    config.validate()?;
    if dim == 0 {
        return Err(LeakageError::ShapeError("cannot optimize over an empty simplex".into()));
    }
    let mut point = match &config.initial_point {
        Some(p) if p.dim() != dim => {
            return Err(LeakageError::ShapeError(format!(
                "initial point has dimension {}, expected {dim}",
                p.dim()
            )))
        }
        Some(p) => p.weights().to_vec(),
        None => vec![1.0 / dim as f64; dim],
    };
    let mut grad = vec![0.0; dim];
    let mut value = objective.evaluate(&point, &mut grad);
    if !value.is_finite() {
        return Err(LeakageError::NumericalFailure(format!(
            "objective is {value} at the initial point"
        )));
    }
    if dim == 1 {
        return Ok(OptimizerReport {
            value,
            maximizer: SimplexPoint::from_trusted(point),
            iterations: 0,
            certified_gap: 0.0,
            converged: true,
        });
    }

    let mut search = LineSearch::new(dim);
    let mut iterations = 0;
    let mut stalled = 0;
    let mut gap = frank_wolfe_gap(&point, &grad).1;
    while gap > config.tolerance && iterations < config.max_iterations && stalled < MAX_STALLED_STEPS {
        let (toward, _) = frank_wolfe_gap(&point, &grad);
        let (away, away_gap) = away_vertex(&point, &grad);
        let (step, max_step) = if gap >= away_gap {
            (Step::Toward(toward), 1.0)
        } else {
            let weight = point[away];
            (Step::Away(away), weight / (1.0 - weight))
        };
        let direction = direction(&point, &step);
        let Some((gamma, _)) = search.run(objective, &point, &direction, gap.max(away_gap), max_step) else {
            break;
        };
        let previous = point.clone();
        apply_step(&mut point, &direction, &step, gamma, max_step);
        let refreshed = objective.evaluate(&point, &mut grad);
        // Near the optimum the remaining gain is ~gap^2, below the resolution of
        // the value itself; steps that lose no more than rounding still shrink
        // the certificate and are taken.
        if !(refreshed >= value - rounding_slack(value)) {
            point = previous;
            objective.evaluate(&point, &mut grad);
            break;
        }
        stalled = if refreshed > value { 0 } else { stalled + 1 };
        value = refreshed;
        iterations += 1;
        gap = frank_wolfe_gap(&point, &grad).1;
    }

    Ok(OptimizerReport {
        value,
        maximizer: SimplexPoint::from_trusted(point),
        iterations,
        certified_gap: gap,
        converged: gap <= config.tolerance,
    })
}

/// Frank–Wolfe vertex (lowest index among maximal gradient entries) and gap.
fn frank_wolfe_gap(point: &[f64], grad: &[f64]) -> (usize, f64) {
    let mut best = 0;
    for k in 1..grad.len() {
        if grad[k] > grad[best] {
            best = k;
        }
    }
    let inner = dot_on_support(point, grad);
    let gap = if grad[best] == f64::INFINITY { f64::INFINITY } else { grad[best] - inner };
    (best, gap.max(0.0))
}

/// Away vertex: the supported coordinate with the smallest gradient.
fn away_vertex(point: &[f64], grad: &[f64]) -> (usize, f64) {
    let mut worst = usize::MAX;
    for k in 0..point.len() {
        if point[k] > 0.0 && (worst == usize::MAX || grad[k] < grad[worst]) {
            worst = k;
        }
    }
    let gap = dot_on_support(point, grad) - grad[worst];
    (worst, gap.max(0.0))
}

/// `<p, g>` over the support of `p`; keeps `0 * inf` out of the sum.
fn dot_on_support(point: &[f64], grad: &[f64]) -> f64 {
    point.iter().zip(grad).filter(|(p, _)| **p > 0.0).map(|(p, g)| p * g).sum()
}

fn direction(point: &[f64], step: &Step) -> Vec<f64> {
    match *step {
        Step::Toward(s) => point.iter().enumerate().map(|(k, p)| if k == s { 1.0 - p } else { -p }).collect(),
        Step::Away(v) => point.iter().enumerate().map(|(k, p)| if k == v { p - 1.0 } else { *p }).collect(),
    }
}

fn apply_step(point: &mut [f64], direction: &[f64], step: &Step, gamma: f64, max_step: f64) {
    match *step {
        Step::Toward(s) if gamma >= 1.0 => {
            point.iter_mut().for_each(|p| *p = 0.0);
            point[s] = 1.0;
            return;
        }
        _ => {}
    }
    for (p, d) in point.iter_mut().zip(direction) {
        *p = (*p + gamma * d).max(0.0);
    }
    if let Step::Away(v) = *step {
        if gamma >= max_step {
            point[v] = 0.0;
        }
    }
    let sum: f64 = point.iter().sum();
    point.iter_mut().for_each(|p| *p /= sum);
}

/// Exact line search on the concave restriction `phi(t) = f(p + t d)` by
/// finding the root of `phi'` with Illinois false position, falling back to
/// bisection while an endpoint derivative is infinite.
struct LineSearch {
    trial: Vec<f64>,
    grad: Vec<f64>,
}

impl LineSearch {
    const MAX_EVALS: usize = 80;

    fn new(dim: usize) -> Self {
        Self { trial: vec![0.0; dim], grad: vec![0.0; dim] }
    }

    fn probe<O: ConcaveObjective + ?Sized>(&mut self, objective: &mut O, point: &[f64], dir: &[f64], t: f64) -> (f64, f64) {
        for ((slot, p), d) in self.trial.iter_mut().zip(point).zip(dir) {
            *slot = (p + t * d).max(0.0);
        }
        let value = objective.evaluate(&self.trial, &mut self.grad);
        let slope = dir
            .iter()
            .zip(&self.grad)
            .filter(|(d, _)| **d != 0.0)
            .map(|(d, g)| d * g)
            .sum::<f64>();
        (value, slope)
    }

    /// Returns the chosen step and the objective value there, or `None` when
    /// no evaluated step is finite.
    fn run<O: ConcaveObjective + ?Sized>(
        &mut self,
        objective: &mut O,
        point: &[f64],
        dir: &[f64],
        initial_slope: f64,
        max_step: f64,
    ) -> Option<(f64, f64)> {
        let mut best: Option<(f64, f64)> = None;
        let keep = |t: f64, v: f64, best: &mut Option<(f64, f64)>| {
            if v.is_finite() && best.map_or(true, |(_, bv)| v > bv) {
                *best = Some((t, v));
            }
        };

        let (v_hi, s_hi) = self.probe(objective, point, dir, max_step);
        keep(max_step, v_hi, &mut best);
        if v_hi.is_finite() && s_hi >= 0.0 {
            return best;
        }

        let (mut lo, mut s_lo) = (0.0, initial_slope);
        let (mut hi, mut s_hi) = (max_step, if s_hi.is_nan() { -f64::INFINITY } else { s_hi });
        let mut last_side = 0i8;
        let scale = if initial_slope.is_finite() { initial_slope.abs() } else { 1.0 };
        for _ in 0..Self::MAX_EVALS {
            let t = if s_lo.is_finite() && s_hi.is_finite() && s_lo > s_hi {
                lo + s_lo * (hi - lo) / (s_lo - s_hi)
            } else {
                0.5 * (lo + hi)
            };
            let t = if t <= lo || t >= hi { 0.5 * (lo + hi) } else { t };
            let (v, s) = self.probe(objective, point, dir, t);
            keep(t, v, &mut best);
            if s.is_nan() || !v.is_finite() {
                hi = t;
                s_hi = -f64::INFINITY;
                continue;
            }
            if s.abs() <= 1e-15 * scale.max(1e-300) {
                break;
            }
            if s > 0.0 {
                lo = t;
                s_lo = s;
                if last_side == 1 {
                    s_hi *= 0.5;
                }
                last_side = 1;
            } else {
                hi = t;
                s_hi = s;
                if last_side == -1 {
                    s_lo *= 0.5;
                }
                last_side = -1;
            }
            if hi - lo <= 1e-16 * max_step.max(1.0) {
                break;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn neg_sum_squares(p: &[f64], g: &mut [f64]) -> f64 {
        for (gi, pi) in g.iter_mut().zip(p) {
            *gi = -2.0 * pi;
        }
        -p.iter().map(|x| x * x).sum::<f64>()
    }

    #[test]
    fn symmetric_quadratic_has_uniform_maximizer() {
        let config = OptimizerConfig { initial_point: Some(SimplexPoint::new(vec![0.7, 0.2, 0.1], 1e-9).unwrap()), ..Default::default() };
        let report = maximize_on_simplex(&mut neg_sum_squares, 3, &config).unwrap();
        assert!(report.converged, "{report:?}");
        assert!((report.value + 1.0 / 3.0).abs() < 1e-9);
        for w in report.maximizer.weights() {
            assert!((w - 1.0 / 3.0).abs() < 1e-5);
        }
    }

    #[test]
    fn singleton_simplex() {
        let report = maximize_on_simplex(&mut neg_sum_squares, 1, &OptimizerConfig::default()).unwrap();
        assert_eq!(report.maximizer.weights(), &[1.0]);
        assert_eq!(report.iterations, 0);
        assert!(report.converged);
    }

    #[test]
    fn linear_objective_goes_to_a_vertex() {
        let mut linear = |p: &[f64], g: &mut [f64]| {
            g.copy_from_slice(&[1.0, 3.0, 2.0]);
            p[0] + 3.0 * p[1] + 2.0 * p[2]
        };
        let report = maximize_on_simplex(&mut linear, 3, &OptimizerConfig::default()).unwrap();
        assert_eq!(report.maximizer.weights(), &[0.0, 1.0, 0.0]);
        assert_eq!(report.value, 3.0);
        assert_eq!(report.certified_gap, 0.0);
    }

    #[test]
    fn ties_prefer_lowest_index() {
        let mut flat_top = |p: &[f64], g: &mut [f64]| {
            g.copy_from_slice(&[0.0, 1.0, 1.0]);
            p[1] + p[2]
        };
        let config = OptimizerConfig::default().with_initial_point(SimplexPoint::point_mass(3, 0));
        let report = maximize_on_simplex(&mut flat_top, 3, &config).unwrap();
        assert_eq!(report.maximizer.weights(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn optimum_on_a_face_is_reached() {
        // max of -(p0 - 0.6)^2 - (p1 - 0.6)^2 restricted to the simplex is at (0.5, 0.5, 0).
        let mut f = |p: &[f64], g: &mut [f64]| {
            g[0] = -2.0 * (p[0] - 0.6);
            g[1] = -2.0 * (p[1] - 0.6);
            g[2] = 0.0;
            -(p[0] - 0.6).powi(2) - (p[1] - 0.6).powi(2)
        };
        let report = maximize_on_simplex(&mut f, 3, &OptimizerConfig::default()).unwrap();
        assert!(report.converged, "gap {}", report.certified_gap);
        assert!((report.value + 0.02).abs() < 1e-9);
        assert_eq!(report.maximizer.weights()[2], 0.0);
    }

    #[test]
    fn non_finite_start_is_an_error() {
        let mut bad = |_: &[f64], _: &mut [f64]| f64::NAN;
        assert!(matches!(
            maximize_on_simplex(&mut bad, 2, &OptimizerConfig::default()),
            Err(LeakageError::NumericalFailure(_))
        ));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let config = OptimizerConfig { tolerance: 0.0, ..Default::default() };
        assert!(maximize_on_simplex(&mut neg_sum_squares, 2, &config).is_err());
        let config = OptimizerConfig { max_iterations: 0, ..Default::default() };
        assert!(maximize_on_simplex(&mut neg_sum_squares, 2, &config).is_err());
        let config = OptimizerConfig::default().with_initial_point(SimplexPoint::uniform(4));
        assert!(maximize_on_simplex(&mut neg_sum_squares, 2, &config).is_err());
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        // Entropy-like objective with an interior optimum needs more than one step.
        let mut f = |p: &[f64], g: &mut [f64]| {
            for (gi, pi) in g.iter_mut().zip(p) {
                *gi = -(pi.ln() + 1.0) + if std::ptr::eq(pi, &p[0]) { 1.0 } else { 0.0 };
            }
            -p.iter().map(|x| x * x.ln()).sum::<f64>() + p[0]
        };
        let config = OptimizerConfig { max_iterations: 1, tolerance: 1e-14, ..Default::default() };
        let report = maximize_on_simplex(&mut f, 3, &config).unwrap();
        assert_eq!(report.iterations, 1);
        assert!(!report.converged);
        assert!(report.certified_gap > config.tolerance);
    }
}
