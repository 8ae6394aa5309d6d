use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{format_value, load_channel, VerifyArgs, EXIT_FAILED_CHECKS, EXIT_OK};
use crate::channel::Channel;
use crate::error::Result;
use crate::measures::{self, inner_objective, optimal_q_y, variational_objective};
use crate::optim::OptimizerConfig;
use crate::oracle::{self, DEFINITIONAL_MAX_ALPHABET, GRID_MAX_INPUTS};
use crate::order::{Order, OrderPair, TauParameter};
use crate::random::{dirichlet_point, random_channel};

pub(super) const DEFAULT_SLACK: f64 = 1e-6;

const GRID_RESOLUTION: usize = 100;
/// How far below the optimizer the grid oracle may land at [`GRID_RESOLUTION`].
const GRID_ALLOWANCE: f64 = 1e-3;
const PX_GRID: usize = 20;
const SHATTER_CAP: usize = 4;

const INF: Order = Order::Infinite;
const fn f(v: f64) -> Order {
    Order::Finite(v)
}

const ORDERS: [(Order, Order); 9] = [
    (f(2.0), f(1.0)),
    (f(3.0), f(1.5)),
    (f(4.0), f(2.0)),
    (f(2.0), f(2.0)),
    (f(2.0), f(3.0)),
    (INF, f(1.0)),
    (INF, f(2.0)),
    (f(3.0), INF),
    (INF, INF),
];

/// Slack of `a <= b`: positive when it holds with room to spare. Equal values
/// (including two infinities) have slack zero.
fn le(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        b - a
    }
}

fn eq(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        -(a - b).abs()
    }
}

struct Property {
    name: &'static str,
    checks: usize,
    worst: f64,
    /// Set by checks whose pass condition is not `slack >= -tolerance`.
    hard_failure: bool,
}

impl Property {
    fn new(name: &'static str) -> Self {
        Self { name, checks: 0, worst: f64::INFINITY, hard_failure: false }
    }

    fn record(&mut self, slack: f64) {
        self.checks += 1;
        // NaN slack counts as a violation.
        self.worst = if slack.is_nan() { f64::NEG_INFINITY } else { self.worst.min(slack) };
    }

    fn passed(&self, tolerance: f64) -> bool {
        !self.hard_failure && self.worst >= -tolerance
    }
}

struct Suite {
    config: OptimizerConfig,
    nonnegative: Property,
    zero_iff_identical: Property,
    beta_monotone: Property,
    special_cases: Property,
    dpi_post: Property,
    dpi_pre: Property,
    additivity: Property,
    tau_monotone: Property,
    variational: Property,
    grid_lower: Property,
    grid_agreement: Property,
    definitional_lower: Property,
}

impl Suite {
    fn new() -> Self {
        Self {
            config: OptimizerConfig::default(),
            nonnegative: Property::new("non-negativity"),
            zero_iff_identical: Property::new("zero-iff-identical-rows"),
            beta_monotone: Property::new("beta-monotonicity"),
            special_cases: Property::new("special-case-equalities"),
            dpi_post: Property::new("dpi-post-processing"),
            dpi_pre: Property::new("dpi-pre-processing"),
            additivity: Property::new("additivity"),
            tau_monotone: Property::new("alpha-tau-monotonicity"),
            variational: Property::new("variational-form"),
            grid_lower: Property::new("grid-oracle-lower-bound"),
            grid_agreement: Property::new("grid-oracle-agreement"),
            definitional_lower: Property::new("definitional-oracle-lower-bound"),
        }
    }

    fn properties(&self) -> [&Property; 12] {
        [
            &self.nonnegative,
            &self.zero_iff_identical,
            &self.beta_monotone,
            &self.special_cases,
            &self.dpi_post,
            &self.dpi_pre,
            &self.additivity,
            &self.tau_monotone,
            &self.variational,
            &self.grid_lower,
            &self.grid_agreement,
            &self.definitional_lower,
        ]
    }

    fn abl(&self, c: &Channel, alpha: Order, beta: Order) -> Result<f64> {
        Ok(measures::maximal_alpha_beta_leakage(c, OrderPair::new(alpha, beta)?, &self.config)?.nats())
    }

    fn all_orders(&self, c: &Channel) -> Result<Vec<f64>> {
        ORDERS.iter().map(|&(a, b)| self.abl(c, a, b)).collect()
    }

    fn check_channel<R: Rng>(&mut self, c: &Channel, rng: &mut R, allow_zeros: bool) -> Result<Vec<f64>> {
        let values = self.all_orders(c)?;
        let maxl = measures::maximal_leakage(c).nats();
        let ldp = measures::ldp(c).nats();

        let mut others = vec![maxl, ldp, measures::lrdp(c, 2.0)?.nats(), measures::lrdp_variant(c, 2.0)?.nats()];
        others.push(measures::shannon_capacity(c, 1e-12)?.nats());
        for &v in values.iter().chain(&others) {
            self.nonnegative.record(v);
        }

        if c.has_identical_rows() {
            for &v in values.iter().chain(&others) {
                self.zero_iff_identical.record(-v);
            }
        } else {
            for &v in &values {
                self.zero_iff_identical.record(v);
                self.zero_iff_identical.hard_failure |= v <= 0.0;
            }
        }

        for (alpha, betas) in [
            (f(2.0), vec![1.0, 1.5, 2.0, 3.0, 4.0, 20.0]),
            (f(4.0), vec![1.0, 1.5, 2.0, 3.0, 4.0, 8.0, 40.0]),
            (INF, vec![1.0, 2.0, 5.0]),
        ] {
            let mut orders: Vec<Order> = betas.into_iter().map(Order::Finite).collect();
            orders.push(INF);
            let row: Vec<f64> = orders.iter().map(|&b| self.abl(c, alpha, b)).collect::<Result<_>>()?;
            for w in row.windows(2) {
                self.beta_monotone.record(le(w[0], w[1]));
            }
        }

        for a in [1.5, 2.0, 4.0] {
            self.special_cases.record(eq(self.abl(c, f(a), f(a))?, measures::lrdp(c, a)?.nats()));
        }
        self.special_cases.record(eq(self.abl(c, INF, INF)?, ldp));
        self.special_cases.record(eq(self.abl(c, INF, f(1.0))?, maxl));
        self.special_cases.record(eq(measures::lrdp_variant(c, 1.0)?.nats(), maxl));

        let post_outputs = rng.random_range(2..=3);
        let mut post = vec![random_channel(rng, c.outputs(), post_outputs, allow_zeros)];
        if c.inputs() == c.outputs() {
            post.push(c.clone());
        }
        for w in &post {
            for (v, after) in values.iter().zip(self.all_orders(&c.compose(w)?)?) {
                self.dpi_post.record(le(after, *v));
            }
        }
        let pre_inputs = rng.random_range(2..=3);
        let pre = random_channel(rng, pre_inputs, c.inputs(), allow_zeros);
        for (v, before) in values.iter().zip(self.all_orders(&pre.compose(c)?)?) {
            self.dpi_pre.record(le(before, *v));
        }

        let other = random_channel(rng, 2, 2, allow_zeros);
        let product = c.product(&other);
        for (((a, b), v), w) in ORDERS.iter().zip(&values).zip(self.all_orders(&other)?) {
            self.additivity.record(eq(self.abl(&product, *a, *b)?, v + w));
        }

        let taus = [0.0, 0.25, 0.5, 0.75, 1.0];
        let alphas = [1.5, 2.0, 4.0, 8.0];
        let mut table = Vec::new();
        for &a in &alphas {
            let row: Vec<f64> = taus
                .iter()
                .map(|&t| Ok(measures::alpha_tau_leakage(c, a, TauParameter::new(t)?, &self.config)?.nats()))
                .collect::<Result<_>>()?;
            for w in row.windows(2) {
                self.tau_monotone.record(le(w[1], w[0]));
            }
            table.push(row);
        }
        for w in table.windows(2) {
            for (lo, hi) in w[0].iter().zip(&w[1]) {
                self.tau_monotone.record(le(*lo, *hi));
            }
        }

        let p_tilde = dirichlet_point(rng, c.inputs());
        for alpha in [2.0, 4.0] {
            for t in [0.25, 0.5, 1.0] {
                let tau = TauParameter::new(t)?;
                let order = OrderPair::finite(alpha, tau.beta_for(alpha))?;
                for x_prime in 0..c.inputs() {
                    let direct = inner_objective(c, x_prime, &p_tilde, order)?;
                    let q = optimal_q_y(c, x_prime, &p_tilde, alpha, tau)?;
                    self.variational.record(eq(variational_objective(c, x_prime, &p_tilde, &q, alpha, tau)?, direct));
                }
            }
        }

        if c.inputs() <= 3.min(GRID_MAX_INPUTS) {
            for (a, b) in [(4.0, 2.0), (3.0, 1.5), (2.0, 1.0)] {
                let order = OrderPair::finite(a, b)?;
                let grid = oracle::grid_search_inner(c, order, GRID_RESOLUTION)?.nats();
                let opt = self.abl(c, f(a), f(b))?;
                self.grid_lower.record(le(grid, opt));
                self.grid_agreement.record(GRID_ALLOWANCE - le(grid, opt));
            }
        }
        if c.inputs() <= DEFINITIONAL_MAX_ALPHABET && c.outputs() <= DEFINITIONAL_MAX_ALPHABET {
            for (a, b) in [(2.0, 1.0), (2.0, 2.0), (4.0, 2.0)] {
                let d = oracle::definitional_leakage(c, OrderPair::finite(a, b)?, PX_GRID, SHATTER_CAP)?.nats();
                self.definitional_lower.record(le(d, self.abl(c, f(a), f(b))?));
            }
        }
        Ok(values)
    }
}

fn format_slack(slack: f64) -> String {
    if slack.is_infinite() {
        if slack > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        // Adding zero turns -0.0 into 0.0.
        format!("{:.3e}", slack + 0.0)
    }
}

pub(super) fn run(args: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let channels = match (&args.channel, args.random) {
        (Some(path), _) => vec![load_channel(path)?],
        (None, n) => (0..n.unwrap_or(1))
            .map(|_| {
                let (inputs, outputs) = (rng.random_range(2..=3), rng.random_range(2..=3));
                random_channel(&mut rng, inputs, outputs, args.allow_zeros)
            })
            .collect(),
    };

    let mut suite = Suite::new();
    for (k, c) in channels.iter().enumerate() {
        let values = suite.check_channel(c, &mut rng, args.allow_zeros)?;
        let listed: Vec<String> = ORDERS
            .iter()
            .zip(&values)
            .map(|((a, b), v)| format!("L({a},{b})={}", format_value(*v)))
            .collect();
        writeln!(out, "channel {k} {}x{}: {}", c.inputs(), c.outputs(), listed.join(" "))?;
    }

    let mut failures = 0;
    for p in suite.properties() {
        if p.checks == 0 {
            writeln!(out, "SKIP {:<32} checks=0 (alphabet too large for this oracle)", p.name)?;
            continue;
        }
        let passed = p.passed(args.tolerance);
        failures += usize::from(!passed);
        writeln!(
            out,
            "{} {:<32} checks={:<5} worst_slack={}",
            if passed { "PASS" } else { "FAIL" },
            p.name,
            p.checks,
            format_slack(p.worst)
        )?;
    }
    writeln!(out, "{failures} failing properties, tolerance {:e}", args.tolerance)?;
    Ok(if failures == 0 { EXIT_OK } else { EXIT_FAILED_CHECKS })
}
