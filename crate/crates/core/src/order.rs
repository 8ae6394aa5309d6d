//! Orders `(alpha, beta)`, the `tau` reparameterization and leakage values.

use std::fmt;
use std::str::FromStr;

use crate::error::{LeakageError, Result};

/// An order that may be infinite. Infinity is its own variant so the
/// closed-form limits are evaluated exactly instead of through a large float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Order {
    Finite(f64),
    Infinite,
}

impl Order {
    pub fn is_infinite(self) -> bool {
        matches!(self, Order::Infinite)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Order::Finite(v) => Some(v),
            Order::Infinite => None,
        }
    }

    /// `+inf` for the infinite variant.
    pub fn as_f64(self) -> f64 {
        match self {
            Order::Finite(v) => v,
            Order::Infinite => f64::INFINITY,
        }
    }

    /// Maps IEEE `+inf` to [`Order::Infinite`].
    pub fn from_f64(v: f64) -> Self {
        if v == f64::INFINITY {
            Order::Infinite
        } else {
            Order::Finite(v)
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(v) => write!(f, "{v}"),
            Order::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Order {
    type Err = LeakageError;

    /// Accepts decimal literals and the literal `inf` (also `+inf`,
    /// `infinity`, any case).
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let lower = t.to_ascii_lowercase();
        if matches!(lower.as_str(), "inf" | "+inf" | "infinity" | "+infinity") {
            return Ok(Order::Infinite);
        }
        let v: f64 = t
            .parse()
            .map_err(|_| LeakageError::InvalidOrder(format!("`{t}` is neither a number nor `inf`")))?;
        if !v.is_finite() {
            return Err(LeakageError::InvalidOrder(format!("`{t}` is not a finite number")));
        }
        Ok(Order::Finite(v))
    }
}

/// The pair `(alpha, beta)` with `alpha in (1, inf]` and `beta in [1, inf]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderPair {
    alpha: Order,
    beta: Order,
}

impl OrderPair {
    pub fn new(alpha: Order, beta: Order) -> Result<Self> {
        if let Order::Finite(a) = alpha {
            if !(a.is_finite() && a > 1.0) {
                return Err(LeakageError::InvalidOrder(format!("alpha must exceed 1, got {a}")));
            }
        }
        if let Order::Finite(b) = beta {
            if !(b.is_finite() && b >= 1.0) {
                return Err(LeakageError::InvalidOrder(format!("beta must be at least 1, got {b}")));
            }
        }
        Ok(Self { alpha, beta })
    }

    pub fn finite(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(Order::Finite(alpha), Order::Finite(beta))
    }

    pub fn alpha(&self) -> Order {
        self.alpha
    }

    pub fn beta(&self) -> Order {
        self.beta
    }

    /// Both orders when finite.
    pub fn finite_pair(&self) -> Option<(f64, f64)> {
        Some((self.alpha.finite()?, self.beta.finite()?))
    }
}

/// Position on the `(alpha, tau)` reparameterization, `tau in [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauParameter(f64);

impl TauParameter {
    pub fn new(tau: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(LeakageError::InvalidParameter(format!("tau must lie in [0, 1], got {tau}")));
        }
        Ok(Self(tau))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `beta = alpha / (1 - tau (1 - alpha))`; runs from `alpha` at `tau = 0`
    /// down to 1 at `tau = 1`. The endpoints are returned exactly.
    pub fn beta_for(self, alpha: f64) -> f64 {
        if self.0 == 0.0 {
            alpha
        } else if self.0 == 1.0 {
            1.0
        } else {
            alpha / (1.0 - self.0 * (1.0 - alpha))
        }
    }
}

/// A leakage in nats. Nonnegative; `+inf` is allowed.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LeakageValue(f64);

impl LeakageValue {
    pub const ZERO: LeakageValue = LeakageValue(0.0);
    pub const INFINITE: LeakageValue = LeakageValue(f64::INFINITY);

    /// Rounding can push an exact zero a few ulps below; those are clamped.
    /// NaN and clearly negative inputs are rejected.
    pub fn from_nats(nats: f64) -> Result<Self> {
        if nats.is_nan() {
            return Err(LeakageError::NumericalFailure("leakage evaluated to NaN".into()));
        }
        if nats < -1e-9 {
            return Err(LeakageError::NumericalFailure(format!("negative leakage {nats}")));
        }
        Ok(Self(nats.max(0.0)))
    }

    pub fn nats(self) -> f64 {
        self.0
    }

    pub fn bits(self) -> f64 {
        self.0 / std::f64::consts::LN_2
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_inf_literal_exactly() {
        assert_eq!("inf".parse::<Order>().unwrap(), Order::Infinite);
        assert_eq!("INF".parse::<Order>().unwrap(), Order::Infinite);
        assert_eq!("2.5".parse::<Order>().unwrap(), Order::Finite(2.5));
        assert!("1e400".parse::<Order>().is_err());
        assert!("nan".parse::<Order>().is_err());
        assert!("two".parse::<Order>().is_err());
    }

    #[test]
    fn order_pair_ranges() {
        assert!(OrderPair::finite(1.0, 1.0).is_err());
        assert!(OrderPair::finite(2.0, 0.5).is_err());
        assert!(OrderPair::finite(1.0001, 1.0).is_ok());
        assert!(OrderPair::new(Order::Infinite, Order::Infinite).is_ok());
        assert!(OrderPair::new(Order::Finite(f64::NAN), Order::Infinite).is_err());
    }

    #[test]
    fn tau_endpoints() {
        let t0 = TauParameter::new(0.0).unwrap();
        let t1 = TauParameter::new(1.0).unwrap();
        assert_eq!(t0.beta_for(3.7), 3.7);
        assert_eq!(t1.beta_for(3.7), 1.0);
        let half = TauParameter::new(0.5).unwrap();
        assert!((half.beta_for(3.0) - 1.5).abs() < 1e-15);
        assert!(TauParameter::new(1.5).is_err());
    }

    #[test]
    fn leakage_value_sign() {
        assert_eq!(LeakageValue::from_nats(-1e-15).unwrap().nats(), 0.0);
        assert!(LeakageValue::from_nats(-0.1).is_err());
        assert!(LeakageValue::from_nats(f64::NAN).is_err());
        assert!(LeakageValue::from_nats(f64::INFINITY).unwrap().is_infinite());
        assert!((LeakageValue::from_nats(std::f64::consts::LN_2).unwrap().bits() - 1.0).abs() < 1e-15);
    }
}
