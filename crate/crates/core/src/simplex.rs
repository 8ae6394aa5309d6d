use crate::error::{LeakageError, Result};

/// Sum-to-one tolerance every stored distribution satisfies.
pub const SIMPLEX_TOLERANCE: f64 = 1e-12;

/// A probability distribution over a finite alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint {
    weights: Vec<f64>,
}

impl SimplexPoint {
    /// Builds a point from weights that already lie on the simplex. Weights
    /// whose sum deviates from one by less than `tolerance` are renormalized;
    /// anything further off is rejected.
    pub fn new(weights: Vec<f64>, tolerance: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(LeakageError::ShapeError("empty distribution".into()));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(LeakageError::InvalidEntry { row: 0, col: i, value: w });
            }
        }
        let sum: f64 = weights.iter().sum();
        let deviation = (sum - 1.0).abs();
        if deviation <= SIMPLEX_TOLERANCE {
            return Ok(Self { weights });
        }
        if deviation < tolerance {
            return Ok(Self { weights: weights.iter().map(|w| w / sum).collect() });
        }
        Err(LeakageError::NotStochastic { row: 0, sum, tolerance })
    }

    /// Normalizes arbitrary nonnegative weights.
    pub fn from_unnormalized(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(LeakageError::ShapeError("empty distribution".into()));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(LeakageError::InvalidEntry { row: 0, col: i, value: w });
            }
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(LeakageError::DegenerateInput("all weights are zero".into()));
        }
        Ok(Self { weights: weights.iter().map(|w| w / sum).collect() })
    }

    pub fn uniform(dim: usize) -> Self {
        assert!(dim > 0, "uniform distribution needs a nonempty alphabet");
        Self { weights: vec![1.0 / dim as f64; dim] }
    }

    pub fn point_mass(dim: usize, index: usize) -> Self {
        assert!(index < dim, "point mass index {index} out of range for dimension {dim}");
        let mut weights = vec![0.0; dim];
        weights[index] = 1.0;
        Self { weights }
    }

    /// Wraps weights produced by code that maintains the simplex itself.
    pub(crate) fn from_trusted(weights: Vec<f64>) -> Self {
        debug_assert!(weights.iter().all(|w| *w >= 0.0));
        debug_assert!((weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        Self { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }
}
