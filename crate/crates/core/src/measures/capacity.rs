use crate::channel::Channel;
use crate::error::{LeakageError, Result};
use crate::order::LeakageValue;

const MAX_ITERATIONS: usize = 1_000_000;

/// Shannon capacity in nats by Blahut–Arimoto.
///
/// Each sweep brackets the capacity between the mutual information of the
/// current input law and `max_x D(P(.|x) || P_Y)`; iteration stops when the
/// bracket is narrower than `tolerance` and the lower end is returned.
pub fn shannon_capacity(channel: &Channel, tolerance: f64) -> Result<LeakageValue> {
    if !(tolerance > 0.0) {
        return Err(LeakageError::InvalidParameter(format!("tolerance must be positive, got {tolerance}")));
    }
    let n = channel.inputs();
    let mut input = vec![1.0 / n as f64; n];
    let mut divergence = vec![0.0; n];
    for _ in 0..MAX_ITERATIONS {
        let output = output_law(channel, &input);
        for (x, d) in divergence.iter_mut().enumerate() {
            *d = channel
                .row(x)
                .iter()
                .zip(&output)
                .filter(|(p, _)| **p > 0.0)
                .map(|(p, q)| p * (p / q).ln())
                .sum();
        }
        let lower: f64 = input.iter().zip(&divergence).map(|(p, d)| p * d).sum();
        let upper = divergence.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if upper - lower <= tolerance {
            return LeakageValue::from_nats(lower);
        }
        // Multiplicative update p(x) <- p(x) exp(D_x) / Z, shifted by the max.
        let mut norm = 0.0;
        for (p, d) in input.iter_mut().zip(&divergence) {
            *p *= (d - upper).exp();
            norm += *p;
        }
        input.iter_mut().for_each(|p| *p /= norm);
    }
    Err(LeakageError::NumericalFailure(format!(
        "Blahut–Arimoto did not reach tolerance {tolerance} in {MAX_ITERATIONS} sweeps"
    )))
}

fn output_law(channel: &Channel, input: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; channel.outputs()];
    for (x, &px) in input.iter().enumerate() {
        for (o, p) in out.iter_mut().zip(channel.row(x)) {
            *o += px * p;
        }
    }
    out
}
