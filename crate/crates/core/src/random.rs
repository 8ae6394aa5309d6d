//! Seeded random distributions and channels.

use rand::Rng;
use rand_distr::Exp1;

use crate::channel::{Channel, DEFAULT_ROW_TOLERANCE};
use crate::simplex::SimplexPoint;

/// Symmetric Dirichlet(1) draw, i.e. uniform on the simplex. Every weight is
/// strictly positive.
pub fn dirichlet_point<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> SimplexPoint {
    let weights = dirichlet_weights(rng, dim);
    SimplexPoint::from_trusted(weights)
}

fn dirichlet_weights<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    let mut draws: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(Exp1).max(1e-300)).collect();
    let sum: f64 = draws.iter().sum();
    draws.iter_mut().for_each(|w| *w /= sum);
    draws
}

/// A channel whose rows are independent Dirichlet(1) draws. With
/// `allow_zeros`, each entry is zeroed with probability 0.3 before the row is
/// renormalized (at least one entry per row survives).
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, inputs: usize, outputs: usize, allow_zeros: bool) -> Channel {
    let rows = (0..inputs)
        .map(|_| {
            let mut row = dirichlet_weights(rng, outputs);
            if allow_zeros && outputs > 1 {
                let keep = rng.random_range(0..outputs);
                for (j, w) in row.iter_mut().enumerate() {
                    if j != keep && rng.random_bool(0.3) {
                        *w = 0.0;
                    }
                }
                let sum: f64 = row.iter().sum();
                row.iter_mut().for_each(|w| *w /= sum);
            }
            row
        })
        .collect();
    Channel::new(rows, DEFAULT_ROW_TOLERANCE).expect("normalized rows are stochastic")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn deterministic_for_a_seed() {
        let a = random_channel(&mut ChaCha8Rng::seed_from_u64(3), 3, 4, false);
        let b = random_channel(&mut ChaCha8Rng::seed_from_u64(3), 3, 4, false);
        assert_eq!(a, b);
        assert!(a.as_flat().iter().all(|p| *p > 0.0));
    }

    #[test]
    fn sparse_rows_stay_stochastic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut saw_zero = false;
        for _ in 0..20 {
            let c = random_channel(&mut rng, 3, 4, true);
            saw_zero |= c.as_flat().iter().any(|p| *p == 0.0);
            for row in c.rows() {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
        assert!(saw_zero);
    }
}
