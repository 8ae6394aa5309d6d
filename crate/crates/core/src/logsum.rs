//! Log-domain arithmetic helpers.

/// `log(sum(exp(x)))` with the usual max shift. Returns `-inf` for an empty
/// input or when every term is `-inf`, and `+inf` if any term is `+inf`.
pub(crate) fn log_sum_exp<I>(terms: I) -> f64
where
    I: IntoIterator<Item = f64>,
    I::IntoIter: Clone,
{
    let iter = terms.into_iter();
    let mut max = f64::NEG_INFINITY;
    for x in iter.clone() {
        if x > max {
            max = x;
        }
    }
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = iter.map(|x| (x - max).exp()).sum();
    max + sum.ln()
}

/// `coef * ln_x` under the convention `0^0 = 1`: a zero exponent kills the
/// term even when `ln_x` is infinite.
#[inline]
pub(crate) fn scaled_log(coef: f64, ln_x: f64) -> f64 {
    if coef == 0.0 {
        0.0
    } else {
        coef * ln_x
    }
}
