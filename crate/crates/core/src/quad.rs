//! Quadrature rules over uniformly sampled data.

use crate::error::{Error, Result};

/// Composite Simpson integration of uniformly spaced samples.
///
/// Needs at least 3 samples. An odd number of intervals is closed with
/// the 3/8 rule on the last three, keeping the O(h^4) order.
pub(crate) fn simpson_uniform(samples: &[f64], spacing: f64) -> Result<f64> {
    let n = samples.len();
    if n < 3 {
        return Err(Error::invalid("Simpson quadrature needs at least 3 samples"));
    }
    let intervals = n - 1;
    let (simpson_end, mut total) = if intervals % 2 == 0 {
        (intervals, 0.0)
    } else {
        // 3/8 rule on the final three intervals
        let k = n - 4;
        let tail = 3.0 * spacing / 8.0
            * (samples[k] + 3.0 * samples[k + 1] + 3.0 * samples[k + 2] + samples[k + 3]);
        (intervals - 3, tail)
    };
    if simpson_end > 0 {
        let mut s = samples[0] + samples[simpson_end];
        let mut i = 1;
        while i < simpson_end {
            s += 4.0 * samples[i];
            if i + 1 < simpson_end {
                s += 2.0 * samples[i + 1];
            }
            i += 2;
        }
        total += s * spacing / 3.0;
    }
    Ok(total)
}

/// Trapezoid weights for `n` uniformly spaced nodes.
pub(crate) fn trapezoid_weights(n: usize, spacing: f64) -> Vec<f64> {
    let mut w = vec![spacing; n];
    if n >= 1 {
        w[0] *= 0.5;
    }
    if n >= 2 {
        w[n - 1] *= 0.5;
    }
    w
}
