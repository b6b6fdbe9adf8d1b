//! Monte-Carlo summaries with Hoeffding confidence half-widths.

/// Confidence level used for every reported half-width.
pub const CONFIDENCE: f64 = 0.9;

/// Half-width `t` such that the sample mean of `samples` i.i.d. draws with
/// values in an interval of length `range` is within `t` of the true mean
/// with probability at least `confidence`.
pub fn hoeffding_half_width(range: f64, samples: usize, confidence: f64) -> f64 {
    assert!(samples > 0, "half-width needs at least one sample");
    let delta = 1.0 - confidence;
    range * ((2.0 / delta).ln() / (2.0 * samples as f64)).sqrt()
}

/// A Monte-Carlo estimate of an expected infection count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub half_width: f64,
    /// Accepted samples.
    pub rounds: usize,
    /// Successful samples for terminal-based estimators, total count otherwise.
    pub successes: u64,
    /// Contagion networks rejected by the conditioning filter.
    pub resamples: u64,
}

impl Estimate {
    /// Terminal-sampling estimator: `successes * n / rounds`.
    pub fn from_successes(successes: u64, rounds: usize, n: usize, resamples: u64) -> Self {
        Estimate {
            mean: successes as f64 * n as f64 / rounds as f64,
            half_width: hoeffding_half_width(n as f64, rounds, CONFIDENCE),
            rounds,
            successes,
            resamples,
        }
    }

    /// Plain sample mean of counts bounded by `range`.
    pub fn from_total(total: u64, rounds: usize, range: usize) -> Self {
        Estimate {
            mean: total as f64 / rounds as f64,
            half_width: hoeffding_half_width(range as f64, rounds, CONFIDENCE),
            rounds,
            successes: total,
            resamples: 0,
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        (self.mean - value).abs() <= self.half_width
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_width_for_fifteen_thousand_runs_on_fifty_nodes() {
        // 50 * sqrt(ln 20 / 30000)
        let hw = hoeffding_half_width(50.0, 15_000, CONFIDENCE);
        assert!((hw - 0.49966).abs() < 1e-4, "{hw}");
    }

    #[test]
    fn successes_estimator_scales_by_n() {
        let e = Estimate::from_successes(25, 100, 8, 0);
        assert_eq!(e.mean, 2.0);
        assert!(e.contains(2.0 + 0.99 * e.half_width));
        assert!(!e.contains(2.0 - 1.01 * e.half_width));
    }
}
