//! Small statistical helpers shared by the Monte Carlo routines.

/// A point estimate with a two-sided confidence interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

/// z-score of a two-sided 95% interval.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson(successes: usize, trials: usize, z: f64) -> Estimate {
    assert!(trials > 0, "Wilson interval needs at least one trial");
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Estimate {
        value: p,
        lower: (centre - half).max(0.0),
        upper: (centre + half).min(1.0),
    }
}

/// Sample mean with a normal-approximation interval of `z` standard errors.
pub fn mean_interval(samples: &[f64], z: f64) -> Estimate {
    assert!(!samples.is_empty(), "need at least one sample");
    let k = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / k;
    let var = if samples.len() > 1 {
        samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    let half = z * (var / k).sqrt();
    Estimate {
        value: mean,
        lower: mean - half,
        upper: mean + half,
    }
}

/// Standard deviation of a binomial proportion.
pub fn binomial_sd(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}
