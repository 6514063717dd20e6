use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

/// A Monte Carlo or quadrature value with its one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn new(value: f64, stderr: f64) -> Self {
        Self { value, stderr }
    }

    pub fn exact(value: f64) -> Self {
        Self { value, stderr: 0.0 }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self::new(self.value * factor, self.stderr * factor.abs())
    }

    /// z-score of the difference to `other`, treating both as independent.
    pub fn z_against(&self, other: &Estimate) -> f64 {
        z_score(self.value - other.value, self.stderr.hypot(other.stderr))
    }

    pub fn z_against_value(&self, expected: f64) -> f64 {
        z_score(self.value - expected, self.stderr)
    }
}

/// `diff / sigma`, with `0/0 = 0` so that exact agreements score zero.
pub fn z_score(diff: f64, sigma: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else if sigma == 0.0 {
        f64::INFINITY.copysign(diff)
    } else {
        diff / sigma
    }
}

/// Streaming mean and variance with Chan's pairwise merge.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &RunningStats) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let (na, nb) = (self.n as f64, other.n as f64);
        self.mean += delta * nb / n as f64;
        self.m2 += other.m2 + delta * delta * na * nb / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }

    pub fn estimate(&self) -> Estimate {
        Estimate::new(self.mean, self.stderr())
    }
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Two-sided tail probability of a standard normal deviate.
pub fn two_sided_p(z: f64) -> f64 {
    if !z.is_finite() {
        return 0.0;
    }
    2.0 * std_normal().sf(z.abs())
}

/// Deviate whose two-sided tail probability is `p`.
pub fn z_for_two_sided_p(p: f64) -> f64 {
    if p >= 1.0 {
        return 0.0;
    }
    if p <= 0.0 {
        return f64::INFINITY;
    }
    -std_normal().inverse_cdf(p / 2.0)
}

/// Per-test threshold keeping the family-wise error of `m` tests at the
/// two-sided 3-sigma level.
pub fn bonferroni_z(m: usize) -> f64 {
    let alpha = two_sided_p(3.0);
    z_for_two_sided_p(alpha / m.max(1) as f64)
}

/// Collapses `m` per-bin z-scores into one family-level deviate: the smallest
/// p-value is Bonferroni-inflated by `m` and mapped back to a z-score.
pub fn family_z(max_abs_z: f64, m: usize) -> f64 {
    let p = (two_sided_p(max_abs_z) * m.max(1) as f64).min(1.0);
    z_for_two_sided_p(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn running_stats_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000)
            .map(|k| ((k * 37) % 101) as f64 * 0.5 - 7.0)
            .collect();
        let mut all = RunningStats::new();
        xs.iter().for_each(|&x| all.push(x));
        let mut a = RunningStats::new();
        let mut b = RunningStats::new();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert_eq!(a.count(), all.count());
        assert_relative_eq!(a.mean(), all.mean(), max_relative = 1e-12);
        assert_relative_eq!(a.variance(), all.variance(), max_relative = 1e-12);
    }

    #[test]
    fn bonferroni_reduces_to_three_sigma() {
        assert_relative_eq!(bonferroni_z(1), 3.0, epsilon = 1e-9);
        assert!(bonferroni_z(100) > 4.0);
        assert_relative_eq!(family_z(3.0, 1), 3.0, epsilon = 1e-9);
    }

    #[test]
    fn z_of_exact_agreement_is_zero() {
        assert_eq!(z_score(0.0, 0.0), 0.0);
        assert!(z_score(1.0, 0.0).is_infinite());
    }
}
