//! Streaming mean, variance, extrema and sign counts.

/// Welford accumulator with Chan's pairwise merge. The sum of squared
/// deviations carries a Kahan compensation term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatAccumulator {
    count: u64,
    mean: f64,
    m2: f64,
    m2_comp: f64,
    min: f64,
    max: f64,
    negative: u64,
    positive: u64,
}

impl Default for StatAccumulator {
    fn default() -> Self {
        Self {
            count: 0,
            mean: 0.0,
            m2: 0.0,
            m2_comp: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            negative: 0,
            positive: 0,
        }
    }
}

impl StatAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    fn add_m2(&mut self, v: f64) {
        let y = v - self.m2_comp;
        let t = self.m2 + y;
        self.m2_comp = (t - self.m2) - y;
        self.m2 = t;
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.add_m2(delta * (x - self.mean));
        self.min = self.min.min(x);
        self.max = self.max.max(x);
        if x < 0.0 {
            self.negative += 1;
        } else if x > 0.0 {
            self.positive += 1;
        }
    }

    pub fn merge(&mut self, other: &StatAccumulator) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let delta = other.mean - self.mean;
        self.mean += delta * nb / n;
        self.add_m2(other.m2 - other.m2_comp);
        self.add_m2(delta * delta * na * nb / n);
        self.count += other.count;
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
        self.negative += other.negative;
        self.positive += other.positive;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sum of squared deviations from the mean.
    pub fn m2(&self) -> f64 {
        (self.m2 - self.m2_comp).max(0.0)
    }

    /// `M2 / count`.
    pub fn variance_biased(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.m2() / self.count as f64
        }
    }

    /// `M2 / (count − 1)`.
    pub fn variance_unbiased(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2() / (self.count - 1) as f64
        }
    }

    /// `(variance_biased / count)^{1/2}`.
    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance_biased() / self.count as f64).sqrt()
        }
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    /// Fraction of strictly negative samples.
    pub fn fraction_negative(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.negative as f64 / self.count as f64
        }
    }

    /// Fraction of strictly positive samples.
    pub fn fraction_positive(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.positive as f64 / self.count as f64
        }
    }
}
