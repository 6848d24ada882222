//! Compensated (Kahan–Babuška / Neumaier) summation.

/// Running sum carrying the rounding error of every addition in `comp`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub const fn new() -> Self {
        NeumaierSum {
            sum: 0.0,
            comp: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.comp += (self.sum - t) + value;
        } else {
            self.comp += (value - t) + self.sum;
        }
        self.sum = t;
    }

    /// Leading part of the unevaluated pair `sum + comp`.
    pub fn hi(&self) -> f64 {
        self.sum
    }

    pub fn lo(&self) -> f64 {
        self.comp
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl core::iter::FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Difference of two compensated partial sums, `(hi_b + lo_b) - (hi_a + lo_a)`.
#[inline]
pub fn pair_difference(hi_b: f64, lo_b: f64, hi_a: f64, lo_a: f64) -> f64 {
    (hi_b - hi_a) + (lo_b - lo_a)
}
