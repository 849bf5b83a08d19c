//! Small numeric helpers shared by the analytical modules.

/// Kahan compensated accumulator. Partition functions sum up to `2^24`
/// positive terms; plain summation would lose more than the 1e-12 the
/// normalization invariant allows.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

pub(crate) fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = KahanSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Numerically stable `ln(sum(exp(x_i)))`.
pub(crate) fn log_sum_exp(log_terms: &[f64]) -> f64 {
    let max = log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum = kahan_sum(log_terms.iter().map(|&x| (x - max).exp()));
    max + sum.ln()
}
