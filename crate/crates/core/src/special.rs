//! Small numeric helpers shared by the engines.

use alloc::vec;
use alloc::vec::Vec;

/// `Γ(x)` for real `x`.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `n!` as a float; exact for `n ≤ 22`.
pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// `(2r - 1)!!`, the `2r`-th moment of a standard Gaussian.
pub fn double_factorial_odd(r: u32) -> f64 {
    (1..=r).fold(1.0, |acc, k| acc * (2 * k - 1) as f64)
}

/// Pascal triangle rows `0..=n` as floats. Entries are exact integers while
/// they stay below `2^53`.
pub fn binomial_rows(n: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    for t in 0..=n {
        let mut row = vec![1.0; t + 1];
        for i in 1..t {
            row[i] = rows[t - 1][i - 1] + rows[t - 1][i];
        }
        rows.push(row);
    }
    rows
}

/// Exact binomial coefficient, `None` on overflow.
pub fn binomial_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for j in 1..=k as u128 {
        // c * (n - k + j) is divisible by j after the multiplication
        c = c.checked_mul(n as u128 - k as u128 + j)? / j;
    }
    Some(c)
}

/// Relative distance under which a computed real is treated as the integer
/// it rounds to before taking a ceiling.
pub const INTEGER_SNAP: f64 = 1e-10;

/// `⌈x⌉` for nonnegative `x`, snapping values within [`INTEGER_SNAP`]
/// (relative) of an integer onto that integer first.
pub fn snapped_ceil(x: f64) -> u64 {
    let nearest = libm::round(x);
    if (x - nearest).abs() <= INTEGER_SNAP * nearest.abs().max(1.0) {
        return nearest.max(0.0) as u64;
    }
    libm::ceil(x).max(0.0) as u64
}

/// Compensated (Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}
