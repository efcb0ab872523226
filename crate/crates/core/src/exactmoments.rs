//! Exact moments: Gaussian `L^p` norms, Rademacher sums and even moments of
//! sums of independent variables from their moment profiles.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::distmodel::MomentProfile;
use crate::error::{Error, Result};
use crate::special::{binomial_rows, double_factorial_odd, ln_gamma, NeumaierSum};

/// Largest accepted ratio between the biggest and smallest variance.
pub const MAX_VARIANCE_RANGE: f64 = 1e8;

/// Enumeration cap for [`rademacher_abs_moment`].
pub const RADEMACHER_ENUMERATION_CAP: usize = 24;

/// Weights `σ_1..σ_n` of a Rademacher sum `Σ σ_k ε_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(sigmas: Vec<f64>) -> Result<Self> {
        if sigmas.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidParameter("weights must be finite".into()));
        }
        Ok(Self(sigmas))
    }

    /// Weights `√v_k` for the given variances.
    pub fn from_variances(variances: &[f64]) -> Result<Self> {
        if variances.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::InvalidParameter(
                "variances must be nonnegative".into(),
            ));
        }
        Self::new(variances.iter().map(|&v| libm::sqrt(v)).collect())
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn squares(&self) -> Vec<f64> {
        self.0.iter().map(|s| s * s).collect()
    }

    pub fn is_sorted_by_magnitude(&self) -> bool {
        self.0.windows(2).all(|w| w[0].abs() >= w[1].abs())
    }

    /// Scaled copy `c·σ`.
    pub fn scaled(&self, c: f64) -> Self {
        Self(self.0.iter().map(|s| s * c).collect())
    }
}

/// Rejects variance vectors whose positive entries span more than
/// [`MAX_VARIANCE_RANGE`]. Zero variances are allowed.
pub fn check_dynamic_range(variances: &[f64]) -> Result<()> {
    let positive = variances.iter().copied().filter(|&v| v > 0.0);
    let (lo, hi) = positive.fold((f64::INFINITY, 0.0_f64), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if hi > 0.0 && hi / lo > MAX_VARIANCE_RANGE {
        return Err(Error::DynamicRange(hi / lo));
    }
    Ok(())
}

/// `γ_p = (E|G|^p)^{1/p}` for a standard Gaussian `G`.
pub fn gaussian_lp_norm(p: f64) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "p must be positive, got {p}"
        )));
    }
    let half = p / 2.0;
    if half == libm::trunc(half) && half <= 150.0 {
        return Ok(libm::pow(double_factorial_odd(half as u32), 1.0 / p));
    }
    let ln_abs = half * core::f64::consts::LN_2 + ln_gamma((p + 1.0) / 2.0)
        - 0.5 * libm::log(core::f64::consts::PI);
    Ok(libm::exp(ln_abs / p))
}

/// `E|G|^p` for a standard Gaussian.
pub fn gaussian_abs_moment(p: f64) -> Result<f64> {
    Ok(libm::pow(gaussian_lp_norm(p)?, p))
}

/// `E(Σ σ_k ε_k)^{2j}` for `j = 0..=r`, by the even-moment convolution.
pub fn rademacher_even_moments(w: &WeightVector, r: usize) -> Result<Vec<f64>> {
    let squares = w.squares();
    check_dynamic_range(&squares)?;
    let binom = binomial_rows(2 * r);
    let mut m = vec![0.0; r + 1];
    m[0] = 1.0;
    let mut next = vec![0.0; r + 1];
    for &s2 in &squares {
        // powers σ^{2i}
        let mut pw = vec![1.0; r + 1];
        for i in 1..=r {
            pw[i] = pw[i - 1] * s2;
        }
        for j in 0..=r {
            let mut acc = 0.0;
            for i in 0..=j {
                acc += binom[2 * j][2 * i] * m[j - i] * pw[i];
            }
            next[j] = acc;
        }
        core::mem::swap(&mut m, &mut next);
    }
    Ok(m)
}

/// `E(Σ σ_k ε_k)^{2r}`.
pub fn rademacher_even_moment(w: &WeightVector, r: usize) -> Result<f64> {
    Ok(rademacher_even_moments(w, r)?[r])
}

/// `E|Σ σ_k ε_k|^p` by exhaustive enumeration of the `2^{n-1}` sign vectors
/// with `ε_1 = +1`.
pub fn rademacher_abs_moment(w: &WeightVector, p: f64) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "p must be positive, got {p}"
        )));
    }
    let n = w.len();
    if n > RADEMACHER_ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            n,
            cap: RADEMACHER_ENUMERATION_CAP,
        });
    }
    if n == 0 {
        return Ok(0.0);
    }
    let sigmas = w.sigmas();
    let first = sigmas[0];
    let rest = &sigmas[1..];
    // meet in the middle: all signed sums of the low and high halves
    let split = rest.len() / 2;
    let low = signed_sums(&rest[..split]);
    let high = signed_sums(&rest[split..]);
    let mut total = NeumaierSum::default();
    for &h in &high {
        let mut block = NeumaierSum::default();
        for &l in &low {
            block.add(libm::pow((first + h + l).abs(), p));
        }
        total.add(block.value());
    }
    Ok(total.value() / (low.len() * high.len()) as f64)
}

fn signed_sums(sigmas: &[f64]) -> Vec<f64> {
    let mut sums = vec![0.0];
    for &s in sigmas {
        let mut next = Vec::with_capacity(sums.len() * 2);
        for &x in &sums {
            next.push(x + s);
            next.push(x - s);
        }
        sums = next;
    }
    sums
}

/// Moments `E(Σ X_k)^t`, `t = 0..=max_order`, by binomial convolution.
pub fn sum_moments(profiles: &[MomentProfile], max_order: usize) -> Result<Vec<f64>> {
    let mut variances = Vec::with_capacity(profiles.len());
    for p in profiles {
        if !p.is_centered() {
            return Err(Error::NotCentered);
        }
        if p.max_order() < max_order {
            return Err(Error::InsufficientOrder {
                requested: max_order,
                available: p.max_order(),
            });
        }
        variances.push(p.variance());
    }
    check_dynamic_range(&variances)?;
    let binom = binomial_rows(max_order);
    let mut m = vec![0.0; max_order + 1];
    m[0] = 1.0;
    let mut next = vec![0.0; max_order + 1];
    for p in profiles {
        let mu = p.moments();
        let symmetric = p.is_symmetric();
        for t in 0..=max_order {
            let mut acc = 0.0;
            for i in 0..=t {
                if i == 1 || (symmetric && i % 2 == 1) {
                    continue;
                }
                acc += binom[t][i] * m[t - i] * mu[i];
            }
            next[t] = acc;
        }
        core::mem::swap(&mut m, &mut next);
    }
    Ok(m)
}

/// `E(Σ X_k)^{2r}` for centered profiles.
pub fn sum_even_moment(profiles: &[MomentProfile], r: usize) -> Result<f64> {
    Ok(sum_moments(profiles, 2 * r)?[2 * r])
}

/// `E(Σ_{k ≥ start} X_k)^{2r}` with a 1-based `start`.
pub fn tail_sum_even_moment(profiles: &[MomentProfile], start: usize, r: usize) -> Result<f64> {
    if start == 0 || start > profiles.len() {
        return Err(Error::OutOfRange(format!(
            "start index {start} must lie in 1..={}",
            profiles.len()
        )));
    }
    sum_even_moment(&profiles[start - 1..], r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distmodel::{moments_of, VariableSpec};

    fn w(s: &[f64]) -> WeightVector {
        WeightVector::new(s.to_vec()).unwrap()
    }

    #[test]
    fn gaussian_norms() {
        assert!((gaussian_lp_norm(2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((gaussian_lp_norm(4.0).unwrap() - libm::pow(3.0, 0.25)).abs() < 1e-15);
        let g3 = libm::pow(2.0 * libm::sqrt(2.0 / core::f64::consts::PI), 1.0 / 3.0);
        assert!((gaussian_lp_norm(3.0).unwrap() - g3).abs() < 1e-14);
        assert!((gaussian_lp_norm(3.0).unwrap() - 1.168_58).abs() < 1e-5);
        // general and even-integer routes agree
        let near = gaussian_lp_norm(6.0 + 1e-12).unwrap();
        assert!((near - gaussian_lp_norm(6.0).unwrap()).abs() < 1e-10);
        assert!(gaussian_lp_norm(0.0).is_err());
        assert!(gaussian_lp_norm(-1.0).is_err());
    }

    #[test]
    fn rademacher_even_examples() {
        assert_eq!(rademacher_even_moment(&w(&[1.0, 1.0]), 2).unwrap(), 8.0);
        assert_eq!(
            rademacher_even_moment(&w(&[1.0, 1.0, 1.0]), 2).unwrap(),
            21.0
        );
        assert_eq!(rademacher_even_moment(&w(&[0.3, 2.0]), 0).unwrap(), 1.0);
    }

    #[test]
    fn rademacher_abs_examples() {
        assert_eq!(rademacher_abs_moment(&w(&[1.0]), 3.7).unwrap(), 1.0);
        assert_eq!(rademacher_abs_moment(&w(&[1.0, 1.0]), 3.0).unwrap(), 4.0);
        assert_eq!(
            rademacher_abs_moment(&w(&[1.0, 1.0, 1.0]), 4.0).unwrap(),
            21.0
        );
        let too_many = WeightVector::new(vec![1.0; 25]).unwrap();
        assert!(matches!(
            rademacher_abs_moment(&too_many, 3.0),
            Err(Error::EnumerationCap { n: 25, cap: 24 })
        ));
    }

    #[test]
    fn laplace_fourth_moment_of_sum() {
        let lap = moments_of(&VariableSpec::symmetric_exponential(1.0).unwrap(), 4).unwrap();
        let ten = vec![lap.clone(); 10];
        assert!((sum_even_moment(&ten, 2).unwrap() - 330.0).abs() < 1e-9);
        let five = vec![lap; 5];
        assert!((tail_sum_even_moment(&five, 3, 2).unwrap() - 36.0).abs() < 1e-12);
        assert_eq!(tail_sum_even_moment(&five, 5, 2).unwrap(), 6.0);
        assert_eq!(
            tail_sum_even_moment(&five, 1, 2).unwrap(),
            sum_even_moment(&five, 2).unwrap()
        );
        assert!(tail_sum_even_moment(&five, 0, 2).is_err());
        assert!(tail_sum_even_moment(&five, 6, 2).is_err());
    }

    #[test]
    fn cross_engine_rademacher() {
        let rad = moments_of(&VariableSpec::rademacher(1.0).unwrap(), 4).unwrap();
        assert_eq!(
            sum_even_moment(&[rad.clone(), rad.clone(), rad], 2).unwrap(),
            21.0
        );
    }

    #[test]
    fn single_profile_returns_its_moment() {
        let u = moments_of(&VariableSpec::uniform(1.5).unwrap(), 8).unwrap();
        for r in 1..=4 {
            let got = sum_even_moment(core::slice::from_ref(&u), r).unwrap();
            assert!((got - u.moment(2 * r).unwrap()).abs() <= 1e-15 * got);
        }
    }

    #[test]
    fn errors() {
        let raw = MomentProfile::new(vec![1.0, 0.2, 1.0, 0.0, 3.0], false, false).unwrap();
        assert_eq!(sum_even_moment(&[raw], 2), Err(Error::NotCentered));
        let short = moments_of(&VariableSpec::gaussian(1.0).unwrap(), 2).unwrap();
        assert!(matches!(
            sum_even_moment(&[short], 2),
            Err(Error::InsufficientOrder { .. })
        ));
        let a = moments_of(&VariableSpec::gaussian(1.0).unwrap(), 4).unwrap();
        let b = moments_of(&VariableSpec::gaussian(1e-5).unwrap(), 4).unwrap();
        assert!(matches!(
            sum_even_moment(&[a, b], 2),
            Err(Error::DynamicRange(_))
        ));
    }
}
