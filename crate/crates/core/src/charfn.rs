//! Characteristic functions of symmetric sums, the cosine and product
//! inequalities as grid checkers, and the Haagerup integral
//!
//! ```text
//! E|X|^p = C_p ∫_0^∞ (φ_X(t) − 1 + t² E X² / 2) t^{−p−1} dt,   2 < p < 4,
//! C_p = −(2/π) sin(pπ/2) Γ(p + 1),
//! ```
//!
//! as a numerical engine for fractional absolute moments.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::bounds::Assumption;
use crate::distmodel::{charfn_of, moments_of, VariableSpec};
use crate::error::{Error, Result};
use crate::quadrature::{geometric_breakpoints, integrate};
use crate::special::{factorial, gamma};

/// Number of Taylor terms (in powers of `t²`) used near the origin.
const SERIES_TERMS: usize = 24;

/// Default evaluation budget for [`haagerup_moment`].
pub const DEFAULT_MAX_EVALUATIONS: usize = 4_000_000;

/// `φ_S` for `S` a sum of independent symmetric closed-form variables.
#[derive(Debug, Clone, PartialEq)]
pub struct CharFunction {
    components: Vec<VariableSpec>,
    variance: f64,
}

impl CharFunction {
    pub fn new(spec: &VariableSpec) -> Result<Self> {
        Self::product(core::slice::from_ref(spec))
    }

    /// `φ_{X_1 + … + X_n} = Π φ_{X_k}`.
    pub fn product(specs: &[VariableSpec]) -> Result<Self> {
        let mut variance = 0.0;
        for s in specs {
            if matches!(s, VariableSpec::RawMoments { .. }) {
                return Err(Error::NoCharFunction);
            }
            variance += s.variance()?;
        }
        Ok(Self {
            components: specs.to_vec(),
            variance,
        })
    }

    /// Characteristic function of the sum of both underlying families.
    pub fn compose(&self, other: &CharFunction) -> CharFunction {
        let mut components = self.components.clone();
        components.extend(other.components.iter().cloned());
        CharFunction {
            components,
            variance: self.variance + other.variance,
        }
    }

    pub fn components(&self) -> &[VariableSpec] {
        &self.components
    }

    /// `E S²`.
    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.components
            .iter()
            .map(|s| charfn_of(s, t).expect("components validated at construction"))
            .product()
    }

    /// Taylor coefficients `a_l` of `φ_S(t) = Σ a_l t^{2l}`, `l = 0..=terms`,
    /// from the per-component series `a_l = (−1)^l μ_{2l} / (2l)!`.
    pub fn series_coefficients(&self, terms: usize) -> Result<Vec<f64>> {
        let mut acc = vec![0.0; terms + 1];
        acc[0] = 1.0;
        for s in &self.components {
            let prof = moments_of(s, 2 * terms.max(1))?;
            let coef: Vec<f64> = (0..=terms)
                .map(|l| {
                    let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                    sign * prof.moments()[2 * l] / factorial(2 * l as u32)
                })
                .collect();
            let mut next = vec![0.0; terms + 1];
            for (i, a) in acc.iter().enumerate() {
                for (j, c) in coef.iter().enumerate().take(terms + 1 - i) {
                    next[i + j] += a * c;
                }
            }
            acc = next;
        }
        Ok(acc)
    }
}

/// Value of a numerically evaluated integral with its error budget.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IntegralResult {
    pub value: f64,
    /// Adaptive-rule estimate plus the near-origin series truncation.
    pub quad_error: f64,
    /// Analytic bound on the neglected `[T, ∞)` part.
    pub tail_error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl IntegralResult {
    pub fn total_error(&self) -> f64 {
        self.quad_error + self.tail_error
    }
}

/// `C_p = −(2/π) sin(pπ/2) Γ(p+1)`, positive on `(2, 4)`.
pub fn haagerup_constant(p: f64) -> Result<f64> {
    if !(p > 2.0 && p < 4.0) {
        return Err(Error::OutOfRange(format!(
            "Haagerup constant needs 2 < p < 4, got {p}"
        )));
    }
    Ok(-(2.0 / PI) * libm::sin(p * PI / 2.0) * gamma(p + 1.0))
}

/// `E|S|^p` for `2 < p < 4` via the Haagerup integral of `phi`.
///
/// `[0, δ]` is integrated term by term from the Taylor series of
/// `φ(t) − 1 + t²σ²/2`, `[δ, T]` by adaptive Gauss–Kronrod on the
/// compensated integrand, and `[T, ∞)` in closed form except for the `φ`
/// piece, which is bounded by `T^{−p}/p` and reported as `tail_error`.
pub fn haagerup_moment(phi: &CharFunction, p: f64, tol: f64) -> Result<IntegralResult> {
    haagerup_moment_with_budget(phi, p, tol, DEFAULT_MAX_EVALUATIONS)
}

pub fn haagerup_moment_with_budget(
    phi: &CharFunction,
    p: f64,
    tol: f64,
    max_evaluations: usize,
) -> Result<IntegralResult> {
    let cp = haagerup_constant(p)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let var = phi.variance();
    if !(var > 0.0) {
        return Err(Error::InvalidParameter(
            "characteristic function has zero variance".into(),
        ));
    }

    // tail cut: C_p T^{-p}/p < tol/2
    let mut t_max = (50.0 / libm::sqrt(var)).max(10.0);
    while cp * libm::pow(t_max, -p) / p >= tol / 2.0 {
        t_max *= 2.0;
    }
    let tail_error = cp * libm::pow(t_max, -p) / p;
    let closed_tail =
        -libm::pow(t_max, -p) / p + var * libm::pow(t_max, 2.0 - p) / (2.0 * (p - 2.0));

    let coef = phi.series_coefficients(SERIES_TERMS)?;
    let (delta, series_value, series_error) = origin_series(&coef, var, p)?;
    if delta >= t_max {
        return Err(Error::Unsupported(
            "series radius exceeds the truncation point".into(),
        ));
    }

    let integrand = |t: f64| {
        let g = phi.eval(t) - 1.0 + 0.5 * t * t * var;
        g * libm::pow(t, -p - 1.0)
    };
    let quad_budget = ((0.45 * tol) / cp - series_error).max(0.05 * tol / cp);
    let q = integrate(
        integrand,
        &geometric_breakpoints(delta, t_max),
        quad_budget,
        0.0,
        max_evaluations,
    );

    Ok(IntegralResult {
        value: cp * (series_value + q.value + closed_tail),
        quad_error: cp * (q.error + series_error),
        tail_error,
        evaluations: q.evaluations,
        converged: q.converged,
    })
}

/// Picks `δ` so the series `Σ_{l≥2} a_l t^{2l}` is well resolved on
/// `[0, δ]` and integrates `Σ a_l t^{2l−p−1}` there. Returns
/// `(δ, value, truncation error)`.
fn origin_series(coef: &[f64], var: f64, p: f64) -> Result<(f64, f64, f64)> {
    let last = coef.len() - 1;
    let mut delta = 0.5 / libm::sqrt(var);
    for _ in 0..200 {
        let d2 = delta * delta;
        let terms: Vec<f64> = (2..=last)
            .map(|l| coef[l].abs() * libm::pow(d2, l as f64))
            .collect();
        let lead = terms[0].max(f64::MIN_POSITIVE);
        let biggest = terms.iter().cloned().fold(0.0, f64::max);
        let tail = terms[terms.len() - 1];
        let prev = terms[terms.len() - 2];
        let decaying = tail == 0.0 || (prev > 0.0 && tail <= 0.5 * prev);
        if biggest <= 1.0 && tail <= 1e-17 * lead && decaying {
            let mut value = 0.0;
            let mut last_term = 0.0;
            for (l, c) in coef.iter().enumerate().take(last + 1).skip(2) {
                let e = 2.0 * l as f64 - p;
                last_term = c * libm::pow(delta, e) / e;
                value += last_term;
            }
            // geometric tail with ratio ≤ 1/2 beyond the last term, plus rounding
            let rounding = 1e-15
                * (2..=last)
                    .map(|l| (coef[l] * libm::pow(delta, 2.0 * l as f64 - p)).abs())
                    .sum::<f64>();
            return Ok((delta, value, 2.0 * last_term.abs() + rounding));
        }
        delta *= 0.5;
    }
    Err(Error::Unsupported(
        "could not resolve the characteristic-function series near 0".into(),
    ))
}

/// `E|Σ X_k|^p` for symmetric closed-form families, `2 < p < 4`.
pub fn sum_abs_moment_via_haagerup(
    specs: &[VariableSpec],
    p: f64,
    tol: f64,
) -> Result<IntegralResult> {
    if let Some(s) = specs.iter().find(|s| !s.is_symmetric()) {
        return Err(Error::Unsupported(format!(
            "{} input is not symmetric",
            s.family_name()
        )));
    }
    haagerup_moment(&CharFunction::product(specs)?, p, tol)
}

/// Default checking grid: `10^4` points on `[0, 50]` plus `10^3`
/// log-spaced points on `[10^{-4}, 1]`.
pub fn default_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (0..10_000).map(|i| 50.0 * i as f64 / 9_999.0).collect();
    grid.extend((0..1_000).map(|i| libm::pow(10.0, -4.0 + 4.0 * i as f64 / 999.0)));
    grid
}

/// Result of [`check_cosine_bounds`].
#[derive(Debug, Clone, PartialEq)]
pub struct CosineBoundsReport {
    pub points: usize,
    /// Grid points where either side failed.
    pub violations: Vec<f64>,
    /// `min(φ(t) − (1 − t²μ₂/2))` over the grid.
    pub min_lower_slack: f64,
    /// `min((1 − t²μ₂/2 + t⁴μ₄/24) − φ(t))` over the grid.
    pub min_upper_slack: f64,
    pub max_lower_slack: f64,
    pub max_upper_slack: f64,
}

/// Checks `1 − t²μ₂/2 ≤ φ(t) ≤ 1 − t²μ₂/2 + t⁴μ₄/24` on `grid`.
pub fn check_cosine_bounds(spec: &VariableSpec, grid: &[f64]) -> Result<CosineBoundsReport> {
    if !spec.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let prof = moments_of(spec, 4)?;
    let (m2, m4) = (prof.moments()[2], prof.moments()[4]);
    let mut report = CosineBoundsReport {
        points: grid.len(),
        violations: Vec::new(),
        min_lower_slack: f64::INFINITY,
        min_upper_slack: f64::INFINITY,
        max_lower_slack: f64::NEG_INFINITY,
        max_upper_slack: f64::NEG_INFINITY,
    };
    for &t in grid {
        let phi = charfn_of(spec, t)?;
        let quad = 0.5 * t * t * m2;
        let quart = (t * t) * (t * t) * m4 / 24.0;
        let lower = 1.0 - quad;
        let upper = lower + quart;
        let lo_slack = phi - lower;
        let up_slack = upper - phi;
        let allowance = 8.0 * f64::EPSILON * (1.0 + quad + quart);
        if lo_slack < -allowance || up_slack < -allowance {
            report.violations.push(t);
        }
        report.min_lower_slack = report.min_lower_slack.min(lo_slack);
        report.min_upper_slack = report.min_upper_slack.min(up_slack);
        report.max_lower_slack = report.max_lower_slack.max(lo_slack);
        report.max_upper_slack = report.max_upper_slack.max(up_slack);
    }
    Ok(report)
}

/// Result of [`check_main_charfn_inequality`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProductInequalityReport {
    pub preconditions: Vec<Assumption>,
    /// False when a precondition failed and the grid was not evaluated.
    pub evaluated: bool,
    pub violations: Vec<f64>,
    pub min_slack: f64,
}

impl ProductInequalityReport {
    pub fn holds(&self) -> bool {
        self.evaluated && self.violations.is_empty()
    }
}

/// Checks `φ_S(t) + (t²/2) Σ_{k≤m} E X_k² ≥ φ_R(t)` with `S = Σ_k X_k` and
/// `R = Σ_{k>m} Y_k` on `grid`, after verifying the hypotheses: equal
/// variances, `1 ≤ m < n`, a maximal variance among the first `m`, and
/// `Σ_{k≤m} E X_k² ≥ (1/6) max_{k>m} E Y_k⁴ / E Y_k²`.
pub fn check_main_charfn_inequality(
    xs: &[VariableSpec],
    ys: &[VariableSpec],
    m: usize,
    grid: &[f64],
) -> Result<ProductInequalityReport> {
    let n = xs.len();
    let mut pre = Vec::new();
    pre.push(Assumption::new(
        "equal_lengths",
        ys.len() == n,
        format!("{} X variables, {} Y variables", n, ys.len()),
    ));
    pre.push(Assumption::new(
        "head_length",
        m >= 1 && m < n,
        format!("m = {m}, n = {n}"),
    ));
    let symmetric = xs
        .iter()
        .chain(ys)
        .all(|s| s.is_symmetric() && !matches!(s, VariableSpec::RawMoments { .. }));
    pre.push(Assumption::new(
        "symmetric_closed_form",
        symmetric,
        "all variables symmetric families".into(),
    ));
    if pre.iter().any(|a| !a.satisfied) {
        return Ok(ProductInequalityReport {
            preconditions: pre,
            evaluated: false,
            violations: Vec::new(),
            min_slack: f64::NAN,
        });
    }
    let vx: Vec<f64> = xs.iter().map(|s| s.variance()).collect::<Result<_>>()?;
    let mut y4_over_y2 = Vec::with_capacity(n);
    let mut equal = true;
    for (k, y) in ys.iter().enumerate() {
        let prof = moments_of(y, 4)?;
        let vy = prof.moments()[2];
        equal &= (vy - vx[k]).abs() <= 1e-12 * vx[k].max(vy);
        y4_over_y2.push(prof.moments()[4] / vy);
    }
    pre.push(Assumption::new(
        "equal_variances",
        equal,
        "E X_k^2 = E Y_k^2 for all k".into(),
    ));
    let vmax = vx.iter().cloned().fold(0.0, f64::max);
    let head_max = vx[..m].iter().cloned().fold(0.0, f64::max);
    pre.push(Assumption::new(
        "max_variance_in_head",
        head_max >= vmax * (1.0 - 1e-12),
        format!("max over head {head_max}, overall {vmax}"),
    ));
    let head_sum: f64 = vx[..m].iter().sum();
    let need = y4_over_y2[m..].iter().cloned().fold(0.0, f64::max) / 6.0;
    pre.push(Assumption::new(
        "head_variance_dominates",
        head_sum >= need * (1.0 - 1e-12),
        format!("sum of head variances {head_sum} vs required {need}"),
    ));
    if pre.iter().any(|a| !a.satisfied) {
        return Ok(ProductInequalityReport {
            preconditions: pre,
            evaluated: false,
            violations: Vec::new(),
            min_slack: f64::NAN,
        });
    }
    let phi_s = CharFunction::product(xs)?;
    let phi_r = CharFunction::product(&ys[m..])?;
    let mut violations = Vec::new();
    let mut min_slack = f64::INFINITY;
    for &t in grid {
        let correction = 0.5 * t * t * head_sum;
        let slack = phi_s.eval(t) + correction - phi_r.eval(t);
        let allowance = 16.0 * f64::EPSILON * (2.0 + correction) * n as f64;
        if slack < -allowance {
            violations.push(t);
        }
        min_slack = min_slack.min(slack);
    }
    Ok(ProductInequalityReport {
        preconditions: pre,
        evaluated: true,
        violations,
        min_slack,
    })
}

/// Result of [`check_moment_comparison`].
#[derive(Debug, Clone, PartialEq)]
pub struct MomentComparison {
    pub p: f64,
    pub full: IntegralResult,
    pub tail: IntegralResult,
    /// `E|S|^p − E|R|^p + budgets ≥ 0`.
    pub holds: bool,
}

/// Checks `E|Σ_k X_k|^p ≥ E|Σ_{k>m} Y_k|^p` for `2 < p < 4` with both sides
/// from the Haagerup engine. Preconditions are those of
/// [`check_main_charfn_inequality`] and must hold.
pub fn check_moment_comparison(
    xs: &[VariableSpec],
    ys: &[VariableSpec],
    m: usize,
    p: f64,
    tol: f64,
) -> Result<MomentComparison> {
    let pre = check_main_charfn_inequality(xs, ys, m, &[])?;
    if let Some(bad) = pre.preconditions.iter().find(|a| !a.satisfied) {
        return Err(Error::InvalidParameter(format!(
            "precondition {} fails: {}",
            bad.name, bad.detail
        )));
    }
    let full = sum_abs_moment_via_haagerup(xs, p, tol)?;
    let tail = sum_abs_moment_via_haagerup(&ys[m..], p, tol)?;
    let holds = full.value - tail.value + full.total_error() + tail.total_error() >= 0.0;
    Ok(MomentComparison {
        p,
        full,
        tail,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_abs3() -> f64 {
        2.0 * libm::sqrt(2.0 / PI)
    }

    #[test]
    fn haagerup_constant_values() {
        assert!((haagerup_constant(3.0).unwrap() - 12.0 / PI).abs() < 1e-12);
        assert!(haagerup_constant(2.01).unwrap() < 0.1);
        assert!(haagerup_constant(2.01).unwrap() > 0.0);
        let c25 = (2.0 / PI) * (libm::sqrt(2.0) / 2.0) * gamma(3.5);
        assert!((haagerup_constant(2.5).unwrap() - c25).abs() < 1e-12);
        assert!((haagerup_constant(2.5).unwrap() - 1.49603).abs() < 1e-4);
        assert!(haagerup_constant(2.0).is_err());
        assert!(haagerup_constant(4.0).is_err());
    }

    #[test]
    fn gaussian_third_moment() {
        let phi = CharFunction::new(&VariableSpec::gaussian(1.0).unwrap()).unwrap();
        let r = haagerup_moment(&phi, 3.0, 1e-9).unwrap();
        assert!(r.converged);
        assert!(r.total_error() <= 1e-9);
        assert!((r.value - gaussian_abs3()).abs() < 1e-8, "{r:?}");
    }

    #[test]
    fn laplace_third_moment() {
        let phi = CharFunction::new(&VariableSpec::symmetric_exponential(1.0).unwrap()).unwrap();
        let r = haagerup_moment(&phi, 3.0, 1e-9).unwrap();
        assert!((r.value - 3.0 / libm::sqrt(2.0)).abs() < 1e-8, "{r:?}");
    }

    #[test]
    fn rademacher_pair_third_moment() {
        let rad = VariableSpec::rademacher(1.0).unwrap();
        let r = sum_abs_moment_via_haagerup(&[rad.clone(), rad], 3.0, 1e-8).unwrap();
        assert!((r.value - 4.0).abs() < 1e-7, "{r:?}");
    }

    #[test]
    fn near_two_matches_variance() {
        let spec = VariableSpec::symmetric_exponential(1.3).unwrap();
        let r = sum_abs_moment_via_haagerup(core::slice::from_ref(&spec), 2.001, 1e-9).unwrap();
        let v = spec.variance().unwrap();
        assert!((r.value - v).abs() < 1e-2 * v, "{} vs {v}", r.value);
    }

    #[test]
    fn composed_variance_is_additive() {
        let a = CharFunction::new(&VariableSpec::uniform(1.0).unwrap()).unwrap();
        let b = CharFunction::new(&VariableSpec::symmetric_three_point(2.0, 0.1).unwrap()).unwrap();
        let c = a.compose(&b);
        assert_eq!(c.variance(), a.variance() + b.variance());
        assert!((c.eval(0.7) - a.eval(0.7) * b.eval(0.7)).abs() < 1e-15);
        assert_eq!(c.eval(0.0), 1.0);
    }

    #[test]
    fn series_matches_evaluation_near_zero() {
        let phi = CharFunction::product(&[
            VariableSpec::symmetric_exponential(1.0).unwrap(),
            VariableSpec::gaussian(0.5).unwrap(),
            VariableSpec::uniform(2.0).unwrap(),
        ])
        .unwrap();
        let c = phi.series_coefficients(SERIES_TERMS).unwrap();
        let t: f64 = 0.2;
        let s: f64 = c
            .iter()
            .enumerate()
            .map(|(l, a)| a * libm::pow(t, 2.0 * l as f64))
            .sum();
        assert!((s - phi.eval(t)).abs() < 1e-14);
        assert!((c[1] + phi.variance() / 2.0).abs() < 1e-14);
    }

    #[test]
    fn raw_moments_have_no_charfn() {
        let raw =
            VariableSpec::raw(crate::MomentProfile::new(vec![1.0, 0.0, 1.0], true, true).unwrap());
        assert_eq!(CharFunction::new(&raw), Err(Error::NoCharFunction));
    }

    #[test]
    fn cosine_bounds_examples() {
        let g = check_cosine_bounds(&VariableSpec::gaussian(1.0).unwrap(), &[0.0]).unwrap();
        assert_eq!(g.min_lower_slack, 0.0);
        assert_eq!(g.min_upper_slack, 0.0);
        let grid: Vec<f64> = (0..=1000).map(|i| i as f64 * 0.01).collect();
        for spec in [
            VariableSpec::rademacher(1.0).unwrap(),
            VariableSpec::symmetric_exponential(1.0).unwrap(),
        ] {
            let r = check_cosine_bounds(&spec, &grid).unwrap();
            assert!(r.violations.is_empty());
        }
    }

    #[test]
    fn main_inequality_examples() {
        let rad = VariableSpec::rademacher(1.0).unwrap();
        let xs = vec![rad.clone(); 3];
        let r = check_main_charfn_inequality(&xs, &xs, 1, &[0.0]).unwrap();
        assert!(r.holds());
        assert_eq!(r.min_slack, 0.0);

        let lap = vec![VariableSpec::symmetric_exponential(1.0).unwrap(); 3];
        let gau = vec![VariableSpec::gaussian(1.0).unwrap(); 3];
        let grid: Vec<f64> = (0..=2000).map(|i| i as f64 * 0.01).collect();
        let r = check_main_charfn_inequality(&lap, &gau, 1, &grid).unwrap();
        assert!(r.holds(), "{r:?}");

        let bad = check_main_charfn_inequality(&lap, &gau, 3, &grid).unwrap();
        assert!(!bad.evaluated);
        assert!(bad
            .preconditions
            .iter()
            .any(|a| a.name == "head_length" && !a.satisfied));
    }
}
