//! The bound engine: head length `m`, growth constants `C`, cutoff indices,
//! and [`BoundReport`]s for every Gaussian-approximation statement.
//!
//! Indices in reports (cutoff positions) are 1-based positions in the
//! variance-sorted sequence, matching the way the statements are written.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::charfn::{haagerup_moment, CharFunction};
use crate::combinatorics::elementary_symmetric;
use crate::distmodel::{moments_of, MomentProfile, VariableSpec};
use crate::error::{Error, Result};
use crate::exactmoments::{
    check_dynamic_range, gaussian_abs_moment, gaussian_lp_norm, rademacher_abs_moment,
    rademacher_even_moment, rademacher_even_moments, sum_even_moment, WeightVector,
    RADEMACHER_ENUMERATION_CAP,
};
use crate::special::{factorial, snapped_ceil};

/// Which result a report instantiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Statement {
    /// `2 ≤ p ≤ 4`, symmetric: band from the characteristic-function
    /// comparison, with the two-sided radius `√(3m)‖X_1‖_2`.
    ModerateMomentBand,
    /// Even `p = 2r`, symmetric: band with radius `2⌈C²(r−1)⌉‖X_1‖_2`.
    EvenSymmetricBand,
    /// Even `p = 2r`, centered: upper bound `+ 2⌈C² r(r−1)/2⌉‖X_1‖_2`.
    EvenCenteredUpper,
    /// Any `2 ≤ p ≤ 2r`: the truncated sum is dominated by a multiple of
    /// the Rademacher moment.
    TruncatedRademacherDomination,
    /// Log-concave tails: `|‖S‖_p − γ_p σ| ≤ p max_k ‖X_k‖_2`.
    LogConcaveRadius,
    /// Log-concave tails: head/tail sandwich.
    LogConcaveSandwich,
}

impl Statement {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ModerateMomentBand => "moderate_moment_band",
            Self::EvenSymmetricBand => "even_symmetric_band",
            Self::EvenCenteredUpper => "even_centered_upper",
            Self::TruncatedRademacherDomination => "truncated_rademacher_domination",
            Self::LogConcaveRadius => "log_concave_radius",
            Self::LogConcaveSandwich => "log_concave_sandwich",
        }
    }
}

/// What `lower`/`upper` bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Quantity {
    /// `‖Σ_k X_k‖_p`.
    Norm,
    /// `E|Σ_{k ≥ first_index} X_k|^p` over the variance-sorted sequence.
    TruncatedAbsMoment { first_index: usize },
}

/// How a number was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(
    feature = "serde",
    serde(tag = "provenance", rename_all = "snake_case")
)]
pub enum Provenance {
    Exact,
    Quadrature { error: f64 },
    MonteCarlo { half_width: f64 },
}

impl Provenance {
    /// Absolute error budget attached to the value.
    pub fn error(&self) -> f64 {
        match *self {
            Self::Exact => 0.0,
            Self::Quadrature { error } => error,
            Self::MonteCarlo { half_width } => half_width,
        }
    }

    pub fn tag(&self) -> String {
        match *self {
            Self::Exact => "exact".to_string(),
            Self::Quadrature { error } => format!("quadrature±{error:e}"),
            Self::MonteCarlo { half_width } => format!("mc±{half_width:e}"),
        }
    }
}

/// An estimate of `E|S|^p` with its absolute error budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub provenance: Provenance,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            provenance: Provenance::Exact,
        }
    }

    /// `(lo, point, hi)` for `‖S‖_p = (E|S|^p)^{1/p}`; the endpoints map the
    /// moment interval through the monotone `1/p` power.
    pub fn norm_interval(&self, p: f64) -> (f64, f64, f64) {
        let e = self.provenance.error();
        let root = |x: f64| libm::pow(x.max(0.0), 1.0 / p);
        (root(self.value - e), root(self.value), root(self.value + e))
    }

    /// Converts to an estimate of the norm, with a symmetric error budget.
    pub fn to_norm(&self, p: f64) -> Estimate {
        let (lo, mid, hi) = self.norm_interval(p);
        let err = (mid - lo).max(hi - mid);
        let provenance = match self.provenance {
            Provenance::Exact => Provenance::Exact,
            Provenance::Quadrature { .. } => Provenance::Quadrature { error: err },
            Provenance::MonteCarlo { .. } => Provenance::MonteCarlo { half_width: err },
        };
        Estimate {
            value: mid,
            provenance,
        }
    }
}

/// Source of `E|Σ X_k|^p` for quantities the bounds need numerically.
pub trait AbsMomentEngine {
    fn abs_moment(&self, specs: &[VariableSpec], p: f64) -> Result<Estimate>;
}

/// Exact even moments and Haagerup quadrature for `2 < p < 4`.
///
/// `rel_tol` is relative to the Gaussian moment `E|G|^p (Σ v_k)^{p/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticEngine {
    pub rel_tol: f64,
}

impl Default for AnalyticEngine {
    fn default() -> Self {
        Self { rel_tol: 1e-9 }
    }
}

impl AbsMomentEngine for AnalyticEngine {
    fn abs_moment(&self, specs: &[VariableSpec], p: f64) -> Result<Estimate> {
        if specs.is_empty() {
            return Ok(Estimate::exact(0.0));
        }
        if is_even_integer(p) {
            let order = p as usize;
            let profiles: Vec<MomentProfile> = specs
                .iter()
                .map(|s| moments_of(s, order.max(2)))
                .collect::<Result<_>>()?;
            return Ok(Estimate::exact(sum_even_moment(&profiles, order / 2)?));
        }
        if p > 2.0 && p < 4.0 {
            let phi = CharFunction::product(specs)?;
            if specs.iter().any(|s| !s.is_symmetric()) {
                return Err(Error::NotSymmetric);
            }
            let scale = gaussian_abs_moment(p)? * libm::pow(phi.variance(), p / 2.0);
            let r = haagerup_moment(&phi, p, self.rel_tol * scale)?;
            return Ok(Estimate {
                value: r.value,
                provenance: Provenance::Quadrature {
                    error: r.total_error(),
                },
            });
        }
        Err(Error::Unsupported(format!(
            "no analytic engine for p = {p}"
        )))
    }
}

/// Whether `p` is a nonnegative even integer.
pub fn is_even_integer(p: f64) -> bool {
    p >= 0.0 && p == libm::trunc(p) && (p as u64).is_multiple_of(2)
}

/// One hypothesis of a statement and whether the input satisfies it.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Assumption {
    pub name: String,
    pub satisfied: bool,
    pub detail: String,
}

impl Assumption {
    pub fn new(name: &str, satisfied: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            satisfied,
            detail,
        }
    }
}

/// Constants a statement was instantiated with.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Constants {
    /// Head length `m`.
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub m: Option<u64>,
    /// Growth constant `C`.
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub growth_c: Option<f64>,
    /// First retained index (1-based) after setting the head aside.
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub cutoff_index: Option<u64>,
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub multiplier: Option<f64>,
    /// One-sided lower radius `3^{1/4}‖X_1‖_2` for the moderate band.
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub lower_radius: Option<f64>,
    /// The moment of the dominating Rademacher sum.
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub rademacher_moment: Option<f64>,
    /// `‖Σ_{k<p} X_k‖_p` in the sandwich.
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub head_norm: Option<f64>,
}

/// One certified (or explicitly non-certifying) interval.
///
/// A report whose assumptions are not all satisfied is non-certifying and
/// carries no `lower`, `upper` or `radius`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundReport {
    pub statement: Statement,
    pub p: f64,
    pub r: Option<u32>,
    pub n: usize,
    pub quantity: Quantity,
    /// `γ_p (Σ v_k)^{1/2}`.
    pub center: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub radius: Option<f64>,
    pub constants: Constants,
    pub assumptions: Vec<Assumption>,
    /// `permutation[j]` is the input position of the `j`-th variable after
    /// sorting by nonincreasing variance.
    pub permutation: Vec<usize>,
    /// How `lower`/`upper` were obtained.
    pub provenance: Provenance,
}

impl BoundReport {
    pub fn certifying(&self) -> bool {
        self.assumptions.iter().all(|a| a.satisfied)
    }

    fn finish(mut self) -> Self {
        if !self.certifying() {
            self.lower = None;
            self.upper = None;
            self.radius = None;
        }
        self
    }
}

/// A sequence of independent variables, kept both as given and sorted by
/// nonincreasing variance.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSpec {
    variables: Vec<VariableSpec>,
    sorted: Vec<VariableSpec>,
    variances: Vec<f64>,
    permutation: Vec<usize>,
    sorted_nonincreasing: bool,
}

impl SequenceSpec {
    pub fn new(variables: Vec<VariableSpec>) -> Result<Self> {
        if variables.is_empty() {
            return Err(Error::InvalidParameter(
                "a sequence needs at least one variable".into(),
            ));
        }
        let raw: Vec<f64> = variables
            .iter()
            .map(|v| v.variance())
            .collect::<Result<_>>()?;
        check_dynamic_range(&raw)?;
        let mut permutation: Vec<usize> = (0..variables.len()).collect();
        // stable, so ties keep input order
        permutation.sort_by(|&a, &b| raw[b].total_cmp(&raw[a]));
        let sorted = permutation.iter().map(|&i| variables[i].clone()).collect();
        let variances = permutation.iter().map(|&i| raw[i]).collect();
        let sorted_nonincreasing = raw.windows(2).all(|w| w[0] >= w[1]);
        Ok(Self {
            variables,
            sorted,
            variances,
            permutation,
            sorted_nonincreasing,
        })
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    /// Variables in nonincreasing-variance order.
    pub fn sorted(&self) -> &[VariableSpec] {
        &self.sorted
    }

    /// Variances in nonincreasing order.
    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// Whether the input was already sorted by nonincreasing variance.
    pub fn sorted_nonincreasing(&self) -> bool {
        self.sorted_nonincreasing
    }

    pub fn total_variance(&self) -> f64 {
        self.variances.iter().sum()
    }

    pub fn max_variance(&self) -> f64 {
        self.variances[0]
    }

    pub fn all_symmetric(&self) -> bool {
        self.sorted.iter().all(VariableSpec::is_symmetric)
    }

    pub fn all_centered(&self) -> bool {
        self.sorted.iter().all(VariableSpec::is_centered)
    }

    /// Sorted moment profiles up to `order`.
    pub fn profiles(&self, order: usize) -> Result<Vec<MomentProfile>> {
        self.sorted
            .iter()
            .map(|s| moments_of(s, order.max(2)))
            .collect()
    }

    /// `Σ_{k ≥ first} v_k` for a 1-based `first`.
    fn variance_from(&self, first: usize) -> f64 {
        self.variances.iter().skip(first.saturating_sub(1)).sum()
    }

    fn center(&self, p: f64) -> Result<f64> {
        Ok(gaussian_lp_norm(p)? * libm::sqrt(self.total_variance()))
    }
}

/// Head length `m = max_k ⌈(1/6) E X_k⁴ / (E X_k²)²⌉`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeadLength {
    pub m: u64,
    /// `m < n`.
    pub below_n: bool,
}

pub fn compute_m(seq: &SequenceSpec) -> Result<HeadLength> {
    let mut m = 0;
    for p in seq.profiles(4)? {
        let ratio = p.moment(4)? / (p.variance() * p.variance());
        m = m.max(snapped_ceil(ratio / 6.0));
    }
    Ok(HeadLength {
        m,
        below_n: (m as usize) < seq.len(),
    })
}

/// Least `C ≥ 1` with `E X_k^{2l} ≤ C^{2l−2} (2l)!/2^l (E X_k²)^l` for all
/// `2 ≤ l ≤ r` and all `k`.
pub fn minimal_c_symmetric(seq: &SequenceSpec, r: usize) -> Result<f64> {
    if !seq.all_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let mut c: f64 = 1.0;
    for prof in seq.profiles(2 * r)? {
        let v = prof.variance();
        for l in 2..=r {
            let ratio = prof.moment(2 * l)? * libm::pow(2.0, l as f64)
                / (factorial(2 * l as u32) * libm::pow(v, l as f64));
            c = c.max(libm::pow(ratio, 1.0 / (2 * l - 2) as f64));
        }
    }
    Ok(snap_unit(c))
}

/// Least `C ≥ 1` with `|E X_k^l| ≤ C^{l−2} l!/2^{l/2} (E X_k²)^{l/2}` for all
/// `3 ≤ l ≤ 2r` and all `k`.
pub fn minimal_c_centered(seq: &SequenceSpec, r: usize) -> Result<f64> {
    if !seq.all_centered() {
        return Err(Error::NotCentered);
    }
    let mut c: f64 = 1.0;
    for prof in seq.profiles(2 * r)? {
        let v = prof.variance();
        for l in 3..=2 * r {
            let ratio = prof.moment(l)?.abs() * libm::pow(2.0, l as f64 / 2.0)
                / (factorial(l as u32) * libm::pow(v, l as f64 / 2.0));
            if ratio > 0.0 {
                c = c.max(libm::pow(ratio, 1.0 / (l - 2) as f64));
            }
        }
    }
    Ok(snap_unit(c))
}

// ratios equal to 1 up to rounding (log-concave families) give exactly 1
fn snap_unit(c: f64) -> f64 {
    if c - 1.0 <= crate::special::INTEGER_SNAP {
        1.0
    } else {
        c
    }
}

fn check_p(p: f64, lo: f64, hi: f64) -> Result<()> {
    if !(p >= lo && p <= hi) {
        return Err(Error::OutOfRange(format!(
            "p = {p} must lie in [{lo}, {hi}]"
        )));
    }
    Ok(())
}

fn base_report(
    seq: &SequenceSpec,
    statement: Statement,
    p: f64,
    r: Option<u32>,
) -> Result<BoundReport> {
    Ok(BoundReport {
        statement,
        p,
        r,
        n: seq.len(),
        quantity: Quantity::Norm,
        center: seq.center(p)?,
        lower: None,
        upper: None,
        radius: None,
        constants: Constants::default(),
        assumptions: Vec::new(),
        permutation: seq.permutation().to_vec(),
        provenance: Provenance::Exact,
    })
}

/// Band for `2 ≤ p ≤ 4` on symmetric inputs:
/// `γ_p (Σ_{k≥2} v_k)^{1/2} ≤ ‖S‖_p ≤ γ_p (Σ v_k)^{1/2} + √(3m) ‖X_1‖_2`,
/// and the two-sided radius `√(3m) ‖X_1‖_2`.
pub fn bound_p_2_4(seq: &SequenceSpec, p: f64) -> Result<BoundReport> {
    check_p(p, 2.0, 4.0)?;
    if !seq.all_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let head = compute_m(seq)?;
    let mut rep = base_report(seq, Statement::ModerateMomentBand, p, None)?;
    let sd1 = libm::sqrt(seq.max_variance());
    let radius = libm::sqrt(3.0 * head.m as f64) * sd1;
    rep.constants.m = Some(head.m);
    rep.constants.cutoff_index = Some(head.m + 1);
    rep.constants.lower_radius = Some(libm::pow(3.0, 0.25) * sd1);
    rep.assumptions.push(Assumption::new(
        "symmetric",
        true,
        "all variables symmetric".into(),
    ));
    rep.assumptions.push(Assumption::new(
        "head_length_below_n",
        head.below_n,
        format!("m = {} must be < n = {}", head.m, seq.len()),
    ));
    rep.lower = Some(gaussian_lp_norm(p)? * libm::sqrt(seq.variance_from(2)));
    rep.upper = Some(rep.center + radius);
    rep.radius = Some(radius);
    Ok(rep.finish())
}

/// Band for `p = 2r` on symmetric inputs:
/// `γ_{2r} (Σ_{k≥r} v_k)^{1/2} ≤ ‖S‖_{2r} ≤ γ_{2r} (Σ v_k)^{1/2} + 2D ‖X_1‖_2`
/// with `D = ⌈C²(r−1)⌉`, and the two-sided radius `2D ‖X_1‖_2`.
pub fn bound_even_symmetric(seq: &SequenceSpec, r: u32) -> Result<BoundReport> {
    if r < 2 {
        return Err(Error::OutOfRange(format!("r = {r} must be at least 2")));
    }
    let ru = r as usize;
    let c = minimal_c_symmetric(seq, ru)?;
    let d = snapped_ceil(c * c * (ru - 1) as f64);
    let p = 2.0 * r as f64;
    let mut rep = base_report(seq, Statement::EvenSymmetricBand, p, Some(r))?;
    let radius = 2.0 * d as f64 * libm::sqrt(seq.max_variance());
    rep.constants.growth_c = Some(c);
    rep.constants.cutoff_index = Some(d + 1);
    rep.assumptions.push(Assumption::new(
        "symmetric",
        true,
        "all variables symmetric".into(),
    ));
    rep.assumptions.push(Assumption::new(
        "cutoff_below_n",
        (d as usize) < seq.len(),
        format!("ceil(C^2 (r-1)) = {d} must be < n = {}", seq.len()),
    ));
    rep.lower = Some(gaussian_lp_norm(p)? * libm::sqrt(seq.variance_from(ru)));
    rep.upper = Some(rep.center + radius);
    rep.radius = Some(radius);
    Ok(rep.finish())
}

/// Upper bound for `p = 2r` on centered inputs:
/// `‖S‖_{2r} ≤ γ_{2r} (Σ v_k)^{1/2} + 2D ‖X_1‖_2`, `D = ⌈C² r(r−1)/2⌉`.
/// No lower bound is available.
pub fn bound_even_centered(seq: &SequenceSpec, r: u32) -> Result<BoundReport> {
    if r < 2 {
        return Err(Error::OutOfRange(format!("r = {r} must be at least 2")));
    }
    let ru = r as usize;
    let c = minimal_c_centered(seq, ru)?;
    let d = snapped_ceil(c * c * (ru * (ru - 1)) as f64 / 2.0);
    let mut rep = base_report(seq, Statement::EvenCenteredUpper, 2.0 * r as f64, Some(r))?;
    rep.constants.growth_c = Some(c);
    rep.constants.cutoff_index = Some(d + 1);
    rep.assumptions.push(Assumption::new(
        "centered",
        true,
        "all variables centered".into(),
    ));
    rep.assumptions.push(Assumption::new(
        "cutoff_below_n",
        (d as usize) < seq.len(),
        format!("ceil(C^2 r(r-1)/2) = {d} must be < n = {}", seq.len()),
    ));
    rep.upper = Some(rep.center + 2.0 * d as f64 * libm::sqrt(seq.max_variance()));
    Ok(rep.finish())
}

/// Domination of a truncated sum for `2 ≤ p ≤ 2r`:
/// `E|Σ_{k≥C_p} X_k|^p ≤ (2f+1)/(2f−1) · E|Σ_k √v_k ε_k|^p`, `f = ⌊p/2⌋`,
/// with `C_p = ⌈C² f⌉ + 1` (symmetric) or `⌈C² f(f+1)/2⌉ + 1` (centered).
///
/// The report bounds the truncated moment, not the norm of the full sum;
/// see [`Quantity::TruncatedAbsMoment`].
pub fn bound_general_p(seq: &SequenceSpec, p: f64, r: u32) -> Result<BoundReport> {
    if r < 1 {
        return Err(Error::OutOfRange("r must be at least 1".into()));
    }
    check_p(p, 2.0, 2.0 * r as f64)?;
    if !seq.all_centered() {
        return Err(Error::NotCentered);
    }
    let ru = r as usize;
    let symmetric = seq.all_symmetric();
    let c = if symmetric {
        minimal_c_symmetric(seq, ru)?
    } else {
        minimal_c_centered(seq, ru)?
    };
    let f = libm::floor(p / 2.0) as u64;
    let cutoff = if symmetric {
        snapped_ceil(c * c * f as f64) + 1
    } else {
        snapped_ceil(c * c * (f * (f + 1)) as f64 / 2.0) + 1
    };
    let multiplier = (2 * f + 1) as f64 / (2 * f - 1) as f64;
    let mut rep = base_report(seq, Statement::TruncatedRademacherDomination, p, Some(r))?;
    rep.quantity = Quantity::TruncatedAbsMoment {
        first_index: cutoff as usize,
    };
    rep.constants.growth_c = Some(c);
    rep.constants.cutoff_index = Some(cutoff);
    rep.constants.multiplier = Some(multiplier);
    rep.assumptions.push(Assumption::new(
        if symmetric { "symmetric" } else { "centered" },
        true,
        "cutoff rule chosen accordingly".into(),
    ));
    rep.assumptions.push(Assumption::new(
        "cutoff_within_n",
        (cutoff as usize) <= seq.len(),
        format!("C_p = {cutoff} must be <= n = {}", seq.len()),
    ));
    let w = WeightVector::from_variances(seq.variances())?;
    match rademacher_moment(&w, p) {
        Ok(est) => {
            rep.constants.rademacher_moment = Some(est.value);
            rep.upper = Some(multiplier * (est.value + est.provenance.error()));
            rep.provenance = match est.provenance {
                Provenance::Quadrature { error } => Provenance::Quadrature {
                    error: multiplier * error,
                },
                other => other,
            };
            rep.assumptions.push(Assumption::new(
                "rademacher_engine",
                true,
                "dominating moment computed".into(),
            ));
        }
        Err(e) => rep
            .assumptions
            .push(Assumption::new("rademacher_engine", false, e.to_string())),
    }
    Ok(rep.finish())
}

/// `E|Σ σ_k ε_k|^p`: exact for even `p` or `n ≤ 24`, Haagerup quadrature for
/// larger `n` with `2 < p < 4`.
pub fn rademacher_moment(w: &WeightVector, p: f64) -> Result<Estimate> {
    if is_even_integer(p) {
        return Ok(Estimate::exact(rademacher_even_moment(w, p as usize / 2)?));
    }
    if w.len() <= RADEMACHER_ENUMERATION_CAP {
        return Ok(Estimate::exact(rademacher_abs_moment(w, p)?));
    }
    let specs: Vec<VariableSpec> = w
        .sigmas()
        .iter()
        .map(|&s| VariableSpec::rademacher(s.abs()))
        .collect::<Result<_>>()?;
    AnalyticEngine { rel_tol: 1e-10 }.abs_moment(&specs, p)
}

/// Outcome of [`check_big_lemma`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BigLemmaCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, infinite when `rhs = 0`.
    pub ratio: f64,
    pub holds: bool,
}

/// Checks `((2r+1)/(2r−1)) M_{2r}² ≥ ((2r+2)!/2^{r+1}) e_{r+1}(σ²) M_{2r−2}`
/// with `M_{2j} = E(Σ σ_k ε_k)^{2j}`, for weights sorted by magnitude.
pub fn check_big_lemma(w: &WeightVector, r: u32) -> Result<BigLemmaCheck> {
    if r < 1 {
        return Err(Error::OutOfRange("r must be at least 1".into()));
    }
    if !w.is_sorted_by_magnitude() {
        return Err(Error::Unsorted);
    }
    let ru = r as usize;
    let m = rademacher_even_moments(w, ru)?;
    let lhs = (2 * ru + 1) as f64 / (2 * ru - 1) as f64 * m[ru] * m[ru];
    let e = elementary_symmetric(&w.squares(), ru + 1).value;
    let rhs = factorial(2 * r + 2) / libm::pow(2.0, (ru + 1) as f64) * e * m[ru - 1];
    let ratio = if rhs == 0.0 { f64::INFINITY } else { lhs / rhs };
    Ok(BigLemmaCheck {
        lhs,
        rhs,
        ratio,
        holds: lhs >= rhs * (1.0 - 1e-12),
    })
}

/// The two log-concave-tail statements for `p ≥ 2`: the radius
/// `p · max_k ‖X_k‖_2` and the sandwich
/// `max{γ_p (Σ_{k≥⌈p/2⌉} v_k)^{1/2}, ‖Σ_{k<p} X_k‖_p} ≤ ‖S‖_p
///  ≤ γ_p (Σ_{k≥⌈p/2⌉} v_k)^{1/2} + ‖Σ_{k<p} X_k‖_p`.
///
/// The head norm comes from `engine` and its error budget widens the
/// sandwich.
pub fn latala_logconcave_bounds(
    seq: &SequenceSpec,
    p: f64,
    engine: &dyn AbsMomentEngine,
) -> Result<[BoundReport; 2]> {
    if !(p >= 2.0) || !p.is_finite() {
        return Err(Error::OutOfRange(format!("p = {p} must be at least 2")));
    }
    let log_concave = seq
        .sorted()
        .iter()
        .all(|s| s.log_concave_tail() && s.is_symmetric());
    let lc = || {
        let bad: Vec<&str> = seq
            .sorted()
            .iter()
            .filter(|s| !s.log_concave_tail())
            .map(|s| s.family_name())
            .collect();
        Assumption::new(
            "log_concave_tails",
            log_concave,
            if bad.is_empty() {
                "all families have log-concave tails".into()
            } else {
                format!("not log-concave: {bad:?}")
            },
        )
    };

    let mut radius_rep = base_report(seq, Statement::LogConcaveRadius, p, None)?;
    let radius = p * libm::sqrt(seq.max_variance());
    radius_rep.assumptions.push(lc());
    radius_rep.lower = Some(radius_rep.center - radius);
    radius_rep.upper = Some(radius_rep.center + radius);
    radius_rep.radius = Some(radius);

    let mut sandwich = base_report(seq, Statement::LogConcaveSandwich, p, None)?;
    sandwich.assumptions.push(lc());
    let head_len = ((libm::ceil(p) as usize).saturating_sub(1)).min(seq.len());
    let tail_first = libm::ceil(p / 2.0) as usize;
    sandwich.constants.cutoff_index = Some(tail_first as u64);
    let tail_gauss = gaussian_lp_norm(p)? * libm::sqrt(seq.variance_from(tail_first));
    if log_concave {
        match engine.abs_moment(&seq.sorted()[..head_len], p) {
            Ok(est) => {
                let (lo, mid, hi) = est.norm_interval(p);
                sandwich.constants.head_norm = Some(mid);
                sandwich.lower = Some(tail_gauss.max(lo));
                sandwich.upper = Some(tail_gauss + hi);
                sandwich.provenance = est.to_norm(p).provenance;
                sandwich.assumptions.push(Assumption::new(
                    "head_moment_engine",
                    true,
                    format!("{head_len} head variables"),
                ));
            }
            Err(e) => sandwich.assumptions.push(Assumption::new(
                "head_moment_engine",
                false,
                e.to_string(),
            )),
        }
    }
    Ok([radius_rep.finish(), sandwich.finish()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn iid(spec: VariableSpec, n: usize) -> SequenceSpec {
        SequenceSpec::new(vec![spec; n]).unwrap()
    }

    fn lap() -> VariableSpec {
        VariableSpec::symmetric_exponential(1.0).unwrap()
    }

    #[test]
    fn head_length_examples() {
        assert_eq!(
            compute_m(&iid(VariableSpec::rademacher(1.0).unwrap(), 3))
                .unwrap()
                .m,
            1
        );
        assert_eq!(compute_m(&iid(lap(), 3)).unwrap().m, 1);
        let tp = compute_m(&iid(
            VariableSpec::symmetric_three_point(1.0, 0.01).unwrap(),
            10,
        ))
        .unwrap();
        assert_eq!(tp.m, 9);
        assert!(tp.below_n);
        let raw = VariableSpec::raw(MomentProfile::new(vec![1.0, 0.0, 1.0], true, true).unwrap());
        assert!(matches!(
            compute_m(&iid(raw, 2)),
            Err(Error::InsufficientOrder { .. })
        ));
    }

    #[test]
    fn growth_constant_examples() {
        assert_eq!(
            minimal_c_symmetric(&iid(VariableSpec::rademacher(1.0).unwrap(), 2), 5).unwrap(),
            1.0
        );
        assert_eq!(minimal_c_symmetric(&iid(lap(), 2), 6).unwrap(), 1.0);
        let tp = iid(VariableSpec::symmetric_three_point(1.0, 0.01).unwrap(), 2);
        assert!((minimal_c_symmetric(&tp, 2).unwrap() - libm::sqrt(200.0 / 24.0)).abs() < 1e-12);
        assert!(
            (minimal_c_centered(&tp, 2).unwrap() - minimal_c_symmetric(&tp, 2).unwrap()).abs()
                < 1e-12
        );

        let raw = |m: Vec<f64>| VariableSpec::raw(MomentProfile::new(m, false, true).unwrap());
        let mild = iid(raw(vec![1.0, 0.0, 1.0, 2.0, 3.0]), 2);
        assert_eq!(minimal_c_centered(&mild, 2).unwrap(), 1.0);
        let skewed = iid(raw(vec![1.0, 0.0, 1.0, 10.0, 200.0]), 2);
        // l = 4 dominates: (200·4/24)^{1/2} > 10·2^{3/2}/6
        let want = libm::sqrt(200.0 * 4.0 / 24.0);
        assert!((minimal_c_centered(&skewed, 2).unwrap() - want).abs() < 1e-12);
        assert_eq!(minimal_c_symmetric(&skewed, 2), Err(Error::NotSymmetric));
    }

    #[test]
    fn moderate_band_examples() {
        let rep = bound_p_2_4(&iid(lap(), 10), 3.0).unwrap();
        assert!(rep.certifying());
        assert!((rep.center - 1.16858 * libm::sqrt(10.0)).abs() < 1e-4);
        assert!((rep.radius.unwrap() - libm::sqrt(3.0)).abs() < 1e-12);

        let rep = bound_p_2_4(&iid(VariableSpec::rademacher(1.0).unwrap(), 2), 2.0).unwrap();
        assert!((rep.lower.unwrap() - 1.0).abs() < 1e-15);
        assert!((rep.upper.unwrap() - (libm::sqrt(2.0) + libm::sqrt(3.0))).abs() < 1e-14);

        let rep = bound_p_2_4(
            &iid(VariableSpec::symmetric_three_point(1.0, 0.01).unwrap(), 10),
            4.0,
        )
        .unwrap();
        assert_eq!(rep.constants.m, Some(9));
        assert!((rep.radius.unwrap() - libm::sqrt(27.0) * libm::sqrt(0.02)).abs() < 1e-12);

        let small = bound_p_2_4(
            &iid(VariableSpec::symmetric_three_point(1.0, 0.01).unwrap(), 9),
            3.0,
        )
        .unwrap();
        assert!(!small.certifying());
        assert_eq!(small.upper, None);
        assert!(bound_p_2_4(&iid(lap(), 3), 4.5).is_err());
    }

    #[test]
    fn even_symmetric_examples() {
        let rep = bound_even_symmetric(&iid(lap(), 10), 2).unwrap();
        assert!((rep.lower.unwrap() - libm::pow(3.0, 0.25) * 3.0).abs() < 1e-12);
        assert!(
            (rep.upper.unwrap() - (libm::pow(3.0, 0.25) * libm::sqrt(10.0) + 2.0)).abs() < 1e-12
        );
        let rep = bound_even_symmetric(&iid(VariableSpec::rademacher(1.0).unwrap(), 3), 2).unwrap();
        assert!((rep.lower.unwrap() - libm::pow(3.0, 0.25) * libm::sqrt(2.0)).abs() < 1e-12);
        assert!(bound_even_symmetric(&iid(lap(), 2), 2)
            .unwrap()
            .certifying());
        assert!(!bound_even_symmetric(&iid(lap(), 1), 2)
            .unwrap()
            .certifying());
    }

    #[test]
    fn even_centered_examples() {
        let raw = VariableSpec::raw(
            MomentProfile::new(vec![1.0, 0.0, 1.0, 1.0, 3.0], false, true).unwrap(),
        );
        let rep = bound_even_centered(&iid(raw.clone(), 10), 2).unwrap();
        assert_eq!(rep.constants.growth_c, Some(1.0));
        assert_eq!(rep.constants.cutoff_index, Some(2));
        assert!(
            (rep.upper.unwrap() - (libm::pow(3.0, 0.25) * libm::sqrt(10.0) + 2.0)).abs() < 1e-12
        );
        assert_eq!(rep.lower, None);
        assert!(!bound_even_centered(&iid(raw, 1), 2).unwrap().certifying());
        // symmetric inputs: centered upper is never tighter
        for r in 2..=4 {
            let s = iid(lap(), 12);
            let a = bound_even_symmetric(&s, r).unwrap();
            let b = bound_even_centered(&s, r).unwrap();
            if a.certifying() && b.certifying() {
                assert!(b.upper.unwrap() >= a.upper.unwrap());
            }
        }
    }

    #[test]
    fn general_p_examples() {
        let rep = bound_general_p(&iid(VariableSpec::rademacher(1.0).unwrap(), 6), 3.0, 2).unwrap();
        assert_eq!(rep.constants.multiplier, Some(3.0));
        assert_eq!(rep.constants.cutoff_index, Some(2));
        assert_eq!(
            rep.quantity,
            Quantity::TruncatedAbsMoment { first_index: 2 }
        );
        let full = rademacher_abs_moment(&WeightVector::new(vec![1.0; 6]).unwrap(), 3.0).unwrap();
        assert!((rep.upper.unwrap() - 3.0 * full).abs() < 1e-12);

        let p2 = bound_general_p(&iid(lap(), 4), 2.0, 1).unwrap();
        assert_eq!(p2.constants.multiplier, Some(3.0));
        assert_eq!(p2.constants.cutoff_index, Some(2));
        assert!(bound_general_p(&iid(lap(), 4), 5.0, 2).is_err());
    }

    #[test]
    fn big_lemma_examples() {
        let c = check_big_lemma(&WeightVector::new(vec![1.0, 1.0]).unwrap(), 1).unwrap();
        assert_eq!((c.lhs, c.rhs, c.ratio), (12.0, 6.0, 2.0));
        let c = check_big_lemma(&WeightVector::new(vec![1.0, 0.5]).unwrap(), 2).unwrap();
        assert_eq!(c.rhs, 0.0);
        assert!(c.holds);
        assert_eq!(
            check_big_lemma(&WeightVector::new(vec![0.5, 1.0]).unwrap(), 1),
            Err(Error::Unsorted)
        );
    }

    #[test]
    fn log_concave_examples() {
        let engine = AnalyticEngine::default();
        let [rad, sand] = latala_logconcave_bounds(&iid(lap(), 10), 4.0, &engine).unwrap();
        assert_eq!(rad.radius, Some(4.0));
        let exact = libm::pow(330.0, 0.25);
        assert!(rad.lower.unwrap() <= exact && exact <= rad.upper.unwrap());
        assert!(sand.lower.unwrap() <= exact && exact <= sand.upper.unwrap());

        let tp = SequenceSpec::new(vec![
            lap(),
            VariableSpec::symmetric_three_point(1.0, 0.1).unwrap(),
        ])
        .unwrap();
        let [a, b] = latala_logconcave_bounds(&tp, 3.0, &engine).unwrap();
        assert!(!a.certifying() && !b.certifying());
    }

    #[test]
    fn sorting_is_recorded() {
        let a = VariableSpec::gaussian(0.5).unwrap();
        let b = VariableSpec::gaussian(2.0).unwrap();
        let s = SequenceSpec::new(vec![a.clone(), b.clone(), a.clone()]).unwrap();
        assert_eq!(s.permutation(), &[1, 0, 2]);
        assert!(!s.sorted_nonincreasing());
        let t = SequenceSpec::new(vec![b, a.clone(), a]).unwrap();
        assert!(t.sorted_nonincreasing());
        let (x, y) = (bound_p_2_4(&s, 3.0).unwrap(), bound_p_2_4(&t, 3.0).unwrap());
        assert_eq!((x.lower, x.upper, x.radius), (y.lower, y.upper, y.radius));
    }
}
