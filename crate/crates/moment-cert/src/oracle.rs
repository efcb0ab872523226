//! Ground truth independent of the bound engine: exact atom convolution for
//! finite-support inputs and seeded, shard-parallel Monte Carlo otherwise.

use moment_cert_core::bounds::{is_even_integer, AbsMomentEngine, Estimate, Provenance, Quantity};
use moment_cert_core::charfn::{sum_abs_moment_via_haagerup, CharFunction};
use moment_cert_core::distmodel::{moments_of, MomentProfile, Sampler};
use moment_cert_core::exactmoments::{gaussian_abs_moment, sum_even_moment};
use moment_cert_core::special::NeumaierSum;
use moment_cert_core::{BoundReport, SequenceSpec, VariableSpec};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest product of support sizes [`exact_discrete_moment`] accepts.
pub const SUPPORT_CAP: f64 = 2e7;
/// Samples per Monte Carlo shard. Fixed so results do not depend on the
/// number of worker threads.
pub const SHARD_SIZE: usize = 1 << 16;
pub const MIN_SAMPLES: usize = 10_000;
pub const DEFAULT_SAMPLES: usize = 1_000_000;
pub const DEFAULT_CONFIDENCE: f64 = 0.999;

/// `E|Σ X_k|^p` by convolving the atoms of finite-support variables.
pub fn exact_discrete_moment(specs: &[VariableSpec], p: f64) -> Result<f64> {
    let mut supports = Vec::with_capacity(specs.len());
    for s in specs {
        supports.push(s.atoms().ok_or(Error::NotDiscrete(s.family_name()))?);
    }
    let size: f64 = supports.iter().map(|a| a.len() as f64).product();
    if size > SUPPORT_CAP {
        return Err(Error::SupportExplosion {
            size,
            cap: SUPPORT_CAP,
        });
    }
    let Some((last, rest)) = supports.split_last() else {
        return Ok(0.0);
    };
    let mut dist = vec![(0.0_f64, 1.0_f64)];
    for atoms in rest {
        let mut next = Vec::with_capacity(dist.len() * atoms.len());
        for &(x, px) in &dist {
            for &(a, pa) in atoms {
                next.push((x + a, px * pa));
            }
        }
        next.sort_by(|a, b| a.0.total_cmp(&b.0));
        dist.clear();
        for (x, px) in next {
            match dist.last_mut() {
                Some(d) if d.0 == x => d.1 += px,
                _ => dist.push((x, px)),
            }
        }
    }
    let mut acc = NeumaierSum::default();
    for &(x, px) in &dist {
        for &(a, pa) in last {
            acc.add(px * pa * (x + a).abs().powf(p));
        }
    }
    Ok(acc.value())
}

/// Monte Carlo estimate of `‖S‖_p` with a confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub p: f64,
    /// Estimate of `‖S‖_p`.
    pub point: f64,
    /// Half-width of the interval for `‖S‖_p`: the larger distance from
    /// `point` to the `1/p`-power images of the moment interval endpoints.
    pub half_width: f64,
    pub samples: usize,
    pub seed: u64,
    pub confidence: f64,
    /// Sample mean of `|S|^p`.
    pub moment: f64,
    /// Normal-approximation half-width for `E|S|^p`.
    pub moment_half_width: f64,
}

impl MCEstimate {
    pub fn interval(&self) -> (f64, f64) {
        (self.point - self.half_width, self.point + self.half_width)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let d = x - self.mean;
        self.mean += d / self.count;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Welford) -> Welford {
        if o.count == 0.0 {
            return self;
        }
        let count = self.count + o.count;
        let d = o.mean - self.mean;
        Welford {
            count,
            mean: self.mean + d * o.count / count,
            m2: self.m2 + o.m2 + d * d * self.count * o.count / count,
        }
    }
}

/// Monte Carlo `‖Σ X_k‖_p`. Shard `s` draws from ChaCha8 seeded with `seed`
/// on stream `s`, and shards merge in index order, so the estimate depends
/// only on `(specs, p, samples, seed, confidence)`.
pub fn mc_moment(
    specs: &[VariableSpec],
    p: f64,
    samples: usize,
    seed: u64,
    confidence: f64,
) -> Result<MCEstimate> {
    if samples < MIN_SAMPLES {
        return Err(Error::Config(format!(
            "at least {MIN_SAMPLES} samples required, got {samples}"
        )));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::Config(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    if !(p > 0.0) {
        return Err(Error::Config(format!("p must be positive, got {p}")));
    }
    let samplers: Vec<Sampler> = specs
        .iter()
        .map(Sampler::new)
        .collect::<std::result::Result<_, _>>()?;
    let shards = samples.div_ceil(SHARD_SIZE);
    let parts: Vec<Welford> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let len = SHARD_SIZE.min(samples - s * SHARD_SIZE);
            let mut w = Welford::default();
            for _ in 0..len {
                let total: f64 = samplers.iter().map(|sm| sm.draw(&mut rng)).sum();
                w.push(total.abs().powf(p));
            }
            w
        })
        .collect();
    let acc = parts.into_iter().fold(Welford::default(), Welford::merge);
    let z = Normal::standard().inverse_cdf(0.5 + confidence / 2.0);
    let sd = (acc.m2 / (acc.count - 1.0)).max(0.0).sqrt();
    let moment_half_width = (z * sd / acc.count.sqrt())
        .max(f64::EPSILON * acc.mean.abs())
        .max(f64::MIN_POSITIVE);
    let est = Estimate {
        value: acc.mean,
        provenance: Provenance::MonteCarlo {
            half_width: moment_half_width,
        },
    };
    let (lo, point, hi) = est.norm_interval(p);
    Ok(MCEstimate {
        p,
        point,
        half_width: (point - lo).max(hi - point).max(f64::MIN_POSITIVE),
        samples,
        seed,
        confidence,
        moment: acc.mean,
        moment_half_width,
    })
}

/// Settings for [`OracleEngine`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleEngine {
    pub samples: usize,
    pub seed: u64,
    pub confidence: f64,
    /// Quadrature tolerance relative to the Gaussian moment of the sum.
    pub rel_tol: f64,
}

impl Default for OracleEngine {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            seed: 0,
            confidence: DEFAULT_CONFIDENCE,
            rel_tol: 1e-10,
        }
    }
}

impl OracleEngine {
    /// `E|Σ X_k|^p` from the most exact engine that applies: even moments,
    /// atom convolution, Haagerup quadrature, then Monte Carlo.
    pub fn estimate(&self, specs: &[VariableSpec], p: f64) -> Result<Estimate> {
        if specs.is_empty() {
            return Ok(Estimate::exact(0.0));
        }
        if is_even_integer(p) {
            let order = (p as usize).max(2);
            let profiles: std::result::Result<Vec<MomentProfile>, _> =
                specs.iter().map(|s| moments_of(s, order)).collect();
            if let Ok(profiles) = profiles {
                return Ok(Estimate::exact(sum_even_moment(&profiles, order / 2)?));
            }
        }
        match exact_discrete_moment(specs, p) {
            Ok(v) => return Ok(Estimate::exact(v)),
            Err(Error::NotDiscrete(_) | Error::SupportExplosion { .. }) => {}
            Err(e) => return Err(e),
        }
        let closed_form = specs
            .iter()
            .all(|s| s.is_symmetric() && !matches!(s, VariableSpec::RawMoments { .. }));
        if p > 2.0 && p < 4.0 && closed_form {
            let variance = CharFunction::product(specs)?.variance();
            let tol = self.rel_tol * gaussian_abs_moment(p)? * variance.powf(p / 2.0);
            let r = sum_abs_moment_via_haagerup(specs, p, tol)?;
            return Ok(Estimate {
                value: r.value,
                provenance: Provenance::Quadrature {
                    error: r.total_error(),
                },
            });
        }
        if specs
            .iter()
            .any(|s| matches!(s, VariableSpec::RawMoments { .. }))
        {
            return Err(Error::NoOracle(format!(
                "raw moment profiles cannot be sampled (p = {p})"
            )));
        }
        let mc = mc_moment(specs, p, self.samples, self.seed, self.confidence)?;
        Ok(Estimate {
            value: mc.moment,
            provenance: Provenance::MonteCarlo {
                half_width: mc.moment_half_width,
            },
        })
    }
}

impl AbsMomentEngine for OracleEngine {
    fn abs_moment(&self, specs: &[VariableSpec], p: f64) -> moment_cert_core::Result<Estimate> {
        self.estimate(specs, p).map_err(|e| match e {
            Error::Core(inner) => inner,
            other => moment_cert_core::Error::Unsupported(other.to_string()),
        })
    }
}

/// A reference value for the quantity a [`BoundReport`] bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub p: f64,
    pub n: usize,
    pub quantity: Quantity,
    /// `‖S‖_p` for [`Quantity::Norm`], the moment itself for a truncated
    /// absolute moment.
    pub value: f64,
    pub provenance: Provenance,
}

impl GroundTruth {
    pub fn error(&self) -> f64 {
        self.provenance.error()
    }

    pub fn exact(p: f64, n: usize, quantity: Quantity, value: f64) -> Self {
        Self {
            p,
            n,
            quantity,
            value,
            provenance: Provenance::Exact,
        }
    }

    pub fn from_mc(est: &MCEstimate, n: usize) -> Self {
        Self {
            p: est.p,
            n,
            quantity: Quantity::Norm,
            value: est.point,
            provenance: Provenance::MonteCarlo {
                half_width: est.half_width,
            },
        }
    }
}

/// Computes the ground truth for `quantity` over the sorted sequence.
pub fn ground_truth(
    seq: &SequenceSpec,
    p: f64,
    quantity: Quantity,
    engine: &OracleEngine,
) -> Result<GroundTruth> {
    let (specs, as_norm) = match quantity {
        Quantity::Norm => (seq.sorted(), true),
        Quantity::TruncatedAbsMoment { first_index } => (
            &seq.sorted()[first_index.saturating_sub(1).min(seq.len())..],
            false,
        ),
    };
    let est = engine.estimate(specs, p)?;
    let est = if as_norm { est.to_norm(p) } else { est };
    Ok(GroundTruth {
        p,
        n: seq.len(),
        quantity,
        value: est.value,
        provenance: est.provenance,
    })
}

/// Outcome of [`verify_report`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    /// `margin` is how far the ground interval lies outside the bound.
    Fail {
        margin: f64,
    },
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

/// PASS when the ground value, widened by its error budget, reaches
/// `[lower, upper]` (missing sides are unbounded).
pub fn verify_report(report: &BoundReport, ground: &GroundTruth) -> Result<Verdict> {
    if !report.certifying() {
        return Err(Error::Mismatch(format!(
            "{} report is not certifying",
            report.statement.as_str()
        )));
    }
    if report.p != ground.p || report.n != ground.n || report.quantity != ground.quantity {
        return Err(Error::Mismatch(format!(
            "report (p = {}, n = {}, {:?}) vs ground truth (p = {}, n = {}, {:?})",
            report.p, report.n, report.quantity, ground.p, ground.n, ground.quantity
        )));
    }
    let e = ground.error();
    let below = report.lower.map_or(0.0, |lo| lo - (ground.value + e));
    let above = report.upper.map_or(0.0, |hi| (ground.value - e) - hi);
    let margin = below.max(above);
    Ok(if margin > 0.0 {
        Verdict::Fail { margin }
    } else {
        Verdict::Pass
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rad(n: usize) -> Vec<VariableSpec> {
        vec![VariableSpec::rademacher(1.0).unwrap(); n]
    }

    #[test]
    fn discrete_examples() {
        assert!((exact_discrete_moment(&rad(3), 4.0).unwrap() - 21.0).abs() < 1e-12);
        let tp = vec![VariableSpec::symmetric_three_point(1.0, 0.25).unwrap(); 2];
        assert!((exact_discrete_moment(&tp, 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            exact_discrete_moment(&rad(30), 3.0),
            Err(Error::SupportExplosion { .. })
        ));
        let g = vec![VariableSpec::gaussian(1.0).unwrap()];
        assert!(matches!(
            exact_discrete_moment(&g, 3.0),
            Err(Error::NotDiscrete("gaussian"))
        ));
    }

    #[test]
    fn welford_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let mut one = Welford::default();
        xs.iter().for_each(|&x| one.push(x));
        let (mut a, mut b) = (Welford::default(), Welford::default());
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        let m = a.merge(b);
        assert!((m.mean - one.mean).abs() < 1e-12 && (m.m2 - one.m2).abs() < 1e-8 * one.m2);
    }

    #[test]
    fn mc_rejects_raw_and_small_runs() {
        let raw = VariableSpec::raw(MomentProfile::new(vec![1.0, 0.0, 1.0], true, true).unwrap());
        assert!(mc_moment(&[raw], 3.0, 20_000, 1, 0.999).is_err());
        assert!(mc_moment(&rad(2), 3.0, 100, 1, 0.999).is_err());
    }
}
