//! Single random variables: closed-form families and raw moment profiles.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::special::double_factorial_odd;

const PROFILE_TOL: f64 = 1e-12;

/// Moments `μ_0, …, μ_L` of one variable, `μ_l = E X^l`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "RawProfile", into = "RawProfile"))]
pub struct MomentProfile {
    moments: Vec<f64>,
    symmetric: bool,
    centered: bool,
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
struct RawProfile {
    moments: Vec<f64>,
    #[serde(default)]
    symmetric: bool,
    #[serde(default = "default_true")]
    centered: bool,
}

#[cfg(feature = "serde")]
fn default_true() -> bool {
    true
}

#[cfg(feature = "serde")]
impl TryFrom<RawProfile> for MomentProfile {
    type Error = Error;

    fn try_from(raw: RawProfile) -> Result<Self> {
        MomentProfile::new(raw.moments, raw.symmetric, raw.centered)
    }
}

#[cfg(feature = "serde")]
impl From<MomentProfile> for RawProfile {
    fn from(p: MomentProfile) -> Self {
        RawProfile {
            moments: p.moments,
            symmetric: p.symmetric,
            centered: p.centered,
        }
    }
}

impl MomentProfile {
    /// Validates and wraps a moment sequence starting at `μ_0`.
    ///
    /// Checked: `μ_0 = 1`, `μ_1 = 0` when centered, odd moments vanish when
    /// symmetric, positive even moments, and the Lyapunov chain
    /// `μ_{2a}^{1/2a} ≤ μ_{2b}^{1/2b}`. No Hankel (positive-definiteness) check
    /// is made.
    pub fn new(moments: Vec<f64>, symmetric: bool, centered: bool) -> Result<Self> {
        if moments.len() < 3 {
            return Err(Error::InvalidProfile(format!(
                "need moments up to order at least 2, got max order {}",
                moments.len().saturating_sub(1)
            )));
        }
        if moments.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidProfile("non-finite moment".into()));
        }
        if (moments[0] - 1.0).abs() > PROFILE_TOL {
            return Err(Error::InvalidProfile(format!(
                "mu_0 = {} but must be 1",
                moments[0]
            )));
        }
        let var = moments[2];
        if var <= 0.0 {
            return Err(Error::InvalidProfile(
                "second moment must be positive (variance-0 variables are rejected)".into(),
            ));
        }
        let scale = |l: usize| libm::pow(var, l as f64 / 2.0);
        let centered = centered || symmetric;
        if centered && moments[1].abs() > PROFILE_TOL * scale(1) {
            return Err(Error::InvalidProfile(format!(
                "centered profile has mu_1 = {}",
                moments[1]
            )));
        }
        if symmetric {
            for l in (1..moments.len()).step_by(2) {
                if moments[l].abs() > PROFILE_TOL * scale(l) {
                    return Err(Error::InvalidProfile(format!(
                        "symmetric profile has nonzero odd moment mu_{l} = {}",
                        moments[l]
                    )));
                }
            }
        }
        let mut prev_norm = 0.0;
        for l in (2..moments.len()).step_by(2) {
            if moments[l] <= 0.0 {
                return Err(Error::InvalidProfile(format!(
                    "even moment mu_{l} must be positive"
                )));
            }
            let norm = libm::pow(moments[l], 1.0 / l as f64);
            if norm < prev_norm * (1.0 - PROFILE_TOL) {
                return Err(Error::InvalidProfile(format!(
                    "Lyapunov chain violated at order {l}: {norm} < {prev_norm}"
                )));
            }
            prev_norm = norm;
        }
        let mut moments = moments;
        if symmetric {
            for l in (1..moments.len()).step_by(2) {
                moments[l] = 0.0;
            }
        } else if centered {
            moments[1] = 0.0;
        }
        moments[0] = 1.0;
        Ok(Self {
            moments,
            symmetric,
            centered,
        })
    }

    /// Profile of a discrete law given by atoms and probabilities, optionally
    /// recentred at its mean first.
    pub fn from_atoms(
        values: &[f64],
        probs: &[f64],
        max_order: usize,
        center: bool,
    ) -> Result<Self> {
        if values.len() != probs.len() || values.is_empty() {
            return Err(Error::InvalidParameter(
                "atoms and probabilities must pair up".into(),
            ));
        }
        if probs.iter().any(|&q| !(q >= 0.0)) || ((probs.iter().sum::<f64>()) - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(
                "probabilities must be nonnegative and sum to 1".into(),
            ));
        }
        let mean: f64 = if center {
            values.iter().zip(probs).map(|(v, q)| v * q).sum()
        } else {
            0.0
        };
        let mut moments = vec![0.0; max_order + 1];
        for (v, q) in values.iter().zip(probs) {
            let x = v - mean;
            let mut pw = 1.0;
            for m in moments.iter_mut() {
                *m += q * pw;
                pw *= x;
            }
        }
        moments[0] = 1.0;
        let symmetric = is_symmetric_atoms(values, probs, mean);
        Self::new(moments, symmetric, center)
    }

    pub fn max_order(&self) -> usize {
        self.moments.len() - 1
    }

    /// `E X^l`; errors if `l` exceeds the stored order.
    pub fn moment(&self, l: usize) -> Result<f64> {
        self.moments
            .get(l)
            .copied()
            .ok_or(Error::InsufficientOrder {
                requested: l,
                available: self.max_order(),
            })
    }

    pub fn moments(&self) -> &[f64] {
        &self.moments
    }

    pub fn variance(&self) -> f64 {
        self.moments[2]
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    /// `‖X‖_l` for an even `l` within the stored order.
    pub fn even_norm(&self, l: usize) -> Result<f64> {
        Ok(libm::pow(self.moment(l)?, 1.0 / l as f64))
    }

    /// Same profile cut down to `max_order`.
    pub fn truncated(&self, max_order: usize) -> Result<Self> {
        if max_order > self.max_order() {
            return Err(Error::InsufficientOrder {
                requested: max_order,
                available: self.max_order(),
            });
        }
        Ok(Self {
            moments: self.moments[..=max_order].to_vec(),
            ..self.clone()
        })
    }

    /// Profile of `c·X`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let mut pw = 1.0;
        let moments = self
            .moments
            .iter()
            .map(|m| {
                let v = m * pw;
                pw *= c;
                v
            })
            .collect();
        Self::new(moments, self.symmetric, self.centered)
    }
}

fn is_symmetric_atoms(values: &[f64], probs: &[f64], mean: f64) -> bool {
    let mut pts: Vec<(f64, f64)> = values
        .iter()
        .zip(probs)
        .map(|(v, q)| (v - mean, *q))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = pts.len();
    (0..n).all(|i| {
        let (a, b) = (pts[i], pts[n - 1 - i]);
        (a.0 + b.0).abs() <= 1e-12 * (1.0 + a.0.abs()) && (a.1 - b.1).abs() <= 1e-12
    })
}

/// One random variable: a closed-form family or a raw moment profile.
///
/// `sigma` is the standard deviation for the Gaussian, Rademacher (atoms
/// `±σ`) and symmetric exponential families. `uniform` is uniform on
/// `[-a, a]`; `symmetric_three_point` puts mass `q` on each of `±b` and the
/// rest on 0.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "family", rename_all = "snake_case"))]
pub enum VariableSpec {
    Gaussian {
        sigma: f64,
    },
    Rademacher {
        sigma: f64,
    },
    #[cfg_attr(feature = "serde", serde(alias = "laplace"))]
    SymmetricExponential {
        sigma: f64,
    },
    Uniform {
        a: f64,
    },
    SymmetricThreePoint {
        b: f64,
        q: f64,
    },
    RawMoments {
        profile: MomentProfile,
    },
}

impl VariableSpec {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::Gaussian { sigma }.validated()
    }

    pub fn rademacher(sigma: f64) -> Result<Self> {
        Self::Rademacher { sigma }.validated()
    }

    pub fn symmetric_exponential(sigma: f64) -> Result<Self> {
        Self::SymmetricExponential { sigma }.validated()
    }

    pub fn uniform(a: f64) -> Result<Self> {
        Self::Uniform { a }.validated()
    }

    pub fn symmetric_three_point(b: f64, q: f64) -> Result<Self> {
        Self::SymmetricThreePoint { b, q }.validated()
    }

    pub fn raw(profile: MomentProfile) -> Self {
        Self::RawMoments { profile }
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// Checks parameter ranges. Variants can be built directly (or
    /// deserialized), so every engine calls this before use.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{name} must be finite and > 0, got {v}"
                )))
            }
        };
        match *self {
            Self::Gaussian { sigma }
            | Self::Rademacher { sigma }
            | Self::SymmetricExponential { sigma } => positive("sigma", sigma),
            Self::Uniform { a } => positive("a", a),
            Self::SymmetricThreePoint { b, q } => {
                positive("b", b)?;
                if q > 0.0 && q <= 0.5 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "q must lie in (0, 1/2], got {q}"
                    )))
                }
            }
            Self::RawMoments { .. } => Ok(()),
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Self::Gaussian { .. } => "gaussian",
            Self::Rademacher { .. } => "rademacher",
            Self::SymmetricExponential { .. } => "symmetric_exponential",
            Self::Uniform { .. } => "uniform",
            Self::SymmetricThreePoint { .. } => "symmetric_three_point",
            Self::RawMoments { .. } => "raw_moments",
        }
    }

    /// True exactly for the families with a logarithmically concave tail.
    pub fn log_concave_tail(&self) -> bool {
        matches!(
            self,
            Self::Gaussian { .. }
                | Self::Rademacher { .. }
                | Self::SymmetricExponential { .. }
                | Self::Uniform { .. }
        )
    }

    pub fn is_symmetric(&self) -> bool {
        match self {
            Self::RawMoments { profile } => profile.is_symmetric(),
            _ => true,
        }
    }

    pub fn is_centered(&self) -> bool {
        match self {
            Self::RawMoments { profile } => profile.is_centered(),
            _ => true,
        }
    }

    /// Largest moment order available, `None` meaning unbounded.
    pub fn available_order(&self) -> Option<usize> {
        match self {
            Self::RawMoments { profile } => Some(profile.max_order()),
            _ => None,
        }
    }

    /// `E X^2`.
    pub fn variance(&self) -> Result<f64> {
        self.validate()?;
        Ok(self.even_moment(1))
    }

    /// `E X^{2l}` for closed-form families; raw profiles must cover `2l`.
    fn even_moment(&self, l: u32) -> f64 {
        let two_l = 2 * l as i32;
        match self {
            Self::Gaussian { sigma } => double_factorial_odd(l) * libm::pow(*sigma, two_l as f64),
            Self::Rademacher { sigma } => libm::pow(*sigma, two_l as f64),
            Self::SymmetricExponential { sigma } => {
                // (2l)!/2^l · σ^{2l}, formed as Π (2j-1)·j·σ² to stay exact for small l
                (1..=l).fold(1.0, |acc, j| {
                    acc * (2 * j - 1) as f64 * j as f64 * sigma * sigma
                })
            }
            Self::Uniform { a } => libm::pow(*a, two_l as f64) / (two_l + 1) as f64,
            Self::SymmetricThreePoint { b, q } => {
                if l == 0 {
                    1.0
                } else {
                    2.0 * q * libm::pow(*b, two_l as f64)
                }
            }
            Self::RawMoments { profile } => profile.moments[2 * l as usize],
        }
    }

    /// Spec with the same shape rescaled to variance `v`.
    pub fn with_variance(&self, v: f64) -> Result<Self> {
        let c = libm::sqrt(v / self.variance()?);
        Ok(match self {
            Self::Gaussian { sigma } => Self::Gaussian { sigma: sigma * c },
            Self::Rademacher { sigma } => Self::Rademacher { sigma: sigma * c },
            Self::SymmetricExponential { sigma } => Self::SymmetricExponential { sigma: sigma * c },
            Self::Uniform { a } => Self::Uniform { a: a * c },
            Self::SymmetricThreePoint { b, q } => Self::SymmetricThreePoint { b: b * c, q: *q },
            Self::RawMoments { profile } => Self::RawMoments {
                profile: profile.scaled(c)?,
            },
        })
    }

    /// Finite support as `(value, probability)` atoms, if any.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match *self {
            Self::Rademacher { sigma } => Some(vec![(-sigma, 0.5), (sigma, 0.5)]),
            Self::SymmetricThreePoint { b, q } => {
                let mut a = vec![(-b, q), (b, q)];
                if q < 0.5 {
                    a.insert(1, (0.0, 1.0 - 2.0 * q));
                }
                Some(a)
            }
            _ => None,
        }
    }
}

/// Exact moment sequence `μ_0..μ_L` of `spec`.
pub fn moments_of(spec: &VariableSpec, max_order: usize) -> Result<MomentProfile> {
    spec.validate()?;
    if max_order < 2 {
        return Err(Error::InvalidParameter(format!(
            "max order must be at least 2, got {max_order}"
        )));
    }
    if let VariableSpec::RawMoments { profile } = spec {
        return profile.truncated(max_order);
    }
    let moments = (0..=max_order)
        .map(|l| {
            if l % 2 == 1 {
                0.0
            } else {
                spec.even_moment((l / 2) as u32)
            }
        })
        .collect();
    MomentProfile::new(moments, true, true)
}

/// `φ_X(t) = E cos(tX)`.
pub fn charfn_of(spec: &VariableSpec, t: f64) -> Result<f64> {
    spec.validate()?;
    Ok(match *spec {
        VariableSpec::Gaussian { sigma } => libm::exp(-0.5 * sigma * sigma * t * t),
        VariableSpec::Rademacher { sigma } => libm::cos(sigma * t),
        VariableSpec::SymmetricExponential { sigma } => 1.0 / (1.0 + 0.5 * sigma * sigma * t * t),
        VariableSpec::Uniform { a } => {
            let x = a * t;
            if x.abs() < 1e-4 {
                // sin x / x series
                let x2 = x * x;
                1.0 - x2 / 6.0 + x2 * x2 / 120.0
            } else {
                libm::sin(x) / x
            }
        }
        VariableSpec::SymmetricThreePoint { b, q } => 1.0 - 2.0 * q + 2.0 * q * libm::cos(b * t),
        VariableSpec::RawMoments { .. } => return Err(Error::NoCharFunction),
    })
}

/// Draws from a spec using a caller-provided generator.
#[derive(Debug, Clone)]
pub struct Sampler {
    spec: VariableSpec,
}

impl Sampler {
    pub fn new(spec: &VariableSpec) -> Result<Self> {
        spec.validate()?;
        if matches!(spec, VariableSpec::RawMoments { .. }) {
            return Err(Error::NotSamplable);
        }
        Ok(Self { spec: spec.clone() })
    }

    pub fn draw<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.spec {
            VariableSpec::Gaussian { sigma } => {
                // Box-Muller, one variate per call
                let u1 = open_unit(rng);
                let u2 = unit(rng);
                sigma * libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(core::f64::consts::TAU * u2)
            }
            VariableSpec::Rademacher { sigma } => {
                if rng.next_u32() & 1 == 0 {
                    sigma
                } else {
                    -sigma
                }
            }
            VariableSpec::SymmetricExponential { sigma } => {
                let scale = sigma / core::f64::consts::SQRT_2;
                let e = -libm::log(open_unit(rng));
                if rng.next_u32() & 1 == 0 {
                    scale * e
                } else {
                    -scale * e
                }
            }
            VariableSpec::Uniform { a } => a * (2.0 * unit(rng) - 1.0),
            VariableSpec::SymmetricThreePoint { b, q } => {
                let u = unit(rng);
                if u < q {
                    b
                } else if u < 2.0 * q {
                    -b
                } else {
                    0.0
                }
            }
            VariableSpec::RawMoments { .. } => unreachable!("rejected in Sampler::new"),
        }
    }
}

/// Uniform on `[0, 1)` with 53 random bits.
fn unit<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform on `(0, 1]`.
fn open_unit<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    1.0 - unit(rng)
}

/// `count` i.i.d. draws, deterministic in `seed`.
pub fn sample(spec: &VariableSpec, seed: u64, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::InvalidParameter("count must be at least 1".into()));
    }
    let sampler = Sampler::new(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count).map(|_| sampler.draw(&mut rng)).collect())
}
