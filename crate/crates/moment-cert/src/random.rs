//! Seeded generators for the randomized suites.

use moment_cert_core::distmodel::{moments_of, MomentProfile};
use moment_cert_core::exactmoments::sum_moments;
use moment_cert_core::VariableSpec;
use rand::Rng;

/// Log-uniform on `[lo, hi]`.
pub fn log_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

/// A symmetric closed-form family with variance `v`.
pub fn symmetric_family<R: Rng + ?Sized>(rng: &mut R, v: f64) -> VariableSpec {
    let sd = v.sqrt();
    let spec = match rng.random_range(0..5) {
        0 => VariableSpec::gaussian(sd),
        1 => VariableSpec::rademacher(sd),
        2 => VariableSpec::symmetric_exponential(sd),
        3 => VariableSpec::uniform((3.0 * v).sqrt()),
        _ => {
            let q = rng.random_range(0.02..0.5);
            VariableSpec::symmetric_three_point((v / (2.0 * q)).sqrt(), q)
        }
    };
    spec.expect("generated parameters are valid")
}

/// A family with log-concave tails (Gaussian, Laplace, uniform, Rademacher).
pub fn log_concave_family<R: Rng + ?Sized>(rng: &mut R, v: f64) -> VariableSpec {
    let sd = v.sqrt();
    let spec = match rng.random_range(0..4) {
        0 => VariableSpec::gaussian(sd),
        1 => VariableSpec::rademacher(sd),
        2 => VariableSpec::symmetric_exponential(sd),
        _ => VariableSpec::uniform((3.0 * v).sqrt()),
    };
    spec.expect("generated parameters are valid")
}

/// A centered, generally asymmetric raw profile up to `order`: a Gaussian
/// plus an independent centered discrete part of relative size up to
/// `skew`.
pub fn centered_profile<R: Rng + ?Sized>(
    rng: &mut R,
    v: f64,
    order: usize,
    skew: f64,
) -> VariableSpec {
    let atoms = rng.random_range(2..=4);
    let values: Vec<f64> = (0..atoms).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut probs: Vec<f64> = (0..atoms).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|q| *q /= total);
    let fix = 1.0 - probs.iter().sum::<f64>();
    probs[0] += fix;
    let size = skew * rng.random_range(0.05..1.0);
    let discrete = MomentProfile::from_atoms(&values, &probs, order, true)
        .ok()
        .and_then(|d| d.scaled(size / d.variance().sqrt()).ok());
    let gauss =
        moments_of(&VariableSpec::gaussian(1.0).expect("unit"), order).expect("gaussian moments");
    let mut parts = vec![gauss];
    parts.extend(discrete);
    let mut moments = sum_moments(&parts, order).expect("centered parts");
    let c = (v / moments[2]).sqrt();
    let mut pw = 1.0;
    for m in moments.iter_mut() {
        *m *= pw;
        pw *= c;
    }
    moments[1] = 0.0;
    VariableSpec::raw(MomentProfile::new(moments, false, true).expect("valid centered profile"))
}
