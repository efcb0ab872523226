//! Randomized checks of the inequalities and counting identities the bounds
//! rest on. Each suite draws its configurations from one seeded stream and
//! evaluates them in parallel; the summary does not depend on thread count.

use moment_cert_core::bounds::{check_big_lemma, minimal_c_centered, minimal_c_symmetric};
use moment_cert_core::charfn::{check_cosine_bounds, check_main_charfn_inequality, default_grid};
use moment_cert_core::combinatorics::{
    count_no_singleton_compositions, count_support_compositions, elementary_symmetric, enumerate,
    Constraint,
};
use moment_cert_core::distmodel::moments_of;
use moment_cert_core::exactmoments::{rademacher_even_moment, tail_sum_even_moment};
use moment_cert_core::special::{factorial, snapped_ceil};
use moment_cert_core::{SequenceSpec, VariableSpec, WeightVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::random::{centered_profile, log_uniform, symmetric_family};

/// Relative slack allowed for floating-point rounding in moment comparisons.
const REL_SLACK: f64 = 1e-10;

/// Outcome of one randomized suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaSummary {
    pub name: String,
    /// Configurations whose hypotheses held and that were evaluated.
    pub checked: usize,
    pub violations: usize,
    /// Description of the first violating configuration.
    pub first_violation: Option<String>,
}

impl LemmaSummary {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn stream(seed: u64, suite: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(suite);
    rng
}

fn summarize(name: &str, outcomes: Vec<Option<String>>) -> LemmaSummary {
    let checked = outcomes.len();
    let violations = outcomes.iter().filter(|o| o.is_some()).count();
    let first_violation = outcomes.into_iter().flatten().next();
    LemmaSummary {
        name: name.to_string(),
        checked,
        violations,
        first_violation,
    }
}

/// `1 − t²μ₂/2 ≤ φ(t) ≤ 1 − t²μ₂/2 + t⁴μ₄/24` for random symmetric families.
pub fn cosine_bounds_suite(seed: u64, configs: usize) -> LemmaSummary {
    let mut rng = stream(seed, 1);
    let specs: Vec<VariableSpec> = (0..configs)
        .map(|_| {
            let v = log_uniform(&mut rng, 1e-2, 1e2);
            symmetric_family(&mut rng, v)
        })
        .collect();
    let grid = default_grid();
    let outcomes = specs
        .par_iter()
        .map(|s| match check_cosine_bounds(s, &grid) {
            Ok(r) if r.violations.is_empty() => None,
            Ok(r) => Some(format!(
                "{s:?}: {} grid points violate, first t = {}",
                r.violations.len(),
                r.violations[0]
            )),
            Err(e) => Some(format!("{s:?}: {e}")),
        })
        .collect();
    summarize("cosine_bounds", outcomes)
}

/// The characteristic-function product inequality on random sequences with
/// the smallest head length `m` that satisfies its hypotheses.
pub fn charfn_product_suite(seed: u64, configs: usize) -> LemmaSummary {
    let mut rng = stream(seed, 2);
    let mut cases = Vec::with_capacity(configs);
    while cases.len() < configs {
        let n = rng.random_range(2..=8);
        let mut vars: Vec<f64> = (0..n).map(|_| log_uniform(&mut rng, 1e-2, 1.0)).collect();
        vars.sort_by(|a, b| b.total_cmp(a));
        let xs: Vec<VariableSpec> = vars
            .iter()
            .map(|&v| symmetric_family(&mut rng, v))
            .collect();
        let ys: Vec<VariableSpec> = vars
            .iter()
            .map(|&v| symmetric_family(&mut rng, v))
            .collect();
        let ratio: Vec<f64> = ys
            .iter()
            .map(|y| {
                let p = moments_of(y, 4).expect("closed-form family");
                p.moments()[4] / p.moments()[2]
            })
            .collect();
        let fits = |m: usize| {
            let head: f64 = vars[..m].iter().sum();
            let need = ratio[m..].iter().cloned().fold(0.0, f64::max) / 6.0;
            head >= need
        };
        if let Some(m) = (1..n).find(|&m| fits(m)) {
            cases.push((xs, ys, m));
        }
    }
    let grid = default_grid();
    let outcomes = cases
        .par_iter()
        .map(
            |(xs, ys, m)| match check_main_charfn_inequality(xs, ys, *m, &grid) {
                Ok(r) if r.holds() => None,
                Ok(r) if !r.evaluated => {
                    let bad: Vec<_> = r
                        .preconditions
                        .iter()
                        .filter(|a| !a.satisfied)
                        .map(|a| &a.name)
                        .collect();
                    Some(format!(
                        "generator produced an invalid configuration: {bad:?}"
                    ))
                }
                Ok(r) => Some(format!(
                    "m = {m}, X = {xs:?}, Y = {ys:?}: min slack {}",
                    r.min_slack
                )),
                Err(e) => Some(e.to_string()),
            },
        )
        .collect();
    summarize("charfn_product_inequality", outcomes)
}

struct EvenCase {
    specs: Vec<VariableSpec>,
    r: usize,
}

/// Checks, on sorted variances with cutoff `D`,
/// `E(Σ_{k>D} X_k)^{2r} ≤ ((2r)!/2^r) e_r(v) ≤ E(Σ √v_k ε_k)^{2r}`.
fn check_even_case(case: &EvenCase, symmetric: bool) -> Result<Option<String>, String> {
    let r = case.r;
    let seq = SequenceSpec::new(case.specs.clone()).map_err(|e| e.to_string())?;
    let c = if symmetric {
        minimal_c_symmetric(&seq, r)
    } else {
        minimal_c_centered(&seq, r)
    }
    .map_err(|e| e.to_string())?;
    let d = if symmetric {
        snapped_ceil(c * c * (r - 1) as f64)
    } else {
        snapped_ceil(c * c * (r * (r - 1)) as f64 / 2.0)
    } as usize;
    if d >= seq.len() {
        return Ok(None);
    }
    let profiles = seq.profiles(2 * r).map_err(|e| e.to_string())?;
    let tail = tail_sum_even_moment(&profiles, d + 1, r).map_err(|e| e.to_string())?;
    let comb = factorial(2 * r as u32) / 2f64.powi(r as i32)
        * elementary_symmetric(seq.variances(), r).value;
    let w = WeightVector::from_variances(seq.variances()).map_err(|e| e.to_string())?;
    let rad = rademacher_even_moment(&w, r).map_err(|e| e.to_string())?;
    if tail > comb * (1.0 + REL_SLACK) {
        return Ok(Some(format!(
            "r = {r}, D = {d}: tail {tail} > symmetric-sum bound {comb}"
        )));
    }
    if comb > rad * (1.0 + REL_SLACK) {
        return Ok(Some(format!(
            "r = {r}: symmetric-sum bound {comb} > Rademacher moment {rad}"
        )));
    }
    Ok(Some(String::new()))
}

fn run_even_suite(
    name: &str,
    seed: u64,
    suite: u64,
    configs: usize,
    symmetric: bool,
) -> LemmaSummary {
    let mut rng = stream(seed, suite);
    let mut checked = Vec::new();
    // configurations with D ≥ n are vacuous and do not count toward `configs`
    let mut attempts = 0;
    while checked.len() < configs && attempts < 100 * configs {
        let batch: Vec<EvenCase> = (0..configs)
            .map(|_| {
                let r = rng.random_range(2..=5);
                let n = rng.random_range(2..=12);
                let specs = (0..n)
                    .map(|_| {
                        let v = log_uniform(&mut rng, 1e-2, 1.0);
                        if symmetric {
                            symmetric_family(&mut rng, v)
                        } else if rng.random_bool(0.8) {
                            centered_profile(&mut rng, v, 2 * r, 0.6)
                        } else {
                            symmetric_family(&mut rng, v)
                        }
                    })
                    .collect();
                EvenCase { specs, r }
            })
            .collect();
        attempts += batch.len();
        let results: Vec<Result<Option<String>, String>> = batch
            .par_iter()
            .map(|c| check_even_case(c, symmetric))
            .collect();
        for res in results {
            match res {
                Ok(None) => {}
                Ok(Some(msg)) => checked.push(if msg.is_empty() { None } else { Some(msg) }),
                Err(e) => checked.push(Some(e)),
            }
        }
    }
    checked.truncate(configs);
    summarize(name, checked)
}

/// Even-moment domination for symmetric inputs, cutoff `⌈C²(r−1)⌉`.
pub fn symmetric_even_suite(seed: u64, configs: usize) -> LemmaSummary {
    run_even_suite("symmetric_even_moments", seed, 3, configs, true)
}

/// Even-moment domination for centered inputs, cutoff `⌈C² r(r−1)/2⌉`.
pub fn centered_even_suite(seed: u64, configs: usize) -> LemmaSummary {
    run_even_suite("centered_even_moments", seed, 4, configs, false)
}

/// The Rademacher moment-ratio inequality on random sorted weights.
pub fn rademacher_ratio_suite(seed: u64, configs: usize) -> LemmaSummary {
    let mut rng = stream(seed, 5);
    let cases: Vec<(WeightVector, u32)> = (0..configs)
        .map(|_| {
            let n = rng.random_range(1..=14);
            let mut s: Vec<f64> = (0..n).map(|_| log_uniform(&mut rng, 1e-3, 1.0)).collect();
            s.sort_by(|a, b| b.total_cmp(a));
            if rng.random_bool(0.3) {
                s.iter_mut().for_each(|x| *x = -*x);
            }
            (
                WeightVector::new(s).expect("positive weights"),
                rng.random_range(1..=5),
            )
        })
        .collect();
    let outcomes = cases
        .par_iter()
        .map(|(w, r)| match check_big_lemma(w, *r) {
            Ok(c) if c.holds => None,
            Ok(c) => Some(format!("r = {r}, w = {:?}: ratio {}", w.sigmas(), c.ratio)),
            Err(e) => Some(e.to_string()),
        })
        .collect();
    summarize("rademacher_ratio", outcomes)
}

/// Enumerated counts of multi-indices with a fixed support against
/// `C(r−1, r−i)` and, with no singletons and total `2r`, `C(2r−i−1, 2(r−i))`.
pub fn counting_suite(seed: u64, configs: usize) -> [LemmaSummary; 2] {
    let mut rng = stream(seed, 6);
    let cases: Vec<(usize, u32, Vec<usize>)> = (0..configs)
        .map(|_| {
            let n = rng.random_range(1..=12);
            let r = rng.random_range(1..=6u32);
            let i = rng.random_range(1..=(r as usize).min(n));
            let mut support = sample(&mut rng, n, i).into_vec();
            support.sort_unstable();
            (n, r, support)
        })
        .collect();
    let support: Vec<Option<String>> = cases
        .par_iter()
        .map(|(n, r, s)| {
            let got = enumerate(
                *n,
                Constraint::Support {
                    total: *r,
                    support: s.clone(),
                },
            )
            .count() as u128;
            let want = count_support_compositions(*r, s.len() as u32).ok()?;
            (got != want)
                .then(|| format!("n = {n}, r = {r}, I = {s:?}: enumerated {got}, formula {want}"))
        })
        .collect();
    let no_single: Vec<Option<String>> = cases
        .par_iter()
        .map(|(n, r, s)| {
            let got = enumerate(
                *n,
                Constraint::NoSingletonsSupport {
                    total: 2 * r,
                    support: s.clone(),
                },
            )
            .count() as u128;
            let want = count_no_singleton_compositions(*r, s.len() as u32).ok()?;
            (got != want).then(|| {
                format!(
                    "n = {n}, 2r = {}, I = {s:?}: enumerated {got}, formula {want}",
                    2 * r
                )
            })
        })
        .collect();
    [
        summarize("support_count", support),
        summarize("no_singleton_count", no_single),
    ]
}

/// Every suite with `configs` configurations each.
pub fn run_all(seed: u64, configs: usize) -> Vec<LemmaSummary> {
    let [a, b] = counting_suite(seed, configs);
    vec![
        cosine_bounds_suite(seed, configs),
        charfn_product_suite(seed, configs),
        symmetric_even_suite(seed, configs),
        centered_even_suite(seed, configs),
        rademacher_ratio_suite(seed, configs),
        a,
        b,
    ]
}
