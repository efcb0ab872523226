//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use moment_cert::config::RunConfig;
use moment_cert::lemmas;
use moment_cert::oracle::{ground_truth, verify_report, OracleEngine, Verdict};
use moment_cert::random::{centered_profile, log_concave_family, log_uniform, symmetric_family};
use moment_cert::report::Rows;
use moment_cert::run::{collect_reports, run};
use moment_cert_core::bounds::{
    bound_even_symmetric, check_big_lemma, latala_logconcave_bounds, Statement,
};
use moment_cert_core::charfn::{haagerup_moment, CharFunction};
use moment_cert_core::combinatorics::{enumerate, multinomial_f64, Constraint};
use moment_cert_core::distmodel::{moments_of, MomentProfile};
use moment_cert_core::exactmoments::sum_even_moment;
use moment_cert_core::{SequenceSpec, VariableSpec, WeightVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(start: Instant, limit: Duration) -> Result<(), String> {
    ensure(start.elapsed() < limit, || {
        format!("took {:.1?}, limit {limit:?}", start.elapsed())
    })
}

/// Multi-index expansion of `E(Σ X_k)^{2r}`, independent of the DP.
fn enumerated_even_moment(profiles: &[MomentProfile], r: u32) -> f64 {
    let n = profiles.len();
    let symmetric = profiles.iter().all(MomentProfile::is_symmetric);
    if symmetric {
        enumerate(n, Constraint::Total(r))
            .map(|a| {
                let doubled =
                    moment_cert_core::MultiIndex::new(a.entries().iter().map(|x| 2 * x).collect());
                let coeff = multinomial_f64(2 * r, &doubled).unwrap();
                coeff
                    * a.entries()
                        .iter()
                        .zip(profiles)
                        .map(|(&k, p)| p.moments()[2 * k as usize])
                        .product::<f64>()
            })
            .sum()
    } else {
        enumerate(n, Constraint::NoSingletons(2 * r))
            .map(|a| {
                let coeff = multinomial_f64(2 * r, &a).unwrap();
                coeff
                    * a.entries()
                        .iter()
                        .zip(profiles)
                        .map(|(&k, p)| p.moments()[k as usize])
                        .product::<f64>()
            })
            .sum()
    }
}

fn exact_engine_agreement() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let n = rng.random_range(1..=8);
        let r = rng.random_range(1..=4u32);
        let specs: Vec<VariableSpec> = (0..n)
            .map(|_| {
                let v = log_uniform(&mut rng, 1e-2, 1.0);
                if i % 2 == 0 {
                    symmetric_family(&mut rng, v)
                } else {
                    centered_profile(&mut rng, v, 2 * r as usize, 0.8)
                }
            })
            .collect();
        let profiles: Vec<MomentProfile> = specs
            .iter()
            .map(|s| moments_of(s, 2 * r as usize).unwrap())
            .collect();
        let dp = sum_even_moment(&profiles, r as usize).map_err(|e| e.to_string())?;
        let brute = enumerated_even_moment(&profiles, r);
        let rel = (dp - brute).abs() / brute.abs();
        worst = worst.max(rel);
        ensure(rel <= 1e-10, || {
            format!("config {i}: DP {dp} vs enumeration {brute} (rel {rel:e})")
        })?;
    }
    within_time(start, Duration::from_secs(60))?;
    Ok(format!(
        "200 configurations, worst relative gap {worst:.1e}"
    ))
}

fn quadrature_golden_values() -> Outcome {
    let mut parts = Vec::new();
    for (name, spec, want) in [
        (
            "E|G|^3",
            VariableSpec::gaussian(1.0).unwrap(),
            2.0 * (2.0 / std::f64::consts::PI).sqrt(),
        ),
        (
            "Laplace E|X|^3",
            VariableSpec::symmetric_exponential(1.0).unwrap(),
            3.0 / 2f64.sqrt(),
        ),
    ] {
        let start = Instant::now();
        let got = haagerup_moment(&CharFunction::new(&spec).unwrap(), 3.0, 1e-9)
            .map_err(|e| e.to_string())?;
        within_time(start, Duration::from_secs(1))?;
        let gap = (got.value - want).abs();
        ensure(gap <= 1e-6, || format!("{name}: {} vs {want}", got.value))?;
        parts.push(format!(
            "{name} = {:.9} (gap {gap:.1e}, {:.0?})",
            got.value,
            start.elapsed()
        ));
    }
    Ok(parts.join("; "))
}

fn theorem_checkers() -> Outcome {
    let start = Instant::now();
    let suites = lemmas::run_all(20_240, 1000);
    within_time(start, Duration::from_secs(300))?;
    let mut parts = Vec::new();
    for s in &suites {
        ensure(s.checked >= 1000, || {
            format!("{} checked only {}", s.name, s.checked)
        })?;
        ensure(s.passed(), || {
            format!(
                "{}: {} violations, first {:?}",
                s.name, s.violations, s.first_violation
            )
        })?;
        parts.push(format!("{} {}", s.name, s.checked));
    }
    Ok(format!(
        "zero violations ({}) in {:.1?}",
        parts.join(", "),
        start.elapsed()
    ))
}

const P_GRID: [f64; 7] = [2.0, 2.5, 3.0, 3.5, 4.0, 6.0, 8.0];

fn random_sequence(rng: &mut ChaCha8Rng, kind: usize) -> (Vec<VariableSpec>, f64, u32) {
    let n = rng.random_range(1..=12);
    let p = match kind {
        2 => [2.0, 4.0, 6.0, 8.0][rng.random_range(0..4)],
        _ => P_GRID[rng.random_range(0..P_GRID.len())],
    };
    let r_min = (p / 2.0).ceil() as u32;
    let r = rng.random_range(r_min.max(1)..=4.max(r_min));
    let specs = (0..n)
        .map(|_| {
            let v = log_uniform(rng, 1e-2, 1.0);
            match kind {
                0 => symmetric_family(rng, v),
                1 => log_concave_family(rng, v),
                _ => centered_profile(rng, v, 2 * r as usize, 0.6),
            }
        })
        .collect();
    (specs, p, r)
}

fn certification_soundness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7_000);
    let sequences: Vec<_> = (0..600).map(|i| random_sequence(&mut rng, i % 3)).collect();
    let engine = OracleEngine {
        seed: 11,
        ..OracleEngine::default()
    };
    let results: Vec<Result<Vec<(Statement, f64)>, String>> = sequences
        .par_iter()
        .map(|(specs, p, r)| {
            let seq = SequenceSpec::new(specs.clone()).map_err(|e| e.to_string())?;
            let mut checked = Vec::new();
            for report in collect_reports(&seq, &[*p], &[*r], &engine).into_iter().flatten() {
                if !report.certifying() {
                    continue;
                }
                let g = ground_truth(&seq, report.p, report.quantity, &engine)
                    .map_err(|e| format!("{} p={}: no ground truth: {e}", report.statement.as_str(), report.p))?;
                match verify_report(&report, &g).map_err(|e| e.to_string())? {
                    Verdict::Pass => checked.push((report.statement, report.p)),
                    Verdict::Fail { margin } => {
                        return Err(format!(
                            "{} p={} r={:?}: ground {} outside [{:?}, {:?}] by {margin:e}; specs {specs:?}",
                            report.statement.as_str(),
                            report.p,
                            report.r,
                            g.value,
                            report.lower,
                            report.upper
                        ))
                    }
                }
            }
            Ok(checked)
        })
        .collect();
    let mut total = 0;
    let mut per_statement = std::collections::BTreeMap::new();
    for r in results {
        for (s, _) in r? {
            total += 1;
            *per_statement.entry(s.as_str()).or_insert(0usize) += 1;
        }
    }
    within_time(start, Duration::from_secs(900))?;
    ensure(per_statement.len() == 6, || {
        format!("not every statement certified at least once: {per_statement:?}")
    })?;
    Ok(format!(
        "600 sequences, {total} certifying reports, zero FAILs {per_statement:?} in {:.1?}",
        start.elapsed()
    ))
}

fn worked_instance() -> Outcome {
    let seq =
        SequenceSpec::new(vec![VariableSpec::symmetric_exponential(1.0).unwrap(); 10]).unwrap();
    let rep = bound_even_symmetric(&seq, 2).map_err(|e| e.to_string())?;
    let exact = sum_even_moment(&seq.profiles(4).unwrap(), 2)
        .unwrap()
        .powf(0.25);
    let [radius, _] =
        latala_logconcave_bounds(&seq, 4.0, &OracleEngine::default()).map_err(|e| e.to_string())?;
    let deviation = (exact - radius.center).abs();
    let (lower, upper) = (rep.lower.unwrap_or(f64::NAN), rep.upper.unwrap_or(f64::NAN));
    let close = |got: f64, want: f64, what: &str| {
        ensure((got - want).abs() <= 1e-3, || {
            format!("{what}: {got} vs {want}")
        })
    };
    close(lower, 3.9482, "lower")?;
    close(exact, 4.2625, "exact norm")?;
    close(upper, 6.1620, "upper")?;
    close(deviation, 0.1005, "deviation")?;
    close(radius.radius.unwrap_or(f64::NAN), 4.0, "log-concave radius")?;
    ensure(lower <= exact && exact <= upper && deviation <= 4.0, || {
        "ordering".into()
    })?;
    Ok(format!(
        "lower {lower:.4}, exact {exact:.4}, upper {upper:.4}, deviation {deviation:.4} <= 4"
    ))
}

fn optimality_trend() -> Outcome {
    let start = Instant::now();
    let mut ratios = Vec::new();
    for n in [4usize, 16, 64, 256] {
        let w = WeightVector::new(vec![1.0 / (n as f64).sqrt(); n]).unwrap();
        ratios.push(check_big_lemma(&w, 2).map_err(|e| e.to_string())?.ratio);
    }
    within_time(start, Duration::from_secs(1))?;
    ensure(ratios.iter().all(|&x| x >= 1.0), || {
        format!("ratio below 1: {ratios:?}")
    })?;
    ensure(ratios.windows(2).all(|w| w[1] < w[0]), || {
        format!("not strictly decreasing: {ratios:?}")
    })?;
    Ok(format!("ratios {ratios:.6?}"))
}

fn gaussian_approach_scan() -> Outcome {
    let start = Instant::now();
    let cfg = RunConfig::from_json(
        r#"{"command": "scan", "variables": [{"family": "symmetric_exponential", "sigma": 1.0}],
            "p_values": [4], "scan_n": [4, 16, 64, 256]}"#,
    )
    .map_err(|e| e.to_string())?;
    let doc = run(&cfg).map_err(|e| e.to_string())?;
    let Rows::Scan(rows) = doc.rows else {
        return Err("scan returned no scan rows".into());
    };
    let rows: Vec<_> = rows
        .into_iter()
        .filter(|r| r.statement == Statement::EvenSymmetricBand.as_str())
        .collect();
    ensure(rows.len() == 4, || {
        format!("expected 4 even-band rows, got {}", rows.len())
    })?;
    let mut parts = Vec::new();
    for row in &rows {
        let want = 2.0 / (row.n as f64).sqrt();
        let rel = (row.radius.value - want).abs() / want;
        ensure(rel <= 1e-12, || {
            format!("n={}: radius {} vs {want}", row.n, row.radius.value)
        })?;
        ensure(row.deviation.value < row.radius.value, || {
            format!("n={}: deviation above radius", row.n)
        })?;
        parts.push(format!(
            "n={} dev {:.2e} < {:.4}",
            row.n, row.deviation.value, row.radius.value
        ));
    }
    within_time(start, Duration::from_secs(10))?;
    Ok(parts.join(", "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("1 exact-engine agreement", exact_engine_agreement),
        ("2 quadrature golden values", quadrature_golden_values),
        ("3 theorem checkers", theorem_checkers),
        ("4 certification soundness", certification_soundness),
        ("5 worked instance", worked_instance),
        ("6 optimality trend", optimality_trend),
        ("7 gaussian-approach scan", gaussian_approach_scan),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("criterion {name}: PASS ({detail})"),
            Err(detail) => {
                failed += 1;
                println!("criterion {name}: FAIL ({detail})");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
