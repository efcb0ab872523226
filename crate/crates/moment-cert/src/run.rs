//! Command execution.

use std::collections::HashMap;

use moment_cert_core::bounds::{
    bound_even_centered, bound_even_symmetric, bound_general_p, bound_p_2_4,
    latala_logconcave_bounds, Quantity, Statement,
};
use moment_cert_core::exactmoments::gaussian_lp_norm;
use moment_cert_core::{BoundReport, SequenceSpec, VariableSpec};
use rayon::prelude::*;

use crate::config::{Command, RunConfig};
use crate::error::{Error, Result};
use crate::lemmas;
use crate::oracle::{ground_truth, verify_report, OracleEngine, Verdict};
use crate::report::{Document, MomentRow, Num, ReportRow, Rows, ScanRow, Summary, SCHEMA_VERSION};

/// Relative agreement required between a golden row and its recomputation.
const GOLDEN_REL_TOL: f64 = 1e-9;

pub fn engine_for(config: &RunConfig) -> OracleEngine {
    OracleEngine {
        samples: config.samples,
        seed: config.seed,
        confidence: config.confidence,
        rel_tol: config.tol,
    }
}

/// Runs `config`. The document's summary says whether every check passed.
pub fn run(config: &RunConfig) -> Result<Document> {
    config.validate()?;
    let rows = match config.command {
        Command::Moments => Rows::Moments(moments(config)?),
        Command::Bound => Rows::Reports(bound(config, None)?),
        Command::Verify => {
            let golden = match &config.golden_path {
                Some(path) => Some(load_golden(path)?),
                None => None,
            };
            Rows::Reports(bound(config, golden.as_deref())?)
        }
        Command::CheckLemmas => Rows::Lemmas(lemmas::run_all(config.seed, config.configurations)),
        Command::Scan => Rows::Scan(scan(config)?),
    };
    let failures = match &rows {
        Rows::Reports(r) => r.iter().filter(|x| x.failed()).count(),
        Rows::Moments(_) => 0,
        Rows::Lemmas(r) => r.iter().map(|x| x.violations).sum(),
        Rows::Scan(r) => r.iter().filter(|x| !x.within).count(),
    };
    Ok(Document {
        schema_version: SCHEMA_VERSION,
        command: config.command,
        seed: config.seed,
        rows,
        summary: Summary {
            passed: failures == 0,
            failures,
        },
    })
}

fn moments(config: &RunConfig) -> Result<Vec<MomentRow>> {
    let seq = SequenceSpec::new(config.expanded_variables())?;
    let engine = engine_for(config);
    config
        .p_values
        .par_iter()
        .map(|&p| {
            let est = engine.estimate(seq.sorted(), p)?;
            let norm = est.to_norm(p);
            let moment = Num::with(est.value, est.provenance);
            let norm = Num::with(norm.value, norm.provenance);
            let gaussian = gaussian_lp_norm(p)? * seq.total_variance().sqrt();
            Ok(MomentRow {
                p,
                n: seq.len(),
                moment,
                norm,
                gaussian_norm: Num::exact(gaussian),
                deviation: norm.derived((norm.value - gaussian).abs(), norm.error),
            })
        })
        .collect()
}

/// A statement that does not apply: `(statement, p, r, reason)`.
pub type Refusal = (Statement, f64, Option<u32>, String);

/// Every statement that can be instantiated at the requested `p`/`r`, with
/// refusals kept.
pub fn collect_reports(
    seq: &SequenceSpec,
    p_values: &[f64],
    r_values: &[u32],
    engine: &OracleEngine,
) -> Vec<std::result::Result<BoundReport, Refusal>> {
    let mut out = Vec::new();
    let refuse = |s, p, r, e: moment_cert_core::Error| Err((s, p, r, e.to_string()));
    for &p in p_values {
        if (2.0..=4.0).contains(&p) {
            out.push(
                bound_p_2_4(seq, p).or_else(|e| refuse(Statement::ModerateMomentBand, p, None, e)),
            );
        }
        for &r in r_values {
            if p <= 2.0 * r as f64 {
                out.push(
                    bound_general_p(seq, p, r).or_else(|e| {
                        refuse(Statement::TruncatedRademacherDomination, p, Some(r), e)
                    }),
                );
            }
        }
        match latala_logconcave_bounds(seq, p, engine) {
            Ok([a, b]) => out.extend([Ok(a), Ok(b)]),
            Err(e) => out.push(refuse(Statement::LogConcaveRadius, p, None, e)),
        }
    }
    for &r in r_values {
        if r >= 2 {
            let p = 2.0 * r as f64;
            out.push(
                bound_even_symmetric(seq, r)
                    .or_else(|e| refuse(Statement::EvenSymmetricBand, p, Some(r), e)),
            );
            out.push(
                bound_even_centered(seq, r)
                    .or_else(|e| refuse(Statement::EvenCenteredUpper, p, Some(r), e)),
            );
        }
    }
    out
}

fn report_row(report: &BoundReport) -> ReportRow {
    let tagged = |v: Option<f64>| v.map(|x| Num::with(x, report.provenance));
    let exact = |v: Option<f64>| v.map(Num::exact);
    let c = &report.constants;
    let (quantity, first_index) = match report.quantity {
        Quantity::Norm => ("norm", None),
        Quantity::TruncatedAbsMoment { first_index } => ("truncated_abs_moment", Some(first_index)),
    };
    ReportRow {
        statement: report.statement.as_str().into(),
        p: report.p,
        r: report.r,
        n: report.n,
        quantity: quantity.into(),
        first_index,
        certifying: report.certifying(),
        center: Some(Num::exact(report.center)),
        lower: tagged(report.lower),
        upper: tagged(report.upper),
        radius: exact(report.radius),
        m: exact(c.m.map(|m| m as f64)),
        growth_c: exact(c.growth_c),
        cutoff_index: exact(c.cutoff_index.map(|m| m as f64)),
        multiplier: exact(c.multiplier),
        lower_radius: exact(c.lower_radius),
        rademacher_moment: tagged(c.rademacher_moment),
        head_norm: tagged(c.head_norm),
        assumptions: report.assumptions.clone(),
        permutation: report.permutation.clone(),
        ground: None,
        verdict: None,
        margin: None,
        golden_match: None,
        note: None,
    }
}

fn refusal_row(
    statement: Statement,
    p: f64,
    r: Option<u32>,
    n: usize,
    reason: String,
) -> ReportRow {
    ReportRow {
        statement: statement.as_str().into(),
        p,
        r,
        n,
        quantity: "norm".into(),
        first_index: None,
        certifying: false,
        center: None,
        lower: None,
        upper: None,
        radius: None,
        m: None,
        growth_c: None,
        cutoff_index: None,
        multiplier: None,
        lower_radius: None,
        rademacher_moment: None,
        head_norm: None,
        assumptions: Vec::new(),
        permutation: Vec::new(),
        ground: None,
        verdict: None,
        margin: None,
        golden_match: None,
        note: Some(reason),
    }
}

fn close(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => (x - y).abs() <= GOLDEN_REL_TOL * x.abs().max(y.abs()).max(1e-300),
        _ => false,
    }
}

/// Bound reports checked against the oracles. With `golden`, the golden
/// rows' intervals are what gets checked, and each golden row must also
/// agree with its recomputation.
fn bound(config: &RunConfig, golden: Option<&[ReportRow]>) -> Result<Vec<ReportRow>> {
    let seq = SequenceSpec::new(config.expanded_variables())?;
    let engine = engine_for(config);
    let reports = collect_reports(&seq, &config.p_values, &config.r_values, &engine);
    let golden: Option<HashMap<_, &ReportRow>> =
        golden.map(|g| g.iter().map(|row| (row.key(), row)).collect());
    let mut rows: Vec<ReportRow> = reports
        .into_par_iter()
        .map(|item| match item {
            Err((s, p, r, reason)) => refusal_row(s, p, r, seq.len(), reason),
            Ok(mut report) => {
                let mut row = report_row(&report);
                if let Some(g) = &golden {
                    match g.get(&row.key()) {
                        Some(gold) => {
                            let ok = gold.certifying == row.certifying
                                && close(gold.lower.map(|x| x.value), report.lower)
                                && close(gold.upper.map(|x| x.value), report.upper);
                            row.golden_match = Some(ok);
                            report.lower = gold.lower.map(|x| x.value);
                            report.upper = gold.upper.map(|x| x.value);
                            row.lower = gold.lower;
                            row.upper = gold.upper;
                        }
                        None => row.golden_match = Some(false),
                    }
                }
                if report.certifying() {
                    check_row(&mut row, &report, &seq, &engine);
                }
                row
            }
        })
        .collect();
    if let Some(g) = &golden {
        // golden rows with no recomputed counterpart are mismatches
        for (key, gold) in g {
            if !rows.iter().any(|r| &r.key() == key) {
                let mut extra = (*gold).clone();
                extra.golden_match = Some(false);
                extra.note = Some("golden row not produced by this configuration".into());
                rows.push(extra);
            }
        }
    }
    rows.sort_by(|a, b| {
        (a.statement.as_str(), a.p, a.r, a.n)
            .partial_cmp(&(b.statement.as_str(), b.p, b.r, b.n))
            .expect("finite p")
    });
    Ok(rows)
}

fn check_row(row: &mut ReportRow, report: &BoundReport, seq: &SequenceSpec, engine: &OracleEngine) {
    match ground_truth(seq, report.p, report.quantity, engine) {
        Ok(g) => {
            row.ground = Some(Num::with(g.value, g.provenance));
            match verify_report(report, &g) {
                Ok(Verdict::Pass) => row.verdict = Some("pass".into()),
                Ok(Verdict::Fail { margin }) => {
                    row.verdict = Some("fail".into());
                    row.margin = Some(Num::with(margin, g.provenance));
                }
                Err(e) => row.note = Some(e.to_string()),
            }
        }
        Err(e) => row.note = Some(format!("no ground truth: {e}")),
    }
}

fn load_golden(path: &std::path::Path) -> Result<Vec<ReportRow>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let doc: Document =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("golden file: {e}")))?;
    match doc.rows {
        Rows::Reports(rows) => Ok(rows),
        _ => Err(Error::Config(
            "golden file does not hold bound reports".into(),
        )),
    }
}

/// For i.i.d. copies of the first variable's shape, scaled to total
/// variance 1, tabulates `|‖S‖_p − γ_p|` against every certifying radius.
fn scan(config: &RunConfig) -> Result<Vec<ScanRow>> {
    let shape = config.variables[0].spec.clone();
    let engine = engine_for(config);
    let cells: Vec<(usize, f64)> = config
        .scan_n
        .iter()
        .flat_map(|&n| config.p_values.iter().map(move |&p| (n, p)))
        .collect();
    let nested: Vec<Vec<ScanRow>> = cells
        .par_iter()
        .map(|&(n, p)| scan_cell(&shape, n, p, &engine))
        .collect::<Result<_>>()?;
    let mut rows: Vec<ScanRow> = nested.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        (a.statement.as_str(), a.p, a.r, a.n)
            .partial_cmp(&(b.statement.as_str(), b.p, b.r, b.n))
            .expect("finite p")
    });
    Ok(rows)
}

fn scan_cell(
    shape: &VariableSpec,
    n: usize,
    p: f64,
    engine: &OracleEngine,
) -> Result<Vec<ScanRow>> {
    let spec = shape.with_variance(1.0 / n as f64)?;
    let seq = SequenceSpec::new(vec![spec; n])?;
    let est = engine.estimate(seq.sorted(), p)?.to_norm(p);
    let norm = Num::with(est.value, est.provenance);
    let gaussian = gaussian_lp_norm(p)?;
    let deviation = norm.derived((est.value - gaussian).abs(), norm.error);
    let even_r = (p.fract() == 0.0 && (p as u32).is_multiple_of(2)).then_some(p as u32 / 2);
    let mut candidates = Vec::new();
    if (2.0..=4.0).contains(&p) {
        candidates.extend(bound_p_2_4(&seq, p).ok());
    }
    if let Some(r) = even_r.filter(|&r| r >= 2) {
        candidates.extend(bound_even_symmetric(&seq, r).ok());
    }
    if let Ok([a, _]) = latala_logconcave_bounds(&seq, p, engine) {
        candidates.push(a);
    }
    Ok(candidates
        .into_iter()
        .filter(|r| r.certifying())
        .filter_map(|r| {
            let radius = r.radius?;
            Some(ScanRow {
                statement: r.statement.as_str().into(),
                p,
                r: r.r,
                n,
                norm,
                gaussian_norm: Num::exact(gaussian),
                deviation,
                radius: Num::exact(radius),
                within: deviation.value - deviation.error <= radius,
            })
        })
        .collect())
}
