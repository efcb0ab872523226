//! Report documents: nested, schema-versioned JSON or flat CSV.
//!
//! Every computed real number is a [`Num`] carrying how it was obtained.

use moment_cert_core::{Assumption, Provenance};
use serde::{Deserialize, Serialize};

use crate::config::{Command, OutputFormat};
use crate::error::Result;
use crate::lemmas::LemmaSummary;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    Exact,
    Quadrature,
    Mc,
}

/// A number with its provenance and absolute error budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Num {
    pub value: f64,
    pub provenance: Tag,
    pub error: f64,
}

impl Num {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            provenance: Tag::Exact,
            error: 0.0,
        }
    }

    pub fn with(value: f64, provenance: Provenance) -> Self {
        let (tag, error) = match provenance {
            Provenance::Exact => (Tag::Exact, 0.0),
            Provenance::Quadrature { error } => (Tag::Quadrature, error),
            Provenance::MonteCarlo { half_width } => (Tag::Mc, half_width),
        };
        Self {
            value,
            provenance: tag,
            error,
        }
    }

    /// The provenance of a value derived from this one, with a new error.
    pub fn derived(&self, value: f64, error: f64) -> Self {
        Self {
            value,
            provenance: self.provenance,
            error: if self.provenance == Tag::Exact {
                0.0
            } else {
                error
            },
        }
    }

    fn tag_text(&self) -> String {
        match self.provenance {
            Tag::Exact => "exact".into(),
            Tag::Quadrature => format!("quadrature±{}", self.error),
            Tag::Mc => format!("mc±{}", self.error),
        }
    }
}

/// One bound statement instantiated at one `(p, r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub statement: String,
    pub p: f64,
    pub r: Option<u32>,
    pub n: usize,
    /// `norm` or `truncated_abs_moment`.
    pub quantity: String,
    /// First summed index for a truncated absolute moment (1-based).
    pub first_index: Option<usize>,
    pub certifying: bool,
    pub center: Option<Num>,
    pub lower: Option<Num>,
    pub upper: Option<Num>,
    pub radius: Option<Num>,
    pub m: Option<Num>,
    pub growth_c: Option<Num>,
    pub cutoff_index: Option<Num>,
    pub multiplier: Option<Num>,
    pub lower_radius: Option<Num>,
    pub rademacher_moment: Option<Num>,
    pub head_norm: Option<Num>,
    pub assumptions: Vec<Assumption>,
    pub permutation: Vec<usize>,
    /// Oracle value of the bounded quantity.
    pub ground: Option<Num>,
    /// `pass` or `fail`; absent when not checked.
    pub verdict: Option<String>,
    pub margin: Option<Num>,
    /// Whether a golden row agrees with the recomputed one (`verify`).
    pub golden_match: Option<bool>,
    /// Why the statement does not apply, or why no ground truth exists.
    pub note: Option<String>,
}

impl ReportRow {
    pub fn key(&self) -> (String, u64, u32, usize) {
        (
            self.statement.clone(),
            self.p.to_bits(),
            self.r.unwrap_or(0),
            self.n,
        )
    }

    pub fn failed(&self) -> bool {
        self.verdict.as_deref() == Some("fail") || self.golden_match == Some(false)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub p: f64,
    pub n: usize,
    /// `E|S|^p`.
    pub moment: Num,
    /// `‖S‖_p`.
    pub norm: Num,
    /// `γ_p (Σ v_k)^{1/2}`.
    pub gaussian_norm: Num,
    pub deviation: Num,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub statement: String,
    pub p: f64,
    pub r: Option<u32>,
    pub n: usize,
    pub norm: Num,
    pub gaussian_norm: Num,
    /// `|‖S‖_p − γ_p (Σ v_k)^{1/2}|`.
    pub deviation: Num,
    pub radius: Num,
    /// `deviation` (with its error budget) is at most `radius`.
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Rows {
    Reports(Vec<ReportRow>),
    Moments(Vec<MomentRow>),
    Lemmas(Vec<LemmaSummary>),
    Scan(Vec<ScanRow>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub passed: bool,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub schema_version: u32,
    pub command: Command,
    pub seed: u64,
    pub rows: Rows,
    pub summary: Summary,
}

impl Document {
    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Json => Ok(serde_json::to_string_pretty(self)? + "\n"),
            OutputFormat::Csv => self.to_csv(),
        }
    }

    fn to_csv(&self) -> Result<String> {
        let (header, records) = match &self.rows {
            Rows::Reports(rows) => csv_table(rows, report_columns),
            Rows::Moments(rows) => csv_table(rows, moment_columns),
            Rows::Lemmas(rows) => csv_table(rows, lemma_columns),
            Rows::Scan(rows) => csv_table(rows, scan_columns),
        };
        let mut w = csv::Writer::from_writer(Vec::new());
        if !header.is_empty() {
            w.write_record(&header)?;
        }
        for r in records {
            w.write_record(&r)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| csv::Error::from(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// A CSV cell list; a [`Num`] expands to value and provenance columns.
#[derive(Default)]
struct Cols {
    header: Vec<String>,
    cells: Vec<String>,
}

impl Cols {
    fn text(&mut self, name: &str, value: impl ToString) -> &mut Self {
        self.header.push(name.into());
        self.cells.push(value.to_string());
        self
    }

    fn opt<T: ToString>(&mut self, name: &str, value: Option<T>) -> &mut Self {
        self.text(name, value.map(|v| v.to_string()).unwrap_or_default())
    }

    fn num(&mut self, name: &str, value: Option<&Num>) -> &mut Self {
        self.opt(name, value.map(|n| n.value));
        self.opt(&format!("{name}_provenance"), value.map(Num::tag_text))
    }
}

fn csv_table<T>(rows: &[T], f: fn(&T, &mut Cols)) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header = Vec::new();
    let mut records = Vec::new();
    for row in rows {
        let mut c = Cols::default();
        f(row, &mut c);
        header = c.header;
        records.push(c.cells);
    }
    (header, records)
}

fn report_columns(r: &ReportRow, c: &mut Cols) {
    let failed: Vec<&str> = r
        .assumptions
        .iter()
        .filter(|a| !a.satisfied)
        .map(|a| a.name.as_str())
        .collect();
    c.text("statement", &r.statement)
        .text("p", r.p)
        .opt("r", r.r)
        .text("n", r.n)
        .text("quantity", &r.quantity)
        .opt("first_index", r.first_index)
        .text("certifying", r.certifying)
        .num("center", r.center.as_ref())
        .num("lower", r.lower.as_ref())
        .num("upper", r.upper.as_ref())
        .num("radius", r.radius.as_ref())
        .num("m", r.m.as_ref())
        .num("growth_c", r.growth_c.as_ref())
        .num("cutoff_index", r.cutoff_index.as_ref())
        .num("multiplier", r.multiplier.as_ref())
        .num("ground", r.ground.as_ref())
        .opt("verdict", r.verdict.as_ref())
        .num("margin", r.margin.as_ref())
        .text("failed_assumptions", failed.join(";"))
        .opt("note", r.note.as_ref());
}

fn moment_columns(r: &MomentRow, c: &mut Cols) {
    c.text("p", r.p)
        .text("n", r.n)
        .num("moment", Some(&r.moment))
        .num("norm", Some(&r.norm))
        .num("gaussian_norm", Some(&r.gaussian_norm))
        .num("deviation", Some(&r.deviation));
}

fn lemma_columns(r: &LemmaSummary, c: &mut Cols) {
    c.text("name", &r.name)
        .text("checked", r.checked)
        .text("violations", r.violations)
        .opt("first_violation", r.first_violation.as_ref());
}

fn scan_columns(r: &ScanRow, c: &mut Cols) {
    c.text("statement", &r.statement)
        .text("p", r.p)
        .opt("r", r.r)
        .text("n", r.n)
        .num("norm", Some(&r.norm))
        .num("gaussian_norm", Some(&r.gaussian_norm))
        .num("deviation", Some(&r.deviation))
        .num("radius", Some(&r.radius))
        .text("within", r.within);
}
