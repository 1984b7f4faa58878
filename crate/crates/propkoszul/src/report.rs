//! Report assembly and rendering. All tables are ordered graded-
//! lexicographically on `(m + n, m, n, weight)` before printing, so output
//! bytes do not depend on the parallelism degree.

use crate::koszul::KoszulOutcome;
use std::io::Write;

/// Applies `f` over `items` on up to `jobs` threads, preserving order.
pub fn parallel_map<T: Sync, R: Send>(
    jobs: usize,
    items: &[T],
    f: impl Fn(&T) -> R + Sync + Send,
) -> Vec<R> {
    if jobs <= 1 || items.len() <= 1 {
        return items.iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.min(items.len()))
        .build()
        .expect("thread pool");
    pool.install(|| {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Json,
}

pub fn render_koszul(out: &mut dyn Write, outcome: &KoszulOutcome, format: OutputFormat) -> std::io::Result<()> {
    match format {
        OutputFormat::Json => {
            writeln!(out, "{}", serde_json::to_string_pretty(outcome).unwrap())
        }
        OutputFormat::Text => {
            writeln!(
                out,
                "koszul criterion: {} (max_weight={}, max_biarity={})",
                outcome.name, outcome.max_weight, outcome.max_biarity
            )?;
            writeln!(
                out,
                "{:<10} {:>6} {:>7} {:>6} | {:<14} {:<14} {:<14}",
                "(m,n)", "weight", "dim P", "dim D", "koszul H", "mirror H", "bar H"
            )?;
            for c in &outcome.components {
                writeln!(
                    out,
                    "{:<10} {:>6} {:>7} {:>6} | {:<14} {:<14} {:<14}",
                    format!("({},{})", c.m, c.n),
                    c.weight,
                    c.quotient_dim,
                    c.dual_dim,
                    format!("{:?}", c.koszul_homology),
                    format!("{:?}", c.mirror_homology),
                    format!("{:?}", c.bar_homology),
                )?;
            }
            for w in &outcome.witnesses {
                writeln!(
                    out,
                    "witness [{}] at ({},{}) weight {} degree {}: homology dim {}, cycle {:?}",
                    w.criterion, w.m, w.n, w.weight, w.degree, w.homology_dim, w.cycle
                )?;
            }
            writeln!(
                out,
                "criteria agree: {}",
                if outcome.verdicts_agree { "yes" } else { "NO" }
            )?;
            writeln!(
                out,
                "verdict: {}",
                if outcome.verdict {
                    "KOSZUL-UP-TO-TRUNCATION"
                } else {
                    "NOT-KOSZUL-WITHIN-TRUNCATION"
                }
            )
        }
    }
}

/// A generic dimension table: rows keyed by `(m, n, weight)`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct DimTable {
    pub name: String,
    pub kind: String,
    pub rows: Vec<DimRow>,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct DimRow {
    pub m: usize,
    pub n: usize,
    pub weight: usize,
    pub dim: usize,
}

pub fn render_dims(out: &mut dyn Write, table: &DimTable, format: OutputFormat) -> std::io::Result<()> {
    match format {
        OutputFormat::Json => writeln!(out, "{}", serde_json::to_string_pretty(table).unwrap()),
        OutputFormat::Text => {
            writeln!(out, "{} dimensions: {}", table.kind, table.name)?;
            writeln!(out, "{:<10} {:>6} {:>6}", "(m,n)", "weight", "dim")?;
            for r in &table.rows {
                writeln!(
                    out,
                    "{:<10} {:>6} {:>6}",
                    format!("({},{})", r.m, r.n),
                    r.weight,
                    r.dim
                )?;
            }
            Ok(())
        }
    }
}

/// Squared-boundary verification report.
#[derive(Clone, Debug, serde::Serialize)]
pub struct D2Report {
    pub name: String,
    pub max_weight: usize,
    pub max_biarity: usize,
    pub checks: Vec<D2Row>,
    pub all_zero: bool,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct D2Row {
    pub complex: String,
    pub m: usize,
    pub n: usize,
    pub weight: usize,
    pub ok: bool,
}

pub fn render_d2(out: &mut dyn Write, report: &D2Report, format: OutputFormat) -> std::io::Result<()> {
    match format {
        OutputFormat::Json => writeln!(out, "{}", serde_json::to_string_pretty(report).unwrap()),
        OutputFormat::Text => {
            writeln!(
                out,
                "boundary-squared checks: {} (max_weight={}, max_biarity={})",
                report.name, report.max_weight, report.max_biarity
            )?;
            for c in &report.checks {
                writeln!(
                    out,
                    "{:<18} ({},{}) weight {}: {}",
                    c.complex,
                    c.m,
                    c.n,
                    c.weight,
                    if c.ok { "zero" } else { "NONZERO" }
                )?;
            }
            writeln!(out, "all zero: {}", if report.all_zero { "yes" } else { "NO" })
        }
    }
}

/// Resolution/acyclicity style reports: homology dims per component.
#[derive(Clone, Debug, serde::Serialize)]
pub struct HomologyReport {
    pub name: String,
    pub kind: String,
    pub rows: Vec<HomologyRow>,
    pub positive: bool,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct HomologyRow {
    pub m: usize,
    pub n: usize,
    pub weight: usize,
    pub homology: Vec<usize>,
    pub expected_degree_zero: Option<usize>,
    pub ok: bool,
}

pub fn render_homology(
    out: &mut dyn Write,
    report: &HomologyReport,
    format: OutputFormat,
) -> std::io::Result<()> {
    match format {
        OutputFormat::Json => writeln!(out, "{}", serde_json::to_string_pretty(report).unwrap()),
        OutputFormat::Text => {
            writeln!(out, "{}: {}", report.kind, report.name)?;
            for r in &report.rows {
                writeln!(
                    out,
                    "({},{}) weight {}: H = {:?}{} -> {}",
                    r.m,
                    r.n,
                    r.weight,
                    r.homology,
                    match r.expected_degree_zero {
                        Some(d) => format!(" (expected degree-0 dim {d})"),
                        None => String::new(),
                    },
                    if r.ok { "ok" } else { "FAIL" }
                )?;
            }
            writeln!(out, "positive: {}", if report.positive { "yes" } else { "NO" })
        }
    }
}
