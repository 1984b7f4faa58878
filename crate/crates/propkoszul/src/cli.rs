//! Command-line front end: batch computations over a preset or a
//! presentation file, with deterministic text or JSON output.
//!
//! Exit codes: 0 for success or a positive verdict, 1 for a negative
//! verdict, 2 for usage or input errors.

use crate::koszul::koszul_check;
use crate::presentation::{parse_presentation, Presentation};
use crate::presets::load_preset;
use crate::propcalc::{Engine, TruncationParams};
use crate::report::{
    render_d2, render_dims, render_homology, render_koszul, D2Report, D2Row, DimRow, DimTable,
    HomologyReport, HomologyRow, OutputFormat,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "propkoszul",
    version,
    about = "Composition calculus and Koszul criterion checks for quadratic props over the rationals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dimension table of the quotient prop per (m, n, weight)
    Dims(CommonArgs),
    /// Dimension table of the free prop (connected graphs)
    Free(CommonArgs),
    /// Dimension table of the Koszul dual
    Dual(CommonArgs),
    /// Verify that all boundaries square to zero (bar, cobar, Koszul and
    /// augmented complexes)
    D2(CommonArgs),
    /// Koszul criterion report with a truncation verdict
    Koszul(CommonArgs),
    /// Resolution check: homology of the cobar construction on the dual
    /// must match the quotient in degree zero
    Barcobar(CommonArgs),
    /// Evaluate every relation on a structure file
    Gebra(GebraArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> OutputFormat {
        match f {
            Format::Text => OutputFormat::Text,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Built-in presentation name
    #[arg(long, conflicts_with = "file")]
    preset: Option<String>,
    /// Presentation file path
    #[arg(long)]
    file: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    max_weight: usize,
    #[arg(long, default_value_t = 6)]
    max_biarity: usize,
    /// Restrict to one component (two values: M N)
    #[arg(long, num_args = 2, value_names = ["M", "N"])]
    component: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Parallelism degree (default: PROPKOSZUL_JOBS or all cores)
    #[arg(long, short = 'j')]
    jobs: Option<usize>,
}

#[derive(Args, Debug)]
struct GebraArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Structure file with the operation maps
    #[arg(long)]
    structure: PathBuf,
}

impl CommonArgs {
    fn presentation(&self) -> crate::Result<Presentation> {
        match (&self.preset, &self.file) {
            (Some(name), None) => load_preset(name),
            (None, Some(path)) => parse_presentation(&std::fs::read_to_string(path)?),
            _ => Err(crate::Error::Parse(
                "exactly one of --preset and --file is required".into(),
            )),
        }
    }

    fn trunc(&self) -> crate::Result<TruncationParams> {
        if self.max_weight < 1 || self.max_biarity < 1 {
            return Err(crate::Error::Parse(
                "truncation bounds must be at least 1".into(),
            ));
        }
        Ok(TruncationParams::new(self.max_weight, self.max_biarity))
    }

    fn jobs(&self) -> usize {
        self.jobs
            .or_else(|| {
                std::env::var("PROPKOSZUL_JOBS")
                    .ok()
                    .and_then(|v| v.parse().ok())
            })
            .unwrap_or_else(|| {
                std::thread::available_parallelism()
                    .map(|p| p.get())
                    .unwrap_or(1)
            })
            .max(1)
    }

    fn component_list(&self, trunc: TruncationParams) -> Vec<(usize, usize)> {
        let all = trunc.components();
        match &self.component {
            Some(c) => all.into_iter().filter(|&(m, n)| m == c[0] && n == c[1]).collect(),
            None => all,
        }
    }
}

/// Runs the command line; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn execute(cli: Cli) -> crate::Result<i32> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Dims(args) => {
            let pres = args.presentation()?;
            let trunc = args.trunc()?;
            let mut engine = Engine::new(pres.clone())?;
            let mut rows = Vec::new();
            for (m, n) in args.component_list(trunc) {
                for w in 0..=trunc.max_weight {
                    rows.push(DimRow {
                        m,
                        n,
                        weight: w,
                        dim: engine.quotient(m, n, w).dim,
                    });
                }
            }
            let table = DimTable {
                name: pres.name,
                kind: "quotient".into(),
                rows,
            };
            render_dims(&mut out, &table, args.format.into())?;
            Ok(0)
        }
        Command::Free(args) => {
            let pres = args.presentation()?;
            let trunc = args.trunc()?;
            let mut engine = Engine::new(pres.clone())?;
            let mut rows = Vec::new();
            for (m, n) in args.component_list(trunc) {
                for w in 0..=trunc.max_weight {
                    rows.push(DimRow {
                        m,
                        n,
                        weight: w,
                        dim: engine.free_component(m, n, w, true).dim,
                    });
                }
            }
            let table = DimTable {
                name: pres.name,
                kind: "free".into(),
                rows,
            };
            render_dims(&mut out, &table, args.format.into())?;
            Ok(0)
        }
        Command::Dual(args) => {
            let pres = args.presentation()?;
            let trunc = args.trunc()?;
            let mut engine = Engine::new(pres.clone())?;
            let mut rows = Vec::new();
            for (m, n) in args.component_list(trunc) {
                for w in 1..=trunc.max_weight {
                    rows.push(DimRow {
                        m,
                        n,
                        weight: w,
                        dim: engine.koszul_dual_component(m, n, w).dim,
                    });
                }
            }
            let table = DimTable {
                name: pres.name,
                kind: "koszul-dual".into(),
                rows,
            };
            render_dims(&mut out, &table, args.format.into())?;
            Ok(0)
        }
        Command::D2(args) => {
            let pres = args.presentation()?;
            let trunc = args.trunc()?;
            let mut engine = Engine::new(pres.clone())?;
            let mut checks = Vec::new();
            for (m, n) in args.component_list(trunc) {
                for w in 1..=trunc.max_weight {
                    let bar_ok = engine.bar_complex(m, n, w).validate().is_ok();
                    checks.push(D2Row {
                        complex: "bar".into(),
                        m,
                        n,
                        weight: w,
                        ok: bar_ok,
                    });
                    let cobar_ok = engine.cobar_complex(m, n, w).validate().is_ok();
                    checks.push(D2Row {
                        complex: "cobar".into(),
                        m,
                        n,
                        weight: w,
                        ok: cobar_ok,
                    });
                    let koszul_ok = engine.koszul_complex(m, n, w).validate().is_ok();
                    checks.push(D2Row {
                        complex: "koszul".into(),
                        m,
                        n,
                        weight: w,
                        ok: koszul_ok,
                    });
                    let aug_ok = engine.augmented_complex(m, n, w).validate().is_ok();
                    checks.push(D2Row {
                        complex: "augmented-bar".into(),
                        m,
                        n,
                        weight: w,
                        ok: aug_ok,
                    });
                }
            }
            let all_zero = checks.iter().all(|c| c.ok);
            let report = D2Report {
                name: pres.name,
                max_weight: trunc.max_weight,
                max_biarity: trunc.max_biarity,
                checks,
                all_zero,
            };
            render_d2(&mut out, &report, args.format.into())?;
            Ok(if all_zero { 0 } else { 1 })
        }
        Command::Koszul(args) => {
            let pres = args.presentation()?;
            let trunc = args.trunc()?;
            let outcome = koszul_check(&pres, trunc, args.jobs())?;
            render_koszul(&mut out, &outcome, args.format.into())?;
            Ok(if outcome.verdict { 0 } else { 1 })
        }
        Command::Barcobar(args) => {
            let pres = args.presentation()?;
            let trunc = args.trunc()?;
            let mut engine = Engine::new(pres.clone())?;
            let mut rows = Vec::new();
            for (m, n) in args.component_list(trunc) {
                for w in 1..=trunc.max_weight {
                    let complex = engine.cobar_complex(m, n, w);
                    complex.validate()?;
                    let homology = complex.homology_dims();
                    let expected = engine.quotient(m, n, w).dim;
                    let ok = homology[0] == expected
                        && homology[1..].iter().all(|&d| d == 0);
                    rows.push(HomologyRow {
                        m,
                        n,
                        weight: w,
                        homology,
                        expected_degree_zero: Some(expected),
                        ok,
                    });
                }
            }
            let positive = rows.iter().all(|r| r.ok);
            let report = HomologyReport {
                name: pres.name,
                kind: "cobar-on-dual resolution".into(),
                rows,
                positive,
            };
            render_homology(&mut out, &report, args.format.into())?;
            Ok(if positive { 0 } else { 1 })
        }
        Command::Gebra(args) => {
            let pres = args.common.presentation()?;
            let text = std::fs::read_to_string(&args.structure)?;
            let structure = crate::gebra::GebraStructure::parse(&text, &pres)?;
            let report = crate::gebra::gebra_check(&pres, &structure)?;
            match OutputFormat::from(args.common.format) {
                OutputFormat::Json => {
                    writeln!(out, "{}", serde_json::to_string_pretty(&report).unwrap())?;
                }
                OutputFormat::Text => {
                    writeln!(out, "structure check: {} (dim {})", report.name, report.dimension)?;
                    for r in &report.relations {
                        writeln!(
                            out,
                            "relation {} in ({},{}): {}{}",
                            r.index,
                            r.component[0],
                            r.component[1],
                            if r.pass { "pass" } else { "FAIL" },
                            match &r.witness {
                                Some((o, i, v)) => format!(" witness out={o:?} in={i:?} value={v}"),
                                None => String::new(),
                            }
                        )?;
                    }
                    writeln!(out, "verdict: {}", if report.pass { "pass" } else { "fail" })?;
                }
            }
            Ok(if report.pass { 0 } else { 1 })
        }
    }
}

use std::io::Write;
