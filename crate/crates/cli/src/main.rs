mod render;
mod suite;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use isosplit::dynkin::golden::{self, GoldenLists, GoldenReport};
use isosplit::dynkin::{
    catalog, catalog_cases, find_record, CatalogFilter, ClassFilter, FamilySelector, FibrationRecord,
    DEFAULT_RANK_CAP,
};
use isosplit::exec::Exec;
use isosplit::homspace::GeometryTolerances;
use isosplit::liealg::LieTolerances;

use suite::{Tolerances, VerifySettings};

pub const SCHEMA_VERSION: u32 = 1;
const MAX_RANK_CAP: usize = 12;

#[derive(Parser, Debug)]
#[command(name = "isosplit", version, about = "Isotropy-splitting fibrations of compact homogeneous spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run everything on one thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List splitting fibrations, or diff them against the reference lists.
    Catalog(CatalogArgs),
    /// Run the numeric checks on a case with a concrete matrix model.
    Verify(VerifyArgs),
    /// Weyl orders, diagram automorphisms, model invariants and reference lists.
    Selfcheck(SelfcheckArgs),
}

#[derive(Args, Debug)]
struct CatalogArgs {
    /// Family letter or type such as E8; repeatable or comma separated.
    #[arg(long, value_delimiter = ',')]
    family: Vec<FamilySelector>,
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_RANK_CAP)]
    rank_cap: usize,
    /// hermitian, symmetric, nearly-kaehler, 5-symmetric or odd-grassmannian.
    #[arg(long, value_delimiter = ',')]
    class: Vec<ClassFilter>,
    #[arg(long)]
    n0: Option<i64>,
    /// Only bases whose isotropy is simple (these have no splitting).
    #[arg(long, conflicts_with = "splittable")]
    simple_k: bool,
    /// Only bases with at least one splitting.
    #[arg(long)]
    splittable: bool,
    /// Compare with the reference lists (the built-in ones, or a TOML file).
    #[arg(long, num_args = 0..=1, value_name = "PATH")]
    golden: Option<Option<PathBuf>>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Case id, alias (su3-hopf, so6-stiefel) or base-label slug.
    case_id: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 3)]
    restarts: usize,
    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Args, Debug)]
struct SelfcheckArgs {
    #[arg(long, default_value_t = DEFAULT_RANK_CAP)]
    rank_cap: usize,
    /// Reference lists to compare against instead of the built-in ones.
    #[arg(long, value_name = "PATH")]
    golden: Option<PathBuf>,
    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Args, Debug)]
struct TolArgs {
    #[arg(long)]
    tol_structural: Option<f64>,
    #[arg(long)]
    tol_ad_invariance: Option<f64>,
    #[arg(long)]
    tol_exp_inverse: Option<f64>,
    #[arg(long)]
    tol_membership: Option<f64>,
    #[arg(long)]
    tol_natural_reductivity: Option<f64>,
    #[arg(long)]
    tol_log_residual: Option<f64>,
    #[arg(long)]
    tol_constancy: Option<f64>,
    #[arg(long)]
    tol_gap: Option<f64>,
    #[arg(long)]
    tol_certificate: Option<f64>,
    #[arg(long)]
    tol_fixed_fiber: Option<f64>,
    #[arg(long)]
    tol_killing_length: Option<f64>,
    #[arg(long)]
    tol_nonconstancy: Option<f64>,
}

impl TolArgs {
    fn resolve(&self) -> anyhow::Result<Tolerances> {
        let d = Tolerances::default();
        let pick = |name: &str, v: Option<f64>, dflt: f64| -> anyhow::Result<f64> {
            match v {
                Some(x) if !(x.is_finite() && x > 0.0) => bail!("--tol-{name} must be positive, got {x}"),
                Some(x) => Ok(x),
                None => Ok(dflt),
            }
        };
        Ok(Tolerances {
            lie: LieTolerances {
                structural: pick("structural", self.tol_structural, d.lie.structural)?,
                ad_invariance: pick("ad-invariance", self.tol_ad_invariance, d.lie.ad_invariance)?,
                exp_inverse: pick("exp-inverse", self.tol_exp_inverse, d.lie.exp_inverse)?,
                membership: pick("membership", self.tol_membership, d.lie.membership)?,
                natural_reductivity: pick(
                    "natural-reductivity",
                    self.tol_natural_reductivity,
                    d.lie.natural_reductivity,
                )?,
            },
            geometry: GeometryTolerances {
                log_residual: pick("log-residual", self.tol_log_residual, d.geometry.log_residual)?,
                constancy: pick("constancy", self.tol_constancy, d.geometry.constancy)?,
                gap: pick("gap", self.tol_gap, d.geometry.gap)?,
                certificate: pick("certificate", self.tol_certificate, d.geometry.certificate)?,
                fixed_fiber: pick("fixed-fiber", self.tol_fixed_fiber, d.geometry.fixed_fiber)?,
            },
            killing_length: pick("killing-length", self.tol_killing_length, d.killing_length)?,
            nonconstancy: pick("nonconstancy", self.tol_nonconstancy, d.nonconstancy)?,
        })
    }
}

#[derive(Debug, Serialize)]
struct FilterEcho {
    families: Vec<String>,
    rank_cap: usize,
    rank: Option<usize>,
    classes: Vec<ClassFilter>,
    n0: Option<i64>,
    simple_k: Option<bool>,
}

#[derive(Debug, Serialize)]
pub struct CaseSummary {
    pub label: String,
    pub classical_label: Option<String>,
    pub class: ClassFilter,
    pub n0: Option<i64>,
    pub splittable: bool,
    pub note: Option<String>,
    pub record_ids: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct CatalogOutput {
    schema_version: u32,
    command: &'static str,
    filter: FilterEcho,
    pub cases: Vec<CaseSummary>,
    pub records: Vec<FibrationRecord>,
}

#[derive(Debug, Serialize)]
struct GoldenOutput {
    schema_version: u32,
    command: &'static str,
    golden_source: String,
    pass: bool,
    report: GoldenReport,
}

fn check_rank_cap(cap: usize) -> anyhow::Result<()> {
    if !(1..=MAX_RANK_CAP).contains(&cap) {
        bail!("invalid rank cap {cap}: must be between 1 and {MAX_RANK_CAP}");
    }
    Ok(())
}

fn load_golden(path: Option<&PathBuf>) -> anyhow::Result<(GoldenLists, String)> {
    match path {
        Some(p) => {
            let g = GoldenLists::from_path(p).with_context(|| format!("reading {}", p.display()))?;
            Ok((g, p.display().to_string()))
        }
        None => Ok((GoldenLists::embedded(), "built-in".to_string())),
    }
}

fn json<T: Serialize>(v: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn golden_csv(r: &GoldenReport) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["section", "status", "kind", "entry"])?;
    for s in &r.sections {
        let st = if s.pass { "PASS" } else { "FAIL" };
        if s.pass {
            w.write_record([s.name.as_str(), st, "", ""])?;
        }
        for m in &s.missing {
            w.write_record([s.name.as_str(), st, "missing", m.as_str()])?;
        }
        for u in &s.unexpected {
            w.write_record([s.name.as_str(), st, "unexpected", u.as_str()])?;
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Rendered output and whether every check passed.
fn run(cli: &Cli) -> anyhow::Result<(String, bool)> {
    let exec = if cli.sequential { Exec::Sequential } else { Exec::default() };
    match &cli.command {
        Command::Catalog(a) => {
            check_rank_cap(a.rank_cap)?;
            if let Some(path) = &a.golden {
                let (lists, source) = load_golden(path.as_ref())?;
                let report = golden::check(&lists, a.rank_cap)?;
                let pass = report.pass();
                let text = match cli.format {
                    Format::Json => json(&GoldenOutput {
                        schema_version: SCHEMA_VERSION,
                        command: "catalog-golden",
                        golden_source: source,
                        pass,
                        report,
                    })?,
                    Format::Csv => golden_csv(&report)?,
                    Format::Text => report.to_string(),
                };
                return Ok((text, pass));
            }
            let simple_k = match (a.simple_k, a.splittable) {
                (true, _) => Some(true),
                (_, true) => Some(false),
                _ => None,
            };
            let filter = CatalogFilter {
                families: a.family.clone(),
                rank_cap: a.rank_cap,
                rank: a.rank,
                classes: a.class.clone(),
                n0: a.n0,
                simple_k,
                exec,
            };
            let cases = catalog_cases(&filter)?
                .into_iter()
                .map(|e| CaseSummary {
                    label: e.label,
                    classical_label: e.classical_label,
                    class: e.class,
                    n0: e.n0,
                    splittable: e.splittable,
                    note: e.note,
                    record_ids: e.record_ids,
                })
                .collect();
            let out = CatalogOutput {
                schema_version: SCHEMA_VERSION,
                command: "catalog",
                filter: FilterEcho {
                    families: a
                        .family
                        .iter()
                        .map(|f| format!("{}{}", f.family.letter(), f.rank.map_or(String::new(), |r| r.to_string())))
                        .collect(),
                    rank_cap: a.rank_cap,
                    rank: a.rank,
                    classes: a.class.clone(),
                    n0: a.n0,
                    simple_k,
                },
                cases,
                records: catalog(&filter)?,
            };
            let text = match cli.format {
                Format::Json => json(&out)?,
                Format::Csv => render::catalog_csv(&out)?,
                Format::Text => render::catalog_text(&out),
            };
            Ok((text, true))
        }
        Command::Verify(a) => {
            if a.samples == 0 {
                bail!("--samples must be at least 1");
            }
            let tol = a.tol.resolve()?;
            let record = find_record(&a.case_id, DEFAULT_RANK_CAP)?;
            let settings = VerifySettings {
                seed: a.seed,
                samples: a.samples,
                restarts: a.restarts.max(1),
                left_fields: suite::LEFT_FIELDS,
                right_fields: suite::RIGHT_FIELDS,
            };
            let report = suite::verify(&record, settings, tol, exec)?;
            let text = match cli.format {
                Format::Json => json(&report)?,
                Format::Csv => render::verify_csv(&report)?,
                Format::Text => render::verify_text(&report),
            };
            Ok((text, report.pass))
        }
        Command::Selfcheck(a) => {
            check_rank_cap(a.rank_cap)?;
            let tol = a.tol.resolve()?;
            let (lists, source) = load_golden(a.golden.as_ref())?;
            let report = suite::selfcheck(a.rank_cap, &lists, source, tol.lie)?;
            let text = match cli.format {
                Format::Json => json(&report)?,
                Format::Csv => render::selfcheck_csv(&report)?,
                Format::Text => render::selfcheck_text(&report),
            };
            Ok((text, report.pass))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((text, pass)) => {
            let written = match &cli.out {
                Some(p) => fs::write(p, &text).with_context(|| format!("writing {}", p.display())),
                None => std::io::stdout().write_all(text.as_bytes()).map_err(Into::into),
            };
            if let Err(e) = written {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
            if pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("one or more checks failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
