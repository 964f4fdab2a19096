use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use shimura::atkin_lehner::subgroups;
use shimura::catalog::{default_catalog_dir, load_catalog, Catalog, CatalogRecord};
use shimura::local::everywhere_locally_solvable;
use shimura::pipeline::{cm_for_record, run_pipeline, verify_all, Report};
use shimura::points::{search, verdict, SearchConfig, DEFAULT_HEIGHT};
use shimura::{Error, Result};

#[derive(Parser)]
#[command(name = "shimura", version, about = "Rational points and CM points on Atkin-Lehner quotients of Shimura curves")]
struct Cli {
    /// Catalog directory (defaults to $SHIMURA_CATALOG, then the bundled catalog)
    #[arg(long, global = true)]
    catalog: Option<PathBuf>,
    /// Human-readable table instead of JSON
    #[arg(long, global = true)]
    table: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Full pipeline for one record
    Analyze {
        id: String,
        #[arg(long, default_value_t = DEFAULT_HEIGHT)]
        height: i64,
    },
    /// Real and p-adic solvability
    Local { id: String },
    /// Point search, optionally with a completeness verdict
    Points {
        id: String,
        #[arg(long, default_value_t = DEFAULT_HEIGHT)]
        height: i64,
        #[arg(long)]
        certify: bool,
    },
    /// CM classification of the rational points
    Cm {
        id: String,
        #[arg(long, default_value_t = DEFAULT_HEIGHT)]
        height: i64,
    },
    /// Atkin-Lehner subgroups of W(D,N)
    Group { d: u64, n: u64 },
    /// Run every catalog record and diff against expectations
    VerifyAll {
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_HEIGHT)]
        height: i64,
    },
}

fn json<T: Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn record<'a>(cat: &'a Catalog, id: &str) -> Result<&'a CatalogRecord> {
    cat.get(id)
}

fn model_of(r: &CatalogRecord) -> Result<&shimura::curve::CurveModel> {
    r.model.as_ref().ok_or_else(|| Error::Unsupported(format!("{} has no model in the catalog", r.key())))
}

fn print_report_table(rep: &Report) {
    let (status, n) = match &rep.verdict {
        Some(v) => (serde_json::to_value(v.status).unwrap().as_str().unwrap_or("?").to_string(), v.points.len().to_string()),
        None => ("error".into(), "-".into()),
    };
    println!("{:<14} {:<24} {:>4}  {}", rep.id, status, n, if rep.diff.is_empty() { "ok" } else { "DIFF" });
}

fn run(cli: Cli) -> Result<bool> {
    let dir = cli.catalog.clone().unwrap_or_else(default_catalog_dir);
    let cfg = |height| SearchConfig { height, ..SearchConfig::default() };
    match cli.cmd {
        Cmd::Group { d, n } => {
            let groups = subgroups(d, n)?;
            if cli.table {
                for g in &groups {
                    println!("{:<18} {}", g.key(), g.order());
                }
            } else {
                let rows: Vec<_> = groups
                    .iter()
                    .map(|g| serde_json::json!({"key": g.key(), "order": g.order(), "generators": g.generators, "elements": g.elements}))
                    .collect();
                json(&rows)?;
            }
            Ok(true)
        }
        Cmd::Local { id } => {
            let cat = load_catalog(&dir)?;
            let rep = everywhere_locally_solvable(model_of(record(&cat, &id)?)?)?;
            if cli.table {
                println!("R      {}", rep.real_solvable);
                for c in rep.bad_primes_checked.iter().chain(&rep.small_good_primes_checked) {
                    println!("Q_{:<4} {}", c.p, c.solvable);
                }
                println!("all    {}", rep.everywhere_locally_solvable);
            } else {
                json(&rep)?;
            }
            Ok(true)
        }
        Cmd::Points { id, height, certify } => {
            let cat = load_catalog(&dir)?;
            let r = record(&cat, &id)?;
            if certify {
                let v = verdict(r, &cfg(height))?;
                if cli.table {
                    println!("status {:?}", v.status);
                    v.points.iter().for_each(|p| println!("  {}", p));
                    v.notes.iter().for_each(|n| println!("note: {}", n));
                } else {
                    json(&v)?;
                }
            } else {
                let s = search(model_of(r)?, height);
                if cli.table {
                    s.points.iter().for_each(|p| println!("{}", p));
                } else {
                    json(&s)?;
                }
            }
            Ok(true)
        }
        Cmd::Cm { id, height } => {
            let cat = load_catalog(&dir)?;
            let r = record(&cat, &id)?;
            let pts = search(model_of(r)?, height).points;
            let rep = cm_for_record(r, &pts)?;
            if cli.table {
                println!("{:<20} {:<13} {:>5}  candidates", "point", "status", "d");
                for p in &rep.points {
                    let d = p.fiber_field_d.map_or("-".to_string(), |d| d.to_string());
                    println!("{:<20} {:<13} {:>5}  {:?}", p.point.to_string(), format!("{:?}", p.status), d, p.candidate_delta_k);
                }
                println!("fields {:?}", rep.field_multiset);
            } else {
                json(&rep)?;
            }
            Ok(true)
        }
        Cmd::Analyze { id, height } => {
            let cat = load_catalog(&dir)?;
            let rep = run_pipeline(record(&cat, &id)?, &cfg(height));
            if cli.table {
                print_report_table(&rep);
                rep.diff.iter().for_each(|d| println!("  {}: expected {}, found {}", d.field, d.expected, d.found));
            } else {
                json(&rep)?;
            }
            Ok(rep.diff.is_empty())
        }
        Cmd::VerifyAll { jobs, height } => {
            let cat = load_catalog(&dir)?;
            let (reports, summary) = verify_all(&cat, &cfg(height), jobs)?;
            if cli.table {
                reports.iter().for_each(print_report_table);
                for d in &summary.diffs {
                    println!("DIFF {} {}: expected {}, found {}", d.id, d.field, d.expected, d.found);
                }
                println!("{} records, {:?}", summary.records, summary.by_status);
            } else {
                json(&serde_json::json!({"summary": summary, "reports": reports}))?;
            }
            Ok(summary.passed)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(2)
        }
    }
}
