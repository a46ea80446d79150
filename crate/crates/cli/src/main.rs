mod output;
mod range;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use nwidths::recovery::sphere_mc_lower_bound;
use nwidths::verify::{run_entries, run_suite, SuiteEntry};
use nwidths::widths::compute_width;
use nwidths::witness::{build_chain, certify_chain, chain_json, DEFAULT_EPS};
use nwidths::{ChainVariant, Instance, SearchConfig, SuiteReport, WidthKind, WidthSet};

use output::{csv_header, sink, write_json, Format};
use range::parse_indices;

/// Certified bounds on n-widths of finite-dimensional operators on convex bodies.
#[derive(Debug, Parser)]
#[command(name = "nwidths", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bounds on selected widths, one row per (instance, kind, n).
    Compute(ComputeArgs),
    /// Witness chains with their certificates.
    Witness(WitnessArgs),
    /// Checks the width inequalities and exits nonzero on a certified failure.
    Verify(VerifyArgs),
    /// Monte Carlo sphere averages.
    Mc(McArgs),
    /// Width-versus-n table of all five widths.
    Table(TableArgs),
}

#[derive(Debug, Args)]
struct Search {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 64)]
    restarts: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
}

impl Search {
    fn config(&self) -> Result<SearchConfig> {
        let cfg = SearchConfig {
            restarts: self.restarts,
            max_iters: self.max_iters,
            tol: self.tol,
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
struct Out {
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Omit the timestamp header and report wall_ms as 0.
    #[arg(long)]
    deterministic: bool,
}

#[derive(Debug, Args)]
struct ComputeArgs {
    /// Instance JSON files.
    #[arg(long, required = true, num_args = 1..)]
    instance: Vec<PathBuf>,
    /// Width kinds, comma separated, or `all`.
    #[arg(long, default_value = "all", value_delimiter = ',')]
    kind: Vec<String>,
    /// Width indices, e.g. `0..3`; the first width has index 0.
    #[arg(long, default_value = "0..2")]
    n: String,
    #[command(flatten)]
    search: Search,
    #[command(flatten)]
    out: Out,
}

#[derive(Debug, Args)]
struct WitnessArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Chain length.
    #[arg(long)]
    n: usize,
    /// Chain variant; every admissible variant when absent.
    #[arg(long)]
    variant: Option<String>,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
    #[command(flatten)]
    search: Search,
    #[command(flatten)]
    out: Out,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Named suite; only `default` is shipped.
    #[arg(long, conflicts_with = "instance")]
    suite: Option<String>,
    #[arg(long, num_args = 1..)]
    instance: Vec<PathBuf>,
    /// Largest width index checked for `--instance` files.
    #[arg(long, default_value_t = 2)]
    max_n: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[command(flatten)]
    out: Out,
}

#[derive(Debug, Args)]
struct McArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TableArgs {
    #[arg(long, required = true, num_args = 1..)]
    instance: Vec<PathBuf>,
    #[arg(long, default_value = "0..3")]
    n: String,
    #[command(flatten)]
    search: Search,
    #[command(flatten)]
    out: Out,
}

fn load(path: &Path) -> Result<(String, Instance)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let inst = Instance::from_json(&text).with_context(|| format!("invalid instance file {}", path.display()))?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok((name, inst))
}

fn parse_kinds(kinds: &[String]) -> Result<Vec<WidthKind>> {
    if kinds.iter().any(|k| k.eq_ignore_ascii_case("all")) {
        return Ok(WidthKind::ALL.to_vec());
    }
    let mut out = Vec::new();
    for k in kinds {
        let kind: WidthKind = k.parse()?;
        if !out.contains(&kind) {
            out.push(kind);
        }
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct Row {
    instance: String,
    kind: WidthKind,
    n: usize,
    lower: Option<f64>,
    upper: Option<f64>,
    exact: bool,
    certified: bool,
    wall_ms: u64,
    error: String,
}

fn compute(args: &ComputeArgs) -> Result<ExitCode> {
    let cfg = args.search.config()?;
    let kinds = parse_kinds(&args.kind)?;
    let ns = parse_indices(&args.n)?;
    let instances = args.instance.iter().map(|p| load(p)).collect::<Result<Vec<_>>>()?;
    let mut tasks = Vec::new();
    for i in 0..instances.len() {
        for &kind in &kinds {
            for &n in &ns {
                tasks.push((i, kind, n));
            }
        }
    }
    let rows: Vec<Row> = tasks
        .par_iter()
        .map(|&(i, kind, n)| {
            let (name, inst) = &instances[i];
            let start = Instant::now();
            let result = compute_width(inst, kind, n, &cfg);
            let wall_ms = if args.out.deterministic { 0 } else { start.elapsed().as_millis() as u64 };
            match result {
                Ok(b) => Row {
                    instance: name.clone(),
                    kind,
                    n,
                    lower: Some(b.lower),
                    upper: Some(b.upper),
                    exact: b.exact,
                    certified: b.certified(),
                    wall_ms,
                    error: String::new(),
                },
                Err(e) => Row {
                    instance: name.clone(),
                    kind,
                    n,
                    lower: None,
                    upper: None,
                    exact: false,
                    certified: false,
                    wall_ms,
                    error: e.to_string(),
                },
            }
        })
        .collect();
    let mut out = sink(args.out.output.as_deref())?;
    match args.out.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            csv_header(&mut out, args.out.deterministic)?;
            let mut w = csv::Writer::from_writer(&mut out);
            for r in &rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => write_json(&mut out, &rows)?,
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Serialize)]
struct WitnessRow {
    instance: String,
    variant: ChainVariant,
    step: usize,
    gelfand_index: usize,
    value: f64,
    hilbert_lb: f64,
    certified: bool,
    all_ok: bool,
}

fn witness(args: &WitnessArgs) -> Result<ExitCode> {
    let cfg = args.search.config()?;
    let (name, inst) = load(&args.instance)?;
    let variants = match &args.variant {
        Some(v) => {
            let v: ChainVariant = v.parse()?;
            if !v.admissible(&inst)? {
                bail!("variant {v} is not admissible for {name}");
            }
            vec![v]
        }
        None => ChainVariant::admissible_for(&inst)?,
    };
    let mut dumps = Vec::new();
    let mut rows = Vec::new();
    for variant in variants {
        let chain = build_chain(&inst, args.n, variant, args.eps, &cfg)?;
        let cert = certify_chain(&chain, &inst)?;
        for (k, step) in chain.steps.iter().enumerate() {
            rows.push(WitnessRow {
                instance: name.clone(),
                variant,
                step: k,
                gelfand_index: cert.gelfand_index.get(k).copied().unwrap_or(k),
                value: step.value,
                hilbert_lb: cert.per_step_hilbert_lb.get(k).copied().unwrap_or(0.0),
                certified: step.certified,
                all_ok: cert.all_ok(),
            });
        }
        let mut dump = chain_json(&chain, &cert);
        dump["instance"] = name.clone().into();
        dumps.push(dump);
    }
    let mut out = sink(args.out.output.as_deref())?;
    match args.out.format.unwrap_or(Format::Json) {
        Format::Json => write_json(&mut out, &dumps)?,
        Format::Csv => {
            csv_header(&mut out, args.out.deterministic)?;
            let mut w = csv::Writer::from_writer(&mut out);
            for r in &rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn verify(args: &VerifyArgs) -> Result<ExitCode> {
    let report: SuiteReport = match (&args.suite, args.instance.is_empty()) {
        (Some(s), _) if s == "default" => run_suite(args.seed)?,
        (Some(s), _) => bail!("unknown suite '{s}'; available: default"),
        (None, false) => {
            let entries = args
                .instance
                .iter()
                .map(|p| load(p).map(|(name, inst)| SuiteEntry::new(&name, inst, args.max_n)))
                .collect::<Result<Vec<_>>>()?;
            run_entries(&entries, args.seed)
        }
        (None, true) => bail!("give --suite default or at least one --instance"),
    };
    let mut out = sink(args.out.output.as_deref())?;
    match args.out.format.unwrap_or(Format::Json) {
        Format::Json => out.write_all(report.to_json().as_bytes())?,
        Format::Csv => {
            csv_header(&mut out, args.out.deterministic)?;
            let mut w = csv::Writer::from_writer(&mut out);
            for r in &report.reports {
                w.serialize(r)?;
            }
            w.flush()?;
        }
    }
    out.flush()?;
    for e in &report.errors {
        eprintln!("error: {e}");
    }
    let failures = report.failures();
    for f in &failures {
        eprintln!("violated: {} on {} at n={}: {} > {}", f.name, f.instance, f.n, f.lhs, f.rhs);
    }
    eprintln!(
        "{} reports in {} families, {} certified failures",
        report.reports.len(),
        report.families().len(),
        failures.len()
    );
    Ok(if failures.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn mc(args: &McArgs) -> Result<ExitCode> {
    let est = sphere_mc_lower_bound(args.n, args.samples, args.seed)?;
    let mut out = sink(args.output.as_deref())?;
    write_json(&mut out, &est)?;
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn table(args: &TableArgs) -> Result<ExitCode> {
    let cfg = args.search.config()?;
    let ns = parse_indices(&args.n)?;
    let instances = args.instance.iter().map(|p| load(p)).collect::<Result<Vec<_>>>()?;
    let results: Vec<(String, nwidths::Result<Vec<WidthSet>>)> = instances
        .par_iter()
        .map(|(name, inst)| (name.clone(), WidthSet::compute_range(inst, &ns, &cfg)))
        .collect();
    let mut out = sink(args.out.output.as_deref())?;
    let format = args.out.format.unwrap_or(Format::Csv);
    if format == Format::Csv {
        csv_header(&mut out, args.out.deterministic)?;
    }
    let mut header = vec!["instance".to_string(), "n".to_string()];
    for k in WidthKind::ALL {
        header.push(format!("{k}_lower"));
        header.push(format!("{k}_upper"));
    }
    header.push("error".into());
    let mut records: Vec<Vec<String>> = Vec::new();
    for (name, res) in &results {
        match res {
            Ok(sets) => {
                for s in sets {
                    let mut rec = vec![name.clone(), s.n.to_string()];
                    for k in WidthKind::ALL {
                        rec.push(s.get(k).lower.to_string());
                        rec.push(s.get(k).upper.to_string());
                    }
                    rec.push(String::new());
                    records.push(rec);
                }
            }
            Err(e) => {
                let mut rec = vec![name.clone(), String::new()];
                rec.extend(std::iter::repeat_n(String::new(), 2 * WidthKind::ALL.len()));
                rec.push(e.to_string());
                records.push(rec);
            }
        }
    }
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(&header)?;
            for r in &records {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let objs: Vec<serde_json::Map<String, serde_json::Value>> = records
                .iter()
                .map(|r| {
                    header
                        .iter()
                        .zip(r)
                        .map(|(h, v)| {
                            let value = v.parse::<f64>().map(serde_json::Value::from).unwrap_or_else(|_| v.clone().into());
                            (h.clone(), value)
                        })
                        .collect()
                })
                .collect();
            write_json(&mut out, &objs)?;
        }
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Compute(a) => compute(a),
        Command::Witness(a) => witness(a),
        Command::Verify(a) => verify(a),
        Command::Mc(a) => mc(a),
        Command::Table(a) => table(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
