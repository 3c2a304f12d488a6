use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use ardkit::correspondence::{backward, forward, load_table, CorrespondencePolicy, TableMeta};
use ardkit::model::{read_csv, write_csv, BoundaryEdition, GeoLevel, Indicator, NestDomain, ValueKind, YearSpan};
use ardkit::pipeline::{execute, output_tree, write_dmp, PipelineConfig, PipelineError, RunOptions, StageKind};
use ardkit::privacy::{suppress, SuppressionPolicy};
use ardkit::qa::{run_rules, QaContext, Severity};
use clap::{Args, Parser, Subcommand};

/// Turns raw spatio-temporal count tables into analysis-ready data.
///
/// Exit codes: 0 success, 1 completed with warnings, 2 failure.
#[derive(Parser)]
#[command(name = "ardkit", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Pipeline config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config's output_dir.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Indicators processed in parallel.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Seed for randomisation; overrides the config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Treat QA warnings as failures.
    #[arg(long, global = true)]
    strict: bool,
    /// Round final counts to integers with largest-remainder reconciliation.
    #[arg(long, global = true)]
    round_counts: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run every enabled stage.
    Run,
    /// Parse raw sources into canonical files; starts a fresh output tree.
    Ingest,
    /// Run the cleaning loop on ingested files.
    Clean,
    /// Move datasets to the target edition (or convert one file with --input).
    Correspond(CorrespondArgs),
    /// Apply noise and small-cell suppression (or suppress one file with --input).
    Suppress(SuppressArgs),
    /// Assign uncertainty and run the QA rules (or check one file with --input).
    Qa(QaArgs),
    /// Write metadata, data dictionaries and the DMP scaffold.
    EmitDocs,
    /// Write only the DMP scaffold.
    ScaffoldDmp,
    /// Check a correspondence file.
    ValidateTable(TableArgs),
    /// Write a seeded demo project.
    Demo(DemoArgs),
}

#[derive(Args)]
struct TableArgs {
    #[arg(long)]
    table: PathBuf,
    #[arg(long)]
    from: BoundaryEdition,
    #[arg(long)]
    to: BoundaryEdition,
    #[arg(long, default_value = "SA2")]
    level: GeoLevel,
}

#[derive(Args)]
struct FileArgs {
    /// Canonical dataset file.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Value kind of the file's numeric cells.
    #[arg(long, default_value = "count")]
    kind: ValueKind,
}

#[derive(Args)]
struct CorrespondArgs {
    #[command(flatten)]
    file: FileArgs,
    #[arg(long)]
    table: Option<PathBuf>,
    /// Table's earlier edition.
    #[arg(long)]
    from: Option<BoundaryEdition>,
    /// Table's later edition.
    #[arg(long)]
    to: Option<BoundaryEdition>,
    /// Rebuild the earlier edition from the later one.
    #[arg(long)]
    backward: bool,
    #[arg(long, default_value_t = 0.1)]
    threshold: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SuppressArgs {
    #[command(flatten)]
    file: FileArgs,
    #[arg(long, default_value_t = 5)]
    threshold: u32,
    #[arg(long)]
    suppress_zero: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct QaArgs {
    #[command(flatten)]
    file: FileArgs,
    /// Declared coverage as START-END, e.g. 2011-2020.
    #[arg(long)]
    coverage: Option<String>,
    /// Where to write the JSON report.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long)]
    dir: PathBuf,
    #[arg(long = "demo-seed", default_value_t = 1)]
    demo_seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn options(g: &Global) -> RunOptions {
    RunOptions { out: g.out.clone(), workers: g.workers, seed: g.seed, strict: g.strict, round_counts: g.round_counts }
}

fn config(g: &Global) -> Result<PipelineConfig> {
    let path = g.config.as_deref().context("this command needs --config (or --input for a single file)")?;
    Ok(PipelineConfig::load(path)?)
}

fn stages(g: &Global, kinds: Option<&[StageKind]>) -> Result<u8> {
    let cfg = config(g)?;
    let kinds = kinds.map(<[_]>::to_vec).unwrap_or_else(|| cfg.enabled_stages());
    let summary = execute(&cfg, &kinds, &options(g)).map_err(|e: PipelineError| anyhow::anyhow!(e))?;
    let names: Vec<&str> = summary.stages.iter().map(|k| k.name()).collect();
    println!("completed: {} ({} warning(s))", names.join(", "), summary.warnings);
    Ok(summary.exit_code() as u8)
}

fn dispatch(cli: &Cli) -> Result<u8> {
    let g = &cli.global;
    match &cli.command {
        Command::Run => stages(g, None),
        Command::Ingest => stages(g, Some(&[StageKind::Ingest])),
        Command::Clean => stages(g, Some(&[StageKind::Clean])),
        Command::Correspond(a) if a.file.input.is_some() => correspond_file(a),
        Command::Correspond(_) => stages(g, Some(&[StageKind::Correspond])),
        Command::Suppress(a) if a.file.input.is_some() => suppress_file(a),
        Command::Suppress(_) => stages(g, Some(&[StageKind::Privacy])),
        Command::Qa(a) if a.file.input.is_some() => qa_file(g, a),
        Command::Qa(_) => stages(g, Some(&[StageKind::Qa])),
        Command::EmitDocs => stages(g, Some(&[StageKind::Docs])),
        Command::ScaffoldDmp => {
            let cfg = config(g)?;
            let out = output_tree(&cfg, &options(g))?;
            write_dmp(&cfg, &out)?;
            println!("wrote {}", out.root().join(ardkit::pipeline::paths::DMP).display());
            Ok(0)
        }
        Command::ValidateTable(a) => validate_table(a),
        Command::Demo(a) => {
            let path = ardkit::demo::write_demo(&a.dir, a.demo_seed)?;
            println!("wrote demo project; run it with: ardkit run --config {}", path.display());
            Ok(0)
        }
    }
}

fn read_table(a: &TableArgs) -> Result<ardkit::correspondence::CorrespondenceTable> {
    let bytes = std::fs::read(&a.table).with_context(|| a.table.display().to_string())?;
    Ok(load_table(&bytes, TableMeta::new(a.from, a.to, a.level))?)
}

fn validate_table(a: &TableArgs) -> Result<u8> {
    let t = read_table(a)?;
    println!(
        "ok: {} edge(s), {} source and {} target region(s)",
        t.edges().len(),
        t.sources().count(),
        t.targets().count()
    );
    Ok(0)
}

fn read_input(f: &FileArgs) -> Result<ardkit::model::Dataset> {
    let path = f.input.as_deref().expect("checked by caller");
    let bytes = std::fs::read(path).with_context(|| path.display().to_string())?;
    let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or("dataset").to_string();
    let ind = Indicator::new(&id, &id, NestDomain::Healthy, f.kind, "file");
    read_csv(&bytes, ind).with_context(|| path.display().to_string())
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).with_context(|| p.display().to_string()),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn correspond_file(a: &CorrespondArgs) -> Result<u8> {
    let d = read_input(&a.file)?;
    let (Some(table), Some(from), Some(to)) = (&a.table, a.from, a.to) else {
        bail!("--input needs --table, --from and --to");
    };
    let t = read_table(&TableArgs { table: table.clone(), from, to, level: d.level })?;
    let r = if a.backward {
        let p = CorrespondencePolicy::new(from).with_threshold(a.threshold);
        p.check()?;
        backward(&d, &t, &p)?
    } else {
        forward(&d, &t)?
    };
    write_output(a.output.as_deref(), &write_csv(&r.dataset))?;
    Ok(0)
}

fn suppress_file(a: &SuppressArgs) -> Result<u8> {
    let d = read_input(&a.file)?;
    let (s, log) = suppress(&d, &SuppressionPolicy { threshold: a.threshold, suppress_zero: a.suppress_zero })?;
    write_output(a.output.as_deref(), &write_csv(&s))?;
    eprintln!("suppressed {} cell(s)", log.total());
    Ok(0)
}

fn parse_span(s: &str) -> Result<YearSpan> {
    let (a, b) = s.split_once('-').unwrap_or((s, s));
    let (a, b): (i32, i32) = (a.trim().parse()?, b.trim().parse()?);
    if a > b {
        bail!("coverage {s:?} ends before it starts");
    }
    Ok(YearSpan::new(a, b))
}

fn qa_file(g: &Global, a: &QaArgs) -> Result<u8> {
    let d = read_input(&a.file)?;
    let mut ctx = QaContext::new();
    ctx.coverage = a.coverage.as_deref().map(parse_span).transpose()?;
    let report = run_rules(&d, &ctx);
    print!("{}", report.to_text());
    if let Some(p) = &a.report {
        std::fs::write(p, report.to_json()).with_context(|| p.display().to_string())?;
    }
    let code = report.exit_code();
    Ok(if g.strict && report.count(Severity::Warning) > 0 { 2 } else { code as u8 })
}
