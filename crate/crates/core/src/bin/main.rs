use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tactile_placing::checks::{self, Check};
use tactile_placing::controller::{write_telemetry, RunOptions};
use tactile_placing::experiment::{
    run_batches, run_trial, table1_scenarios, table2_scenarios, table2_tilt_policy, BatchResult, BatchStats,
};
use tactile_placing::report::{emit_report, ReportFormat, ReportRow};
use tactile_placing::{Catalog, ControlMode, Scenario, SimConfig, TiltPolicy};

#[derive(Parser)]
#[command(name = "tactile-placing", version, about = "Stable object placing benchmark")]
struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Restrict to one control mode: tactile or ft.
    #[arg(long, global = true, value_parser = parse_mode)]
    mode: Option<ControlMode>,
    /// Write reports into this directory instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format: txt or csv.
    #[arg(long, global = true, default_value = "txt", value_parser = parse_format)]
    format: ReportFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Grasp height and support size grid on the rectangular blocks.
    Table1(TableArgs),
    /// Every catalog object in both modes.
    Table2(TableArgs),
    /// A single scenario.
    Run(RunArgs),
    /// List the catalog objects.
    Catalog {
        /// Print the full catalog as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct TableArgs {
    /// Check the qualitative table pattern; exit code 2 on failure.
    #[arg(long, conflicts_with = "mode")]
    check: bool,
}

#[derive(Args)]
struct RunArgs {
    /// Catalog object name (see `catalog`).
    #[arg(long)]
    object: String,
    /// Grasp height override, m.
    #[arg(long)]
    grasp_height: Option<f64>,
    /// Overrides the configured trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Fixed pre-placing roll, deg (with --pitch); defaults to the sweep's
    /// random tilt protocol.
    #[arg(long, requires = "pitch", allow_hyphen_values = true)]
    roll: Option<f64>,
    /// Fixed pre-placing pitch, deg (with --roll).
    #[arg(long, requires = "roll", allow_hyphen_values = true)]
    pitch: Option<f64>,
    /// Also write per-step telemetry of every trial.
    #[arg(long)]
    telemetry: bool,
}

fn parse_mode(s: &str) -> Result<ControlMode, String> {
    ControlMode::parse(s).ok_or_else(|| format!("unknown mode `{s}` (tactile|ft)"))
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse().map_err(|e: tactile_placing::Error| e.to_string())
}

fn main() -> ExitCode {
    // Usage errors exit 1 so that 2 only ever means a failed self-check.
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(tactile_placing::Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> tactile_placing::Result<ExitCode> {
    let mut cfg = match &cli.config {
        Some(p) => SimConfig::load(p)?,
        None => SimConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let catalog = cfg.load_catalog()?;

    match &cli.command {
        Command::Table1(a) => table(cli, &cfg, &catalog, "table1", table1_scenarios(&cfg), a, checks::check_table1),
        Command::Table2(a) => {
            let scenarios = table2_scenarios(&catalog, &cfg);
            table(cli, &cfg, &catalog, "table2", scenarios, a, checks::check_table2)
        }
        Command::Run(a) => single(cli, &cfg, &catalog, a),
        Command::Catalog { json } => {
            let mut out = std::io::stdout().lock();
            if *json {
                writeln!(out, "{}", catalog.to_json()?)?;
            } else {
                for o in &catalog.objects {
                    writeln!(
                        out,
                        "{:24} {:?}  grasp {:.1} cm  mass {:.3} kg",
                        o.name,
                        o.contact_type,
                        o.grasp_height * 100.0,
                        o.mass
                    )?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn filter_mode(cli: &Cli, scenarios: Vec<Scenario>) -> Vec<Scenario> {
    scenarios.into_iter().filter(|s| cli.mode.is_none_or(|m| s.mode == m)).collect()
}

fn table(
    cli: &Cli,
    cfg: &SimConfig,
    catalog: &Catalog,
    name: &str,
    scenarios: Vec<Scenario>,
    args: &TableArgs,
    check: fn(&[BatchResult]) -> Vec<Check>,
) -> tactile_placing::Result<ExitCode> {
    let results = run_batches(&filter_mode(cli, scenarios), catalog, cfg)?;
    let rows: Vec<ReportRow> = results.iter().map(BatchResult::row).collect();
    emit(cli, name, &emit_report(&rows, cli.format)?)?;
    if args.check {
        let outcome = check(&results);
        for c in &outcome {
            eprintln!("{c}");
        }
        if !checks::all_passed(&outcome) {
            return Ok(ExitCode::from(2));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn single(cli: &Cli, cfg: &SimConfig, catalog: &Catalog, a: &RunArgs) -> tactile_placing::Result<ExitCode> {
    let policy = match (a.roll, a.pitch) {
        (Some(r), Some(p)) => TiltPolicy::fixed(r, p),
        _ => table2_tilt_policy(&a.object),
    };
    let modes = match cli.mode {
        Some(m) => vec![m],
        None => vec![ControlMode::Tactile, ControlMode::FtBaseline],
    };
    let mut rows = Vec::new();
    for mode in modes {
        let scenario = Scenario {
            object: a.object.clone(),
            grasp_height: a.grasp_height,
            mode,
            tilt_policy: policy,
            trials: a.trials.unwrap_or(cfg.trials),
            seed: cfg.seed,
        };
        scenario.validate(catalog)?;
        let mut spec = catalog.get(&a.object)?.clone();
        if let Some(g) = a.grasp_height {
            spec.grasp_height = g;
        }
        let mut outcomes = Vec::new();
        for t in 0..scenario.trials {
            let rec = run_trial(&scenario, &spec, cfg, t, RunOptions { telemetry: a.telemetry })?;
            let o = &rec.outcome;
            eprintln!(
                "{mode:7} trial {t:2}: tilt ({:6.2}, {:6.2}) -> roll {:6.3} pitch {:6.3}  {:?} after {} steps",
                rec.tilt_deg.0, rec.tilt_deg.1, o.roll_deg, o.pitch_deg, o.termination, o.steps
            );
            if a.telemetry {
                let mut buf = Vec::new();
                write_telemetry(&o.telemetry, &mut buf)?;
                emit(cli, &format!("telemetry_{}_{mode}_{t}", slug(&a.object)), &buf)?;
            }
            outcomes.push(rec.outcome);
        }
        rows.push(ReportRow {
            object: spec.name.clone(),
            grasp_height: spec.grasp_height,
            mode,
            stats: BatchStats::from_outcomes(&outcomes),
        });
    }
    emit(cli, "run", &emit_report(&rows, cli.format)?)?;
    Ok(ExitCode::SUCCESS)
}

fn slug(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' }).collect()
}

/// Writes `<out>/<stem>.<ext>` or, without `--out`, to stdout. Telemetry
/// is always CSV.
fn emit(cli: &Cli, stem: &str, bytes: &[u8]) -> tactile_placing::Result<()> {
    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let ext = if stem.starts_with("telemetry_") { "csv" } else { cli.format.extension() };
            let path: PathBuf = Path::new(dir).join(format!("{stem}.{ext}"));
            std::fs::write(&path, bytes)?;
            eprintln!("wrote {}", path.display());
        }
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}
