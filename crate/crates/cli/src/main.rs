use clap::{Args, Parser, Subcommand};
use qed_sbs_cli::oracle_check::{run_suite, OracleSuite};
use qed_sbs_cli::{regime_table, sbs_report, sweep, CliError, Preset, RunConfig};
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qed-sbs", version, about = "Decoherence and fidelity of a moving charge in a thermal field")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// JSON run configuration
    #[arg(long, global = true, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration
    #[arg(long, global = true, value_enum)]
    preset: Option<Preset>,
    /// Output file; defaults to a fixed name in the output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Multiplies every oracle-check tolerance
    #[arg(long, global = true, default_value_t = 1.0)]
    tolerance_scale: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Γ and −log B over the time grid, as CSV
    Sweep,
    /// Regime table with prefactors substituted, as JSON plus text on stdout
    RegimeTable,
    /// Closed forms against quadrature and the dense Fock-space oracle
    OracleCheck,
    /// SBS proximity over the time grid, as JSON
    SbsReport,
}

impl Command {
    fn default_file(&self) -> &'static str {
        match self {
            Command::Sweep => "sweep.csv",
            Command::RegimeTable => "regime_table.json",
            Command::OracleCheck => "oracle_check.json",
            Command::SbsReport => "sbs_report.json",
        }
    }
}

fn load(g: &Global) -> Result<RunConfig, CliError> {
    let cfg = match (&g.config, g.preset) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, Some(p)) => p.config(),
        (None, None) => return Err(CliError::Config("one of --config or --preset is required".into())),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text)?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let cfg = load(&cli.global)?;
    let out = match &cli.global.out {
        Some(p) => p.clone(),
        None => cfg.output_directory().join(cli.command.default_file()),
    };
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    match cli.command {
        Command::Sweep => {
            let rows = sweep::run(&cfg, BufWriter::new(File::create(&out)?))?;
            log::info!("wrote {rows} rows to {}", out.display());
        }
        Command::RegimeTable => {
            let table = regime_table::build(&cfg)?;
            print!("{}", regime_table::render_text(&table));
            write_text(&out, &regime_table::to_json(&table))?;
        }
        Command::OracleCheck => {
            let suite = OracleSuite {
                tolerance_scale: cli.global.tolerance_scale,
                ..OracleSuite::default()
            };
            let report = run_suite(&cfg, &suite)?;
            for c in &report.checks {
                println!("{}", c.line());
            }
            write_text(&out, &serde_json::to_string_pretty(&report).expect("report serializes"))?;
            if !report.passed {
                let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
                return Err(CliError::OracleFailed(failed.join(", ")));
            }
        }
        Command::SbsReport => {
            let series = sbs_report::build(&cfg)?;
            if series.reports.iter().any(|r| r.validity_warning) {
                eprintln!(
                    "WARNING: part of the time grid exceeds the dipole validity time Omega_bar*tau_dip = {}",
                    series.dipole_validity_time
                );
            }
            write_text(&out, &sbs_report::to_json(&series))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
