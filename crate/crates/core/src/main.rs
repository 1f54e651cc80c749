use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use qops::demon::DemonConfig;
use qops::report::ScenarioReport;
use qops::scenario::{demon_scenario, run_scenario, Scenario, ScenarioParams};

const EXIT_FAILED_CHECK: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

/// Run a named quantum-operations demonstration and report its checks.
///
/// Exit status: 0 when every check passes, 1 when a check fails, 2 on a
/// usage or configuration error.
#[derive(Debug, Parser)]
#[command(name = "qops", version)]
struct Cli {
    #[arg(long, value_enum)]
    scenario: Scenario,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// demon: JSON file with any `DemonConfig` fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,

    /// demon: number of molecules [default: 2000]
    #[arg(long)]
    molecules: Option<usize>,

    /// demon: time steps [default: 10000]
    #[arg(long)]
    steps: Option<usize>,

    /// demon: gas temperature in K [default: 300]
    #[arg(long)]
    temperature: Option<f64>,

    /// demon: length of one chamber in m [default: 1e-6]
    #[arg(long)]
    box_length: Option<f64>,

    /// demon: memory capacity before an erasure [default: 1024]
    #[arg(long)]
    memory_bits: Option<usize>,

    /// demon: speed class boundary in m/s; `inf` keeps the gate shut
    /// [default: sqrt(k_B T / m)]
    #[arg(long)]
    threshold: Option<f64>,

    /// demon: keep every n-th step of the time series in the report
    #[arg(long, default_value_t = 100)]
    series_every: usize,

    /// demon: write the full time series as CSV
    #[arg(long)]
    csv: Option<PathBuf>,

    /// conservation-demo: ground level energy
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    e0: f64,

    /// conservation-demo: excited level energy
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    e1: f64,
}

fn demon_config(cli: &Cli) -> Result<DemonConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => DemonConfig::default(),
    };
    if let Some(v) = cli.molecules {
        cfg.n_molecules = v;
    }
    if let Some(v) = cli.steps {
        cfg.steps = v;
    }
    if let Some(v) = cli.temperature {
        cfg.temperature = v;
    }
    if let Some(v) = cli.box_length {
        cfg.box_length = v;
    }
    if let Some(v) = cli.memory_bits {
        cfg.memory_capacity_bits = v;
    }
    if let Some(v) = cli.threshold {
        cfg.speed_threshold = Some(v);
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<ScenarioReport, String> {
    let params = ScenarioParams {
        seed: cli.seed,
        demon: demon_config(cli)?,
        series_every: cli.series_every,
        ground_energy: cli.e0,
        excited_energy: cli.e1,
        ..ScenarioParams::default()
    };
    if cli.scenario == Scenario::Demon {
        let (report, run) = demon_scenario(&params).map_err(|e| e.to_string())?;
        if let Some(path) = &cli.csv {
            let file = fs::File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
            run.write_csv(file).map_err(|e| e.to_string())?;
        }
        return Ok(report);
    }
    run_scenario(cli.scenario, &params).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match run(&cli) {
        Ok(r) => r,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let body = match cli.format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    };
    let written = match &cli.out {
        Some(path) => fs::write(path, &body).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(|e| e.to_string()),
    };
    if let Err(msg) = written {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_USAGE);
    }
    for check in report.failed() {
        eprintln!(
            "check failed: {} (measured {:e}, tolerance {:e})",
            check.name, check.measured, check.tolerance
        );
    }
    if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILED_CHECK)
    }
}
