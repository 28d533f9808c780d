use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use zosga_core::harness::{
    export_results, run_ensemble, run_sweep, stats, Format, Method, RunRecord, Scenario, ScenarioSpec, SweepSpec,
};
use zosga_core::Error;

const WORKERS_ENV: &str = "ZOSGA_WORKERS";

#[derive(Parser)]
#[command(name = "zosga", version, about = "Two-timescale IRS beamforming simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one ensemble per method on a scenario.
    Run {
        #[command(flatten)]
        common: Common,
        /// Method tags, comma separated: zosga, zosga_aa, zosga_ua, random_irs, no_irs, external:<path>.
        #[arg(long, value_delimiter = ',', required = true)]
        method: Vec<String>,
    },
    /// Sweep coupled scenario keys over a list of values.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Keys set together, comma separated (e.g. rician.beta_ai,rician.beta_iu).
        #[arg(long)]
        key: String,
        /// Values, comma separated (e.g. 0dB,20dB).
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        methods: Vec<String>,
    },
    /// Check a scenario file and print its canonical form and hash.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 10)]
    sims: usize,
    /// Overrides the scenario's `iters`.
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json; defaults to the extension of --out, else csv.
    #[arg(long)]
    format: Option<String>,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Parameter(_) => Failure::Config(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn load_spec(path: &Path, iters: Option<usize>) -> Result<ScenarioSpec, Failure> {
    let mut spec = ScenarioSpec::load(path).map_err(|e| Failure::Config(e.to_string()))?;
    if let Some(t) = iters {
        spec.set("iters", t.to_string());
    }
    Ok(spec)
}

fn methods(tags: &[String]) -> Result<Vec<Method>, Failure> {
    tags.iter().map(|t| t.trim().parse::<Method>().map_err(Failure::from)).collect()
}

fn format_for(common: &Common) -> Result<Format, Failure> {
    let tag = match (&common.format, &common.out) {
        (Some(f), _) => f.clone(),
        (None, Some(p)) if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) => "json".into(),
        _ => "csv".into(),
    };
    tag.parse().map_err(Failure::from)
}

fn summarize(records: &[RunRecord]) {
    for r in records {
        let se = stats::sample_std(&r.final_sumrates) / (r.n_sims as f64).sqrt();
        let point = r.sweep.as_ref().map(|p| format!(" {}={}", p.keys.join(","), p.value)).unwrap_or_default();
        eprintln!(
            "{:<14}{point} final {:.4} ± {:.4} bit/s/Hz  ({} sims × {} iters, {:.1}s, scenario {})",
            r.method,
            r.mean_final(),
            se,
            r.n_sims,
            r.iters,
            r.wall_clock_secs,
            &r.scenario_hash[..12],
        );
    }
}

fn finish(records: &[RunRecord], common: &Common) -> Result<(), Failure> {
    let format = format_for(common)?;
    summarize(records);
    if let Some(out) = &common.out {
        export_results(records, out, format)?;
        eprintln!("wrote {}", out.display());
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { config } => {
            let scenario: Scenario = load_spec(&config, None)?.resolve()?;
            print!("{}", scenario.render());
            println!("# hash {}", scenario.hash());
            Ok(())
        }
        Command::Run { common, method } => {
            let scenario = load_spec(&common.config, common.iters)?.resolve()?;
            let methods = methods(&method)?;
            format_for(&common)?;
            let records = methods
                .iter()
                .map(|m| run_ensemble(&scenario, m, common.seed, common.sims))
                .collect::<Result<Vec<_>, _>>()?;
            finish(&records, &common)
        }
        Command::Sweep { common, key, values, methods: tags } => {
            let spec = load_spec(&common.config, common.iters)?;
            let methods = methods(&tags)?;
            format_for(&common)?;
            let sweep = SweepSpec::new(SweepSpec::parse_keys(&key), values, common.sims)?;
            for v in sweep.values() {
                spec.with(sweep.keys(), v).resolve()?;
            }
            let records = run_sweep(&spec, &sweep, &methods, common.seed)?;
            finish(&records, &common)
        }
    }
}

fn configure_workers() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Failure::Config(format!("{WORKERS_ENV} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Runtime(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_workers().and_then(|()| execute(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
