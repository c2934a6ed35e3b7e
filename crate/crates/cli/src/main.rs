//! `ccwlan`: run coded-caching delivery experiments and write JSON/CSV
//! results.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use ccwlan_core::experiment::{run_experiment, write_outputs, ExperimentConfig, ModeSelection};
use ccwlan_core::Error;
use clap::Parser;

#[derive(Debug, Parser)]
#[command(name = "ccwlan", version, about = "Coded-caching delivery experiments for multi-antenna WLAN helpers")]
struct Args {
    /// JSON config file; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Hexagonal rings of helpers around the centre one.
    #[arg(long)]
    rings: Option<usize>,
    /// Topology JSON file, or `two-helper` for the built-in instance.
    #[arg(long)]
    topology: Option<String>,
    /// Mean users per helper.
    #[arg(long)]
    users_per_helper: Option<f64>,
    /// Number of cache profiles L.
    #[arg(long)]
    profiles: Option<usize>,
    /// Cache ratio M/N.
    #[arg(long)]
    cache_ratio: Option<f64>,
    /// Spatial multiplexing gain (antennas per helper).
    #[arg(long)]
    mux_gain: Option<usize>,
    /// siso, ir, ccc or all.
    #[arg(long)]
    mode: Option<String>,
    /// 0 sum rate, 1 proportional fairness, inf max-min.
    #[arg(long)]
    fairness_parameter: Option<f64>,
    /// Seed; repeat for several runs.
    #[arg(long = "seed")]
    seeds: Vec<u64>,
    /// File with whitespace- or comma-separated seeds.
    #[arg(long)]
    seeds_file: Option<PathBuf>,
    /// Duality-gap tolerance of the fairness solver.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip the reception check of weighted policies.
    #[arg(long)]
    no_verify: bool,
    /// Print the effective config and exit.
    #[arg(long)]
    dry_run: bool,
}

fn read_seeds(path: &PathBuf) -> anyhow::Result<Vec<u64>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<u64>().with_context(|| format!("bad seed {s:?} in {}", path.display())))
        .collect()
}

fn build_config(args: Args) -> anyhow::Result<(ExperimentConfig, bool)> {
    let mut c = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(v) = args.rings {
        c.rings = v;
    }
    if let Some(v) = args.topology {
        c.topology = Some(v);
    }
    if let Some(v) = args.users_per_helper {
        c.users_per_helper = v;
    }
    if let Some(v) = args.profiles {
        c.profiles = v;
    }
    if let Some(v) = args.cache_ratio {
        c.cache_ratio = v;
    }
    if let Some(v) = args.mux_gain {
        c.mux_gain = v;
    }
    if let Some(v) = args.mode {
        c.mode = v.parse::<ModeSelection>()?;
    }
    if let Some(v) = args.fairness_parameter {
        c.fairness_parameter = v;
    }
    let mut seeds = args.seeds;
    if let Some(p) = &args.seeds_file {
        seeds.extend(read_seeds(p)?);
    }
    if !seeds.is_empty() {
        c.seeds = seeds;
    }
    if let Some(v) = args.tolerance {
        c.tolerance = v;
    }
    if let Some(v) = args.out {
        c.output_dir = Some(v);
    }
    if args.no_verify {
        c.verify = false;
    }
    Ok((c, args.dry_run))
}

fn unix_timestamp() -> String {
    let secs = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    secs.to_string()
}

fn run(args: Args) -> anyhow::Result<()> {
    let (config, dry_run) = build_config(args)?;
    config.validate()?;
    if dry_run {
        let _ = writeln!(std::io::stdout(), "{}", config.to_json());
        return Ok(());
    }
    let payload = run_experiment(&config)?;
    // a closed stdout must not abort the run
    let mut out = std::io::stdout().lock();
    let dir = config.output_dir.clone().unwrap_or_else(|| PathBuf::from("results"));
    let paths = write_outputs(&payload, &dir, &unix_timestamp())?;
    for s in &payload.summary {
        match s.mean_utility {
            Some(u) => writeln!(
                out,
                "{:<5} mean utility {u:.4}  mean round(|f|) {:.2}  ({} solved, {} failed)",
                s.mode.name(),
                s.mean_rounded_utility.unwrap_or(f64::NAN),
                s.solved_seeds,
                s.failed_seeds
            ),
            None => writeln!(out, "{:<5} no seed solved ({} failed)", s.mode.name(), s.failed_seeds),
        }
        .ok();
    }
    if !payload.all_verified() {
        anyhow::bail!(Error::Schema("a weighted policy failed reception verification".into()));
    }
    for p in paths {
        writeln!(out, "wrote {}", p.display()).ok();
    }
    Ok(())
}

fn error_json(err: &anyhow::Error) -> serde_json::Value {
    match err.downcast_ref::<Error>() {
        Some(Error::InvalidConfig { field, message }) => {
            serde_json::json!({ "error": "invalid-config", "field": field, "message": message })
        }
        Some(e) => serde_json::json!({ "error": e.kind(), "message": e.to_string() }),
        None => serde_json::json!({ "error": "io", "message": format!("{err:#}") }),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::FAILURE
        }
    }
}
