use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dcs3d::baselines::MethodChoice;
use dcs3d::harness::{self, ExperimentConfig, Preset, ScenarioParams};
use dcs3d::scheduler::{felkh3d, validate_schedule, SchedulerOptions};
use dcs3d::{oracle, Scenario};

#[derive(Parser, Debug)]
#[command(name = "dcs3d", version, about = "UAV directional charging planner for 3D sensor networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Plan one charging schedule.
    Plan(PlanArgs),
    /// Sweep schemes, network sizes, power ratios and seeds.
    Experiment(ExperimentArgs),
    /// Run the brute-force reference checks.
    Oracle(OracleArgs),
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "desk")]
    preset: Preset,
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args, Debug)]
struct PlanArgs {
    #[command(flatten)]
    common: Common,
    /// `pos:dir:tour` or a scheme name.
    #[arg(long, default_value = "node:funceqv:lkh_style")]
    scheme: MethodChoice,
    /// Scenario JSON. Generated from the seed and preset when absent.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Override the preset node count.
    #[arg(long)]
    n: Option<usize>,
    /// Hover to flight power ratio.
    #[arg(long)]
    ratio: Option<f64>,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[command(flatten)]
    common: Common,
    /// Restrict to these schemes (repeatable).
    #[arg(long)]
    scheme: Vec<MethodChoice>,
    /// Number of consecutive seeds starting at --seed when no config is given.
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    ratio: Vec<f64>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    common: Common,
    /// Random instances per check.
    #[arg(long, default_value_t = 20)]
    instances: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Plan(a) => plan(a),
        Command::Experiment(a) => experiment(a),
        Command::Oracle(a) => run_oracle(a),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

type CliResult = Result<ExitCode, Box<dyn std::error::Error>>;

fn plan(a: PlanArgs) -> CliResult {
    rayon_threads(a.common.jobs);
    let scenario = match &a.scenario {
        Some(path) => Scenario::load(path)?,
        None => {
            let mut params = match &a.common.config {
                Some(path) => serde_json::from_str(&fs::read_to_string(path)?)?,
                None => ScenarioParams::preset(a.common.preset),
            };
            if let Some(n) = a.n {
                params.n = n;
            }
            if let Some(r) = a.ratio {
                params.ratio = r;
            }
            harness::generate_scenario(a.common.seed, &params)?
        }
    };
    let plan = felkh3d(&scenario, a.scheme, &SchedulerOptions::default())?;
    let check = validate_schedule(&plan.schedule(), &scenario);
    fs::create_dir_all(&a.common.out)?;
    fs::write(a.common.out.join("scenario.json"), scenario.to_json()?)?;
    fs::write(a.common.out.join("plan.json"), plan.to_json()?)?;
    let r = &plan.report;
    println!(
        "{}: {} positions, {} visited, tour {:.3} m, timespan {:.3} s, loss {:.3} J",
        plan.scheme,
        plan.position_count,
        plan.tour_positions.len(),
        r.tour_length,
        r.timespan,
        r.e_loss_total
    );
    if !check.is_valid() {
        eprintln!("schedule failed validation: {check:?}");
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

fn experiment(a: ExperimentArgs) -> CliResult {
    let mut cfg = match &a.common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig {
            preset: a.common.preset,
            seeds: (a.common.seed..a.common.seed + a.seeds).collect(),
            n_values: vec![ScenarioParams::preset(a.common.preset).n],
            ..Default::default()
        },
    };
    if !a.scheme.is_empty() {
        cfg.schemes = a.scheme.iter().map(|m| m.to_string()).collect();
    }
    if !a.n.is_empty() {
        cfg.n_values = a.n.clone();
    }
    if !a.ratio.is_empty() {
        cfg.ratios = a.ratio.clone();
    }
    let result = harness::run_experiment(&cfg, a.common.jobs.max(1))?;
    harness::write_outputs(&result, &a.common.out)?;
    fs::write(a.common.out.join("config.json"), serde_json::to_string_pretty(&cfg)?)?;
    println!(
        "{} runs, {} skipped as infeasible, {} failed; results in {}",
        result.rows.len(),
        result.skipped.len(),
        result.failures.len(),
        a.common.out.display()
    );
    Ok(if result.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn run_oracle(a: OracleArgs) -> CliResult {
    rayon_threads(a.common.jobs);
    let cone = ScenarioParams::preset(a.common.preset).wpt.cone()?;
    let checks = oracle::run_oracles(a.common.seed, a.instances, cone)?;
    write_json(&a.common.out, "oracle.json", &serde_json::to_string_pretty(&checks)?)?;
    let mut ok = true;
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        ok &= c.passed;
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn write_json(dir: &Path, name: &str, body: &str) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), body)
}

fn rayon_threads(jobs: usize) {
    // the global pool only matters for the per-position direction work
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global() {
        log::debug!("rayon pool already set: {e}");
    }
}
