//! Seeded scenario generation and batch experiments with CSV output.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::MethodChoice;
use crate::energy::{UavParams, WptParams};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scenario::{Node, Scenario};
use crate::scheduler::{felkh3d, Plan, SchedulerOptions, StageTimings};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// 50 nodes in 40×40×10 m, close to the large preset's density.
    #[default]
    Desk,
    /// 400 nodes in 100×100×20 m.
    Large,
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Preset::Desk),
            "large" => Ok(Preset::Large),
            _ => Err(Error::InvalidParameter(format!("unknown preset {s:?}"))),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Desk => "desk",
            Preset::Large => "large",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioParams {
    pub n: usize,
    /// Box extent from the origin (m).
    pub region: [f64; 3],
    pub e_b_range: [f64; 2],
    pub e_d_range: [f64; 2],
    /// Node battery capacity (J).
    pub e_u: f64,
    pub p0: f64,
    pub v_bar: f64,
    /// Nominal flight power (W); hover power is `ratio` times this.
    pub p_fly: f64,
    pub ratio: f64,
    /// UAV starting energy (J).
    pub uav_energy: f64,
    pub wpt: WptParams,
    pub base: Vec3,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams::preset(Preset::Desk)
    }
}

impl ScenarioParams {
    pub fn preset(p: Preset) -> Self {
        let (n, region) = match p {
            Preset::Desk => (50, [40.0, 40.0, 10.0]),
            Preset::Large => (400, [100.0, 100.0, 20.0]),
        };
        ScenarioParams {
            n,
            region,
            e_b_range: [20.0, 90.0],
            e_d_range: [20.0, 90.0],
            e_u: 180.0,
            p0: 1.0,
            v_bar: 1.0,
            p_fly: 8.0,
            ratio: 1.0,
            uav_energy: 1e6,
            wpt: WptParams::default(),
            base: Vec3::ZERO,
        }
    }

    pub fn uav(&self) -> UavParams {
        UavParams::with_powers(self.p0, self.v_bar, self.p_fly, self.ratio * self.p_fly, self.uav_energy)
    }

    /// Nodes per cubic metre.
    pub fn density(&self) -> f64 {
        self.n as f64 / (self.region[0] * self.region[1] * self.region[2])
    }
}

pub fn generate_scenario(seed: u64, params: &ScenarioParams) -> Result<Scenario> {
    if !params.region.iter().all(|r| *r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("empty region {:?}", params.region)));
    }
    let ranges_ok = [params.e_b_range, params.e_d_range]
        .iter()
        .all(|[lo, hi]| 0.0 <= *lo && lo <= hi);
    if !ranges_ok || params.e_u <= 0.0 {
        return Err(Error::InvalidParameter("energy ranges must be ordered and non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]| if hi > lo { rng.gen_range(lo..hi) } else { lo };
    let mut clamped = 0;
    let nodes = (0..params.n)
        .map(|_| {
            let pos = Vec3::new(
                rng.gen_range(0.0..params.region[0]),
                rng.gen_range(0.0..params.region[1]),
                rng.gen_range(0.0..params.region[2]),
            );
            let e_b = draw(&mut rng, params.e_b_range).min(params.e_u);
            let mut e_d = draw(&mut rng, params.e_d_range);
            if e_b + e_d > params.e_u {
                e_d = params.e_u - e_b;
                clamped += 1;
            }
            Node {
                pos,
                e_b,
                e_u: params.e_u,
                e_d,
            }
        })
        .collect();
    if clamped > 0 {
        log::warn!("seed {seed}: clamped {clamped} demands to battery headroom");
    }
    let sc = Scenario {
        nodes,
        uav: params.uav(),
        wpt: params.wpt,
        base: params.base,
    };
    sc.validate()?;
    Ok(sc)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub seeds: Vec<u64>,
    pub n_values: Vec<usize>,
    pub ratios: Vec<f64>,
    /// `pos:dir:tour` strings or scheme names.
    pub schemes: Vec<String>,
    /// Overrides the preset's region.
    pub region: Option<[f64; 3]>,
    pub options: SchedulerOptions,
    /// Also write one schedule JSON per run.
    pub write_schedules: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            preset: Preset::Desk,
            seeds: (0..5).collect(),
            n_values: vec![50],
            ratios: vec![1.0],
            schemes: vec![
                MethodChoice::FELKH3D.to_string(),
                MethodChoice::GRID_ACC_GREEDY.to_string(),
                MethodChoice::GROUP_POLY_ANT.to_string(),
            ],
            region: None,
            options: SchedulerOptions::default(),
            write_schedules: false,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(&fs::read_to_string(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() || self.n_values.is_empty() || self.ratios.is_empty() || self.schemes.is_empty() {
            return Err(Error::InvalidParameter("seeds, n_values, ratios and schemes must be nonempty".into()));
        }
        self.methods().map(|_| ())
    }

    pub fn methods(&self) -> Result<Vec<MethodChoice>> {
        self.schemes.iter().map(|s| s.parse()).collect()
    }

    pub fn scenario_params(&self, n: usize, ratio: f64) -> ScenarioParams {
        let mut p = ScenarioParams::preset(self.preset);
        p.n = n;
        p.ratio = ratio;
        if let Some(r) = self.region {
            p.region = r;
        }
        p
    }
}

/// One run's results. Timings are kept apart so the metrics file is reproducible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub scheme: String,
    pub seed: u64,
    pub n: usize,
    pub ratio: f64,
    pub e_loss_total: f64,
    pub e_loss_balance: f64,
    pub e_loss_wpt_hov: f64,
    pub timespan: f64,
    pub e_fly: f64,
    pub e_hov: f64,
    pub e_chrg: f64,
    pub e_rcv: f64,
    pub tour_length: f64,
    pub position_count: usize,
    pub visited_positions: usize,
    pub direction_count: usize,
    pub timings: StageTimings,
}

impl MetricsRow {
    pub fn from_plan(plan: &Plan, seed: u64, n: usize, ratio: f64) -> Self {
        let r = &plan.report;
        MetricsRow {
            scheme: plan.scheme.clone(),
            seed,
            n,
            ratio,
            e_loss_total: r.e_loss_total,
            e_loss_balance: r.loss_by_balance(),
            e_loss_wpt_hov: r.e_loss_wpt_hov,
            timespan: r.timespan,
            e_fly: r.e_fly,
            e_hov: r.e_hov,
            e_chrg: r.e_chrg,
            e_rcv: r.e_rcv,
            tour_length: r.tour_length,
            position_count: plan.position_count,
            visited_positions: plan.tour_positions.len(),
            direction_count: plan.direction_count,
            timings: plan.timings,
        }
    }

    /// The two loss computations agree.
    pub fn balanced(&self, tol: f64) -> bool {
        (self.e_loss_total - self.e_loss_balance).abs() <= tol
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedRun {
    pub scheme: String,
    pub seed: u64,
    pub n: usize,
    pub ratio: f64,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub rows: Vec<MetricsRow>,
    /// Infeasible instances.
    pub skipped: Vec<SkippedRun>,
    /// Runs that failed for any other reason.
    pub failures: Vec<SkippedRun>,
    #[serde(skip)]
    pub plans: Vec<(String, Plan)>,
}

#[derive(Clone, Copy, Debug)]
struct RunKey {
    method: MethodChoice,
    n: usize,
    ratio: f64,
    seed: u64,
}

fn run_label(k: &RunKey) -> String {
    format!("{}_n{}_r{}_s{}", k.method.to_string().replace(':', "-"), k.n, k.ratio, k.seed)
}

/// Runs every (scheme, n, ratio, seed) combination on `jobs` worker threads.
/// Rows come back ordered by scheme, sweep point and seed.
pub fn run_experiment(config: &ExperimentConfig, jobs: usize) -> Result<ExperimentResult> {
    config.validate()?;
    let methods = config.methods()?;
    let mut keys = Vec::new();
    for &method in &methods {
        for &n in &config.n_values {
            for &ratio in &config.ratios {
                for &seed in &config.seeds {
                    keys.push(RunKey { method, n, ratio, seed });
                }
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    let outcomes: Vec<(RunKey, Result<Plan>)> = pool.install(|| {
        keys.par_iter()
            .map(|k| {
                let res = generate_scenario(k.seed, &config.scenario_params(k.n, k.ratio))
                    .and_then(|sc| felkh3d(&sc, k.method, &config.options));
                (*k, res)
            })
            .collect()
    });
    let mut out = ExperimentResult::default();
    for (k, res) in outcomes {
        match res {
            Ok(plan) => {
                out.rows.push(MetricsRow::from_plan(&plan, k.seed, k.n, k.ratio));
                if config.write_schedules {
                    out.plans.push((run_label(&k), plan));
                }
            }
            Err(e) => {
                let skip = SkippedRun {
                    scheme: k.method.scheme_name(),
                    seed: k.seed,
                    n: k.n,
                    ratio: k.ratio,
                    reason: e.to_string(),
                };
                if e.is_infeasible() {
                    log::warn!("skipping {}: {}", run_label(&k), skip.reason);
                    out.skipped.push(skip);
                } else {
                    log::error!("run {} failed: {}", run_label(&k), skip.reason);
                    out.failures.push(skip);
                }
            }
        }
    }
    Ok(out)
}

/// Nine significant digits.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.8e}")
}

pub const METRICS_COLUMNS: [&str; 16] = [
    "scheme",
    "seed",
    "n",
    "ratio",
    "e_loss_total",
    "e_loss_balance",
    "e_loss_wpt_hov",
    "timespan",
    "e_fly",
    "e_hov",
    "e_chrg",
    "e_rcv",
    "tour_length",
    "position_count",
    "visited_positions",
    "direction_count",
];

pub fn metrics_csv(rows: &[MetricsRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(METRICS_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.scheme.clone(),
            r.seed.to_string(),
            r.n.to_string(),
            fmt_float(r.ratio),
            fmt_float(r.e_loss_total),
            fmt_float(r.e_loss_balance),
            fmt_float(r.e_loss_wpt_hov),
            fmt_float(r.timespan),
            fmt_float(r.e_fly),
            fmt_float(r.e_hov),
            fmt_float(r.e_chrg),
            fmt_float(r.e_rcv),
            fmt_float(r.tour_length),
            r.position_count.to_string(),
            r.visited_positions.to_string(),
            r.direction_count.to_string(),
        ])?;
    }
    into_string(w)
}

pub fn timings_csv(rows: &[MetricsRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["scheme", "seed", "n", "ratio", "direction_s", "lp_s", "tour_s", "total_s"])?;
    for r in rows {
        let t = r.timings;
        w.write_record([
            r.scheme.clone(),
            r.seed.to_string(),
            r.n.to_string(),
            fmt_float(r.ratio),
            fmt_float(t.direction),
            fmt_float(t.lp),
            fmt_float(t.tour),
            fmt_float(t.total),
        ])?;
    }
    into_string(w)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub scheme: String,
    pub n: usize,
    pub ratio: f64,
    pub metric: String,
    pub count: usize,
    pub mean: f64,
    pub std: f64,
}

/// Mean and sample standard deviation per (scheme, n, ratio, metric), in row order.
pub fn aggregate(rows: &[MetricsRow]) -> Vec<Aggregate> {
    type Metric = fn(&MetricsRow) -> f64;
    let metrics: [(&str, Metric); 8] = [
        ("e_loss_total", |r| r.e_loss_total),
        ("timespan", |r| r.timespan),
        ("e_fly", |r| r.e_fly),
        ("e_hov", |r| r.e_hov),
        ("e_chrg", |r| r.e_chrg),
        ("tour_length", |r| r.tour_length),
        ("position_count", |r| r.position_count as f64),
        ("direction_count", |r| r.direction_count as f64),
    ];
    let mut order: Vec<(String, usize, u64)> = Vec::new();
    let mut groups: BTreeMap<(String, usize, u64), Vec<&MetricsRow>> = BTreeMap::new();
    for r in rows {
        let key = (r.scheme.clone(), r.n, r.ratio.to_bits());
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(r);
    }
    let mut out = Vec::new();
    for key in order {
        let g = &groups[&key];
        for (name, f) in metrics {
            let vals: Vec<f64> = g.iter().map(|r| f(r)).collect();
            let (mean, std) = mean_std(&vals);
            out.push(Aggregate {
                scheme: key.0.clone(),
                n: key.1,
                ratio: f64::from_bits(key.2),
                metric: name.into(),
                count: vals.len(),
                mean,
                std,
            });
        }
    }
    out
}

pub fn mean_std(vals: &[f64]) -> (f64, f64) {
    let n = vals.len() as f64;
    if vals.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = vals.iter().sum::<f64>() / n;
    let var = if vals.len() > 1 {
        vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

pub fn aggregates_csv(aggs: &[Aggregate]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["scheme", "n", "ratio", "metric", "count", "mean", "std"])?;
    for a in aggs {
        w.write_record([
            a.scheme.clone(),
            a.n.to_string(),
            fmt_float(a.ratio),
            a.metric.clone(),
            a.count.to_string(),
            fmt_float(a.mean),
            fmt_float(a.std),
        ])?;
    }
    into_string(w)
}

fn skipped_csv(skipped: &[SkippedRun]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["scheme", "seed", "n", "ratio", "reason"])?;
    for s in skipped {
        w.write_record([s.scheme.clone(), s.seed.to_string(), s.n.to_string(), fmt_float(s.ratio), s.reason.clone()])?;
    }
    into_string(w)
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes metrics.csv, aggregates.csv, timings.csv, skipped.csv and optional schedules/.
pub fn write_outputs(result: &ExperimentResult, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("metrics.csv"), metrics_csv(&result.rows)?)?;
    fs::write(out_dir.join("aggregates.csv"), aggregates_csv(&aggregate(&result.rows))?)?;
    fs::write(out_dir.join("timings.csv"), timings_csv(&result.rows)?)?;
    let mut skipped = result.skipped.clone();
    skipped.extend(result.failures.iter().cloned());
    fs::write(out_dir.join("skipped.csv"), skipped_csv(&skipped)?)?;
    if !result.plans.is_empty() {
        let dir = out_dir.join("schedules");
        fs::create_dir_all(&dir)?;
        for (label, plan) in &result.plans {
            fs::write(dir.join(format!("{label}.json")), plan.to_json()?)?;
        }
    }
    Ok(())
}
