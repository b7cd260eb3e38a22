//! End-to-end planning: positions, directions, charging times, tour, schedule.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baselines::{
    generate_directions, generate_positions, tour_baseline, DirectionParams, MethodChoice, PositionParams,
    TourParams,
};
use crate::charge_time::{solve_p3, P3Input};
use crate::energy::{account_schedule, build_etc_matrix, EnergyReport};
use crate::error::Result;
use crate::geometry::Vec3;
use crate::scenario::Scenario;
use crate::schedule::{CtsItem, CtsSchedule, ItemState};
use crate::tour::Tour;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SchedulerOptions {
    pub positions: PositionParams,
    pub directions: DirectionParams,
    pub tour: TourParams,
    /// Positions whose total charging time is at most this are not visited (s).
    pub prune_eps: f64,
}

impl Default for SchedulerOptions {
    fn default() -> Self {
        SchedulerOptions {
            positions: PositionParams::default(),
            directions: DirectionParams::default(),
            tour: TourParams::default(),
            prune_eps: 1e-9,
        }
    }
}

/// Wall-clock seconds per stage. Not serialized with the plan.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub direction: f64,
    pub lp: f64,
    pub tour: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub scheme: String,
    pub items: Vec<CtsItem>,
    pub report: EnergyReport,
    /// Candidate charging positions.
    pub position_count: usize,
    /// Pos-dir pairs offered to the charging-time program.
    pub direction_count: usize,
    /// Visited positions, in tour order.
    pub tour_positions: Vec<Vec3>,
    pub tour_length: f64,
    /// Objective of the charging-time program (J).
    pub lp_objective: f64,
    #[serde(skip)]
    pub timings: StageTimings,
}

impl Plan {
    pub fn schedule(&self) -> CtsSchedule {
        CtsSchedule::new(self.items.clone())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Runs the pipeline with the stages picked in `methods`.
pub fn felkh3d(scenario: &Scenario, methods: MethodChoice, options: &SchedulerOptions) -> Result<Plan> {
    scenario.validate()?;
    let started = Instant::now();
    let cone = scenario.wpt.cone()?;
    let nodes = scenario.positions();
    let uav = &scenario.uav;

    let clock = Instant::now();
    let positions = generate_positions(&nodes, cone.range, methods.position, &options.positions)?;
    let pairs = generate_directions(&nodes, &positions, cone, methods.direction, &options.directions)?;
    let direction_time = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let etc = build_etc_matrix(&pairs, &nodes, &scenario.wpt);
    let e_b: Vec<f64> = scenario.nodes.iter().map(|n| n.e_b).collect();
    let e_u: Vec<f64> = scenario.nodes.iter().map(|n| n.e_u).collect();
    let e_d: Vec<f64> = scenario.nodes.iter().map(|n| n.e_d).collect();
    let p_hov = uav.p_hov()?;
    let sol = solve_p3(&P3Input {
        etc: &etc,
        e_b: &e_b,
        e_u: &e_u,
        e_d: &e_d,
        p0: uav.p0,
        p_hov,
    })?;
    let lp_time = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let mut t_pos = vec![0.0; positions.len()];
    for (p, t) in pairs.iter().zip(&sol.t) {
        t_pos[p.position_index] += t;
    }
    let refined: Vec<usize> = (0..positions.len()).filter(|&i| t_pos[i] > options.prune_eps).collect();
    let refined_pts: Vec<Vec3> = refined.iter().map(|&i| positions[i]).collect();
    let tour: Tour = tour_baseline(&refined_pts, scenario.base, methods.tour, &options.tour);
    let tour_time = clock.elapsed().as_secs_f64();

    let mut items = Vec::new();
    let mut here = scenario.base;
    for &k in &tour.order {
        let pos_index = refined[k];
        let target = positions[pos_index];
        items.push(CtsItem::fly(target, here.distance(target) / uav.v_bar));
        here = target;
        let mut charges: Vec<(usize, f64)> = pairs
            .iter()
            .enumerate()
            .filter(|(i, p)| p.position_index == pos_index && sol.t[*i] > 0.0)
            .map(|(i, _)| (i, sol.t[i]))
            .collect();
        charges.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        items.extend(charges.iter().map(|&(i, t)| CtsItem::charge(pairs[i].direction, t)));
    }
    if !tour.order.is_empty() {
        items.push(CtsItem::fly(scenario.base, here.distance(scenario.base) / uav.v_bar));
    }
    let schedule = CtsSchedule::new(items);
    let report = account_schedule(&schedule, scenario)?;
    log::debug!(
        "{}: {} positions, {} pairs, {} visited, loss {:.3} J",
        methods,
        positions.len(),
        pairs.len(),
        refined.len(),
        report.e_loss_total
    );
    Ok(Plan {
        scheme: methods.scheme_name(),
        items: schedule.items,
        report,
        position_count: positions.len(),
        direction_count: pairs.len(),
        tour_positions: tour.order.iter().map(|&k| refined_pts[k]).collect(),
        tour_length: tour.length,
        lp_objective: sol.objective,
        timings: StageTimings {
            direction: direction_time,
            lp: lp_time,
            tour: tour_time,
            total: started.elapsed().as_secs_f64(),
        },
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// `(node, shortfall in J)` for nodes whose demand is not met.
    pub unmet: Vec<(usize, f64)>,
    pub e_f0: f64,
    pub uav_energy_ok: bool,
    /// `(item index, reason)` for items that cannot be executed.
    pub malformed: Vec<(usize, String)>,
    /// Fly items to a spot where nothing is charged before moving on.
    pub wasteful_flights: Vec<usize>,
    pub returns_to_base: bool,
    /// Accounting over the well-formed items.
    pub report: Option<EnergyReport>,
}

impl ValidationReport {
    /// Demands met, UAV energy sufficient, items well formed, loop closed.
    pub fn is_valid(&self) -> bool {
        self.unmet.is_empty() && self.uav_energy_ok && self.malformed.is_empty() && self.returns_to_base
    }
}

const DEMAND_TOL: f64 = 1e-6;

pub fn validate_schedule(schedule: &CtsSchedule, scenario: &Scenario) -> ValidationReport {
    let mut out = ValidationReport::default();
    let v_bar = scenario.uav.v_bar;
    let mut kept = Vec::new();
    let mut here = scenario.base;
    for (i, item) in schedule.items.iter().enumerate() {
        if !(item.t >= 0.0 && item.t.is_finite()) {
            out.malformed.push((i, format!("time {} is not a non-negative number", item.t)));
            continue;
        }
        match item.state {
            ItemState::Fly => match item.x {
                Some(x) if x.is_finite() => {
                    let need = here.distance(x) / v_bar;
                    if (item.t - need).abs() > 1e-6 * (1.0 + need) {
                        out.malformed.push((i, format!("flight takes {need} s, item says {}", item.t)));
                        continue;
                    }
                    here = x;
                    kept.push(item.clone());
                }
                _ => out.malformed.push((i, "fly item without a finite target".into())),
            },
            ItemState::Charge => match item.v {
                Some(v) if v.is_finite() && (v.norm() - 1.0).abs() <= 1e-6 => kept.push(item.clone()),
                _ => out.malformed.push((i, "charge item without a unit direction".into())),
            },
        }
    }
    out.returns_to_base = here.distance(scenario.base) <= 1e-9;

    let items = &schedule.items;
    let last = items.len().saturating_sub(1);
    for (i, item) in items.iter().enumerate() {
        if item.is_fly() && i != last {
            let charged = items[i + 1..]
                .iter()
                .take_while(|n| !n.is_fly())
                .any(|n| n.t > 0.0);
            if !charged {
                out.wasteful_flights.push(i);
            }
        }
    }

    match account_schedule(&CtsSchedule::new(kept), scenario) {
        Ok(rep) => {
            for (j, node) in scenario.nodes.iter().enumerate() {
                let got = rep.e_f[j] - node.e_b;
                if got < node.e_d - DEMAND_TOL {
                    out.unmet.push((j, node.e_d - got));
                }
            }
            out.e_f0 = rep.e_f0;
            out.uav_energy_ok = rep.uav_feasible;
            out.report = Some(rep);
        }
        Err(e) => out.malformed.push((usize::MAX, e.to_string())),
    }
    out
}
