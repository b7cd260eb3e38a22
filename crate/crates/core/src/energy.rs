//! UAV power, wireless transfer coefficients and schedule energy accounting.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ConeParams, Vec3, BOUNDARY_TOL, COLOCATED_TOL};
use crate::scenario::Scenario;
use crate::schedule::{CtsSchedule, ItemState};
use crate::synthesis::PosDirPair;

/// Rotary-wing power model coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotorParams {
    /// Blade profile power in hover (W).
    pub p_b: f64,
    /// Induced power in hover (W).
    pub p_i: f64,
    /// Rotor tip speed (m/s).
    pub u_tip: f64,
    /// Mean induced velocity in hover (m/s).
    pub v_0: f64,
    /// Fuselage drag ratio.
    pub d_0: f64,
    /// Air density (kg/m³).
    pub rho: f64,
    /// Rotor solidity.
    pub s_uav: f64,
    /// Rotor disc area (m²).
    pub area: f64,
}

impl RotorParams {
    fn validate(&self) -> Result<()> {
        let all = [
            self.p_b, self.p_i, self.u_tip, self.v_0, self.d_0, self.rho, self.s_uav, self.area,
        ];
        if all.iter().all(|v| *v > 0.0 && v.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("rotor parameters must be positive: {self:?}")))
        }
    }
}

/// Propulsion power at forward speed `v`.
pub fn uav_power(v: f64, rotor: &RotorParams) -> Result<f64> {
    if v.is_nan() || v < 0.0 {
        return Err(Error::InvalidParameter(format!("speed must be non-negative, got {v}")));
    }
    rotor.validate()?;
    let RotorParams {
        p_b,
        p_i,
        u_tip,
        v_0,
        d_0,
        rho,
        s_uav,
        area,
    } = *rotor;
    let v2 = v * v;
    let v02 = v_0 * v_0;
    let blade = p_b * (1.0 + 3.0 * v2 / (u_tip * u_tip));
    let induced = p_i * ((1.0 + v2 * v2 / (4.0 * v02 * v02)).sqrt() - v2 / (2.0 * v02)).sqrt();
    let parasite = 0.5 * d_0 * rho * s_uav * area * v2 * v;
    Ok(blade + induced + parasite)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UavParams {
    /// Radiated transmit power (W).
    pub p0: f64,
    /// Cruise speed (m/s).
    pub v_bar: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotor: Option<RotorParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_fly: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_hov: Option<f64>,
    /// Initial energy (J).
    pub e_b0: f64,
    /// Battery capacity (J).
    pub e_u0: f64,
    /// Nominal UAV power rating; carried for completeness, not used by the model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

impl UavParams {
    /// Direct power overrides: fixed flight and hover draw.
    pub fn with_powers(p0: f64, v_bar: f64, p_fly: f64, p_hov: f64, e_b0: f64) -> Self {
        UavParams {
            p0,
            v_bar,
            rotor: None,
            p_fly: Some(p_fly),
            p_hov: Some(p_hov),
            e_b0,
            e_u0: e_b0,
            p: None,
        }
    }

    pub fn p_fly(&self) -> Result<f64> {
        match (self.p_fly, &self.rotor) {
            (Some(p), _) => Ok(p),
            (None, Some(r)) => uav_power(self.v_bar, r),
            (None, None) => Err(Error::MissingPowerModel),
        }
    }

    pub fn p_hov(&self) -> Result<f64> {
        match (self.p_hov, &self.rotor) {
            (Some(p), _) => Ok(p),
            (None, Some(r)) => uav_power(0.0, r),
            (None, None) => Err(Error::MissingPowerModel),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p0 > 0.0 && self.v_bar > 0.0) {
            return Err(Error::InvalidParameter("p0 and v_bar must be positive".into()));
        }
        let (fly, hov) = (self.p_fly()?, self.p_hov()?);
        if !(hov > 0.0 && fly > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "flight/hover power must be positive (p_fly={fly}, p_hov={hov})"
            )));
        }
        if self.e_b0 > self.e_u0 {
            return Err(Error::InvalidParameter("e_b0 exceeds e_u0".into()));
        }
        Ok(())
    }
}

/// Distance-decay transfer model plus the beam geometry it applies within.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WptParams {
    pub delta: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(rename = "D", alias = "range")]
    pub range: f64,
    pub c_max: f64,
    pub half_angle: f64,
}

impl Default for WptParams {
    fn default() -> Self {
        WptParams {
            delta: 12.0,
            alpha: 2.0,
            beta: 4.0,
            range: 6.0,
            c_max: 0.9,
            half_angle: PI / 6.0,
        }
    }
}

impl WptParams {
    pub fn cone(&self) -> Result<ConeParams> {
        if !(self.c_max > 0.0 && self.c_max <= 1.0) {
            return Err(Error::InvalidParameter(format!("c_max must lie in (0, 1], got {}", self.c_max)));
        }
        ConeParams::new(self.half_angle, self.range)
    }

    /// Capped coefficient at distance `d`, ignoring the beam shape.
    pub fn decay(&self, d: f64) -> f64 {
        (self.delta / (self.alpha + d).powf(self.beta)).min(self.c_max)
    }
}

/// Fraction of transmitted power a node receives.
pub fn transfer_coefficient(pair_dir: Vec3, node_dir: Vec3, d: f64, wpt: &WptParams) -> Result<f64> {
    if d < 0.0 || d.is_nan() {
        return Err(Error::InvalidParameter(format!("distance must be non-negative, got {d}")));
    }
    if d > wpt.range || pair_dir.angle_to(node_dir) > wpt.half_angle + BOUNDARY_TOL {
        return Ok(0.0);
    }
    Ok(wpt.decay(d))
}

/// Coefficient for a node at `node` when hovering at `position` and beaming
/// along `dir`. A node at the position itself receives the zero-distance value.
pub fn coefficient_at(position: Vec3, dir: Vec3, node: Vec3, wpt: &WptParams) -> f64 {
    let rel = node - position;
    let d = rel.norm();
    if d <= COLOCATED_TOL {
        return wpt.decay(0.0);
    }
    transfer_coefficient(dir, rel / d, d, wpt).expect("distance is non-negative")
}

/// Sparse pair × node coefficient matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtcMatrix {
    pub n_nodes: usize,
    /// Per pair, `(node, coefficient)` with coefficient > 0, ascending by node.
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl EtcMatrix {
    pub fn n_pairs(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, pair: usize, node: usize) -> f64 {
        self.rows[pair]
            .binary_search_by_key(&node, |e| e.0)
            .map(|k| self.rows[pair][k].1)
            .unwrap_or(0.0)
    }

    /// Nodes that no pair reaches.
    pub fn uncovered_nodes(&self) -> Vec<usize> {
        let mut hit = vec![false; self.n_nodes];
        for row in &self.rows {
            for &(j, _) in row {
                hit[j] = true;
            }
        }
        (0..self.n_nodes).filter(|&j| !hit[j]).collect()
    }

    pub fn from_dense(dense: &[Vec<f64>], n_nodes: usize) -> Self {
        EtcMatrix {
            n_nodes,
            rows: dense
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|(_, c)| **c > 0.0)
                        .map(|(j, c)| (j, *c))
                        .collect()
                })
                .collect(),
        }
    }
}

pub fn build_etc_matrix(pairs: &[PosDirPair], nodes: &[Vec3], wpt: &WptParams) -> EtcMatrix {
    let rows = pairs
        .iter()
        .map(|p| {
            nodes
                .iter()
                .enumerate()
                .filter_map(|(j, &n)| {
                    let c = coefficient_at(p.position, p.direction, n, wpt);
                    (c > 0.0).then_some((j, c))
                })
                .collect()
        })
        .collect();
    EtcMatrix {
        n_nodes: nodes.len(),
        rows,
    }
}

/// Energy bookkeeping of an executed schedule.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub e_fly: f64,
    pub e_hov: f64,
    pub e_chrg: f64,
    /// Energy actually stored by the nodes after the capacity cap.
    pub e_rcv: f64,
    /// `e_fly + e_hov + e_chrg - e_rcv`.
    pub e_loss_total: f64,
    /// `e_hov + e_chrg - e_rcv`.
    pub e_loss_wpt_hov: f64,
    pub t_fly: f64,
    pub t_chrg: f64,
    pub timespan: f64,
    /// Final node energies.
    pub e_f: Vec<f64>,
    /// UAV energy left at the end.
    pub e_f0: f64,
    /// Initial energy of the UAV and all nodes.
    pub e_tb: f64,
    /// Final energy of the UAV and all nodes.
    pub e_tf: f64,
    /// Uncapped energy delivered to each node.
    pub e_r: Vec<f64>,
    /// False when the UAV would run its battery below zero.
    pub uav_feasible: bool,
    pub tour_length: f64,
}

impl EnergyReport {
    /// Loss computed from the energy balance `e_TB - e_TF`.
    pub fn loss_by_balance(&self) -> f64 {
        self.e_tb - self.e_tf
    }

    pub fn e_total(&self) -> f64 {
        self.e_fly + self.e_hov + self.e_chrg
    }
}

/// Replays `schedule` from the base station and accounts every joule.
pub fn account_schedule(schedule: &CtsSchedule, scenario: &Scenario) -> Result<EnergyReport> {
    let uav = &scenario.uav;
    let wpt = &scenario.wpt;
    let (p_fly, p_hov) = (uav.p_fly()?, uav.p_hov()?);
    let n = scenario.nodes.len();
    let mut rep = EnergyReport {
        e_r: vec![0.0; n],
        ..Default::default()
    };
    let mut here = scenario.base;
    for item in &schedule.items {
        if item.t < 0.0 || !item.t.is_finite() {
            return Err(Error::InvalidParameter(format!("item time {} is invalid", item.t)));
        }
        match item.state {
            ItemState::Fly => {
                let x = item
                    .x
                    .ok_or_else(|| Error::InvalidParameter("fly item without target".into()))?;
                let d = here.distance(x);
                rep.tour_length += d;
                rep.t_fly += d / uav.v_bar;
                rep.e_fly += p_fly * d / uav.v_bar;
                here = x;
            }
            ItemState::Charge => {
                let v = item
                    .v
                    .and_then(|v| v.normalized())
                    .ok_or_else(|| Error::InvalidParameter("charge item without direction".into()))?;
                rep.t_chrg += item.t;
                rep.e_chrg += uav.p0 * item.t;
                rep.e_hov += p_hov * item.t;
                for (j, node) in scenario.nodes.iter().enumerate() {
                    let c = coefficient_at(here, v, node.pos, wpt);
                    if c > 0.0 {
                        rep.e_r[j] += uav.p0 * c * item.t;
                    }
                }
            }
        }
    }
    rep.timespan = schedule.timespan();
    rep.e_f = scenario
        .nodes
        .iter()
        .zip(&rep.e_r)
        .map(|(node, r)| (node.e_b + r).min(node.e_u))
        .collect();
    rep.e_rcv = scenario
        .nodes
        .iter()
        .zip(&rep.e_f)
        .map(|(node, f)| f - node.e_b)
        .sum();
    let e_total = rep.e_total();
    rep.e_loss_total = e_total - rep.e_rcv;
    rep.e_loss_wpt_hov = rep.e_hov + rep.e_chrg - rep.e_rcv;
    rep.e_f0 = uav.e_b0 - e_total;
    rep.uav_feasible = rep.e_f0 >= 0.0;
    rep.e_tb = uav.e_b0 + scenario.nodes.iter().map(|n| n.e_b).sum::<f64>();
    rep.e_tf = rep.e_f0 + rep.e_f.iter().sum::<f64>();
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Node;
    use crate::schedule::CtsItem;

    fn rotor() -> RotorParams {
        RotorParams {
            p_b: 79.86,
            p_i: 88.63,
            u_tip: 120.0,
            v_0: 4.03,
            d_0: 0.6,
            rho: 1.225,
            s_uav: 0.05,
            area: 0.503,
        }
    }

    #[test]
    fn hover_power_is_blade_plus_induced() {
        let r = rotor();
        assert!((uav_power(0.0, &r).unwrap() - (r.p_b + r.p_i)).abs() < 1e-12);
    }

    #[test]
    fn high_speed_power_is_cubic() {
        let r = rotor();
        let (a, b) = (uav_power(2000.0, &r).unwrap(), uav_power(4000.0, &r).unwrap());
        assert!((b / a - 8.0).abs() < 0.05, "ratio {}", b / a);
        assert!(uav_power(-1.0, &r).is_err());
    }

    #[test]
    fn overrides_and_missing_model() {
        let mut u = UavParams::with_powers(1.0, 1.0, 10.0, 5.0, 1e6);
        u.rotor = Some(rotor());
        assert_eq!(u.p_hov().unwrap() / u.p_fly().unwrap(), 0.5);
        u.p_fly = None;
        u.p_hov = None;
        assert!((u.p_hov().unwrap() - 168.49).abs() < 1e-9);
        assert!(u.p_fly().unwrap() > 0.0);
        u.rotor = None;
        assert!(matches!(u.p_fly(), Err(Error::MissingPowerModel)));
    }

    #[test]
    fn coefficient_examples() {
        let w = WptParams::default();
        assert_eq!(transfer_coefficient(Vec3::X, Vec3::X, 6.5, &w).unwrap(), 0.0);
        let c1 = transfer_coefficient(Vec3::X, Vec3::X, 1.0, &w).unwrap();
        assert!((c1 - 12.0 / 81.0).abs() < 1e-15);
        assert!((transfer_coefficient(Vec3::X, Vec3::X, 0.0, &w).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(
            transfer_coefficient(Vec3::X, Vec3::new(0.0, 1.0, 0.0), 1.0, &w).unwrap(),
            0.0
        );
        assert!(transfer_coefficient(Vec3::X, Vec3::X, -1.0, &w).is_err());
        let tight = WptParams { alpha: 1.0, ..w };
        assert_eq!(tight.decay(0.0), 0.9);
    }

    #[test]
    fn coefficient_non_increasing_in_distance() {
        let w = WptParams::default();
        let mut prev = f64::INFINITY;
        for k in 0..=600 {
            let c = transfer_coefficient(Vec3::X, Vec3::X, k as f64 * 0.01, &w).unwrap();
            assert!(c <= prev);
            prev = c;
        }
    }

    fn one_node(e_b: f64, e_u: f64) -> Scenario {
        Scenario {
            nodes: vec![Node {
                pos: Vec3::new(1.0, 0.0, 0.0),
                e_b,
                e_u,
                e_d: 10.0,
            }],
            uav: UavParams::with_powers(1.0, 1.0, 8.0, 4.0, 1e6),
            wpt: WptParams::default(),
            base: Vec3::ZERO,
        }
    }

    #[test]
    fn etc_matrix_single_pair() {
        let sc = one_node(0.0, 100.0);
        let pair = PosDirPair {
            position_index: 0,
            position: Vec3::ZERO,
            direction: Vec3::X,
            covered: [0].into_iter().collect(),
        };
        let m = build_etc_matrix(&[pair], &sc.positions(), &sc.wpt);
        assert_eq!(m.rows, vec![vec![(0, 12.0 / 81.0)]]);
        let far = build_etc_matrix(
            &[],
            &sc.positions(),
            &sc.wpt,
        );
        assert_eq!(far.uncovered_nodes(), vec![0]);
    }

    #[test]
    fn empty_schedule_costs_nothing() {
        let sc = one_node(30.0, 100.0);
        let r = account_schedule(&CtsSchedule::default(), &sc).unwrap();
        assert_eq!(r.e_loss_total, 0.0);
        assert_eq!(r.e_f, vec![30.0]);
        assert_eq!(r.loss_by_balance(), 0.0);
    }

    #[test]
    fn single_charge_hand_evaluation() {
        // c = 0.5 at the charging spot: δ/(α+d)^β = 0.5 with δ=0.5·16, d=0
        let mut sc = one_node(0.0, 100.0);
        sc.wpt.delta = 8.0;
        sc.nodes[0].pos = Vec3::new(0.0, 0.0, 0.0);
        let s = CtsSchedule::new(vec![CtsItem::charge(Vec3::Z, 20.0)]);
        let r = account_schedule(&s, &sc).unwrap();
        assert!((r.e_r[0] - 10.0).abs() < 1e-12);
        assert!((r.e_chrg - 20.0).abs() < 1e-12);
        assert!((r.e_loss_wpt_hov - (20.0 + 4.0 * 20.0 - 10.0)).abs() < 1e-12);
        assert!((r.e_loss_total - r.loss_by_balance()).abs() < 1e-6);
    }

    #[test]
    fn overflow_is_capped() {
        let mut sc = one_node(95.0, 100.0);
        sc.wpt.delta = 8.0;
        sc.nodes[0].pos = Vec3::ZERO;
        let s = CtsSchedule::new(vec![CtsItem::charge(Vec3::Z, 20.0)]);
        let r = account_schedule(&s, &sc).unwrap();
        assert_eq!(r.e_f, vec![100.0]);
        assert!((r.e_rcv - 5.0).abs() < 1e-12);
        assert!((r.e_loss_wpt_hov - (20.0 + 80.0 - 5.0)).abs() < 1e-12);
    }

    #[test]
    fn flight_and_uav_budget() {
        let mut sc = one_node(0.0, 100.0);
        sc.uav.e_b0 = 50.0;
        sc.uav.e_u0 = 50.0;
        let s = CtsSchedule::new(vec![
            CtsItem::fly(Vec3::new(3.0, 4.0, 0.0), 5.0),
            CtsItem::fly(Vec3::ZERO, 5.0),
        ]);
        let r = account_schedule(&s, &sc).unwrap();
        assert!((r.tour_length - 10.0).abs() < 1e-12);
        assert!((r.e_fly - 80.0).abs() < 1e-12);
        assert!(!r.uav_feasible);
        assert!((r.e_f0 + 30.0).abs() < 1e-12);
    }
}
