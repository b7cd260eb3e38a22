//! Charging-time linear program: least WPT and hover loss that still meets every demand.

use serde::{Deserialize, Serialize};

use crate::energy::EtcMatrix;
use crate::error::{Error, Result};
use crate::lp::{LpProblem, LpSolver, LpStatus, RowKind, Simplex};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChargeTimeSolution {
    /// Seconds spent on each pos-dir pair.
    pub t: Vec<f64>,
    /// Transmission plus hover energy minus energy stored by the nodes (J).
    pub objective: f64,
    pub iterations: usize,
}

impl ChargeTimeSolution {
    pub fn total_time(&self) -> f64 {
        self.t.iter().sum()
    }
}

/// Inputs of the charging-time program, one entry per node.
#[derive(Clone, Copy, Debug)]
pub struct P3Input<'a> {
    pub etc: &'a EtcMatrix,
    pub e_b: &'a [f64],
    pub e_u: &'a [f64],
    pub e_d: &'a [f64],
    pub p0: f64,
    pub p_hov: f64,
}

/// Builds the program. Variables are the pair times followed by one surplus
/// `s_j = r_j - e_D(j)` per participating node, where `r_j` is the stored energy.
pub fn build_p3(input: &P3Input) -> Result<(LpProblem, Vec<usize>)> {
    let P3Input {
        etc,
        e_b,
        e_u,
        e_d,
        p0,
        p_hov,
    } = *input;
    let n = etc.n_nodes;
    if e_b.len() != n || e_u.len() != n || e_d.len() != n {
        return Err(Error::InvalidParameter("energy vectors differ from node count".into()));
    }
    if !(p0 > 0.0 && p_hov >= 0.0) {
        return Err(Error::InvalidParameter(format!("p0={p0}, p_hov={p_hov}")));
    }
    let over: Vec<usize> = (0..n).filter(|&j| e_b[j] + e_d[j] > e_u[j]).collect();
    if !over.is_empty() {
        return Err(Error::Infeasible {
            nodes: over,
            reason: "demand exceeds battery headroom".into(),
        });
    }
    let uncovered = etc.uncovered_nodes();
    let starved: Vec<usize> = uncovered.iter().copied().filter(|&j| e_d[j] > 0.0).collect();
    if !starved.is_empty() {
        return Err(Error::Infeasible {
            nodes: starved,
            reason: "no pos-dir pair reaches these nodes".into(),
        });
    }
    let mut covered = vec![true; n];
    for j in uncovered {
        covered[j] = false;
    }
    let nodes: Vec<usize> = (0..n).filter(|&j| covered[j]).collect();
    let k = etc.n_pairs();
    let width = k + nodes.len();
    let mut obj = vec![p0 + p_hov; k];
    obj.extend(std::iter::repeat_n(-1.0, nodes.len()));
    let mut lp = LpProblem::new(obj);
    for (s, &j) in nodes.iter().enumerate() {
        let mut row = vec![0.0; width];
        for (i, r) in etc.rows.iter().enumerate() {
            if let Ok(pos) = r.binary_search_by_key(&j, |e| e.0) {
                row[i] = p0 * r[pos].1;
            }
        }
        row[k + s] = -1.0;
        lp.push(row, RowKind::Ge, e_d[j]);
        let mut cap = vec![0.0; width];
        cap[k + s] = 1.0;
        lp.push(cap, RowKind::Le, e_u[j] - e_b[j] - e_d[j]);
    }
    Ok((lp, nodes))
}

pub fn solve_p3(input: &P3Input) -> Result<ChargeTimeSolution> {
    solve_p3_with(input, &Simplex::default())
}

pub fn solve_p3_with(input: &P3Input, solver: &dyn LpSolver) -> Result<ChargeTimeSolution> {
    let (lp, nodes) = build_p3(input)?;
    let k = input.etc.n_pairs();
    let demand: f64 = nodes.iter().map(|&j| input.e_d[j]).sum();
    if demand == 0.0 {
        return Ok(ChargeTimeSolution {
            t: vec![0.0; k],
            objective: 0.0,
            iterations: 0,
        });
    }
    let sol = solver.solve(&lp)?;
    if sol.status == LpStatus::Infeasible {
        return Err(Error::Infeasible {
            nodes,
            reason: "charging-time program is infeasible".into(),
        });
    }
    log::debug!("charging-time program: {} pairs, {} iterations", k, sol.iterations);
    let t: Vec<f64> = sol.x[..k].to_vec();
    Ok(ChargeTimeSolution {
        t,
        objective: sol.objective - demand,
        iterations: sol.iterations,
    })
}
