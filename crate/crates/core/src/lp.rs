//! Small dense linear programs: a two-phase tableau simplex behind a solver trait.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowKind {
    Le,
    Ge,
    Eq,
}

/// `min c·x` subject to `a_i·x (<=|>=|=) b_i`; variables flagged `nonneg` are `>= 0`, the rest free.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub kinds: Vec<RowKind>,
    pub rhs: Vec<f64>,
    pub nonneg: Vec<bool>,
}

impl LpProblem {
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LpProblem {
            objective,
            rows: Vec::new(),
            kinds: Vec::new(),
            rhs: Vec::new(),
            nonneg: vec![true; n],
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn push(&mut self, row: Vec<f64>, kind: RowKind, rhs: f64) {
        self.rows.push(row);
        self.kinds.push(kind);
        self.rhs.push(rhs);
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        let m = self.rows.len();
        if self.kinds.len() != m || self.rhs.len() != m || self.nonneg.len() != n {
            return Err(Error::InvalidParameter("inconsistent LP dimensions".into()));
        }
        if self.rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter("LP row length differs from variable count".into()));
        }
        let finite = self.objective.iter().chain(self.rhs.iter()).all(|v| v.is_finite())
            && self.rows.iter().flatten().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("LP has non-finite entries".into()));
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest constraint or sign violation at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for ((row, kind), b) in self.rows.iter().zip(&self.kinds).zip(&self.rhs) {
            let lhs: f64 = row.iter().zip(x).map(|(a, v)| a * v).sum();
            let v = match kind {
                RowKind::Le => lhs - b,
                RowKind::Ge => b - lhs,
                RowKind::Eq => (lhs - b).abs(),
            };
            worst = worst.max(v);
        }
        for (v, nn) in x.iter().zip(&self.nonneg) {
            if *nn {
                worst = worst.max(-v);
            }
        }
        worst
    }

    /// CPLEX LP text format, for cross-checking with external solvers.
    pub fn to_lp_format(&self) -> String {
        fn terms(coeffs: &[f64]) -> String {
            let mut s = String::new();
            for (j, c) in coeffs.iter().enumerate().filter(|(_, c)| **c != 0.0) {
                let sign = if *c < 0.0 { "-" } else { "+" };
                let _ = write!(s, " {sign} {:.17e} x{j}", c.abs());
            }
            if s.is_empty() {
                s.push_str(" 0 x0");
            }
            s
        }
        let mut out = String::from("Minimize\n obj:");
        out.push_str(&terms(&self.objective));
        out.push_str("\nSubject To\n");
        for (i, ((row, kind), b)) in self.rows.iter().zip(&self.kinds).zip(&self.rhs).enumerate() {
            let op = match kind {
                RowKind::Le => "<=",
                RowKind::Ge => ">=",
                RowKind::Eq => "=",
            };
            let _ = writeln!(out, " c{i}:{} {op} {:.17e}", terms(row), b);
        }
        out.push_str("Bounds\n");
        for (j, nn) in self.nonneg.iter().enumerate() {
            if !nn {
                let _ = writeln!(out, " x{j} free");
            }
        }
        out.push_str("End\n");
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

pub trait LpSolver {
    /// Unbounded problems are reported as [`Error::Unbounded`].
    fn solve(&self, problem: &LpProblem) -> Result<LpSolution>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Simplex {
    pub max_iterations: usize,
    pub pivot_tol: f64,
    pub cost_tol: f64,
    pub feasibility_tol: f64,
    /// Consecutive degenerate pivots before switching to Bland's rule for good.
    pub degenerate_streak: usize,
}

impl Default for Simplex {
    fn default() -> Self {
        Simplex {
            max_iterations: 200_000,
            pivot_tol: 1e-10,
            cost_tol: 1e-10,
            feasibility_tol: 1e-7,
            degenerate_streak: 50,
        }
    }
}

pub fn lp_solve(problem: &LpProblem) -> Result<LpSolution> {
    Simplex::default().solve(problem)
}

struct Tableau {
    /// Constraint rows, last entry is the right-hand side.
    t: Vec<Vec<f64>>,
    /// Reduced costs, last entry is minus the objective value.
    cost: Vec<f64>,
    basis: Vec<usize>,
    /// Columns that may not enter the basis.
    banned: Vec<bool>,
    iterations: usize,
    streak: usize,
    bland: bool,
}

impl Tableau {
    fn width(&self) -> usize {
        self.cost.len() - 1
    }

    fn set_costs(&mut self, c: &[f64]) {
        let w = self.width();
        self.cost = c.to_vec();
        self.cost.push(0.0);
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = self.cost[b];
            if cb != 0.0 {
                for j in 0..=w {
                    self.cost[j] -= cb * self.t[i][j];
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let w = self.width();
        let p = self.t[r][col];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        self.t[r][col] = 1.0;
        let pivot_row = std::mem::take(&mut self.t[r]);
        let nz: Vec<usize> = (0..=w).filter(|&j| pivot_row[j] != 0.0).collect();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[col];
            if f != 0.0 {
                for &j in &nz {
                    row[j] -= f * pivot_row[j];
                }
                row[col] = 0.0;
            }
        }
        let f = self.cost[col];
        if f != 0.0 {
            for &j in &nz {
                self.cost[j] -= f * pivot_row[j];
            }
            self.cost[col] = 0.0;
        }
        self.t[r] = pivot_row;
        self.basis[r] = col;
    }

    fn run(&mut self, cfg: &Simplex) -> Result<()> {
        let w = self.width();
        loop {
            let mut enter = None;
            let mut best = -cfg.cost_tol;
            for j in 0..w {
                if self.banned[j] || self.cost[j] >= -cfg.cost_tol {
                    continue;
                }
                if self.bland {
                    enter = Some(j);
                    break;
                }
                if self.cost[j] < best {
                    best = self.cost[j];
                    enter = Some(j);
                }
            }
            let Some(col) = enter else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.t.iter().enumerate() {
                let a = row[col];
                if a <= cfg.pivot_tol {
                    continue;
                }
                let ratio = row[w].max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((k, best)) => {
                        let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                        if ratio < best && !tie || tie && self.basis[i] < self.basis[k] {
                            Some((i, ratio))
                        } else {
                            Some((k, best))
                        }
                    }
                };
            }
            let Some((r, ratio)) = leave else { return Err(Error::Unbounded) };
            if ratio <= 1e-12 {
                self.streak += 1;
                if self.streak >= cfg.degenerate_streak {
                    self.bland = true;
                }
            } else {
                self.streak = 0;
            }
            self.pivot(r, col);
            self.iterations += 1;
            if self.iterations > cfg.max_iterations {
                return Err(Error::IterationLimit(cfg.max_iterations));
            }
        }
    }
}

impl LpSolver for Simplex {
    fn solve(&self, p: &LpProblem) -> Result<LpSolution> {
        p.validate()?;
        let n = p.n_vars();
        let m = p.rows.len();

        // Free variables are split into a positive and a negative part.
        let mut col_of = Vec::with_capacity(n);
        let mut n_struct = 0;
        for &nn in &p.nonneg {
            col_of.push((n_struct, !nn));
            n_struct += if nn { 1 } else { 2 };
        }
        let n_slack = p.kinds.iter().filter(|k| **k != RowKind::Eq).count();
        // Rows with a negative rhs are negated, which swaps Le and Ge.
        let flipped: Vec<(RowKind, f64)> = p
            .kinds
            .iter()
            .zip(&p.rhs)
            .map(|(k, b)| {
                if *b < 0.0 {
                    let k = match k {
                        RowKind::Le => RowKind::Ge,
                        RowKind::Ge => RowKind::Le,
                        RowKind::Eq => RowKind::Eq,
                    };
                    (k, -1.0)
                } else {
                    (*k, 1.0)
                }
            })
            .collect();
        let n_art = flipped.iter().filter(|(k, _)| *k != RowKind::Le).count();
        let width = n_struct + n_slack + n_art;

        let mut t = vec![vec![0.0; width + 1]; m];
        let mut basis = vec![0; m];
        let mut is_art = vec![false; width];
        let (mut next_slack, mut next_art) = (n_struct, n_struct + n_slack);
        for i in 0..m {
            let (kind, sign) = flipped[i];
            for (j, a) in p.rows[i].iter().enumerate() {
                let (c, split) = col_of[j];
                t[i][c] = sign * a;
                if split {
                    t[i][c + 1] = -sign * a;
                }
            }
            t[i][width] = sign * p.rhs[i];
            match kind {
                RowKind::Le => {
                    t[i][next_slack] = 1.0;
                    basis[i] = next_slack;
                    next_slack += 1;
                }
                RowKind::Ge => {
                    t[i][next_slack] = -1.0;
                    next_slack += 1;
                    t[i][next_art] = 1.0;
                    is_art[next_art] = true;
                    basis[i] = next_art;
                    next_art += 1;
                }
                RowKind::Eq => {
                    t[i][next_art] = 1.0;
                    is_art[next_art] = true;
                    basis[i] = next_art;
                    next_art += 1;
                }
            }
        }

        let mut tab = Tableau {
            t,
            cost: vec![0.0; width + 1],
            basis,
            banned: vec![false; width],
            iterations: 0,
            streak: 0,
            bland: false,
        };

        if is_art.iter().any(|a| *a) {
            let phase1: Vec<f64> = is_art.iter().map(|a| if *a { 1.0 } else { 0.0 }).collect();
            tab.set_costs(&phase1);
            tab.run(self)?;
            let infeas = -tab.cost[width];
            let scale = 1.0 + p.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            if infeas > self.feasibility_tol * scale {
                return Ok(LpSolution {
                    status: LpStatus::Infeasible,
                    x: Vec::new(),
                    objective: f64::NAN,
                    iterations: tab.iterations,
                });
            }
            // Drive zero-level artificials out of the basis; rows where that fails are redundant.
            let mut i = 0;
            while i < tab.t.len() {
                if is_art[tab.basis[i]] {
                    let col = (0..width)
                        .filter(|&j| !is_art[j])
                        .max_by(|&a, &b| tab.t[i][a].abs().total_cmp(&tab.t[i][b].abs()).then(b.cmp(&a)))
                        .filter(|&j| tab.t[i][j].abs() > self.pivot_tol);
                    match col {
                        Some(j) => tab.pivot(i, j),
                        None => {
                            tab.t.remove(i);
                            tab.basis.remove(i);
                            continue;
                        }
                    }
                }
                i += 1;
            }
            tab.banned = is_art.clone();
            tab.streak = 0;
            tab.bland = false;
        }

        let mut c2 = vec![0.0; width];
        for (j, c) in p.objective.iter().enumerate() {
            let (col, split) = col_of[j];
            c2[col] = *c;
            if split {
                c2[col + 1] = -c;
            }
        }
        tab.set_costs(&c2);
        tab.run(self)?;

        let mut y = vec![0.0; width];
        for (i, &b) in tab.basis.iter().enumerate() {
            y[b] = tab.t[i][width];
        }
        let x: Vec<f64> = col_of
            .iter()
            .map(|&(c, split)| {
                let v = if split { y[c] - y[c + 1] } else { y[c] };
                if split {
                    v
                } else {
                    v.max(0.0)
                }
            })
            .collect();
        Ok(LpSolution {
            status: LpStatus::Optimal,
            objective: p.evaluate(&x),
            x,
            iterations: tab.iterations,
        })
    }
}
