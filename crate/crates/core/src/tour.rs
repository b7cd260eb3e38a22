//! Closed flight tours from the base station through the charging positions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

pub const BRUTE_FORCE_MAX: usize = 9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlightModel {
    pub p_fly: f64,
    pub v_bar: f64,
}

/// A loop `l0 -> positions[order[0]] -> ... -> l0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tour {
    pub order: Vec<usize>,
    pub length: f64,
}

impl Tour {
    pub fn from_order(order: Vec<usize>, positions: &[Vec3], l0: Vec3) -> Self {
        let length = loop_length(&order, positions, l0);
        Tour { order, length }
    }

    pub fn flight_time(&self, f: &FlightModel) -> f64 {
        self.length / f.v_bar
    }

    pub fn flight_energy(&self, f: &FlightModel) -> f64 {
        f.p_fly * self.length / f.v_bar
    }

    /// Every position appears exactly once.
    pub fn is_permutation_of(&self, m: usize) -> bool {
        let mut seen = vec![false; m];
        self.order.len() == m
            && self.order.iter().all(|&i| i < m && !std::mem::replace(&mut seen[i], true))
    }
}

pub fn loop_length(order: &[usize], positions: &[Vec3], l0: Vec3) -> f64 {
    let mut here = l0;
    let mut len = 0.0;
    for &i in order {
        len += here.distance(positions[i]);
        here = positions[i];
    }
    len + here.distance(l0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TourOptions {
    /// Move evaluations allowed per local search, times `m²`.
    pub budget_factor: usize,
}

impl Default for TourOptions {
    fn default() -> Self {
        TourOptions { budget_factor: 50 }
    }
}

/// Nearest-neighbour loop; ties go to the lower index.
pub fn greedy_tour(positions: &[Vec3], l0: Vec3) -> Tour {
    let m = positions.len();
    let mut used = vec![false; m];
    let mut order = Vec::with_capacity(m);
    let mut here = l0;
    for _ in 0..m {
        let next = (0..m)
            .filter(|&i| !used[i])
            .min_by(|&a, &b| here.distance(positions[a]).total_cmp(&here.distance(positions[b])))
            .expect("unvisited position left");
        used[next] = true;
        order.push(next);
        here = positions[next];
    }
    Tour::from_order(order, positions, l0)
}

struct Route {
    pts: Vec<Vec3>,
    /// Indices into `pts`; `seq[0]` is the base station and stays put.
    seq: Vec<usize>,
    evaluations: usize,
    budget: usize,
}

const GAIN_TOL: f64 = 1e-10;

impl Route {
    fn d(&self, a: usize, b: usize) -> f64 {
        self.pts[self.seq[a]].distance(self.pts[self.seq[b % self.seq.len()]])
    }

    fn spent(&mut self) -> bool {
        self.evaluations += 1;
        self.evaluations > self.budget
    }

    /// One first-improvement 2-opt move; returns whether the tour changed.
    fn two_opt(&mut self) -> bool {
        let n = self.seq.len();
        for i in 1..n {
            for j in i + 1..n {
                if self.spent() {
                    return false;
                }
                let delta = self.d(i - 1, j) + self.d(i, j + 1) - self.d(i - 1, i) - self.d(j, j + 1);
                if delta < -GAIN_TOL {
                    self.seq[i..=j].reverse();
                    return true;
                }
            }
        }
        false
    }

    /// Moves a segment of 1–3 positions elsewhere, optionally reversed.
    fn or_opt(&mut self) -> bool {
        let n = self.seq.len();
        for len in 1..=3usize {
            for i in 1..n {
                let j = i + len - 1;
                if j >= n {
                    break;
                }
                let removed = self.d(i - 1, i) + self.d(j, j + 1) - self.d(i - 1, j + 1);
                for k in 0..n {
                    if k + 1 >= i && k <= j {
                        continue;
                    }
                    for rev in [false, true] {
                        if self.spent() {
                            return false;
                        }
                        let (a, b) = if rev { (j, i) } else { (i, j) };
                        let added = self.d(k, a) + self.d(b, k + 1) - self.d(k, k + 1);
                        if added - removed < -GAIN_TOL {
                            let mut seg: Vec<usize> = self.seq.drain(i..=j).collect();
                            if rev {
                                seg.reverse();
                            }
                            let at = if k < i { k + 1 } else { k + 1 - len };
                            self.seq.splice(at..at, seg);
                            return true;
                        }
                    }
                }
            }
        }
        false
    }
}

/// Greedy start followed by 2-opt and Or-opt until a local optimum or the budget runs out.
pub fn improve_tour(positions: &[Vec3], l0: Vec3, opts: &TourOptions) -> Tour {
    let start = greedy_tour(positions, l0);
    improve_from(start, positions, l0, opts)
}

pub fn improve_from(start: Tour, positions: &[Vec3], l0: Vec3, opts: &TourOptions) -> Tour {
    let m = positions.len();
    if m < 3 {
        return start;
    }
    let mut pts = vec![l0];
    pts.extend_from_slice(positions);
    let mut seq = vec![0];
    seq.extend(start.order.iter().map(|i| i + 1));
    let mut route = Route {
        pts,
        seq,
        evaluations: 0,
        budget: opts.budget_factor.max(1) * m * m,
    };
    loop {
        if route.two_opt() {
            continue;
        }
        if route.evaluations > route.budget || !route.or_opt() {
            break;
        }
    }
    let order: Vec<usize> = route.seq[1..].iter().map(|i| i - 1).collect();
    let improved = Tour::from_order(order, positions, l0);
    if improved.length <= start.length {
        improved
    } else {
        start
    }
}

/// Exact optimum by enumeration with a length bound.
pub fn brute_force_tour(positions: &[Vec3], l0: Vec3) -> Result<Tour> {
    let m = positions.len();
    if m > BRUTE_FORCE_MAX {
        return Err(Error::TooManyPositions {
            max: BRUTE_FORCE_MAX,
            got: m,
        });
    }
    fn search(
        positions: &[Vec3],
        l0: Vec3,
        path: &mut Vec<usize>,
        used: &mut [bool],
        len: f64,
        best: &mut (f64, Vec<usize>),
    ) {
        let here = path.last().map_or(l0, |&i| positions[i]);
        if path.len() == positions.len() {
            let total = len + here.distance(l0);
            if total < best.0 {
                *best = (total, path.clone());
            }
            return;
        }
        for i in 0..positions.len() {
            if used[i] {
                continue;
            }
            let next = len + here.distance(positions[i]);
            if next + positions[i].distance(l0) >= best.0 {
                continue;
            }
            used[i] = true;
            path.push(i);
            search(positions, l0, path, used, next, best);
            path.pop();
            used[i] = false;
        }
    }
    let seed = greedy_tour(positions, l0);
    let mut best = (seed.length + 1e-9, seed.order.clone());
    search(positions, l0, &mut Vec::new(), &mut vec![false; m], 0.0, &mut best);
    Ok(Tour::from_order(best.1, positions, l0))
}
