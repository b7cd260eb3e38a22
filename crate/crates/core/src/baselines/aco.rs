//! Ant System for the closed tour.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;
use crate::tour::{greedy_tour, Tour};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcoParams {
    pub ants: usize,
    pub iterations: usize,
    pub alpha: f64,
    pub beta: f64,
    pub rho: f64,
    pub seed: u64,
}

impl Default for AcoParams {
    fn default() -> Self {
        AcoParams {
            ants: 20,
            iterations: 200,
            alpha: 1.0,
            beta: 5.0,
            rho: 0.5,
            seed: 0,
        }
    }
}

pub fn aco_tour(positions: &[Vec3], l0: Vec3, params: &AcoParams) -> Tour {
    let m = positions.len();
    if m < 3 {
        return greedy_tour(positions, l0);
    }
    // city 0 is the base station
    let mut pts = vec![l0];
    pts.extend_from_slice(positions);
    let n = m + 1;
    let dist: Vec<Vec<f64>> = pts.iter().map(|a| pts.iter().map(|b| a.distance(*b)).collect()).collect();
    let eta: Vec<Vec<f64>> = dist
        .iter()
        .map(|r| r.iter().map(|d| (1.0 / d.max(1e-9)).powf(params.beta)).collect())
        .collect();
    let seed_tour = greedy_tour(positions, l0);
    let tau0 = 1.0 / (n as f64 * seed_tour.length.max(1e-9));
    let mut tau = vec![vec![tau0; n]; n];
    let mut best = seed_tour;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut weights = vec![0.0; n];

    for _ in 0..params.iterations {
        let mut tours = Vec::with_capacity(params.ants);
        for _ in 0..params.ants {
            let mut visited = vec![false; n];
            visited[0] = true;
            let mut here = 0;
            let mut seq = Vec::with_capacity(m);
            let mut len = 0.0;
            for _ in 0..m {
                let mut total = 0.0;
                for j in 0..n {
                    weights[j] = if visited[j] {
                        0.0
                    } else {
                        tau[here][j].powf(params.alpha) * eta[here][j]
                    };
                    total += weights[j];
                }
                let next = if total > 0.0 && total.is_finite() {
                    let mut r = rng.gen::<f64>() * total;
                    let mut pick = None;
                    for (j, &w) in weights.iter().enumerate() {
                        if w > 0.0 {
                            pick = Some(j);
                            if r < w {
                                break;
                            }
                            r -= w;
                        }
                    }
                    pick.expect("some city unvisited")
                } else {
                    (0..n).find(|&j| !visited[j]).expect("some city unvisited")
                };
                visited[next] = true;
                len += dist[here][next];
                seq.push(next);
                here = next;
            }
            len += dist[here][0];
            tours.push((seq, len));
        }
        for row in tau.iter_mut() {
            for v in row.iter_mut() {
                *v *= 1.0 - params.rho;
            }
        }
        for (seq, len) in &tours {
            let dep = 1.0 / len.max(1e-9);
            let mut prev = 0;
            for &c in seq.iter().chain(std::iter::once(&0)) {
                tau[prev][c] += dep;
                tau[c][prev] += dep;
                prev = c;
            }
            if *len < best.length - 1e-12 {
                best = Tour::from_order(seq.iter().map(|c| c - 1).collect(), positions, l0);
            }
        }
    }
    best
}
