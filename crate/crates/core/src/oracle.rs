//! Independent brute-force checks for the planning stages.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{boundary_directions, ConeParams, Vec3};
use crate::lp::LpProblem;
use crate::synthesis::{position_pairs, NodeSet, PosDirPair, PositionView, SynthesisOptions, IDLE_DIRECTION};
use crate::tour::{brute_force_tour, improve_tour, TourOptions};

fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k].abs() < 1e-10 {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in 0..n {
            if i != k {
                let f = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Minimum over all basic points of a bounded LP with nonnegative variables.
pub fn vertex_enumeration(p: &LpProblem) -> Option<f64> {
    let n = p.n_vars();
    let mut planes: Vec<(Vec<f64>, f64)> = p.rows.iter().cloned().zip(p.rhs.iter().copied()).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e, 0.0));
    }
    let mut best: Option<f64> = None;
    let total = planes.len();
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let a = idx.iter().map(|&i| planes[i].0.clone()).collect();
        let b = idx.iter().map(|&i| planes[i].1).collect();
        if let Some(x) = solve_square(a, b) {
            if p.max_violation(&x) <= 1e-9 {
                let v = p.evaluate(&x);
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
        }
        // next combination
        let mut k = n;
        loop {
            if k == 0 {
                return best;
            }
            k -= 1;
            if idx[k] < total - n + k {
                idx[k] += 1;
                for l in k + 1..n {
                    idx[l] = idx[l - 1] + 1;
                }
                break;
            }
        }
    }
}


/// Maximal covered sets at one position, from every node axis and every
/// pairwise boundary direction.
pub fn maximal_family(view: &PositionView) -> Vec<NodeSet> {
    let mut sets: Vec<NodeSet> = Vec::new();
    let h = view.half_angle;
    for (i, a) in view.sphere.iter().enumerate() {
        sets.push(view.covered_by(a.unit));
        for b in &view.sphere[i + 1..] {
            for d in boundary_directions(Vec3::ZERO, a.unit, b.unit, h).unwrap_or_default() {
                sets.push(view.covered_by(d));
            }
        }
    }
    if view.sphere.is_empty() && !view.colocated.is_empty() {
        sets.push(view.covered_by(IDLE_DIRECTION));
    }
    sets.sort();
    sets.dedup();
    let keep: Vec<bool> = sets
        .iter()
        .map(|s| !sets.iter().any(|t| s.is_strict_subset(t)))
        .collect();
    sets.into_iter().zip(keep).filter_map(|(s, k)| k.then_some(s)).collect()
}

pub fn random_unit(rng: &mut impl Rng) -> Vec3 {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

/// Number of sampled directions whose covered set is not inside any pair's set.
pub fn sampled_coverage_violations(
    view: &PositionView,
    pairs: &[PosDirPair],
    samples: usize,
    rng: &mut impl Rng,
) -> usize {
    assert!(view.sphere.len() <= 64, "bitmask check handles at most 64 nodes");
    let masks: Vec<u64> = pairs
        .iter()
        .map(|p| {
            view.sphere
                .iter()
                .enumerate()
                .filter(|(_, n)| p.covered.contains(n.id))
                .fold(0u64, |m, (k, _)| m | 1 << k)
        })
        .collect();
    let limit = (view.half_angle + crate::geometry::BOUNDARY_TOL).cos();
    let mut violations = 0;
    for _ in 0..samples {
        let d = random_unit(rng);
        let mask = view
            .sphere
            .iter()
            .enumerate()
            .filter(|(_, n)| d.dot(n.unit) >= limit)
            .fold(0u64, |m, (k, _)| m | 1 << k);
        if mask != 0 && !masks.iter().any(|p| mask & !p == 0) {
            violations += 1;
        }
    }
    violations
}

/// Nodes scattered in the ball of radius `range` around the origin, with a
/// few beyond it.
pub fn random_single_position(rng: &mut impl Rng, inside: usize, range: f64) -> Vec<Vec3> {
    let mut nodes = Vec::with_capacity(inside + 3);
    for _ in 0..inside {
        let r = range * rng.gen_range(0.05f64..1.0).cbrt();
        nodes.push(random_unit(rng) * r);
    }
    for _ in 0..3 {
        nodes.push(random_unit(rng) * range * rng.gen_range(1.05..2.0));
    }
    nodes
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Seeded battery of oracle comparisons, one line per check.
pub fn run_oracles(seed: u64, instances: usize, cone: ConeParams) -> Result<Vec<OracleCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opts = SynthesisOptions::default();
    let mut family_mismatch = 0;
    let mut violations = 0;
    let samples = 10_000;
    for _ in 0..instances {
        let k = rng.gen_range(1..=30);
        let nodes = random_single_position(&mut rng, k, cone.range);
        let view = PositionView::new(0, Vec3::ZERO, &nodes, cone);
        let pairs = position_pairs(&view, &opts)?;
        let mut got: Vec<NodeSet> = pairs.iter().map(|p| p.covered.clone()).collect();
        got.sort();
        if got != maximal_family(&view) {
            family_mismatch += 1;
        }
        violations += sampled_coverage_violations(&view, &pairs, samples, &mut rng);
    }
    let mut checks = vec![
        OracleCheck {
            name: "direction coverage".into(),
            passed: violations == 0,
            detail: format!("{violations} uncovered samples over {instances}x{samples} directions"),
        },
        OracleCheck {
            name: "maximal set family".into(),
            passed: family_mismatch == 0,
            detail: format!("{family_mismatch} of {instances} positions differ"),
        },
    ];

    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let pts: Vec<Vec3> = (0..8)
            .map(|_| Vec3::new(rng.gen_range(0.0..40.0), rng.gen_range(0.0..40.0), rng.gen_range(0.0..10.0)))
            .collect();
        let opt = brute_force_tour(&pts, Vec3::ZERO)?.length;
        let got = improve_tour(&pts, Vec3::ZERO, &TourOptions::default()).length;
        worst = worst.max(got / opt - 1.0);
    }
    checks.push(OracleCheck {
        name: "tour vs brute force".into(),
        passed: worst <= 0.05,
        detail: format!("worst gap {:.3}% over {instances} eight-position tours", worst * 100.0),
    });
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn family_of_two_far_nodes() {
        let cone = ConeParams::new(PI / 6.0, 6.0).unwrap();
        let nodes = [Vec3::new(3.0, 0.0, 0.0), Vec3::new(-3.0, 0.0, 0.0)];
        let view = PositionView::new(0, Vec3::ZERO, &nodes, cone);
        let fam = maximal_family(&view);
        assert_eq!(fam, vec![NodeSet::new(vec![0]), NodeSet::new(vec![1])]);
    }

    #[test]
    fn small_oracle_battery_passes() {
        let cone = ConeParams::new(PI / 6.0, 6.0).unwrap();
        for c in run_oracles(1, 5, cone).unwrap() {
            assert!(c.passed, "{c:?}");
        }
    }
}
