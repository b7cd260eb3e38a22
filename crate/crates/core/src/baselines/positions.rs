//! Candidate charging positions: node sites, a lattice, k-means centres, or enclosing-sphere groups.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionMethod {
    Node,
    Grid,
    Cluster,
    Group,
}

impl PositionMethod {
    pub const ALL: [PositionMethod; 4] = [
        PositionMethod::Node,
        PositionMethod::Grid,
        PositionMethod::Cluster,
        PositionMethod::Group,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PositionMethod::Node => "node",
            PositionMethod::Grid => "grid",
            PositionMethod::Cluster => "cluster",
            PositionMethod::Group => "group",
        }
    }
}

impl fmt::Display for PositionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PositionMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PositionMethod::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown position method {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionParams {
    /// Lattice spacing; `None` means `D/√3`.
    pub grid_spacing: Option<f64>,
    pub lloyd_iterations: usize,
}

impl Default for PositionParams {
    fn default() -> Self {
        PositionParams {
            grid_spacing: None,
            lloyd_iterations: 100,
        }
    }
}

pub fn generate_positions(
    nodes: &[Vec3],
    range: f64,
    method: PositionMethod,
    params: &PositionParams,
) -> Result<Vec<Vec3>> {
    if nodes.is_empty() {
        return Ok(Vec::new());
    }
    match method {
        PositionMethod::Node => Ok(nodes.to_vec()),
        PositionMethod::Grid => {
            let spacing = params.grid_spacing.unwrap_or(range / 3f64.sqrt());
            grid_positions(nodes, range, spacing)
        }
        PositionMethod::Cluster => Ok(cluster_positions(nodes, range, params.lloyd_iterations)),
        PositionMethod::Group => Ok(group_positions(nodes, range)),
    }
}

fn bounds(nodes: &[Vec3]) -> (Vec3, Vec3) {
    let mut lo = nodes[0];
    let mut hi = nodes[0];
    for p in nodes {
        lo = Vec3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
        hi = Vec3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
    }
    (lo, hi)
}

/// Lattice over the nodes' bounding box, keeping points with a node within `range`.
pub fn grid_positions(nodes: &[Vec3], range: f64, spacing: f64) -> Result<Vec<Vec3>> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::InvalidParameter(format!("grid spacing must be positive, got {spacing}")));
    }
    let (lo, hi) = bounds(nodes);
    let count = |a: f64, b: f64| ((b - a) / spacing).ceil() as usize + 1;
    let (nx, ny, nz) = (count(lo.x, hi.x), count(lo.y, hi.y), count(lo.z, hi.z));
    let mut out = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                let p = lo + Vec3::new(i as f64, j as f64, k as f64) * spacing;
                if nodes.iter().any(|n| n.distance(p) <= range) {
                    out.push(p);
                }
            }
        }
    }
    Ok(out)
}

fn nearest(p: Vec3, centres: &[Vec3]) -> (usize, f64) {
    centres
        .iter()
        .enumerate()
        .map(|(i, c)| (i, c.distance(p)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one centre")
}

/// Farthest-first seeded Lloyd iterations with `k` centres.
pub fn kmeans(nodes: &[Vec3], k: usize, iterations: usize) -> Vec<Vec3> {
    let mut centres = vec![nodes[0]];
    while centres.len() < k {
        let far = nodes
            .iter()
            .map(|&p| nearest(p, &centres).1)
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
            .expect("nonempty")
            .0;
        centres.push(nodes[far]);
    }
    for _ in 0..iterations {
        let mut sums = vec![(Vec3::ZERO, 0usize); k];
        for &p in nodes {
            let (c, _) = nearest(p, &centres);
            sums[c].0 += p;
            sums[c].1 += 1;
        }
        let next: Vec<Vec3> = sums
            .iter()
            .zip(&centres)
            .map(|(&(s, n), &old)| if n == 0 { old } else { s / n as f64 })
            .collect();
        let moved = next.iter().zip(&centres).any(|(a, b)| a.distance(*b) > 1e-12);
        centres = next;
        if !moved {
            break;
        }
    }
    centres
}

/// Smallest `k` whose k-means assignment keeps every node within `range` of its centre.
pub fn cluster_positions(nodes: &[Vec3], range: f64, iterations: usize) -> Vec<Vec3> {
    for k in 1..=nodes.len() {
        let centres = kmeans(nodes, k, iterations);
        if nodes.iter().all(|&p| nearest(p, &centres).1 <= range) {
            return centres;
        }
    }
    nodes.to_vec()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sphere {
    pub centre: Vec3,
    pub radius: f64,
}

impl Sphere {
    fn contains(&self, p: Vec3) -> bool {
        self.centre.distance(p) <= self.radius + 1e-9 * (1.0 + self.radius)
    }
}

fn circumsphere(pts: &[Vec3]) -> Option<Sphere> {
    match pts {
        [] => None,
        [a] => Some(Sphere {
            centre: *a,
            radius: 0.0,
        }),
        [a, b] => Some(Sphere {
            centre: (*a + *b) * 0.5,
            radius: a.distance(*b) * 0.5,
        }),
        [a, b, c] => {
            let (ab, ac) = (*b - *a, *c - *a);
            let n = ab.cross(ac);
            let nn = n.dot(n);
            if nn < 1e-18 {
                return None;
            }
            let off = (n.cross(ab) * ac.dot(ac) + ac.cross(n) * ab.dot(ab)) / (2.0 * nn);
            Some(Sphere {
                centre: *a + off,
                radius: off.norm(),
            })
        }
        [a, b, c, d] => {
            let rows = [*b - *a, *c - *a, *d - *a];
            let rhs = [rows[0].dot(rows[0]) / 2.0, rows[1].dot(rows[1]) / 2.0, rows[2].dot(rows[2]) / 2.0];
            let det = rows[0].dot(rows[1].cross(rows[2]));
            if det.abs() < 1e-12 {
                return None;
            }
            // Cramer's rule on rows · x = rhs
            let x = (rows[1].cross(rows[2]) * rhs[0]
                + rows[2].cross(rows[0]) * rhs[1]
                + rows[0].cross(rows[1]) * rhs[2])
                / det;
            Some(Sphere {
                centre: *a + x,
                radius: x.norm(),
            })
        }
        _ => None,
    }
}

/// Smallest sphere through or around the support points.
fn trivial_sphere(support: &[Vec3]) -> Sphere {
    let mut best: Option<Sphere> = None;
    let n = support.len();
    for mask in 1u32..(1 << n) {
        let sub: Vec<Vec3> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| support[i]).collect();
        if let Some(s) = circumsphere(&sub) {
            if support.iter().all(|p| s.contains(*p)) && best.is_none_or(|b| s.radius < b.radius) {
                best = Some(s);
            }
        }
    }
    best.unwrap_or(Sphere {
        centre: Vec3::ZERO,
        radius: -1.0,
    })
}

fn welzl(pts: &[Vec3], support: &mut Vec<Vec3>) -> Sphere {
    if pts.is_empty() || support.len() == 4 {
        return trivial_sphere(support);
    }
    let (last, rest) = pts.split_last().expect("nonempty");
    let s = welzl(rest, support);
    if s.radius >= 0.0 && s.contains(*last) {
        return s;
    }
    support.push(*last);
    let s = welzl(rest, support);
    support.pop();
    s
}

/// Minimum enclosing sphere.
pub fn enclosing_sphere(pts: &[Vec3]) -> Sphere {
    welzl(pts, &mut Vec::new())
}

/// Greedy grouping: seed with the first ungrouped node and absorb its nearest
/// neighbours while the group's enclosing sphere stays within `range`.
pub fn group_positions(nodes: &[Vec3], range: f64) -> Vec<Vec3> {
    let mut grouped = vec![false; nodes.len()];
    let mut out = Vec::new();
    for seed in 0..nodes.len() {
        if grouped[seed] {
            continue;
        }
        grouped[seed] = true;
        let mut members = vec![nodes[seed]];
        let mut sphere = enclosing_sphere(&members);
        let mut near: Vec<usize> = (0..nodes.len())
            .filter(|&j| !grouped[j] && nodes[j].distance(nodes[seed]) <= 2.0 * range)
            .collect();
        near.sort_by(|&a, &b| {
            nodes[a]
                .distance(nodes[seed])
                .total_cmp(&nodes[b].distance(nodes[seed]))
                .then(a.cmp(&b))
        });
        for j in near {
            members.push(nodes[j]);
            let s = enclosing_sphere(&members);
            // the sphere test has slack, the beam range does not
            if s.radius <= range && members.iter().all(|p| s.centre.distance(*p) <= range) {
                sphere = s;
                grouped[j] = true;
            } else {
                members.pop();
            }
        }
        out.push(sphere.centre);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cloud(seed: u64, n: usize) -> Vec<Vec3> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Vec3::new(rng.gen_range(0.0..40.0), rng.gen_range(0.0..40.0), rng.gen_range(0.0..10.0)))
            .collect()
    }

    #[test]
    fn method_names_round_trip() {
        for m in PositionMethod::ALL {
            assert_eq!(m.as_str().parse::<PositionMethod>().unwrap(), m);
        }
        assert!("lattice".parse::<PositionMethod>().is_err());
    }

    #[test]
    fn node_method_is_identity() {
        let n = cloud(1, 10);
        assert_eq!(generate_positions(&n, 6.0, PositionMethod::Node, &Default::default()).unwrap(), n);
    }

    #[test]
    fn two_close_nodes_form_one_group() {
        let n = [Vec3::new(1.0, 1.0, 1.0), Vec3::new(2.0, 1.0, 1.0)];
        let g = generate_positions(&n, 6.0, PositionMethod::Group, &Default::default()).unwrap();
        assert_eq!(g.len(), 1);
        assert!(g[0].distance(Vec3::new(1.5, 1.0, 1.0)) < 1e-12);
    }

    #[test]
    fn cluster_members_within_range() {
        let n = cloud(5, 50);
        let c = generate_positions(&n, 6.0, PositionMethod::Cluster, &Default::default()).unwrap();
        assert!(c.len() > 1 && c.len() < 50);
        for p in &n {
            assert!(nearest(*p, &c).1 <= 6.0);
        }
    }

    #[test]
    fn grid_rejects_bad_spacing_and_covers_nodes() {
        let n = cloud(2, 30);
        assert!(grid_positions(&n, 6.0, 0.0).is_err());
        let g = grid_positions(&n, 6.0, 6.0 / 3f64.sqrt()).unwrap();
        for p in &n {
            assert!(nearest(*p, &g).1 <= 3.0 + 1e-9);
        }
    }

    #[test]
    fn enclosing_sphere_of_tetrahedron() {
        let pts = [
            Vec3::new(1.0, 1.0, 1.0),
            Vec3::new(1.0, -1.0, -1.0),
            Vec3::new(-1.0, 1.0, -1.0),
            Vec3::new(-1.0, -1.0, 1.0),
            Vec3::new(0.1, 0.2, 0.0),
        ];
        let s = enclosing_sphere(&pts);
        assert!(s.centre.norm() < 1e-9);
        assert!((s.radius - 3f64.sqrt()).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn enclosing_sphere_contains_and_is_tight(seed in 0u64..5000, n in 1usize..12) {
            let pts = cloud(seed, n);
            let s = enclosing_sphere(&pts);
            for p in &pts {
                prop_assert!(s.contains(*p));
            }
            // no smaller sphere around the same centre; at least one point on the surface
            let far = pts.iter().map(|p| p.distance(s.centre)).fold(0.0, f64::max);
            prop_assert!((far - s.radius).abs() < 1e-6);
            // the radius is at least half the diameter of the set
            let mut diam: f64 = 0.0;
            for a in &pts { for b in &pts { diam = diam.max(a.distance(*b)); } }
            prop_assert!(s.radius >= diam / 2.0 - 1e-9);
        }

        #[test]
        fn groups_reach_every_node(seed in 0u64..500) {
            let n = cloud(seed, 40);
            let g = group_positions(&n, 6.0);
            for p in &n {
                prop_assert!(nearest(*p, &g).1 <= 6.0);
            }
        }
    }

    #[test]
    fn group_on_range_boundary_keeps_members_in_range() {
        let sc = crate::harness::generate_scenario(
            3,
            &crate::harness::ScenarioParams {
                n: 100,
                ..Default::default()
            },
        )
        .unwrap();
        let nodes = sc.positions();
        let g = group_positions(&nodes, 6.0);
        assert!(nodes.iter().all(|p| nearest(*p, &g).1 <= 6.0));
    }
}
