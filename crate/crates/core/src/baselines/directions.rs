//! Direction selectors compared against the minimum functionally-equivalent set.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{boundary_directions, ConeParams, Vec3};
use crate::synthesis::{cmfeds, NodeSet, PosDirPair, PositionView, SynthesisOptions, IDLE_DIRECTION};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionMethod {
    FuncEqv,
    Node,
    Gcc,
    Acc,
    Polyhedron,
}

impl DirectionMethod {
    pub const ALL: [DirectionMethod; 5] = [
        DirectionMethod::FuncEqv,
        DirectionMethod::Node,
        DirectionMethod::Gcc,
        DirectionMethod::Acc,
        DirectionMethod::Polyhedron,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DirectionMethod::FuncEqv => "funceqv",
            DirectionMethod::Node => "node",
            DirectionMethod::Gcc => "gcc",
            DirectionMethod::Acc => "acc",
            DirectionMethod::Polyhedron => "polyhedron",
        }
    }
}

impl fmt::Display for DirectionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DirectionMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        DirectionMethod::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown direction method {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolyhedronKind {
    #[default]
    Icosahedron,
    /// The soccer ball: 12 pentagons and 20 hexagons.
    TruncatedIcosahedron,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionParams {
    pub synthesis: SynthesisOptions,
    pub polyhedron: PolyhedronKind,
    /// Add a node-axis pair for any in-range node no face direction reaches.
    pub polyhedron_gap_fill: bool,
}

impl Default for DirectionParams {
    fn default() -> Self {
        DirectionParams {
            synthesis: SynthesisOptions::default(),
            polyhedron: PolyhedronKind::Icosahedron,
            polyhedron_gap_fill: true,
        }
    }
}

fn golden() -> f64 {
    (1.0 + 5f64.sqrt()) / 2.0
}

fn icosahedron_vertices() -> Vec<Vec3> {
    let p = golden();
    let mut v = Vec::new();
    for s1 in [-1.0, 1.0] {
        for s2 in [-1.0, 1.0] {
            v.push(Vec3::new(0.0, s1, s2 * p));
            v.push(Vec3::new(s1, s2 * p, 0.0));
            v.push(Vec3::new(s2 * p, 0.0, s1));
        }
    }
    v
}

/// Centres of the 20 triangular faces: triples of mutually adjacent vertices.
fn icosahedron_face_centres() -> Vec<Vec3> {
    let v = icosahedron_vertices();
    let edge = |a: usize, b: usize| (v[a].distance(v[b]) - 2.0).abs() < 1e-9;
    let mut out = Vec::new();
    for a in 0..v.len() {
        for b in a + 1..v.len() {
            for c in b + 1..v.len() {
                if edge(a, b) && edge(b, c) && edge(a, c) {
                    out.push((v[a] + v[b] + v[c]) / 3.0);
                }
            }
        }
    }
    out
}

/// Unit directions through the face centres.
pub fn polyhedron_directions(kind: PolyhedronKind) -> Vec<Vec3> {
    let raw = match kind {
        PolyhedronKind::Icosahedron => icosahedron_face_centres(),
        // pentagons over the icosahedron's vertices, hexagons over its faces
        PolyhedronKind::TruncatedIcosahedron => {
            let mut v = icosahedron_vertices();
            v.extend(icosahedron_face_centres());
            v
        }
    };
    raw.into_iter().map(|v| v.normalized().expect("nonzero vertex")).collect()
}

fn idle_pair(view: &PositionView) -> Vec<PosDirPair> {
    if view.sphere.is_empty() && !view.colocated.is_empty() {
        vec![view.pair(IDLE_DIRECTION, view.covered_by(IDLE_DIRECTION))]
    } else {
        Vec::new()
    }
}

fn node_axes(view: &PositionView) -> Vec<PosDirPair> {
    let mut out: Vec<PosDirPair> = view
        .sphere
        .iter()
        .map(|n| view.pair(n.unit, view.covered_by(n.unit)))
        .collect();
    out.extend(idle_pair(view));
    out
}

fn gcc(view: &PositionView) -> Vec<PosDirPair> {
    let h = view.half_angle;
    let mut out = Vec::new();
    for (i, a) in view.sphere.iter().enumerate() {
        for b in &view.sphere[i + 1..] {
            let dirs = boundary_directions(Vec3::ZERO, a.unit, b.unit, h).unwrap_or_default();
            for d in dirs {
                out.push(view.pair(d, view.covered_by(d)));
            }
        }
    }
    out.extend(node_axes(view));
    out
}

/// Candidate beam covering every unit vector in `units`, if one of the cheap constructions works.
fn covering_direction(units: &[Vec3], h: f64) -> Option<Vec3> {
    let fits = |d: Vec3| units.iter().all(|u| d.angle_to(*u) <= h + crate::geometry::BOUNDARY_TOL);
    let mut cands = Vec::new();
    if let Some(c) = units.iter().fold(Vec3::ZERO, |s, u| s + *u).normalized() {
        cands.push(c);
    }
    let mut extremal = None;
    let mut widest = -1.0;
    for (i, a) in units.iter().enumerate() {
        for b in &units[i + 1..] {
            let w = a.angle_to(*b);
            if w > widest {
                widest = w;
                extremal = Some((*a, *b));
            }
        }
    }
    if let Some((a, b)) = extremal {
        if let Some(mid) = (a + b).normalized() {
            cands.push(mid);
        }
        cands.extend(boundary_directions(Vec3::ZERO, a, b, h).unwrap_or_default());
    }
    cands.into_iter().find(|d| fits(*d))
}

/// Greedy merging of per-node axes, largest union first.
fn acc(view: &PositionView) -> Vec<PosDirPair> {
    let unit_of = |id: usize| view.sphere.iter().find(|n| n.id == id).map(|n| n.unit);
    let mut groups = node_axes(view);
    loop {
        let mut best: Option<(usize, usize, usize, Vec3)> = None;
        for i in 0..groups.len() {
            for j in i + 1..groups.len() {
                let union = groups[i].covered.union(&groups[j].covered);
                if best.as_ref().is_some_and(|b| union.len() <= b.2) {
                    continue;
                }
                let units: Vec<Vec3> = union.iter().filter_map(unit_of).collect();
                if let Some(d) = covering_direction(&units, view.half_angle) {
                    best = Some((i, j, union.len(), d));
                }
            }
        }
        let Some((i, j, _, dir)) = best else { break };
        let merged = view.pair(dir, view.covered_by(dir));
        groups.remove(j);
        groups.remove(i);
        groups.retain(|g| !g.covered.is_subset(&merged.covered));
        groups.push(merged);
    }
    groups
}

fn polyhedron(view: &PositionView, dirs: &[Vec3], gap_fill: bool) -> Vec<PosDirPair> {
    let mut out: Vec<PosDirPair> = dirs
        .iter()
        .map(|d| view.pair(*d, view.covered_by(*d)))
        .filter(|p| !p.covered.is_empty())
        .collect();
    if gap_fill {
        let reached: NodeSet = out.iter().flat_map(|p| p.covered.iter()).collect();
        for n in &view.sphere {
            if !reached.contains(n.id) {
                out.push(view.pair(n.unit, view.covered_by(n.unit)));
            }
        }
    }
    out
}

/// Pos-dir pairs for every position under `method`, in position order.
pub fn generate_directions(
    nodes: &[Vec3],
    positions: &[Vec3],
    cone: ConeParams,
    method: DirectionMethod,
    params: &DirectionParams,
) -> Result<Vec<PosDirPair>> {
    if method == DirectionMethod::FuncEqv {
        return cmfeds(nodes, positions, cone, &params.synthesis);
    }
    let faces = polyhedron_directions(params.polyhedron);
    let per: Vec<Vec<PosDirPair>> = positions
        .par_iter()
        .enumerate()
        .map(|(i, &o)| {
            let view = PositionView::new(i, o, nodes, cone);
            match method {
                DirectionMethod::Node => node_axes(&view),
                DirectionMethod::Gcc => gcc(&view),
                DirectionMethod::Acc => acc(&view),
                DirectionMethod::Polyhedron => polyhedron(&view, &faces, params.polyhedron_gap_fill),
                DirectionMethod::FuncEqv => unreachable!(),
            }
        })
        .collect();
    Ok(per.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::beam_reaches;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn cone() -> ConeParams {
        ConeParams::new(PI / 6.0, 6.0).unwrap()
    }

    fn cloud(seed: u64, n: usize, half: f64) -> Vec<Vec3> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Vec3::new(rng.gen_range(-half..half), rng.gen_range(-half..half), rng.gen_range(-half..half)))
            .collect()
    }

    fn self_consistent(pairs: &[PosDirPair], nodes: &[Vec3]) {
        for p in pairs {
            let expect: NodeSet = (0..nodes.len())
                .filter(|&j| beam_reaches(p.position, p.direction, cone(), nodes[j]))
                .collect();
            assert_eq!(p.covered, expect);
        }
    }

    #[test]
    fn names_round_trip() {
        for m in DirectionMethod::ALL {
            assert_eq!(m.as_str().parse::<DirectionMethod>().unwrap(), m);
        }
    }

    #[test]
    fn face_counts_and_coverage_radius() {
        for (kind, faces) in [(PolyhedronKind::Icosahedron, 20), (PolyhedronKind::TruncatedIcosahedron, 32)] {
            let d = polyhedron_directions(kind);
            assert_eq!(d.len(), faces);
            for (i, a) in d.iter().enumerate() {
                for b in &d[i + 1..] {
                    assert!(a.angle_to(*b) > 0.3);
                }
            }
        }
    }

    #[test]
    fn dir_node_single() {
        let nodes = [Vec3::new(2.0, 0.0, 0.0)];
        let p = generate_directions(&nodes, &[Vec3::ZERO], cone(), DirectionMethod::Node, &Default::default()).unwrap();
        assert_eq!(p.len(), 1);
        assert!(p[0].direction.distance(Vec3::X) < 1e-12);
    }

    #[test]
    fn all_methods_self_consistent_and_complete() {
        let nodes = cloud(11, 20, 5.0);
        let positions = vec![Vec3::ZERO, nodes[3]];
        for m in DirectionMethod::ALL {
            let pairs = generate_directions(&nodes, &positions, cone(), m, &Default::default()).unwrap();
            self_consistent(&pairs, &nodes);
            // every in-range node is reachable from its position
            for (i, &o) in positions.iter().enumerate() {
                let view = PositionView::new(i, o, &nodes, cone());
                for n in &view.sphere {
                    assert!(pairs.iter().any(|p| p.position_index == i && p.covered.contains(n.id)), "{m}");
                }
            }
        }
    }

    #[test]
    fn gcc_dominates_funceqv_sets() {
        for seed in 0..10 {
            let nodes = cloud(seed, 20, 4.0);
            let fe = generate_directions(&nodes, &[Vec3::ZERO], cone(), DirectionMethod::FuncEqv, &Default::default()).unwrap();
            let g = generate_directions(&nodes, &[Vec3::ZERO], cone(), DirectionMethod::Gcc, &Default::default()).unwrap();
            assert!(g.len() > fe.len());
            for p in &fe {
                assert!(g.iter().any(|q| p.covered.is_subset(&q.covered)), "seed {seed}: {:?}", p.covered);
            }
        }
    }

    #[test]
    fn acc_merges_cluster() {
        let nodes = [
            Vec3::new(3.0, 0.0, 0.0),
            Vec3::new(3.0, 0.3, 0.0),
            Vec3::new(3.0, 0.0, 0.3),
            Vec3::new(-3.0, 0.0, 0.0),
        ];
        let p = generate_directions(&nodes, &[Vec3::ZERO], cone(), DirectionMethod::Acc, &Default::default()).unwrap();
        assert_eq!(p.len(), 2);
        assert!(p.iter().any(|q| q.covered.as_slice() == [0, 1, 2]));
    }

    #[test]
    fn colocated_only_gets_idle_pair() {
        let nodes = [Vec3::ZERO];
        for m in [DirectionMethod::Node, DirectionMethod::Gcc, DirectionMethod::Acc, DirectionMethod::Polyhedron] {
            let p = generate_directions(&nodes, &[Vec3::ZERO], cone(), m, &Default::default()).unwrap();
            assert!(!p.is_empty());
            assert!(p.iter().all(|q| q.covered.as_slice() == [0]));
        }
    }
}
