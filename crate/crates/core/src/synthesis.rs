//! Minimum functionally-equivalent direction sets (cMFEDS).
//!
//! For every charging position the sphere of possible beam directions is
//! reduced to one representative per locally-maximal coverable node set.
//! Each node in range takes a turn as the reference node `A`; the boundary
//! cones through `A` form a one-parameter family indexed by the projected
//! angle, and every other node is covered on an arc of that circle. Sweeping
//! the arc endpoints yields the candidate sets, which are then pruned across
//! references.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    boundary_directions, wrap_angle, ConeParams, ProjectionFrame, Vec3, BOUNDARY_TOL,
    COLOCATED_TOL,
};

/// Beam direction used at a position whose only reachable nodes sit at the
/// position itself; any direction reaches them.
pub const IDLE_DIRECTION: Vec3 = Vec3::new(0.0, 0.0, -1.0);

/// Sorted, duplicate-free set of node ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeSet(Vec<usize>);

impl NodeSet {
    pub fn new(mut ids: Vec<usize>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        NodeSet(ids)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, id: usize) -> bool {
        self.0.binary_search(&id).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        if self.len() > other.len() {
            return false;
        }
        let mut it = other.0.iter();
        'outer: for a in &self.0 {
            for b in it.by_ref() {
                match b.cmp(a) {
                    Ordering::Less => continue,
                    Ordering::Equal => continue 'outer,
                    Ordering::Greater => return false,
                }
            }
            return false;
        }
        true
    }

    pub fn is_strict_subset(&self, other: &NodeSet) -> bool {
        self.len() < other.len() && self.is_subset(other)
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        NodeSet::new(v)
    }
}

impl FromIterator<usize> for NodeSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        NodeSet::new(iter.into_iter().collect())
    }
}

/// A charging position, a beam direction, and exactly the nodes that beam reaches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosDirPair {
    pub position_index: usize,
    pub position: Vec3,
    pub direction: Vec3,
    pub covered: NodeSet,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereNode {
    pub id: usize,
    pub unit: Vec3,
    pub distance: f64,
}

/// Nodes within range of one charging position, pushed onto its unit sphere.
#[derive(Clone, Debug)]
pub struct PositionView {
    pub index: usize,
    pub origin: Vec3,
    pub sphere: Vec<SphereNode>,
    /// Nodes sitting at the position itself.
    pub colocated: Vec<usize>,
    pub half_angle: f64,
}

impl PositionView {
    pub fn new(index: usize, origin: Vec3, nodes: &[Vec3], cone: ConeParams) -> Self {
        let mut sphere = Vec::new();
        let mut colocated = Vec::new();
        for (id, &p) in nodes.iter().enumerate() {
            let rel = p - origin;
            let d = rel.norm();
            if d <= COLOCATED_TOL {
                colocated.push(id);
            } else if d <= cone.range {
                sphere.push(SphereNode {
                    id,
                    unit: rel / d,
                    distance: d,
                });
            }
        }
        PositionView {
            index,
            origin,
            sphere,
            colocated,
            half_angle: cone.half_angle,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.sphere.is_empty() && self.colocated.is_empty()
    }

    /// Exact covered set of a beam along `dir`.
    pub fn covered_by(&self, dir: Vec3) -> NodeSet {
        let limit = self.half_angle + BOUNDARY_TOL;
        let mut ids: Vec<usize> = self
            .sphere
            .iter()
            .filter(|n| dir.angle_to(n.unit) <= limit)
            .map(|n| n.id)
            .collect();
        ids.extend_from_slice(&self.colocated);
        NodeSet::new(ids)
    }

    /// Widest angle between `dir` and any covered sphere node.
    fn spread(&self, dir: Vec3, covered: &NodeSet) -> f64 {
        self.sphere
            .iter()
            .filter(|n| covered.contains(n.id))
            .map(|n| dir.angle_to(n.unit))
            .fold(0.0, f64::max)
    }

    pub(crate) fn pair(&self, direction: Vec3, covered: NodeSet) -> PosDirPair {
        PosDirPair {
            position_index: self.index,
            position: self.origin,
            direction,
            covered,
        }
    }
}

/// Projected-angle interval over which boundary cones through the reference
/// also cover a neighbour. Arcs run counter-clockwise from `start` to `end`
/// and may wrap through 2π.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CoverageRange {
    Empty,
    Whole,
    Arc { start: f64, end: f64 },
}

impl CoverageRange {
    pub fn contains(&self, theta: f64) -> bool {
        match *self {
            CoverageRange::Empty => false,
            CoverageRange::Whole => true,
            CoverageRange::Arc { start, end } => {
                let len = wrap_angle(end - start);
                let off = wrap_angle(theta - start);
                off <= len + 1e-12 || (TAU - off) < 1e-12
            }
        }
    }
}

/// Coverage arc of neighbour `b` for boundary cones through reference `a`.
pub fn coverage_angle_range(o: Vec3, a: Vec3, b: Vec3, half_angle: f64) -> Result<CoverageRange> {
    let frame = ProjectionFrame::new(o, a, half_angle)?;
    coverage_in_frame(&frame, b, half_angle)
}

pub(crate) fn coverage_in_frame(
    frame: &ProjectionFrame,
    b: Vec3,
    half_angle: f64,
) -> Result<CoverageRange> {
    let dirs = match boundary_directions(frame.origin, frame.anchor, b, half_angle) {
        Err(Error::CoincidentAnchors) => return Ok(CoverageRange::Whole),
        other => other?,
    };
    match dirs.as_slice() {
        [] => Ok(CoverageRange::Empty),
        [d] => {
            let (_, t) = frame.projected_angle(*d)?;
            Ok(CoverageRange::Arc { start: t, end: t })
        }
        [d1, d2] => {
            let (_, t1) = frame.projected_angle(*d1)?;
            let (_, t2) = frame.projected_angle(*d2)?;
            // the covered arc is the one centred on b's bearing
            let centre = frame.bearing_of(b);
            if wrap_angle(centre - t1) <= wrap_angle(t2 - t1) {
                Ok(CoverageRange::Arc { start: t1, end: t2 })
            } else {
                Ok(CoverageRange::Arc { start: t2, end: t1 })
            }
        }
        _ => unreachable!("at most two boundary directions"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EndpointKind {
    Start,
    End,
}

/// One end of a neighbour's coverage arc.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleEndpoint {
    pub theta: f64,
    pub kind: EndpointKind,
    pub node: usize,
    /// Length of the node's whole arc.
    pub sigma: f64,
    /// The node's arc as `(start, end)`.
    pub tau: (f64, f64),
}

impl AngleEndpoint {
    pub fn pair(node: usize, start: f64, end: f64) -> [AngleEndpoint; 2] {
        let sigma = wrap_angle(end - start);
        let mk = |theta, kind| AngleEndpoint {
            theta,
            kind,
            node,
            sigma,
            tau: (start, end),
        };
        [mk(start, EndpointKind::Start), mk(end, EndpointKind::End)]
    }

    pub fn delta(&self) -> u8 {
        match self.kind {
            EndpointKind::Start => 0,
            EndpointKind::End => 1,
        }
    }
}

/// Ascending by angle; at equal angles starts precede ends so that arcs
/// touching at a single angle still produce a (zero-width) range there.
pub fn sort_endpoints(endpoints: &mut [AngleEndpoint]) {
    endpoints.sort_by(|a, b| {
        a.theta
            .total_cmp(&b.theta)
            .then(a.delta().cmp(&b.delta()))
            .then(a.node.cmp(&b.node))
    });
}

/// A maximal run of projected angles over which the covered set is constant
/// and cannot grow by rotating past either end.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LMaxRange {
    pub start: AngleEndpoint,
    pub end: AngleEndpoint,
    pub covered: NodeSet,
}

impl LMaxRange {
    pub fn width(&self) -> f64 {
        wrap_angle(self.end.theta - self.start.theta)
    }

    pub fn midpoint(&self) -> f64 {
        wrap_angle(self.start.theta + self.width() / 2.0)
    }
}

/// Index pairs `(i, i+1)` of adjacent start→end endpoints, including the
/// wrap-around pair `(κ-1, 0)`.
pub fn lmax_pairs(sorted: &[AngleEndpoint]) -> Vec<(usize, usize)> {
    let k = sorted.len();
    (0..k)
        .filter_map(|i| {
            let j = (i + 1) % k;
            (k > 1
                && sorted[i].kind == EndpointKind::Start
                && sorted[j].kind == EndpointKind::End)
                .then_some((i, j))
        })
        .collect()
}

/// LMax ranges of a sorted endpoint list; `covered_at` evaluates the covered
/// set for a projected angle and is sampled at each range's midpoint.
pub fn lmax_ranges<F>(sorted: &[AngleEndpoint], mut covered_at: F) -> Result<Vec<LMaxRange>>
where
    F: FnMut(f64) -> NodeSet,
{
    if sorted.is_empty() {
        return Err(Error::InvalidParameter("empty endpoint list".into()));
    }
    Ok(lmax_pairs(sorted)
        .into_iter()
        .map(|(i, j)| {
            let mut r = LMaxRange {
                start: sorted[i],
                end: sorted[j],
                covered: NodeSet::default(),
            };
            r.covered = covered_at(r.midpoint());
            r
        })
        .collect())
}

/// Weighted representative angle of a range: `(θ_e·σ_s + θ_s·σ_e) / (σ_s + σ_e)`,
/// evaluated with the end unwrapped past the start.
pub fn representative_angle(range: &LMaxRange) -> f64 {
    let a = range.start.theta;
    let mut b = range.end.theta;
    if b < a {
        b += TAU;
    }
    let (wa, wb) = (range.start.sigma, range.end.sigma);
    let theta = if wa + wb > 0.0 {
        (b * wa + a * wb) / (wa + wb)
    } else {
        0.5 * (a + b)
    };
    wrap_angle(theta)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisOptions {
    /// Samples along the segment from the projection point back to the
    /// reference node when pulling a representative inward.
    pub refine_steps: usize,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions { refine_steps: 64 }
    }
}

/// Representative direction for `range` and the set it covers.
///
/// Starts from the weighted angle's boundary cone and searches the segment
/// towards the reference node for the direction with the smallest spread
/// that keeps every node covered.
pub fn representative_direction(
    view: &PositionView,
    frame: &ProjectionFrame,
    range: &LMaxRange,
    opts: &SynthesisOptions,
) -> (Vec3, NodeSet) {
    let theta = representative_angle(range);
    let (dir0, proj) = frame.angle_to_direction(theta);
    let required = view.covered_by(dir0);
    let mut best_dir = dir0;
    let mut best_spread = view.spread(dir0, &required);
    let mut best_set = required.clone();
    let steps = opts.refine_steps.max(1);
    for k in 1..=steps {
        let s = k as f64 / steps as f64;
        let x = proj + (frame.anchor - proj) * s;
        let Some(dir) = (x - view.origin).normalized() else {
            continue;
        };
        let set = view.covered_by(dir);
        if !required.is_subset(&set) {
            continue;
        }
        let spread = view.spread(dir, &set);
        if spread < best_spread - 1e-15 {
            best_dir = dir;
            best_spread = spread;
            best_set = set;
        }
    }
    (best_dir, best_set)
}

/// Sweep state for one reference node, kept for inspection dumps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTrace {
    pub reference: usize,
    /// Neighbours covered by every boundary cone through the reference.
    pub whole: Vec<usize>,
    pub endpoints: Vec<AngleEndpoint>,
    pub ranges: Vec<LMaxRange>,
    pub candidates: Vec<PosDirPair>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionTrace {
    pub position_index: usize,
    pub position: Vec3,
    pub references: Vec<ReferenceTrace>,
    pub pairs: Vec<PosDirPair>,
}

fn reference_sweep(
    view: &PositionView,
    reference: &SphereNode,
    opts: &SynthesisOptions,
) -> Result<ReferenceTrace> {
    let h = view.half_angle;
    let frame = ProjectionFrame::new(view.origin, view.origin + reference.unit, h)?;
    let mut trace = ReferenceTrace {
        reference: reference.id,
        whole: Vec::new(),
        endpoints: Vec::new(),
        ranges: Vec::new(),
        candidates: Vec::new(),
    };
    for b in &view.sphere {
        if b.id == reference.id || reference.unit.angle_to(b.unit) > 2.0 * h + BOUNDARY_TOL {
            continue;
        }
        match coverage_in_frame(&frame, view.origin + b.unit, h)? {
            CoverageRange::Empty => {}
            CoverageRange::Whole => trace.whole.push(b.id),
            CoverageRange::Arc { start, end } => {
                trace.endpoints.extend(AngleEndpoint::pair(b.id, start, end))
            }
        }
    }
    if trace.endpoints.is_empty() {
        // isolated reference (possibly with same-bearing twins)
        let covered = view.covered_by(reference.unit);
        trace.candidates.push(view.pair(reference.unit, covered));
        return Ok(trace);
    }
    sort_endpoints(&mut trace.endpoints);
    trace.ranges = lmax_ranges(&trace.endpoints, |t| {
        view.covered_by(frame.angle_to_direction(t).0)
    })?;
    trace.candidates = trace
        .ranges
        .iter()
        .map(|r| {
            let (dir, covered) = representative_direction(view, &frame, r, opts);
            view.pair(dir, covered)
        })
        .collect();
    Ok(trace)
}

/// Drop candidates whose covered set is contained in another's; among equal
/// sets keep the lexicographically smallest direction.
pub fn prune_dominated(mut pairs: Vec<PosDirPair>) -> Vec<PosDirPair> {
    pairs.sort_by(|a, b| {
        a.covered
            .cmp(&b.covered)
            .then_with(|| a.direction.lex_cmp(&b.direction))
    });
    pairs.dedup_by(|later, earlier| later.covered == earlier.covered);
    let keep: Vec<bool> = pairs
        .iter()
        .map(|p| {
            !pairs
                .iter()
                .any(|q| p.covered.is_strict_subset(&q.covered))
        })
        .collect();
    pairs
        .into_iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect()
}

/// Full sweep at one position, retaining intermediate state.
pub fn trace_position(view: &PositionView, opts: &SynthesisOptions) -> Result<PositionTrace> {
    let mut references = Vec::with_capacity(view.sphere.len());
    for a in &view.sphere {
        references.push(reference_sweep(view, a, opts)?);
    }
    let mut candidates: Vec<PosDirPair> = references
        .iter()
        .flat_map(|r| r.candidates.iter().cloned())
        .collect();
    if view.sphere.is_empty() && !view.colocated.is_empty() {
        candidates.push(view.pair(IDLE_DIRECTION, view.covered_by(IDLE_DIRECTION)));
    }
    Ok(PositionTrace {
        position_index: view.index,
        position: view.origin,
        references,
        pairs: prune_dominated(candidates),
    })
}

/// Minimum direction set at one position.
pub fn position_pairs(view: &PositionView, opts: &SynthesisOptions) -> Result<Vec<PosDirPair>> {
    Ok(trace_position(view, opts)?.pairs)
}

/// Pos-Dir pairs for every charging position, in position order.
pub fn cmfeds(
    nodes: &[Vec3],
    positions: &[Vec3],
    cone: ConeParams,
    opts: &SynthesisOptions,
) -> Result<Vec<PosDirPair>> {
    let per_position: Vec<Vec<PosDirPair>> = positions
        .par_iter()
        .enumerate()
        .map(|(i, &o)| position_pairs(&PositionView::new(i, o, nodes, cone), opts))
        .collect::<Result<_>>()?;
    Ok(per_position.into_iter().flatten().collect())
}

/// Per-position traces for a debug dump.
pub fn cmfeds_trace(
    nodes: &[Vec3],
    positions: &[Vec3],
    cone: ConeParams,
    opts: &SynthesisOptions,
) -> Result<Vec<PositionTrace>> {
    positions
        .iter()
        .enumerate()
        .map(|(i, &o)| trace_position(&PositionView::new(i, o, nodes, cone), opts))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn deg(d: f64) -> f64 {
        d.to_radians()
    }

    fn cone30() -> ConeParams {
        ConeParams::new(deg(30.0), 6.0).unwrap()
    }

    #[test]
    fn nodeset_subset_logic() {
        let a = NodeSet::new(vec![3, 1, 2]);
        let b = NodeSet::new(vec![1, 2, 3, 5]);
        assert!(a.is_subset(&b));
        assert!(a.is_strict_subset(&b));
        assert!(!b.is_subset(&a));
        assert!(a.is_subset(&a) && !a.is_strict_subset(&a));
        assert!(!NodeSet::new(vec![1, 4]).is_subset(&b));
        assert!(NodeSet::default().is_subset(&a));
        assert_eq!(a.union(&NodeSet::new(vec![9])).as_slice(), &[1, 2, 3, 9]);
    }

    #[test]
    fn coverage_range_of_reference_twin_is_whole() {
        let r = coverage_angle_range(Vec3::ZERO, Vec3::X, Vec3::X * 3.0, deg(30.0)).unwrap();
        assert_eq!(r, CoverageRange::Whole);
    }

    #[test]
    fn coverage_range_tangent_is_single_point() {
        let h = deg(30.0);
        let b = Vec3::new((2.0 * h).cos(), (2.0 * h).sin(), 0.0);
        match coverage_angle_range(Vec3::ZERO, Vec3::X, b, h).unwrap() {
            CoverageRange::Arc { start, end } => assert_eq!(start, end),
            other => panic!("expected degenerate arc, got {other:?}"),
        }
    }

    #[test]
    fn coverage_range_matches_sampled_coverage() {
        let h = deg(30.0);
        let b = Vec3::new(deg(40.0).cos(), deg(40.0).sin(), 0.0);
        let frame = ProjectionFrame::new(Vec3::ZERO, Vec3::X, h).unwrap();
        let range = coverage_angle_range(Vec3::ZERO, Vec3::X, b, h).unwrap();
        let CoverageRange::Arc { start, end } = range else {
            panic!("expected arc");
        };
        // midpoint covers, antipode does not
        let mid = wrap_angle(start + wrap_angle(end - start) / 2.0);
        let cone = cone30();
        assert!(cone_ok(&frame, mid, b, cone));
        assert!(!cone_ok(&frame, wrap_angle(mid + PI), b, cone));
        // brute force over 720 samples, skipping samples within 1e-6 of an endpoint
        for k in 0..720 {
            let t = k as f64 * TAU / 720.0;
            let near = |x: f64| {
                let d = (t - x).abs();
                d.min(TAU - d) < 1e-6
            };
            if near(start) || near(end) {
                continue;
            }
            assert_eq!(range.contains(t), cone_ok(&frame, t, b, cone), "theta {t}");
        }
    }

    fn cone_ok(frame: &ProjectionFrame, t: f64, b: Vec3, cone: ConeParams) -> bool {
        crate::geometry::cone_covers(Vec3::ZERO, frame.angle_to_direction(t).0, cone, b).unwrap()
    }

    fn interval_cover(ranges: &[(usize, f64, f64)]) -> impl Fn(f64) -> NodeSet + '_ {
        move |t| {
            ranges
                .iter()
                .filter(|(_, s, e)| CoverageRange::Arc { start: *s, end: *e }.contains(t))
                .map(|(id, _, _)| *id)
                .collect()
        }
    }

    #[test]
    fn lmax_ranges_reproduce_range_bar_example() {
        // B=1 .. G=6, laid out as l1=B1 l2=E1 l3=C1 l4=B2 l5=D1 l6=C2
        // l7=E2 l8=F1 l9=D2 l10=F2 l11=G1 l12=G2
        let arcs = [
            (1, 0.1, 0.4),
            (2, 0.3, 0.6),
            (3, 0.5, 0.9),
            (4, 0.2, 0.7),
            (5, 0.8, 1.0),
            (6, 1.1, 1.2),
        ];
        let mut eps: Vec<_> = arcs
            .iter()
            .flat_map(|&(n, s, e)| AngleEndpoint::pair(n, s, e))
            .collect();
        sort_endpoints(&mut eps);
        let ranges = lmax_ranges(&eps, interval_cover(&arcs)).unwrap();
        let sets: Vec<Vec<usize>> = ranges.iter().map(|r| r.covered.as_slice().to_vec()).collect();
        assert_eq!(
            sets,
            vec![vec![1, 2, 4], vec![2, 3, 4], vec![3, 5], vec![6]]
        );
        assert_eq!(lmax_pairs(&eps), vec![(2, 3), (4, 5), (7, 8), (10, 11)]);
    }

    #[test]
    fn lmax_single_and_disjoint() {
        let arcs = [(1, 0.5, 1.5)];
        let mut eps: Vec<_> = AngleEndpoint::pair(1, 0.5, 1.5).to_vec();
        sort_endpoints(&mut eps);
        let r = lmax_ranges(&eps, interval_cover(&arcs)).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0].width() - 1.0).abs() < 1e-15);

        let arcs = [(1, 0.5, 1.0), (2, 3.0, 4.0)];
        let mut eps: Vec<_> = arcs
            .iter()
            .flat_map(|&(n, s, e)| AngleEndpoint::pair(n, s, e))
            .collect();
        sort_endpoints(&mut eps);
        let r = lmax_ranges(&eps, interval_cover(&arcs)).unwrap();
        let sets: Vec<_> = r.iter().map(|x| x.covered.as_slice().to_vec()).collect();
        assert_eq!(sets, vec![vec![1], vec![2]]);
    }

    #[test]
    fn lmax_wraparound_pair() {
        // node 1 wraps through zero, node 2 sits inside it near 2π
        let arcs = [(1, 5.5, 0.5), (2, 6.0, 0.2)];
        let mut eps: Vec<_> = arcs
            .iter()
            .flat_map(|&(n, s, e)| AngleEndpoint::pair(n, s, e))
            .collect();
        sort_endpoints(&mut eps);
        let r = lmax_ranges(&eps, interval_cover(&arcs)).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].covered.as_slice(), &[1, 2]);
        assert!((r[0].width() - (TAU - 6.0 + 0.2)).abs() < 1e-12);
    }

    #[test]
    fn touching_arcs_keep_zero_width_range() {
        let arcs = [(1, 0.2, 0.6), (2, 0.6, 1.0)];
        let mut eps: Vec<_> = arcs
            .iter()
            .flat_map(|&(n, s, e)| AngleEndpoint::pair(n, s, e))
            .collect();
        sort_endpoints(&mut eps);
        let r = lmax_ranges(&eps, interval_cover(&arcs)).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].covered.as_slice(), &[1, 2]);
        assert_eq!(r[0].width(), 0.0);
    }

    #[test]
    fn lmax_rejects_empty() {
        assert!(lmax_ranges(&[], |_| NodeSet::default()).is_err());
    }

    #[test]
    fn representative_angle_weighting() {
        let mk = |theta, sigma, kind| AngleEndpoint {
            theta,
            kind,
            node: 0,
            sigma,
            tau: (0.0, 0.0),
        };
        let r = LMaxRange {
            start: mk(0.2, 0.8, EndpointKind::Start),
            end: mk(1.0, 0.4, EndpointKind::End),
            covered: NodeSet::default(),
        };
        assert!((representative_angle(&r) - 0.733_333_333_333_333_3).abs() < 1e-12);
        let eq = LMaxRange {
            start: mk(0.2, 0.5, EndpointKind::Start),
            end: mk(1.0, 0.5, EndpointKind::End),
            covered: NodeSet::default(),
        };
        assert!((representative_angle(&eq) - 0.6).abs() < 1e-12);
        let wrap = LMaxRange {
            start: mk(6.0, 0.5, EndpointKind::Start),
            end: mk(0.4, 0.5, EndpointKind::End),
            covered: NodeSet::default(),
        };
        assert!((representative_angle(&wrap) - wrap_angle((6.0 + 0.4 + TAU) / 2.0)).abs() < 1e-12);
        assert!(representative_angle(&wrap) < 0.1);
    }

    #[test]
    fn isolated_nodes_get_axis_directions() {
        let nodes = vec![
            Vec3::new(3.0, 0.0, 0.0),
            Vec3::new(10.0, 10.0, 0.0),
            Vec3::new(20.0, 0.0, 5.0),
        ];
        let positions = vec![
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(10.0, 12.0, 0.0),
            Vec3::new(20.0, 1.0, 5.0),
        ];
        let pairs = cmfeds(&nodes, &positions, cone30(), &SynthesisOptions::default()).unwrap();
        assert_eq!(pairs.len(), 3);
        for (i, p) in pairs.iter().enumerate() {
            assert_eq!(p.position_index, i);
            assert_eq!(p.covered.as_slice(), &[i]);
            let axis = (nodes[i] - positions[i]).normalized().unwrap();
            assert!(p.direction.angle_to(axis) < 1e-12);
        }
    }

    #[test]
    fn clustered_nodes_collapse_to_one_pair() {
        let nodes = vec![
            Vec3::new(3.0, 0.0, 0.0),
            Vec3::new(3.0, 0.3, 0.1),
            Vec3::new(3.0, 0.6, 0.2),
        ];
        let pairs =
            cmfeds(&nodes, &[Vec3::ZERO], cone30(), &SynthesisOptions::default()).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].covered.as_slice(), &[0, 1, 2]);
    }

    #[test]
    fn colocated_node_rides_along() {
        let nodes = vec![Vec3::ZERO, Vec3::new(2.0, 0.0, 0.0), Vec3::new(-2.0, 0.0, 0.0)];
        let pairs =
            cmfeds(&nodes, &[Vec3::ZERO], cone30(), &SynthesisOptions::default()).unwrap();
        assert_eq!(pairs.len(), 2);
        for p in &pairs {
            assert!(p.covered.contains(0));
        }
        let alone = cmfeds(&nodes[..1], &[Vec3::ZERO], cone30(), &Default::default()).unwrap();
        assert_eq!(alone.len(), 1);
        assert_eq!(alone[0].direction, IDLE_DIRECTION);
    }

    #[test]
    fn empty_sphere_yields_nothing() {
        let pairs = cmfeds(
            &[Vec3::new(50.0, 0.0, 0.0)],
            &[Vec3::ZERO],
            cone30(),
            &Default::default(),
        )
        .unwrap();
        assert!(pairs.is_empty());
    }

    #[test]
    fn singleton_range_refines_to_node_axis() {
        let nodes = vec![Vec3::new(1.0, 2.0, 0.5)];
        let view = PositionView::new(0, Vec3::ZERO, &nodes, cone30());
        let frame = ProjectionFrame::new(Vec3::ZERO, nodes[0], deg(30.0)).unwrap();
        let [s, e] = AngleEndpoint::pair(0, 1.0, 2.0);
        let range = LMaxRange { start: s, end: e, covered: NodeSet::new(vec![0]) };
        let (dir, set) = representative_direction(&view, &frame, &range, &Default::default());
        assert_eq!(set.as_slice(), &[0]);
        assert!(dir.angle_to(nodes[0]) < 1e-12);
    }

    #[test]
    fn pair_refinement_stays_inside_cone() {
        let nodes = vec![Vec3::new(0.0, 4.0, 0.0), Vec3::new(0.0, 4.0, 2.5)];
        let view = PositionView::new(0, Vec3::ZERO, &nodes, cone30());
        let pairs = position_pairs(&view, &Default::default()).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].covered.as_slice(), &[0, 1]);
        // refined direction sits between the two bearings
        let spread = view.spread(pairs[0].direction, &pairs[0].covered);
        assert!(spread < deg(30.0));
    }
}
