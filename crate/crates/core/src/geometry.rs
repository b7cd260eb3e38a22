//! Vector primitives and the charging-cone geometry.
//!
//! All boundary directions and projected angles are expressed around a
//! charging position `O`. Nodes are first pushed onto the unit sphere around
//! `O`; a boundary cone through a reference node `A` is then parameterised by
//! the angle of its axis' intersection with the plane tangent to that sphere
//! at `A`.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack on the angular coverage test. Nodes on the cone surface are covered.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Distance under which a node is treated as sitting at the charging position.
pub const COLOCATED_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    /// Unit vector along `self`, or `None` for a (near) zero vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        if n > 1e-300 && n.is_finite() {
            Some(self / n)
        } else {
            None
        }
    }

    /// Angle in `[0, π]`; robust near 0 and π unlike `acos(dot)`.
    pub fn angle_to(self, o: Vec3) -> f64 {
        self.cross(o).norm().atan2(self.dot(o))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Lexicographic comparison, used for deterministic tie-breaking.
    pub fn lex_cmp(&self, o: &Vec3) -> std::cmp::Ordering {
        self.x
            .total_cmp(&o.x)
            .then(self.y.total_cmp(&o.y))
            .then(self.z.total_cmp(&o.z))
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        v.to_array()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Charging cone: half of the apex angle plus the transfer range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeParams {
    pub half_angle: f64,
    pub range: f64,
}

impl ConeParams {
    pub fn new(half_angle: f64, range: f64) -> Result<Self> {
        if !(half_angle > 0.0 && half_angle < PI / 2.0) {
            return Err(Error::InvalidParameter(format!(
                "cone half-angle must lie in (0, π/2), got {half_angle}"
            )));
        }
        if !(range > 0.0 && range.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "cone range must be positive, got {range}"
            )));
        }
        Ok(ConeParams { half_angle, range })
    }

    /// Build from the full apex angle.
    pub fn from_apex(apex_angle: f64, range: f64) -> Result<Self> {
        Self::new(apex_angle / 2.0, range)
    }
}

/// `true` iff `point` lies inside the cone at `apex` with axis `dir`.
pub fn cone_covers(apex: Vec3, dir: Vec3, cone: ConeParams, point: Vec3) -> Result<bool> {
    let rel = point - apex;
    let d = rel.norm();
    if d <= COLOCATED_TOL {
        return Err(Error::CoincidentPoint);
    }
    if d > cone.range {
        return Ok(false);
    }
    Ok(dir.angle_to(rel) <= cone.half_angle + BOUNDARY_TOL)
}

/// Like [`cone_covers`] but a node sitting at the apex counts as covered by
/// every direction (the UAV hovers right at it).
pub fn beam_reaches(apex: Vec3, dir: Vec3, cone: ConeParams, point: Vec3) -> bool {
    cone_covers(apex, dir, cone, point).unwrap_or(true)
}

/// Cone axes whose surface passes through both `a` and `b` (seen from `o`).
///
/// Returns two directions in general, one when the angle `∠AOB` is exactly
/// `2h` and none when it exceeds `2h`.
pub fn boundary_directions(o: Vec3, a: Vec3, b: Vec3, half_angle: f64) -> Result<Vec<Vec3>> {
    let ea = (a - o).normalized().ok_or(Error::CoincidentPoint)?;
    let eb = (b - o).normalized().ok_or(Error::CoincidentPoint)?;
    let sep = ea.angle_to(eb);
    if sep <= 1e-12 {
        return Err(Error::CoincidentAnchors);
    }
    if sep > 2.0 * half_angle + BOUNDARY_TOL {
        return Ok(Vec::new());
    }
    let t_h = half_angle.tan();
    let t_s = (sep / 2.0).tan();
    let radicand = t_h * t_h - t_s * t_s;
    let bisector = (ea + eb).normalized().expect("sep < π") / (sep / 2.0).cos();
    let normal = eb.cross(ea).normalized().expect("sep > 0");
    if radicand <= 1e-14 {
        return Ok(vec![bisector.normalized().expect("nonzero")]);
    }
    let off = normal * radicand.sqrt();
    Ok(vec![
        (bisector + off).normalized().expect("nonzero"),
        (bisector - off).normalized().expect("nonzero"),
    ])
}

/// Reduce an angle into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Frame on the plane tangent to the unit sphere around `O` at reference `A`.
///
/// Angles are measured from `e_ref = normalize(OA × ẑ)` towards
/// `e_aux = normalize(OA × e_ref)`. When `OA` is vertical the reference
/// falls back to `normalize(OA × x̂)`.
#[derive(Clone, Copy, Debug)]
pub struct ProjectionFrame {
    pub origin: Vec3,
    /// Unit vector `OA`.
    pub axis: Vec3,
    /// `A` pushed onto the unit sphere around the origin.
    pub anchor: Vec3,
    pub e_ref: Vec3,
    pub e_aux: Vec3,
    tan_h: f64,
}

impl ProjectionFrame {
    pub fn new(origin: Vec3, reference: Vec3, half_angle: f64) -> Result<Self> {
        let axis = (reference - origin)
            .normalized()
            .ok_or(Error::CoincidentPoint)?;
        let horizontal = axis.cross(Vec3::Z);
        let e_ref = if horizontal.norm() > 1e-9 {
            horizontal / horizontal.norm()
        } else {
            axis.cross(Vec3::X).normalized().expect("vertical axis is not parallel to x")
        };
        let e_aux = axis.cross(e_ref).normalized().expect("orthogonal unit vectors");
        Ok(ProjectionFrame {
            origin,
            axis,
            anchor: origin + axis,
            e_ref,
            e_aux,
            tan_h: half_angle.tan(),
        })
    }

    /// Projection point of `dir` on the tangent plane and its angle.
    pub fn projected_angle(&self, dir: Vec3) -> Result<(Vec3, f64)> {
        let cos = dir.dot(self.axis);
        if cos <= 1e-12 {
            return Err(Error::RayMissesPlane(cos));
        }
        let point = self.origin + dir * (1.0 / cos);
        let rel = point - self.anchor;
        let theta = wrap_angle(rel.dot(self.e_aux).atan2(rel.dot(self.e_ref)));
        Ok((point, theta))
    }

    /// Unit in-plane vector at angle `theta`.
    pub fn in_plane(&self, theta: f64) -> Vec3 {
        self.e_ref * theta.cos() + self.e_aux * theta.sin()
    }

    /// Boundary-cone axis at projected angle `theta` and its projection point.
    pub fn angle_to_direction(&self, theta: f64) -> (Vec3, Vec3) {
        let point = self.anchor + self.in_plane(theta) * self.tan_h;
        let dir = (point - self.origin).normalized().expect("point off origin");
        (dir, point)
    }

    /// Angle of the tangent-plane direction pointing from `A` towards `b`.
    pub fn bearing_of(&self, b: Vec3) -> f64 {
        let rel = b - self.origin;
        wrap_angle(rel.dot(self.e_aux).atan2(rel.dot(self.e_ref)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deg(d: f64) -> f64 {
        d.to_radians()
    }

    #[test]
    fn covers_on_axis_and_rejects_orthogonal() {
        let cone = ConeParams::new(PI / 6.0, 6.0).unwrap();
        assert!(cone_covers(Vec3::ZERO, Vec3::X, cone, Vec3::X).unwrap());
        assert!(!cone_covers(Vec3::ZERO, Vec3::X, cone, Vec3::new(0.0, 1.0, 0.0)).unwrap());
    }

    #[test]
    fn boundary_point_counts_as_covered() {
        let cone = ConeParams::new(PI / 6.0, 6.0).unwrap();
        let p = Vec3::new(deg(30.0).cos(), deg(30.0).sin(), 0.0);
        assert!((Vec3::X.angle_to(p) - PI / 6.0).abs() < 1e-15);
        assert!(cone_covers(Vec3::ZERO, Vec3::X, cone, p).unwrap());
    }

    #[test]
    fn range_limit_and_apex_error() {
        let cone = ConeParams::new(PI / 6.0, 6.0).unwrap();
        assert!(!cone_covers(Vec3::ZERO, Vec3::X, cone, Vec3::new(6.5, 0.0, 0.0)).unwrap());
        assert!(cone_covers(Vec3::ZERO, Vec3::X, cone, Vec3::new(6.0, 0.0, 0.0)).unwrap());
        assert!(matches!(
            cone_covers(Vec3::ZERO, Vec3::X, cone, Vec3::ZERO),
            Err(Error::CoincidentPoint)
        ));
        assert!(beam_reaches(Vec3::ZERO, Vec3::X, cone, Vec3::ZERO));
    }

    #[test]
    fn cone_params_validation() {
        assert!(ConeParams::new(0.0, 1.0).is_err());
        assert!(ConeParams::new(PI / 2.0, 1.0).is_err());
        assert!(ConeParams::new(0.3, -1.0).is_err());
        let c = ConeParams::from_apex(PI / 3.0, 6.0).unwrap();
        assert!((c.half_angle - PI / 6.0).abs() < 1e-15);
    }

    #[test]
    fn boundary_directions_tangent_case_is_bisector() {
        let h = PI / 6.0;
        let b = Vec3::new((2.0 * h).cos(), (2.0 * h).sin(), 0.0);
        let dirs = boundary_directions(Vec3::ZERO, Vec3::X, b, h).unwrap();
        assert_eq!(dirs.len(), 1);
        let bis = (Vec3::X + b).normalized().unwrap();
        assert!(dirs[0].angle_to(bis) < 1e-7);
    }

    #[test]
    fn boundary_directions_two_solutions() {
        let h = deg(30.0);
        let b = Vec3::new(deg(40.0).cos(), deg(40.0).sin(), 0.0);
        let dirs = boundary_directions(Vec3::ZERO, Vec3::X, b, h).unwrap();
        assert_eq!(dirs.len(), 2);
        for v in &dirs {
            assert!((v.norm() - 1.0).abs() < 1e-12);
            assert!((v.angle_to(Vec3::X) - h).abs() < 1e-7);
            assert!((v.angle_to(b) - h).abs() < 1e-7);
        }
        assert!(dirs[0].angle_to(dirs[1]) > 1e-3);
    }

    #[test]
    fn boundary_directions_out_of_reach() {
        let dirs =
            boundary_directions(Vec3::ZERO, Vec3::X, Vec3::new(0.0, 1.0, 0.0), deg(30.0)).unwrap();
        assert!(dirs.is_empty());
    }

    #[test]
    fn boundary_directions_scale_free_and_offset_origin() {
        let o = Vec3::new(3.0, -2.0, 1.0);
        let h = deg(25.0);
        let a = o + Vec3::new(2.0, 0.5, 0.3) * 2.0;
        let b = o + Vec3::new(1.0, 0.9, 0.1) * 0.4;
        let dirs = boundary_directions(o, a, b, h).unwrap();
        assert_eq!(dirs.len(), 2);
        for v in dirs {
            assert!(((a - o).angle_to(v) - h).abs() < 1e-7);
            assert!(((b - o).angle_to(v) - h).abs() < 1e-7);
        }
    }

    #[test]
    fn projected_angle_worked_example() {
        let h = deg(30.0);
        let f = ProjectionFrame::new(Vec3::ZERO, Vec3::X, h).unwrap();
        assert!(f.e_ref.distance(Vec3::new(0.0, -1.0, 0.0)) < 1e-15);
        let dir = Vec3::new(h.cos(), h.sin(), 0.0);
        let (p, theta) = f.projected_angle(dir).unwrap();
        assert!(p.distance(Vec3::new(1.0, h.tan(), 0.0)) < 1e-12);
        assert!(((p - f.anchor).norm() - h.tan()).abs() < 1e-7);
        // +y is opposite to e_ref
        assert!((theta - PI).abs() < 1e-12);
    }

    #[test]
    fn horizontal_boundary_cone_has_angle_zero_or_pi() {
        let h = deg(30.0);
        let a = Vec3::new(0.3, 0.8, 0.2).normalized().unwrap();
        let f = ProjectionFrame::new(Vec3::ZERO, a, h).unwrap();
        // tilt a by h towards the horizontal a × ẑ
        let k = a.cross(Vec3::Z).normalized().unwrap();
        let rotated = a * h.cos() + k * h.sin();
        let (p, theta) = f.projected_angle(rotated).unwrap();
        assert!((p - f.anchor).dot(Vec3::Z).abs() < 1e-12);
        let d0 = theta.min(TAU - theta);
        let dpi = (theta - PI).abs();
        assert!(d0 < 1e-9 || dpi < 1e-9, "theta = {theta}");
    }

    #[test]
    fn angle_to_direction_reference_and_quarter_turn() {
        let h = deg(30.0);
        let a = Vec3::new(1.0, 2.0, -0.5);
        let f = ProjectionFrame::new(Vec3::ZERO, a, h).unwrap();
        let (_, p0) = f.angle_to_direction(0.0);
        assert!(p0.distance(f.anchor + f.e_ref * h.tan()) < 1e-12);
        let (_, p1) = f.angle_to_direction(PI / 2.0);
        let aux = f.axis.cross(f.e_ref).normalized().unwrap();
        assert!(p1.distance(f.anchor + aux * h.tan()) < 1e-12);
    }

    #[test]
    fn vertical_reference_uses_fallback() {
        let f = ProjectionFrame::new(Vec3::ZERO, Vec3::new(0.0, 0.0, 2.0), 0.4).unwrap();
        assert!(f.e_ref.dot(f.axis).abs() < 1e-12);
        assert!((f.e_ref.norm() - 1.0).abs() < 1e-12);
        let (d, _) = f.angle_to_direction(1.0);
        let (_, back) = f.projected_angle(d).unwrap();
        assert!((back - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ray_away_from_plane_errors() {
        let f = ProjectionFrame::new(Vec3::ZERO, Vec3::X, 0.5).unwrap();
        assert!(matches!(
            f.projected_angle(Vec3::new(-1.0, 0.0, 0.0)),
            Err(Error::RayMissesPlane(_))
        ));
    }

    #[test]
    fn vec3_serializes_as_array() {
        let s = serde_json::to_string(&Vec3::new(1.0, 2.5, -3.0)).unwrap();
        assert_eq!(s, "[1.0,2.5,-3.0]");
        let v: Vec3 = serde_json::from_str(&s).unwrap();
        assert_eq!(v, Vec3::new(1.0, 2.5, -3.0));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn unit() -> impl Strategy<Value = Vec3> {
            (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
                .prop_filter_map("nonzero", |(x, y, z)| Vec3::new(x, y, z).normalized())
        }

        proptest! {
            #[test]
            fn round_trip_and_boundary(
                o in (-10.0f64..10.0, -10.0f64..10.0, -10.0f64..10.0),
                a in unit(),
                scale in 0.1f64..6.0,
                h in 0.05f64..1.4,
                theta in 0.0f64..TAU,
            ) {
                let o = Vec3::new(o.0, o.1, o.2);
                let f = ProjectionFrame::new(o, o + a * scale, h).unwrap();
                let (dir, point) = f.angle_to_direction(theta);
                prop_assert!((dir.norm() - 1.0).abs() < 1e-12);
                prop_assert!((dir.angle_to(a) - h).abs() < 1e-7);
                let e = f.in_plane(theta);
                prop_assert!((e.norm() - 1.0).abs() < 1e-12);
                prop_assert!(e.dot(a).abs() < 1e-12);
                let (p2, back) = f.projected_angle(dir).unwrap();
                prop_assert!(p2.distance(point) < 1e-7);
                let diff = (back - theta).abs();
                prop_assert!(diff.min(TAU - diff) < 1e-7);
                let cone = ConeParams::new(h, 100.0).unwrap();
                prop_assert!(cone_covers(o, dir, cone, o + a * scale).unwrap());
            }

            #[test]
            fn boundary_directions_invariant_under_rotation(
                a in unit(), b in unit(), axis in unit(), angle in 0.0f64..TAU, h in 0.2f64..1.2,
            ) {
                let rot = |v: Vec3| {
                    v * angle.cos() + axis.cross(v) * angle.sin()
                        + axis * (axis.dot(v) * (1.0 - angle.cos()))
                };
                prop_assume!(a.angle_to(b) > 1e-6);
                let d1 = boundary_directions(Vec3::ZERO, a, b, h).unwrap();
                let d2 = boundary_directions(Vec3::ZERO, rot(a), rot(b), h).unwrap();
                prop_assert_eq!(d1.len(), d2.len());
                for v in &d1 {
                    prop_assert!((v.angle_to(a) - h).abs() < 1e-7);
                    prop_assert!((v.angle_to(b) - h).abs() < 1e-7);
                    let rv = rot(*v);
                    prop_assert!(d2.iter().any(|w| w.angle_to(rv) < 1e-7));
                }
            }
        }
    }
}
