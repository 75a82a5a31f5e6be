//! Horoballs in the upper half-space model of hyperbolic 3-space.
//!
//! A finite horoball is a Euclidean ball resting on the boundary plane; it is
//! described by its point of tangency (its *center* on the boundary) and its
//! Euclidean height, which is the ball's diameter. A horoball is full-sized
//! when its height is 1, i.e. when it touches the horoball `{z >= 1}` centered
//! at infinity. Its vertical projection to the boundary plane is a disk of
//! radius `height / 2`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("non-finite coordinate in boundary point ({0}, {1})")]
    NonFinitePoint(f64, f64),
    #[error("horoball height must be positive and finite, got {0}")]
    BadHeight(f64),
    #[error("cut height of a horoball at infinity must be positive and finite, got {0}")]
    BadCutHeight(f64),
    #[error("horoballs share the center ({0}, {1}); their distance is undefined")]
    CoincidentCenters(f64, f64),
    #[error("both horoballs are centered at infinity")]
    BothAtInfinity,
    #[error("geodesic endpoints coincide")]
    DegenerateGeodesic,
    #[error("line direction must be a nonzero finite vector")]
    BadDirection,
    #[error("viewpoint lies inside the projection disk (distance {distance}, radius {radius})")]
    ViewpointInsideDisk { distance: f64, radius: f64 },
    #[error("tolerances must be positive and finite")]
    BadTolerance,
}

/// A finite point of the boundary plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub x: f64,
    pub y: f64,
}

impl BoundaryPoint {
    pub fn new(x: f64, y: f64) -> Result<Self, GeomError> {
        if x.is_finite() && y.is_finite() {
            Ok(Self { x, y })
        } else {
            Err(GeomError::NonFinitePoint(x, y))
        }
    }

    pub const ORIGIN: BoundaryPoint = BoundaryPoint { x: 0.0, y: 0.0 };

    pub fn dist(self, other: BoundaryPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn dist_sq(self, other: BoundaryPoint) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn minus(self, other: BoundaryPoint) -> (f64, f64) {
        (self.x - other.x, self.y - other.y)
    }

    pub fn offset(self, dx: f64, dy: f64) -> BoundaryPoint {
        BoundaryPoint {
            x: self.x + dx,
            y: self.y + dy,
        }
    }
}

impl fmt::Display for BoundaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// A point of the sphere at infinity: either a finite boundary point or `∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IdealPoint {
    Finite(BoundaryPoint),
    Infinity,
}

impl IdealPoint {
    pub fn finite(self) -> Option<BoundaryPoint> {
        match self {
            IdealPoint::Finite(p) => Some(p),
            IdealPoint::Infinity => None,
        }
    }
}

impl From<BoundaryPoint> for IdealPoint {
    fn from(p: BoundaryPoint) -> Self {
        IdealPoint::Finite(p)
    }
}

/// A horoball tangent to the boundary plane at `center`, of Euclidean
/// diameter `height`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Horoball {
    center: BoundaryPoint,
    height: f64,
}

impl Horoball {
    pub fn new(center: BoundaryPoint, height: f64) -> Result<Self, GeomError> {
        if !(height.is_finite() && height > 0.0) {
            return Err(GeomError::BadHeight(height));
        }
        let center = BoundaryPoint::new(center.x, center.y)?;
        Ok(Self { center, height })
    }

    pub fn at(x: f64, y: f64, height: f64) -> Result<Self, GeomError> {
        Self::new(BoundaryPoint::new(x, y)?, height)
    }

    /// Full-sized horoball centered at `(x, y)`.
    pub fn full(x: f64, y: f64) -> Result<Self, GeomError> {
        Self::at(x, y, 1.0)
    }

    pub fn center(&self) -> BoundaryPoint {
        self.center
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    /// Radius of the vertical projection to the boundary plane.
    pub fn shadow_radius(&self) -> f64 {
        0.5 * self.height
    }

    pub fn is_full_sized(&self, tol: f64) -> bool {
        (self.height - 1.0).abs() <= tol
    }

    pub fn is_at_most_full(&self, tol: f64) -> bool {
        self.height <= 1.0 + tol
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Horoball {
        Horoball {
            center: self.center.offset(dx, dy),
            height: self.height,
        }
    }

    pub fn with_center(&self, center: BoundaryPoint) -> Horoball {
        Horoball {
            center,
            height: self.height,
        }
    }
}

/// The horoball `{z >= cut_height}` centered at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoroballAtInfinity {
    cut_height: f64,
}

impl HoroballAtInfinity {
    pub fn new(cut_height: f64) -> Result<Self, GeomError> {
        if cut_height.is_finite() && cut_height > 0.0 {
            Ok(Self { cut_height })
        } else {
            Err(GeomError::BadCutHeight(cut_height))
        }
    }

    /// The reference horoball `{z >= 1}`.
    pub fn standard() -> Self {
        Self { cut_height: 1.0 }
    }

    pub fn cut_height(&self) -> f64 {
        self.cut_height
    }
}

/// Either kind of horoball; Möbius maps move horoballs between the two kinds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnyHoroball {
    Finite(Horoball),
    AtInfinity(HoroballAtInfinity),
}

impl AnyHoroball {
    pub fn center(&self) -> IdealPoint {
        match self {
            AnyHoroball::Finite(b) => IdealPoint::Finite(b.center()),
            AnyHoroball::AtInfinity(_) => IdealPoint::Infinity,
        }
    }

    pub fn finite(self) -> Option<Horoball> {
        match self {
            AnyHoroball::Finite(b) => Some(b),
            AnyHoroball::AtInfinity(_) => None,
        }
    }
}

impl From<Horoball> for AnyHoroball {
    fn from(b: Horoball) -> Self {
        AnyHoroball::Finite(b)
    }
}

impl From<HoroballAtInfinity> for AnyHoroball {
    fn from(b: HoroballAtInfinity) -> Self {
        AnyHoroball::AtInfinity(b)
    }
}

/// A complete geodesic, named by its two ideal endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geodesic {
    a: IdealPoint,
    b: IdealPoint,
}

impl Geodesic {
    pub fn new(a: IdealPoint, b: IdealPoint) -> Result<Self, GeomError> {
        let distinct = match (a, b) {
            (IdealPoint::Infinity, IdealPoint::Infinity) => false,
            (IdealPoint::Finite(p), IdealPoint::Finite(q)) => p != q,
            _ => true,
        };
        if distinct {
            Ok(Self { a, b })
        } else {
            Err(GeomError::DegenerateGeodesic)
        }
    }

    pub fn between(p: BoundaryPoint, q: BoundaryPoint) -> Result<Self, GeomError> {
        Self::new(p.into(), q.into())
    }

    /// The vertical geodesic from `p` up to infinity.
    pub fn vertical(p: BoundaryPoint) -> Self {
        Self {
            a: p.into(),
            b: IdealPoint::Infinity,
        }
    }

    pub fn endpoints(&self) -> (IdealPoint, IdealPoint) {
        (self.a, self.b)
    }
}

/// The vertical geodesic plane lying over a line of the boundary plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerticalPlane {
    point: BoundaryPoint,
    direction: (f64, f64),
}

impl VerticalPlane {
    pub fn new(point: BoundaryPoint, direction: (f64, f64)) -> Result<Self, GeomError> {
        let norm = direction.0.hypot(direction.1);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(GeomError::BadDirection);
        }
        Ok(Self {
            point,
            direction: (direction.0 / norm, direction.1 / norm),
        })
    }

    pub fn point(&self) -> BoundaryPoint {
        self.point
    }

    pub fn direction(&self) -> (f64, f64) {
        self.direction
    }

    /// Signed distance of `p` from the boundary line, positive to the left of
    /// the direction of travel.
    pub fn signed_distance(&self, p: BoundaryPoint) -> f64 {
        let (dx, dy) = p.minus(self.point);
        self.direction.0 * dy - self.direction.1 * dx
    }
}

/// How a horoball sits relative to a vertical plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaneIncidence {
    Disjoint,
    Tangent,
    Crossing,
}

impl PlaneIncidence {
    pub fn meets(self) -> bool {
        !matches!(self, PlaneIncidence::Disjoint)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub tangency_tol: f64,
    pub angle_tol: f64,
    pub disjointness_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tangency_tol: 1e-9,
            angle_tol: 1e-9,
            disjointness_tol: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn new(
        tangency_tol: f64,
        angle_tol: f64,
        disjointness_tol: f64,
    ) -> Result<Self, GeomError> {
        let ok = |t: f64| t.is_finite() && t > 0.0;
        if ok(tangency_tol) && ok(angle_tol) && ok(disjointness_tol) {
            Ok(Self {
                tangency_tol,
                angle_tol,
                disjointness_tol,
            })
        } else {
            Err(GeomError::BadTolerance)
        }
    }

    /// Same value for every tolerance.
    pub fn uniform(tol: f64) -> Result<Self, GeomError> {
        Self::new(tol, tol, tol)
    }

    /// Defaults, with tangency and angle tolerances replaced by
    /// `HORONECKLACE_TOL` when that variable holds a positive number.
    pub fn from_env() -> Self {
        let mut tol = Self::default();
        if let Some(v) = std::env::var("HORONECKLACE_TOL")
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|v| v.is_finite() && *v > 0.0)
        {
            tol.tangency_tol = v;
            tol.angle_tol = v;
        }
        tol
    }
}

/// Hyperbolic distance between two finite horoballs,
/// `log(d_E(b1, b2)^2 / (h1 h2))`.
///
/// Negative values mean the interiors overlap; zero means tangency.
pub fn horoball_distance(b1: &Horoball, b2: &Horoball) -> Result<f64, GeomError> {
    let d2 = b1.center.dist_sq(b2.center);
    if d2 == 0.0 {
        return Err(GeomError::CoincidentCenters(b1.center.x, b1.center.y));
    }
    // Symmetric in the arguments: the product h1*h2 commutes exactly.
    Ok((d2 / (b1.height * b2.height)).ln())
}

/// Hyperbolic distance from a finite horoball to a horoball at infinity.
pub fn distance_to_infinity(b: &Horoball, h_inf: &HoroballAtInfinity) -> f64 {
    (h_inf.cut_height / b.height).ln()
}

/// Distance between horoballs of either kind.
pub fn any_horoball_distance(b1: &AnyHoroball, b2: &AnyHoroball) -> Result<f64, GeomError> {
    match (b1, b2) {
        (AnyHoroball::Finite(p), AnyHoroball::Finite(q)) => horoball_distance(p, q),
        (AnyHoroball::Finite(p), AnyHoroball::AtInfinity(h))
        | (AnyHoroball::AtInfinity(h), AnyHoroball::Finite(p)) => Ok(distance_to_infinity(p, h)),
        (AnyHoroball::AtInfinity(_), AnyHoroball::AtInfinity(_)) => Err(GeomError::BothAtInfinity),
    }
}

/// Squared center distance minus `h1 h2`, divided by `h1 h2`. Zero for
/// tangent horoballs, negative when interiors overlap.
pub fn tangency_residual(b1: &Horoball, b2: &Horoball) -> f64 {
    let scale = b1.height * b2.height;
    (b1.center.dist_sq(b2.center) - scale) / scale
}

pub fn are_tangent(b1: &Horoball, b2: &Horoball, tol: f64) -> bool {
    tangency_residual(b1, b2).abs() <= tol
}

pub fn interiors_disjoint(b1: &Horoball, b2: &Horoball, tol: f64) -> bool {
    tangency_residual(b1, b2) >= -tol
}

fn check_outside(viewpoint: BoundaryPoint, b: &Horoball) -> Result<f64, GeomError> {
    let d = viewpoint.dist(b.center);
    let r = b.shadow_radius();
    if d < r {
        Err(GeomError::ViewpointInsideDisk {
            distance: d,
            radius: r,
        })
    } else {
        Ok(d)
    }
}

/// Angle subtended by the projection disk of `b` seen from `viewpoint`.
pub fn visual_angle(viewpoint: BoundaryPoint, b: &Horoball) -> Result<f64, GeomError> {
    let d = check_outside(viewpoint, b)?;
    Ok(2.0 * (b.shadow_radius() / d).min(1.0).asin())
}

/// Direction angle of the tangent line from `viewpoint` to the projection
/// disk of `b`; `side = +1` is the counterclockwise tangent, `-1` the
/// clockwise one.
pub fn tangent_line_angle(
    viewpoint: BoundaryPoint,
    b: &Horoball,
    side: i8,
) -> Result<f64, GeomError> {
    let d = check_outside(viewpoint, b)?;
    let (dx, dy) = b.center.minus(viewpoint);
    let half = (b.shadow_radius() / d).min(1.0).asin();
    Ok(dy.atan2(dx) + f64::from(side.signum()) * half)
}

/// Classifies a horoball against a vertical plane by comparing the distance
/// of its center to the boundary line with its shadow radius.
pub fn meets_vertical_plane(b: &Horoball, v: &VerticalPlane, tol: f64) -> PlaneIncidence {
    let gap = v.signed_distance(b.center).abs() - b.shadow_radius();
    if gap.abs() <= tol {
        PlaneIncidence::Tangent
    } else if gap < 0.0 {
        PlaneIncidence::Crossing
    } else {
        PlaneIncidence::Disjoint
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Unsigned angle at `vertex` between the rays towards `p` and `q`.
pub fn angle_at(vertex: BoundaryPoint, p: BoundaryPoint, q: BoundaryPoint) -> f64 {
    let (ax, ay) = p.minus(vertex);
    let (bx, by) = q.minus(vertex);
    let cross = ax * by - ay * bx;
    let dot = ax * bx + ay * by;
    cross.abs().atan2(dot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_3;

    fn hb(x: f64, y: f64, h: f64) -> Horoball {
        Horoball::at(x, y, h).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(
            horoball_distance(&hb(0.0, 0.0, 1.0), &hb(1.0, 0.0, 1.0)).unwrap(),
            0.0
        );
        assert_abs_diff_eq!(
            horoball_distance(&hb(0.0, 0.0, 1.0), &hb(2.0, 0.0, 1.0)).unwrap(),
            4f64.ln(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            horoball_distance(&hb(0.0, 0.0, 0.5), &hb(1.0, 0.0, 0.5)).unwrap(),
            4f64.ln(),
            epsilon = 1e-15
        );
        assert!(matches!(
            horoball_distance(&hb(0.3, 0.2, 1.0), &hb(0.3, 0.2, 0.5)),
            Err(GeomError::CoincidentCenters(..))
        ));
    }

    #[test]
    fn distance_to_infinity_examples() {
        let standard = HoroballAtInfinity::standard();
        assert_eq!(distance_to_infinity(&hb(0.0, 0.0, 1.0), &standard), 0.0);
        assert_abs_diff_eq!(
            distance_to_infinity(&hb(3.0, 1.0, 0.25), &standard),
            4f64.ln(),
            epsilon = 1e-15
        );
        let e = HoroballAtInfinity::new(std::f64::consts::E).unwrap();
        assert_abs_diff_eq!(
            distance_to_infinity(&hb(0.0, 0.0, 1.0), &e),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn tangency_predicates() {
        let a = hb(0.0, 0.0, 1.0);
        assert!(are_tangent(&a, &hb(1.0, 0.0, 1.0), 1e-9));
        assert!(!interiors_disjoint(&a, &hb(0.9, 0.0, 1.0), 1e-12));
        let small = hb(1.0, 0.0, 0.99);
        assert!(!are_tangent(&a, &small, 1e-9));
        assert!(interiors_disjoint(&a, &small, 1e-12));
    }

    #[test]
    fn visual_angle_examples() {
        let eye = BoundaryPoint::ORIGIN;
        assert_abs_diff_eq!(
            visual_angle(eye, &hb(1.0, 0.0, 1.0)).unwrap(),
            FRAC_PI_3,
            epsilon = 1e-15
        );
        let half = hb(0.5f64.sqrt(), 0.0, 0.5);
        assert_abs_diff_eq!(
            visual_angle(eye, &half).unwrap(),
            0.722_734_247_813_415_6,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            visual_angle(eye, &hb(1000.0, 0.0, 1.0)).unwrap(),
            2.0 * 0.0005f64.asin(),
            epsilon = 1e-15
        );
        assert!(visual_angle(eye, &hb(0.2, 0.0, 1.0)).is_err());
    }

    #[test]
    fn tangent_line_examples() {
        let eye = BoundaryPoint::ORIGIN;
        let b = hb(0.0, 1.0, 1.0);
        assert_abs_diff_eq!(
            tangent_line_angle(eye, &b, 1).unwrap(),
            2.0 * FRAC_PI_3,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            tangent_line_angle(eye, &b, -1).unwrap(),
            FRAC_PI_3,
            epsilon = 1e-15
        );
        let tiny = hb(3.0, 4.0, 1e-300);
        assert_abs_diff_eq!(
            tangent_line_angle(eye, &tiny, 1).unwrap(),
            4f64.atan2(3.0),
            epsilon = 1e-15
        );
        assert!(tangent_line_angle(eye, &hb(0.1, 0.1, 1.0), 1).is_err());
    }

    #[test]
    fn vertical_plane_incidence() {
        let v = VerticalPlane::new(BoundaryPoint::ORIGIN, (0.0, 1.0)).unwrap();
        let tol = 1e-9;
        assert_eq!(
            meets_vertical_plane(&hb(0.5, 3f64.sqrt() / 2.0, 1.0), &v, tol),
            PlaneIncidence::Tangent
        );
        assert_eq!(
            meets_vertical_plane(&hb(0.0, 1.0, 1.0), &v, tol),
            PlaneIncidence::Crossing
        );
        assert_eq!(
            meets_vertical_plane(&hb(2.0, 0.0, 1.0), &v, tol),
            PlaneIncidence::Disjoint
        );
    }

    #[test]
    fn construction_rejects_degenerate_input() {
        assert!(Horoball::at(0.0, 0.0, 0.0).is_err());
        assert!(Horoball::at(0.0, 0.0, -1.0).is_err());
        assert!(Horoball::at(f64::NAN, 0.0, 1.0).is_err());
        assert!(Horoball::at(0.0, 0.0, f64::INFINITY).is_err());
        assert!(HoroballAtInfinity::new(0.0).is_err());
        assert!(VerticalPlane::new(BoundaryPoint::ORIGIN, (0.0, 0.0)).is_err());
        let p = BoundaryPoint::new(1.0, 2.0).unwrap();
        assert!(Geodesic::between(p, p).is_err());
        assert!(Geodesic::new(IdealPoint::Infinity, IdealPoint::Infinity).is_err());
    }

    #[test]
    fn angle_helpers() {
        assert_abs_diff_eq!(wrap_angle(3.0 * PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_angle(-PI / 2.0 - 2.0 * PI), -PI / 2.0, epsilon = 1e-12);
        let o = BoundaryPoint::ORIGIN;
        let a = angle_at(
            o,
            BoundaryPoint { x: 1.0, y: 0.0 },
            BoundaryPoint { x: 0.0, y: -2.0 },
        );
        assert_abs_diff_eq!(a, PI / 2.0, epsilon = 1e-15);
    }
}
