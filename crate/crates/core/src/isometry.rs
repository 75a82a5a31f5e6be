//! Orientation-preserving isometries of hyperbolic 3-space as Möbius maps of
//! the boundary, identified with the complex line.

use num_complex::Complex64;

use crate::geom::{AnyHoroball, BoundaryPoint, Geodesic, Horoball, HoroballAtInfinity, IdealPoint};

/// A Möbius map `z -> (a z + b) / (c z + d)` with `ad - bc = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusMap {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
}

fn to_complex(p: BoundaryPoint) -> Complex64 {
    Complex64::new(p.x, p.y)
}

fn to_point(z: Complex64) -> BoundaryPoint {
    BoundaryPoint { x: z.re, y: z.im }
}

/// Relative size below which `cz + d` (or `c` alone) counts as a pole.
/// Images closer to the pole than this would have heights beyond 1e24 times
/// the original and are sent to infinity.
const POLE_EPS: f64 = 1e-12;

fn negligible(value: Complex64, scale: f64) -> bool {
    value.norm() <= POLE_EPS * scale
}

impl MobiusMap {
    pub const IDENTITY: MobiusMap = MobiusMap {
        a: Complex64::new(1.0, 0.0),
        b: Complex64::new(0.0, 0.0),
        c: Complex64::new(0.0, 0.0),
        d: Complex64::new(1.0, 0.0),
    };

    /// Builds the map from arbitrary entries, rescaling to determinant one.
    /// Returns `None` for a singular matrix.
    pub fn from_entries(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Option<Self> {
        let det = a * d - b * c;
        if !(det.norm() > 0.0 && det.is_finite()) {
            return None;
        }
        let k = det.sqrt().inv();
        Some(Self {
            a: a * k,
            b: b * k,
            c: c * k,
            d: d * k,
        })
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    /// `z -> z + v`.
    pub fn translation(dx: f64, dy: f64) -> Self {
        Self {
            b: Complex64::new(dx, dy),
            ..Self::IDENTITY
        }
    }

    /// Rotation by `theta` (counterclockwise seen from above) about the
    /// vertical geodesic over `p`.
    pub fn vertical_rotation(p: BoundaryPoint, theta: f64) -> Self {
        let half = Complex64::from_polar(1.0, 0.5 * theta);
        let inv = half.conj();
        Self {
            a: half,
            b: to_complex(p) * (inv - half),
            c: Complex64::new(0.0, 0.0),
            d: inv,
        }
    }

    /// Elliptic rotation by `theta` about `gamma`, conjugated from the
    /// rotation `z -> e^{iθ} z` about the geodesic from 0 to ∞. The first
    /// endpoint of `gamma` plays the role of 0.
    pub fn elliptic_about_geodesic(gamma: &Geodesic, theta: f64) -> Self {
        let to_standard = Self::sending_to_zero_infinity(gamma);
        let half = Complex64::from_polar(1.0, 0.5 * theta);
        let rot = Self {
            a: half,
            b: Complex64::new(0.0, 0.0),
            c: Complex64::new(0.0, 0.0),
            d: half.conj(),
        };
        to_standard.inverse().compose(&rot).compose(&to_standard)
    }

    pub fn half_turn(gamma: &Geodesic) -> Self {
        Self::elliptic_about_geodesic(gamma, std::f64::consts::PI)
    }

    /// A map taking the first endpoint of `gamma` to 0 and the second to ∞.
    fn sending_to_zero_infinity(gamma: &Geodesic) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let m = match gamma.endpoints() {
            (IdealPoint::Finite(u), IdealPoint::Finite(w)) => {
                let (u, w) = (to_complex(u), to_complex(w));
                Self::from_entries(one, -u, one, -w)
            }
            (IdealPoint::Finite(u), IdealPoint::Infinity) => {
                Self::from_entries(one, -to_complex(u), zero, one)
            }
            (IdealPoint::Infinity, IdealPoint::Finite(w)) => {
                Self::from_entries(zero, one, one, -to_complex(w))
            }
            (IdealPoint::Infinity, IdealPoint::Infinity) => None,
        };
        // Geodesic construction guarantees distinct endpoints.
        m.expect("geodesic endpoints are distinct")
    }

    /// Matrix product `self * other`: apply `other` first.
    pub fn compose(&self, other: &MobiusMap) -> MobiusMap {
        let (u, v) = (self, other);
        let raw = (
            u.a * v.a + u.b * v.c,
            u.a * v.b + u.b * v.d,
            u.c * v.a + u.d * v.c,
            u.c * v.b + u.d * v.d,
        );
        Self::from_entries(raw.0, raw.1, raw.2, raw.3)
            .expect("product of unimodular matrices is invertible")
    }

    pub fn inverse(&self) -> MobiusMap {
        Self::from_entries(self.d, -self.b, -self.c, self.a)
            .expect("unimodular matrix is invertible")
    }

    /// Entrywise comparison up to the overall sign, since `g` and `-g` act
    /// identically.
    pub fn approx_eq(&self, other: &MobiusMap, tol: f64) -> bool {
        let close = |s: f64| {
            self.entries()
                .iter()
                .zip(other.entries().iter())
                .all(|(x, y)| (x - y * s).norm() <= tol)
        };
        close(1.0) || close(-1.0)
    }

    fn c_vanishes(&self) -> bool {
        negligible(self.c, self.a.norm() + self.d.norm())
    }

    fn is_pole(&self, z: Complex64, den: Complex64) -> bool {
        negligible(den, self.c.norm() * (1.0 + z.norm()) + self.d.norm())
    }

    pub fn apply_boundary(&self, p: IdealPoint) -> IdealPoint {
        match p {
            IdealPoint::Infinity => {
                if self.c_vanishes() {
                    IdealPoint::Infinity
                } else {
                    IdealPoint::Finite(to_point(self.a / self.c))
                }
            }
            IdealPoint::Finite(p) => {
                let z = to_complex(p);
                let den = self.c * z + self.d;
                if self.is_pole(z, den) {
                    IdealPoint::Infinity
                } else {
                    IdealPoint::Finite(to_point((self.a * z + self.b) / den))
                }
            }
        }
    }

    pub fn apply_point(&self, p: BoundaryPoint) -> IdealPoint {
        self.apply_boundary(IdealPoint::Finite(p))
    }

    pub fn apply_horoball(&self, b: &AnyHoroball) -> AnyHoroball {
        match b {
            AnyHoroball::Finite(ball) => {
                let z = to_complex(ball.center());
                let den = self.c * z + self.d;
                if self.is_pole(z, den) {
                    let cut = 1.0 / (ball.height() * self.c.norm_sqr());
                    AnyHoroball::AtInfinity(
                        HoroballAtInfinity::new(cut).expect("positive cut height"),
                    )
                } else {
                    let center = to_point((self.a * z + self.b) / den);
                    let height = ball.height() / den.norm_sqr();
                    AnyHoroball::Finite(
                        Horoball::new(center, height).expect("image of a horoball is a horoball"),
                    )
                }
            }
            AnyHoroball::AtInfinity(h) => {
                let t = h.cut_height();
                if self.c_vanishes() {
                    let cut = t * self.a.norm() / self.d.norm();
                    AnyHoroball::AtInfinity(
                        HoroballAtInfinity::new(cut).expect("positive cut height"),
                    )
                } else {
                    let center = to_point(self.a / self.c);
                    let height = 1.0 / (t * self.c.norm_sqr());
                    AnyHoroball::Finite(
                        Horoball::new(center, height).expect("image of a horoball is a horoball"),
                    )
                }
            }
        }
    }

    /// Image of a finite horoball that is known to stay finite.
    pub fn apply_finite(&self, b: &Horoball) -> Option<Horoball> {
        self.apply_horoball(&AnyHoroball::Finite(*b)).finite()
    }
}

/// Rotation about the vertical geodesic over `p`.
pub fn vertical_rotation(p: BoundaryPoint, theta: f64) -> MobiusMap {
    MobiusMap::vertical_rotation(p, theta)
}

pub fn elliptic_about_geodesic(gamma: &Geodesic, theta: f64) -> MobiusMap {
    MobiusMap::elliptic_about_geodesic(gamma, theta)
}

pub fn half_turn(gamma: &Geodesic) -> MobiusMap {
    MobiusMap::half_turn(gamma)
}

pub fn translation(dx: f64, dy: f64) -> MobiusMap {
    MobiusMap::translation(dx, dy)
}
