//! The two-eyes configuration: two full-sized eyes `C1`, `C2` and two tangent
//! beads `B1`, `B2` with `B_i` meeting the vertical plane over `C_i`
//! perpendicular to the eye axis.
//!
//! All computations happen in the normalized frame: `C1` at the origin, `C2`
//! at `(c, 0)`, beads in the upper half-plane (the lower case is reflected).

use std::f64::consts::{FRAC_PI_2, PI};

use thiserror::Error;

use crate::geom::{
    angle_at, interiors_disjoint, meets_vertical_plane, tangency_residual, BoundaryPoint,
    GeomError, Horoball, Tolerances,
};
use crate::necklace::{EyePair, NecklaceError};

pub mod maximize;
pub mod moves;
pub mod sample;

pub use moves::{
    improve_to_equality, increasing_direction, rotate_tangent_pair, step1_drop, step2_slide_eye,
    step3_inflate_toward_eye, step4_inflate, step5_align, MoveKind, MoveOutcome, StopReason,
    SubMove,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TwoEyesError {
    #[error("hypotheses fail: {0}")]
    Hypotheses(String),
    #[error("no tangent line from eye {0} keeps both beads on one side")]
    NoSeparatingTangent(usize),
    #[error("precondition not met: {0}")]
    Precondition(String),
    #[error("move found no stopping event: {0}")]
    NoEvent(String),
    #[error("inflation did not finish within {0} rounds")]
    RoundCap(usize),
    #[error("improvement ended with angle sum {0}, expected pi/3")]
    NotEquality(f64),
    #[error(transparent)]
    Necklace(#[from] NecklaceError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Eyes plus the two beads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoEyesConfig {
    eyes: EyePair,
    b1: Horoball,
    b2: Horoball,
}

/// Coordinates of a configuration in its normalized frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameCoords {
    pub c: f64,
    pub b1: Horoball,
    pub b2: Horoball,
    /// Whether the beads were reflected across the axis.
    pub flipped: bool,
}

impl TwoEyesConfig {
    pub fn new(eyes: EyePair, b1: Horoball, b2: Horoball) -> Self {
        Self { eyes, b1, b2 }
    }

    /// Builds a configuration directly in the normalized frame.
    pub fn in_frame(c: f64, b1: Horoball, b2: Horoball) -> Result<Self, TwoEyesError> {
        Ok(Self {
            eyes: EyePair::on_axis(c)?,
            b1,
            b2,
        })
    }

    pub fn eyes(&self) -> &EyePair {
        &self.eyes
    }

    pub fn b1(&self) -> &Horoball {
        &self.b1
    }

    pub fn b2(&self) -> &Horoball {
        &self.b2
    }

    pub fn bead(&self, i: usize) -> &Horoball {
        if i == 1 {
            &self.b1
        } else {
            &self.b2
        }
    }

    pub fn frame_coords(&self) -> FrameCoords {
        let f = self.eyes.frame();
        let mut b1 = f.ball_to_frame(&self.b1);
        let mut b2 = f.ball_to_frame(&self.b2);
        let flipped = b1.center().y + b2.center().y < 0.0;
        if flipped {
            b1 = reflect(&b1);
            b2 = reflect(&b2);
        }
        FrameCoords {
            c: self.eyes.gap(),
            b1,
            b2,
            flipped,
        }
    }

    /// The same configuration expressed in its normalized frame.
    pub fn normalized(&self) -> Result<Self, TwoEyesError> {
        let fc = self.frame_coords();
        Self::in_frame(fc.c, fc.b1, fc.b2)
    }
}

fn reflect(b: &Horoball) -> Horoball {
    let p = b.center();
    b.with_center(BoundaryPoint { x: p.x, y: -p.y })
}

/// Signed hypothesis residuals; each entry is satisfied when it is on the
/// right side of zero, up to the tolerances used by [`check_hypotheses`].
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    /// `h_i - 1` (must be `<= 0`).
    pub height_excess: [f64; 2],
    /// Normalized tangency residual of `B1`, `B2` (must be `0`).
    pub bead_tangency: f64,
    /// `eye_slack[i][j]`: normalized residual of `B_{i+1}` against
    /// `C_{j+1}` (must be `>= 0`).
    pub eye_slack: [[f64; 2]; 2],
    /// `|x_i - e_i| - h_i / 2` in the normalized frame (must be `<= 0`).
    pub plane_gap: [f64; 2],
    pub ok: bool,
    pub failures: Vec<String>,
}

pub fn check_hypotheses(cfg: &TwoEyesConfig, tol: &Tolerances) -> HypothesisReport {
    let fc = cfg.frame_coords();
    let beads = [fc.b1, fc.b2];
    let eyes = [*cfg.eyes.c1(), *cfg.eyes.c2()];
    let frame = cfg.eyes.frame();
    let eyes_in_frame = eyes.map(|e| frame.ball_to_frame(&e));
    let mut failures = Vec::new();

    let height_excess = beads.map(|b| b.height() - 1.0);
    for (i, e) in height_excess.iter().enumerate() {
        if !beads[i].is_at_most_full(tol.tangency_tol) {
            failures.push(format!("bead {} exceeds full size by {e:.3e}", i + 1));
        }
    }
    let bead_tangency = tangency_residual(&fc.b1, &fc.b2);
    if bead_tangency.abs() > tol.tangency_tol {
        failures.push(format!(
            "beads are not tangent (residual {bead_tangency:.3e})"
        ));
    }
    let mut eye_slack = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            eye_slack[i][j] = tangency_residual(&beads[i], &eyes_in_frame[j]);
            if !interiors_disjoint(&beads[i], &eyes_in_frame[j], tol.disjointness_tol) {
                failures.push(format!(
                    "bead {} overlaps eye {} (residual {:.3e})",
                    i + 1,
                    j + 1,
                    eye_slack[i][j]
                ));
            }
        }
    }
    let eye_x = [0.0, fc.c];
    let mut plane_gap = [0.0; 2];
    for i in 0..2 {
        plane_gap[i] = (beads[i].center().x - eye_x[i]).abs() - beads[i].shadow_radius();
        let plane = cfg.eyes.cross_plane(i + 1);
        if !meets_vertical_plane(cfg.bead(i + 1), &plane, tol.tangency_tol).meets() {
            failures.push(format!(
                "bead {} misses the plane over eye {} (gap {:.3e})",
                i + 1,
                i + 1,
                plane_gap[i]
            ));
        }
    }
    HypothesisReport {
        height_excess,
        bead_tangency,
        eye_slack,
        plane_gap,
        ok: failures.is_empty(),
        failures,
    }
}

/// The angles of the two-eyes configuration and the quantities they are
/// built from, all in the normalized frame.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleDiagnostics {
    pub alpha: f64,
    pub beta: f64,
    pub sum: f64,
    /// Angle at `B1` between `B1 -> B2` and `B1 -> C2`.
    pub psi: f64,
    /// Angle at `B2` between `B2 -> B1` and `B2 -> C1`.
    pub phi: f64,
    /// Angle at `C2` between `C2 -> C1` and `C2 -> B1`.
    pub psi_prime: f64,
    /// Angle at `C1` between `C1 -> C2` and `C1 -> B2`.
    pub phi_prime: f64,
    pub c: f64,
    /// Distance between the bead centers.
    pub b: f64,
    /// `d[i][j]`: distance from bead `i + 1` to eye `j + 1`.
    pub d: [[f64; 2]; 2],
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub h: [f64; 2],
}

/// Validates the hypotheses, selects the tangent lines and returns the
/// angles.
pub fn alpha_beta(cfg: &TwoEyesConfig, tol: &Tolerances) -> Result<AngleDiagnostics, TwoEyesError> {
    let report = check_hypotheses(cfg, tol);
    if !report.ok {
        return Err(TwoEyesError::Hypotheses(report.failures.join("; ")));
    }
    let fc = cfg.frame_coords();
    let c1 = BoundaryPoint::ORIGIN;
    let c2 = BoundaryPoint { x: fc.c, y: 0.0 };
    let w1 = select_tangent(c1, &fc.b1, &fc.b2, c2, 1, 1, tol.angle_tol)?;
    let w2 = select_tangent(c2, &fc.b2, &fc.b1, c1, -1, 2, tol.angle_tol)?;
    let alpha = acute_to_vertical(w1);
    let beta = acute_to_vertical(w2);
    Ok(diagnostics(&fc, alpha, beta))
}

/// Candidate tangent lines from `eye` to `own`; keeps those with both bead
/// disks in one closed half-plane. When both qualify, prefers the one with
/// the other eye's center on the beads' side, then the `outer` candidate.
fn select_tangent(
    eye: BoundaryPoint,
    own: &Horoball,
    other: &Horoball,
    other_eye: BoundaryPoint,
    outer: i8,
    index: usize,
    tol: f64,
) -> Result<f64, TwoEyesError> {
    let (dx, dy) = own.center().minus(eye);
    let base = dy.atan2(dx);
    let half = (own.shadow_radius() / dx.hypot(dy)).min(1.0).asin();
    let mut valid = Vec::new();
    for side in [outer, -outer] {
        let w = base + f64::from(side) * half;
        let (ux, uy) = (w.cos(), w.sin());
        let cross = |p: BoundaryPoint| {
            let (px, py) = p.minus(eye);
            ux * py - uy * px
        };
        let s_own = cross(own.center());
        let sign = if s_own >= 0.0 { 1.0 } else { -1.0 };
        if sign * cross(other.center()) >= other.shadow_radius() - tol {
            let eye_on_side = sign * cross(other_eye) > 0.0;
            valid.push((w, eye_on_side));
        }
    }
    match valid.as_slice() {
        [] => Err(TwoEyesError::NoSeparatingTangent(index)),
        [(w, _)] => Ok(*w),
        [(w0, e0), (w1, e1)] => Ok(if *e1 && !*e0 { *w1 } else { *w0 }),
        _ => unreachable!(),
    }
}

fn acute_to_vertical(w: f64) -> f64 {
    let d = (w - FRAC_PI_2).rem_euclid(PI);
    d.min(PI - d)
}

fn diagnostics(fc: &FrameCoords, alpha: f64, beta: f64) -> AngleDiagnostics {
    let c1 = BoundaryPoint::ORIGIN;
    let c2 = BoundaryPoint { x: fc.c, y: 0.0 };
    let p1 = fc.b1.center();
    let p2 = fc.b2.center();
    AngleDiagnostics {
        alpha,
        beta,
        sum: alpha + beta,
        psi: angle_at(p1, p2, c2),
        phi: angle_at(p2, p1, c1),
        psi_prime: angle_at(c2, c1, p1),
        phi_prime: angle_at(c1, c2, p2),
        c: fc.c,
        b: p1.dist(p2),
        d: [[p1.dist(c1), p1.dist(c2)], [p2.dist(c1), p2.dist(c2)]],
        x: [p1.x, p2.x],
        y: [p1.y, p2.y],
        h: [fc.b1.height(), fc.b2.height()],
    }
}

/// Signed angles from the outer tangent lines, without any hypothesis
/// checks: `alpha = atan2(y1, x1) + asin(r1/d11) - pi/2` and
/// `beta = pi/2 - atan2(y2, x2 - c) + asin(r2/d22)`. These agree with
/// [`alpha_beta`] whenever the hypotheses hold, and stay smooth while moves
/// pass through intermediate positions.
pub fn raw_angles(fc: &FrameCoords) -> (f64, f64) {
    let (p1, p2) = (fc.b1.center(), fc.b2.center());
    let d11 = p1.x.hypot(p1.y);
    let d22 = (p2.x - fc.c).hypot(p2.y);
    let a = p1.y.atan2(p1.x) + (fc.b1.shadow_radius() / d11).min(1.0).asin() - FRAC_PI_2;
    let b = FRAC_PI_2 - p2.y.atan2(p2.x - fc.c) + (fc.b2.shadow_radius() / d22).min(1.0).asin();
    (a, b)
}

pub fn raw_angle_sum(cfg: &TwoEyesConfig) -> f64 {
    let (a, b) = raw_angles(&cfg.frame_coords());
    a + b
}

/// Residuals of the equality configuration: both beads full-sized, each
/// tangent to its eye, and the eyes tangent to each other.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualityReport {
    pub ok: bool,
    pub max_deviation: f64,
    pub height_deviation: [f64; 2],
    pub bead_eye_residual: [f64; 2],
    pub eye_gap_deviation: f64,
    pub bead_tangency: f64,
}

pub fn equality_case(cfg: &TwoEyesConfig, tol: f64) -> EqualityReport {
    let fc = cfg.frame_coords();
    let height_deviation = [fc.b1.height() - 1.0, fc.b2.height() - 1.0];
    let bead_eye_residual = [
        tangency_residual(&fc.b1, &Horoball::full(0.0, 0.0).expect("finite eye")),
        tangency_residual(&fc.b2, &Horoball::full(fc.c, 0.0).expect("finite eye")),
    ];
    let eye_gap_deviation = fc.c - 1.0;
    let bead_tangency = tangency_residual(&fc.b1, &fc.b2);
    let max_deviation = height_deviation
        .iter()
        .chain(&bead_eye_residual)
        .chain([&eye_gap_deviation, &bead_tangency])
        .fold(0.0f64, |m, v| m.max(v.abs()));
    EqualityReport {
        ok: max_deviation <= tol,
        max_deviation,
        height_deviation,
        bead_eye_residual,
        eye_gap_deviation,
        bead_tangency,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_3;

    fn cfg(c: f64, b1: (f64, f64, f64), b2: (f64, f64, f64)) -> TwoEyesConfig {
        TwoEyesConfig::in_frame(
            c,
            Horoball::at(b1.0, b1.1, b1.2).unwrap(),
            Horoball::at(b2.0, b2.1, b2.2).unwrap(),
        )
        .unwrap()
    }

    fn s3() -> f64 {
        3f64.sqrt()
    }

    #[test]
    fn hexagonal_equality_cases() {
        let tol = Tolerances::default();
        // beads over the eyes' left shoulders
        let a = alpha_beta(
            &cfg(1.0, (-0.5, s3() / 2.0, 1.0), (0.5, s3() / 2.0, 1.0)),
            &tol,
        )
        .unwrap();
        assert!((a.alpha - FRAC_PI_3).abs() < 1e-12);
        assert!(a.beta.abs() < 1e-12);
        // shifted one step to the right
        let b = alpha_beta(
            &cfg(1.0, (0.5, s3() / 2.0, 1.0), (1.5, s3() / 2.0, 1.0)),
            &tol,
        )
        .unwrap();
        assert!(b.alpha.abs() < 1e-12);
        assert!((b.beta - FRAC_PI_3).abs() < 1e-12);
        for d in [a, b] {
            assert!((d.sum - FRAC_PI_3).abs() < 1e-12);
        }
    }

    #[test]
    fn reflected_and_moved_configurations_agree() {
        let tol = Tolerances::default();
        let base = cfg(1.0, (-0.5, s3() / 2.0, 1.0), (0.5, s3() / 2.0, 1.0));
        let lower = cfg(1.0, (-0.5, -s3() / 2.0, 1.0), (0.5, -s3() / 2.0, 1.0));
        let a = alpha_beta(&base, &tol).unwrap();
        let b = alpha_beta(&lower, &tol).unwrap();
        assert!((a.alpha - b.alpha).abs() < 1e-12 && (a.beta - b.beta).abs() < 1e-12);

        // rotate and translate the whole picture
        let (cs, sn) = (0.6f64, 0.8f64);
        let m = |x: f64, y: f64| (3.0 + cs * x - sn * y, -1.0 + sn * x + cs * y);
        let ball = |x: f64, y: f64, h: f64| {
            let (u, v) = m(x, y);
            Horoball::at(u, v, h).unwrap()
        };
        let eyes = EyePair::new(ball(0.0, 0.0, 1.0), ball(1.0, 0.0, 1.0), &tol).unwrap();
        let moved = TwoEyesConfig::new(
            eyes,
            ball(-0.5, s3() / 2.0, 1.0),
            ball(0.5, s3() / 2.0, 1.0),
        );
        let c = alpha_beta(&moved, &tol).unwrap();
        assert!((a.alpha - c.alpha).abs() < 1e-12 && (a.beta - c.beta).abs() < 1e-12);
    }

    #[test]
    fn hypotheses_report_each_failure() {
        let tol = Tolerances::default();
        // bead too large
        let r = check_hypotheses(
            &cfg(1.0, (-0.5, s3() / 2.0, 1.2), (0.5, s3() / 2.0, 1.0)),
            &tol,
        );
        assert!(!r.ok);
        assert!(r.height_excess[0] > 0.19);
        // beads not tangent
        let r = check_hypotheses(
            &cfg(1.2, (-0.5, s3() / 2.0, 1.0), (1.3, s3() / 2.0, 1.0)),
            &tol,
        );
        assert!(r.failures.iter().any(|f| f.contains("not tangent")));
        // bead misses its plane
        let r = check_hypotheses(&cfg(1.0, (-0.6, 1.0, 0.25), (0.5, s3() / 2.0, 1.0)), &tol);
        assert!(r
            .failures
            .iter()
            .any(|f| f.contains("misses the plane over eye 1")));
        assert!(alpha_beta(&cfg(1.0, (-0.6, 1.0, 0.25), (0.5, s3() / 2.0, 1.0)), &tol).is_err());
    }

    #[test]
    fn raw_angles_match_checked_angles() {
        let tol = Tolerances::default();
        let c = cfg(1.0, (-0.5, s3() / 2.0, 1.0), (0.5, s3() / 2.0, 1.0));
        let d = alpha_beta(&c, &tol).unwrap();
        let (a, b) = raw_angles(&c.frame_coords());
        assert!((a - d.alpha).abs() < 1e-12 && (b - d.beta).abs() < 1e-12);
    }

    #[test]
    fn equality_report() {
        let c = cfg(1.0, (-0.5, s3() / 2.0, 1.0), (0.5, s3() / 2.0, 1.0));
        assert!(equality_case(&c, 1e-9).ok);
        let c = cfg(1.1, (-0.5, s3() / 2.0, 1.0), (0.5, s3() / 2.0, 1.0));
        let r = equality_case(&c, 1e-9);
        assert!(!r.ok && (r.eye_gap_deviation - 0.1).abs() < 1e-12);
    }
}
