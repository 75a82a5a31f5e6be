//! The one-parameter family of eight-bead necklaces around two tangent
//! eyes, the visual-angle certificate that pins it down, and recognition of
//! family members.

use std::f64::consts::{FRAC_PI_3, PI};

use thiserror::Error;

use crate::geom::{meets_vertical_plane, visual_angle, BoundaryPoint, Horoball, Tolerances};
use crate::necklace::{crossing_beads, EyePair, Necklace, NecklaceError};
use crate::two_eyes::{alpha_beta, TwoEyesConfig, TwoEyesError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyError {
    #[error("family parameter {0} is outside [pi/3, 2pi/3]")]
    ParamOutOfRange(f64),
    #[error("the certificate applies to 8 beads, found {0}")]
    BeadCount(usize),
    #[error("the upper or lower crossing beads are not tied to each other")]
    PairsNotTied,
    #[error("the necklace does not split into two pairs and two connector chains")]
    Layout,
    #[error(transparent)]
    Necklace(#[from] NecklaceError),
    #[error(transparent)]
    TwoEyes(#[from] TwoEyesError),
}

/// The angle `theta` in `[pi/3, 2pi/3]`: the direction from `C1` to the
/// first bead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyParam(f64);

impl FamilyParam {
    /// Values within `1e-12` of the interval are clamped onto it, so decimal
    /// renderings of the endpoints are accepted.
    pub fn new(theta: f64) -> Result<Self, FamilyError> {
        let (lo, hi) = (FRAC_PI_3, 2.0 * FRAC_PI_3);
        if !(lo - 1e-12..=hi + 1e-12).contains(&theta) {
            return Err(FamilyError::ParamOutOfRange(theta));
        }
        Ok(Self(theta.clamp(lo, hi)))
    }

    pub fn theta(self) -> f64 {
        self.0
    }
}

fn unit(a: f64) -> (f64, f64) {
    (a.cos(), a.sin())
}

/// Bead centers of the family member, in necklace order: four beads around
/// `C1 = (0, 0)` at angles `theta + k pi/3` (k = 0..3), then four around
/// `C2 = (1, 0)` at angles `theta + k pi/3` (k = 3..6).
pub fn family_centers(theta: f64) -> [BoundaryPoint; 8] {
    let mut out = [BoundaryPoint::ORIGIN; 8];
    for (k, slot) in out.iter_mut().enumerate() {
        let (dx, step) = if k < 4 { (0.0, k) } else { (1.0, k - 1) };
        let (x, y) = unit(theta + step as f64 * FRAC_PI_3);
        *slot = BoundaryPoint { x: dx + x, y };
    }
    out
}

/// The family member with eyes at `(0, 0)` and `(1, 0)`; all beads are
/// full-sized.
pub fn generate_family(param: FamilyParam) -> (Necklace, EyePair) {
    let beads = family_centers(param.theta())
        .iter()
        .map(|p| Horoball::full(p.x, p.y).expect("finite centers"))
        .collect();
    let necklace = Necklace::new(beads).expect("eight beads");
    let eyes = EyePair::on_axis(1.0).expect("tangent eyes");
    (necklace, eyes)
}

/// The angle bookkeeping that forces a tight necklace: two two-eyes sums
/// plus the visual angles of the beads connecting the pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleReport {
    /// Indices `(B1, B2)` of the upper pair.
    pub upper: (usize, usize),
    /// Indices `(B1, B2)` of the lower pair.
    pub lower: (usize, usize),
    pub alpha: f64,
    pub beta: f64,
    /// Angle at `C2` for the lower pair.
    pub alpha_prime: f64,
    /// Angle at `C1` for the lower pair.
    pub beta_prime: f64,
    /// Beads joining the lower pair back to the upper pair around `C1`, with
    /// their visual angles from `center(C1)`.
    pub connectors1: Vec<(usize, f64)>,
    /// Beads joining the upper pair to the lower pair around `C2`, with
    /// their visual angles from `center(C2)`.
    pub connectors2: Vec<(usize, f64)>,
    /// `alpha + beta`, `alpha' + beta'`, then each visual angle.
    pub terms: Vec<f64>,
    pub total: f64,
}

/// Computes the angle certificate for a necklace around two eyes.
///
/// Crossing beads are chosen as in [`crossing_beads`]. When the upper
/// crossing beads are not tied (both meet the plane over `C1` only at a
/// tangency), the neighbor of the first one that meets the plane over `C2`
/// replaces the second; the lower pair is treated symmetrically, replacing
/// its first bead by a neighbor of its second one.
pub fn certificate_angle_sum(
    n: &Necklace,
    eyes: &EyePair,
    tol: &Tolerances,
) -> Result<AngleReport, FamilyError> {
    let k = n.len();
    if k != 8 {
        return Err(FamilyError::BeadCount(k));
    }
    let cb = crossing_beads(n, eyes, tol)?;
    let meets = |i: usize, eye: usize| {
        meets_vertical_plane(n.bead(i), &eyes.cross_plane(eye), tol.tangency_tol).meets()
    };
    let neighbors = |i: usize| [(i + 1) % k, (i + k - 1) % k];

    let (u1, mut u2) = (cb.upper1, cb.upper2);
    if !n.are_adjacent(u1, u2) {
        u2 = *neighbors(u1)
            .iter()
            .find(|&&j| meets(j, 2))
            .ok_or(FamilyError::PairsNotTied)?;
    }
    let (mut l1, l2) = (cb.lower1, cb.lower2);
    if !n.are_adjacent(l1, l2) {
        l1 = *neighbors(l2)
            .iter()
            .find(|&&j| meets(j, 1))
            .ok_or(FamilyError::PairsNotTied)?;
    }
    let distinct = [u1, u2, l1, l2];
    if (0..4).any(|a| (a + 1..4).any(|b| distinct[a] == distinct[b])) {
        return Err(FamilyError::Layout);
    }

    // Walk from the upper pair around C2 to the lower pair, then around C1
    // back to the start.
    let step = if (u1 + 1) % k == u2 { 1 } else { k - 1 };
    let mut walk = Vec::with_capacity(k);
    let mut i = u2;
    for _ in 0..k - 1 {
        i = (i + step) % k;
        walk.push(i);
    }
    let pos_l2 = walk
        .iter()
        .position(|&j| j == l2)
        .ok_or(FamilyError::Layout)?;
    if walk.get(pos_l2 + 1) != Some(&l1) {
        return Err(FamilyError::Layout);
    }
    let chain2 = &walk[..pos_l2];
    let chain1 = &walk[pos_l2 + 2..walk.len() - 1];

    let upper = alpha_beta(&TwoEyesConfig::new(*eyes, *n.bead(u1), *n.bead(u2)), tol)?;
    let lower = alpha_beta(
        &TwoEyesConfig::new(eyes.swapped(), *n.bead(l2), *n.bead(l1)),
        tol,
    )?;
    let look = |chain: &[usize], eye: &Horoball| -> Result<Vec<(usize, f64)>, FamilyError> {
        chain
            .iter()
            .map(|&j| {
                Ok((
                    j,
                    visual_angle(eye.center(), n.bead(j)).map_err(NecklaceError::from)?,
                ))
            })
            .collect()
    };
    let connectors1 = look(chain1, eyes.c1())?;
    let connectors2 = look(chain2, eyes.c2())?;

    let mut terms = vec![upper.sum, lower.sum];
    terms.extend(connectors1.iter().chain(&connectors2).map(|&(_, a)| a));
    let total = terms.iter().sum();
    Ok(AngleReport {
        upper: (u1, u2),
        lower: (l1, l2),
        alpha: upper.alpha,
        beta: upper.beta,
        alpha_prime: lower.alpha,
        beta_prime: lower.beta,
        connectors1,
        connectors2,
        terms,
        total,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub in_family: bool,
    /// Best-matching family parameter.
    pub theta: Option<f64>,
    /// Largest coordinate or height deviation from the matched member.
    pub max_deviation: f64,
    /// Index of the necklace bead matched to the member's first bead.
    pub shift: usize,
    pub reversed: bool,
}

/// Decides whether a necklace is, up to a rigid motion of the plane and a
/// relabeling of its beads, a member of the family with its eyes.
///
/// The eyes are moved to `(0, 0)` and `(1, 0)`; the candidate parameters are
/// the directions of beads resting on `C1` whose angle lies in
/// `[pi/3, 2pi/3]`, and each candidate member is compared under every
/// cyclic shift and reversal of the labels, with and without reflection in
/// the axis.
pub fn classify_solution(n: &Necklace, eyes: &EyePair, tol: f64) -> Classification {
    let gap_dev = (eyes.gap() - 1.0).abs();
    let not_in = |dev: f64| Classification {
        in_family: false,
        theta: None,
        max_deviation: dev,
        shift: 0,
        reversed: false,
    };
    if n.len() != 8 {
        return not_in(f64::INFINITY);
    }
    let frame = eyes.frame();
    let beads: Vec<Horoball> = n.beads().iter().map(|b| frame.ball_to_frame(b)).collect();
    let mut best = not_in(f64::INFINITY);

    for flip in [false, true] {
        let pts: Vec<(f64, f64, f64)> = beads
            .iter()
            .map(|b| {
                let p = b.center();
                (p.x, if flip { -p.y } else { p.y }, b.height())
            })
            .collect();
        let mut thetas: Vec<f64> = Vec::new();
        for &(x, y, _) in &pts {
            let a = y.atan2(x);
            let slack = 1e-6f64.max(tol);
            if y > 0.0
                && (x.hypot(y) - 1.0).abs() <= slack
                && a >= FRAC_PI_3 - slack
                && a <= 2.0 * FRAC_PI_3 + slack
            {
                thetas.push(a.clamp(FRAC_PI_3, 2.0 * FRAC_PI_3));
            }
        }
        for theta in thetas {
            let reference = family_centers(theta);
            for reversed in [false, true] {
                for shift in 0..8 {
                    let dev = (0..8)
                        .map(|i| {
                            let j = if reversed {
                                (shift + 8 - i) % 8
                            } else {
                                (shift + i) % 8
                            };
                            let (x, y, h) = pts[j];
                            let r = reference[i];
                            (x - r.x).abs().max((y - r.y).abs()).max((h - 1.0).abs())
                        })
                        .fold(gap_dev, f64::max);
                    if dev < best.max_deviation {
                        let theta_out = if flip { PI - theta } else { theta };
                        best = Classification {
                            in_family: false,
                            theta: Some(theta_out),
                            max_deviation: dev,
                            shift,
                            reversed,
                        };
                    }
                }
            }
            if best.max_deviation <= tol && !flip {
                break;
            }
        }
    }
    best.in_family = best.max_deviation <= tol;
    best
}
