//! The five moves that carry a two-eyes configuration to an equality case
//! without decreasing `alpha + beta`.
//!
//! Every move takes a configuration, works in its normalized frame and
//! returns the moved configuration in that frame. Continuous moves stop at
//! the first event (a new tangency, a bead reaching full size, a limiting
//! angle), located by a coarse scan followed by bisection down to machine
//! precision on the event's signed residual.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::geom::{angle_at, tangency_residual, BoundaryPoint, Geodesic, Horoball, Tolerances};
use crate::isometry::MobiusMap;

use super::{check_hypotheses, raw_angles, FrameCoords, TwoEyesConfig, TwoEyesError};

/// Rotation rounds allowed in step 4 before giving up.
pub const STEP4_ROUND_CAP: usize = 12;

const SCAN_SAMPLES: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveKind {
    Drop,
    SlideEye,
    InflateTowardEye,
    Inflate,
    Align,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// The move's goal already held; nothing changed.
    AlreadySatisfied,
    /// A bead became tangent to an eye.
    Tangency,
    /// The moving bead reached full size.
    FullSized,
    /// The eyes became tangent.
    EyesTouching,
    /// Both beads full-sized.
    BothFull,
    /// Final alignment performed.
    Aligned,
}

/// One continuous piece of a move, with the angle sum at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct SubMove {
    pub label: &'static str,
    pub sum_before: f64,
    pub sum_after: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoveOutcome {
    pub kind: MoveKind,
    pub config: TwoEyesConfig,
    pub applied: bool,
    pub reason: StopReason,
    pub angle_sum_before: f64,
    pub angle_sum_after: f64,
    pub sub_moves: Vec<SubMove>,
}

/// Working copy of the normalized frame.
#[derive(Debug, Clone, Copy)]
struct Frame {
    c: f64,
    b1: Horoball,
    b2: Horoball,
}

impl Frame {
    fn of(cfg: &TwoEyesConfig) -> Frame {
        let fc = cfg.frame_coords();
        Frame {
            c: fc.c,
            b1: fc.b1,
            b2: fc.b2,
        }
    }

    fn coords(&self) -> FrameCoords {
        FrameCoords {
            c: self.c,
            b1: self.b1,
            b2: self.b2,
            flipped: false,
        }
    }

    fn sum(&self) -> f64 {
        let (a, b) = raw_angles(&self.coords());
        a + b
    }

    fn eye(&self, j: usize) -> Horoball {
        Horoball::full(if j == 1 { 0.0 } else { self.c }, 0.0).expect("finite eye")
    }

    fn eye_center(&self, j: usize) -> BoundaryPoint {
        BoundaryPoint {
            x: if j == 1 { 0.0 } else { self.c },
            y: 0.0,
        }
    }

    fn residual(&self, bead: usize, eye: usize) -> f64 {
        let b = if bead == 1 { &self.b1 } else { &self.b2 };
        tangency_residual(b, &self.eye(eye))
    }

    /// Reflection `x -> c - x`, which swaps the roles of the two sides.
    fn mirrored(&self) -> Frame {
        let m = |b: &Horoball| {
            let p = b.center();
            b.with_center(BoundaryPoint {
                x: self.c - p.x,
                y: p.y,
            })
        };
        Frame {
            c: self.c,
            b1: m(&self.b2),
            b2: m(&self.b1),
        }
    }

    fn config(&self) -> Result<TwoEyesConfig, TwoEyesError> {
        TwoEyesConfig::in_frame(self.c, self.b1, self.b2)
    }
}

fn touching(f: &Frame, bead: usize, eye: usize, tol: &Tolerances) -> bool {
    f.residual(bead, eye) <= tol.tangency_tol
}

fn outcome(
    kind: MoveKind,
    before: &Frame,
    after: &Frame,
    applied: bool,
    reason: StopReason,
    sub_moves: Vec<SubMove>,
) -> Result<MoveOutcome, TwoEyesError> {
    Ok(MoveOutcome {
        kind,
        config: after.config()?,
        applied,
        reason,
        angle_sum_before: before.sum(),
        angle_sum_after: after.sum(),
        sub_moves,
    })
}

/// First `t` in `(0, t_max]` where some event function drops to zero or
/// below. Returns the last parameter before the crossing together with the
/// index of the event that fired.
fn first_event(events: &[&dyn Fn(f64) -> f64], t_max: f64) -> Option<(f64, usize)> {
    let g = |t: f64| events.iter().map(|f| f(t)).fold(f64::INFINITY, f64::min);
    let which = |t: f64| {
        events
            .iter()
            .enumerate()
            .map(|(i, f)| (i, f(t)))
            .fold(
                (0, f64::INFINITY),
                |best, cur| if cur.1 < best.1 { cur } else { best },
            )
            .0
    };
    if g(0.0) <= 0.0 {
        return Some((0.0, which(0.0)));
    }
    let mut lo = 0.0;
    let mut hi = None;
    for k in 1..=SCAN_SAMPLES {
        let t = t_max * k as f64 / SCAN_SAMPLES as f64;
        if g(t) <= 0.0 {
            hi = Some(t);
            break;
        }
        lo = t;
    }
    let mut hi = hi?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some((lo, which(hi)))
}

/// Step 1: translate both beads straight toward the axis until one of them
/// touches an eye.
pub fn step1_drop(cfg: &TwoEyesConfig, tol: &Tolerances) -> Result<MoveOutcome, TwoEyesError> {
    let f = Frame::of(cfg);
    if touching(&f, 1, 1, tol) || touching(&f, 2, 2, tol) {
        return outcome(
            MoveKind::Drop,
            &f,
            &f,
            false,
            StopReason::AlreadySatisfied,
            vec![],
        );
    }
    let mut drop = f64::INFINITY;
    for b in [&f.b1, &f.b2] {
        let p = b.center();
        for e in [0.0, f.c] {
            let dx2 = (p.x - e).powi(2);
            if dx2 < b.height() {
                drop = drop.min(p.y - (b.height() - dx2).sqrt());
            }
        }
    }
    if !drop.is_finite() || drop < 0.0 {
        return Err(TwoEyesError::Precondition(
            "no eye lies below the beads".into(),
        ));
    }
    let m = MobiusMap::translation(0.0, -drop);
    let moved = Frame {
        c: f.c,
        b1: apply(&m, &f.b1)?,
        b2: apply(&m, &f.b2)?,
    };
    let sub = vec![SubMove {
        label: "drop",
        sum_before: f.sum(),
        sum_after: moved.sum(),
    }];
    outcome(MoveKind::Drop, &f, &moved, true, StopReason::Tangency, sub)
}

fn apply(m: &MobiusMap, b: &Horoball) -> Result<Horoball, TwoEyesError> {
    m.apply_finite(b)
        .ok_or_else(|| TwoEyesError::Precondition("a bead was sent to infinity".into()))
}

/// Largest eye position in `[1, c]` where the second eye, sliding toward the
/// first, first touches a bead.
fn slide_target(f: &Frame) -> f64 {
    let mut target: f64 = 1.0;
    for b in [&f.b1, &f.b2] {
        let p = b.center();
        let s = b.height() - p.y * p.y;
        if s > 0.0 {
            let root = p.x + s.sqrt();
            if root <= f.c * (1.0 + 1e-15) {
                target = target.max(root.min(f.c));
            }
        }
    }
    target
}

/// Step 2: slide one eye toward the other until either the eyes touch or
/// both beads touch their eyes.
pub fn step2_slide_eye(cfg: &TwoEyesConfig, tol: &Tolerances) -> Result<MoveOutcome, TwoEyesError> {
    let f = Frame::of(cfg);
    let t11 = touching(&f, 1, 1, tol);
    let t22 = touching(&f, 2, 2, tol);
    if t11 == t22 {
        if t11 {
            return outcome(
                MoveKind::SlideEye,
                &f,
                &f,
                false,
                StopReason::AlreadySatisfied,
                vec![],
            );
        }
        return Err(TwoEyesError::Precondition(
            "neither bead touches its eye".into(),
        ));
    }
    let work = if t11 { f } else { f.mirrored() };
    let target = slide_target(&work);
    if target >= work.c {
        return outcome(
            MoveKind::SlideEye,
            &f,
            &f,
            false,
            StopReason::AlreadySatisfied,
            vec![],
        );
    }
    let slid = Frame { c: target, ..work };
    let result = if t11 { slid } else { slid.mirrored() };
    let reason = if touching(&slid, 2, 2, tol) {
        StopReason::Tangency
    } else {
        StopReason::EyesTouching
    };
    let sub = vec![SubMove {
        label: "slide",
        sum_before: f.sum(),
        sum_after: result.sum(),
    }];
    outcome(MoveKind::SlideEye, &f, &result, true, reason, sub)
}

/// Direction of the outer tangent line from `C2` to `B2`.
fn p2_direction(f: &Frame) -> f64 {
    let p = f.b2.center();
    let d = (p.x - f.c).hypot(p.y);
    p.y.atan2(p.x - f.c) - (f.b2.shadow_radius() / d).min(1.0).asin()
}

/// Positive while the ray from `center(B1)` through `center(B2)` misses the
/// tangent line `P2`; crosses zero when it starts to meet it.
fn ray_misses_p2(f: &Frame) -> f64 {
    let w = p2_direction(f);
    let n = (-w.sin(), w.cos());
    let (p1, p2) = (f.b1.center(), f.b2.center());
    let s0 = n.0 * (p1.x - f.c) + n.1 * p1.y;
    let (ux, uy) = p2.minus(p1);
    let len = ux.hypot(uy);
    let rate = (n.0 * ux + n.1 * uy) / len;
    s0 * rate
}

fn rotated_about_b1(f: &Frame, theta: f64) -> Frame {
    let m = MobiusMap::vertical_rotation(f.b1.center(), -theta);
    Frame {
        b2: m
            .apply_finite(&f.b2)
            .expect("vertical rotations fix infinity"),
        ..*f
    }
}

fn extended(f: &Frame, t: f64) -> Option<Frame> {
    let (p1, p2) = (f.b1.center(), f.b2.center());
    let (ux, uy) = p2.minus(p1);
    let b = ux.hypot(uy);
    let h = (b + t).powi(2) / f.b1.height();
    let b2 = Horoball::at(p2.x + t * ux / b, p2.y + t * uy / b, h).ok()?;
    Some(Frame { b2, ..*f })
}

/// Step 3: with `B1` touching `C1` and `B2` clear of `C2`, enlarge and swing
/// `B2` (keeping it tangent to `B1`) until it touches `C2`.
pub fn step3_inflate_toward_eye(
    cfg: &TwoEyesConfig,
    tol: &Tolerances,
) -> Result<MoveOutcome, TwoEyesError> {
    let f = Frame::of(cfg);
    let t11 = touching(&f, 1, 1, tol);
    let t22 = touching(&f, 2, 2, tol);
    if t22 && t11 {
        return outcome(
            MoveKind::InflateTowardEye,
            &f,
            &f,
            false,
            StopReason::AlreadySatisfied,
            vec![],
        );
    }
    if !t11 && !t22 {
        return Err(TwoEyesError::Precondition(
            "neither bead touches its eye".into(),
        ));
    }
    let mirror = !t11;
    let work = if mirror { f.mirrored() } else { f };
    let (done, reason, subs) = inflate_toward_eye(work, tol)?;
    let result = if mirror { done.mirrored() } else { done };
    outcome(MoveKind::InflateTowardEye, &f, &result, true, reason, subs)
}

fn inflate_toward_eye(
    mut f: Frame,
    tol: &Tolerances,
) -> Result<(Frame, StopReason, Vec<SubMove>), TwoEyesError> {
    let mut subs = Vec::new();
    let mut record = |label, a: &Frame, b: &Frame| {
        subs.push(SubMove {
            label,
            sum_before: a.sum(),
            sum_after: b.sum(),
        })
    };
    let full = |f: &Frame| f.b2.is_full_sized(tol.tangency_tol) || f.b2.height() > 1.0;

    if !full(&f) {
        if ray_misses_p2(&f) > 0.0 {
            let start = f;
            let touch = |t: f64| rotated_about_b1(&start, t).residual(2, 2);
            let meets = |t: f64| ray_misses_p2(&rotated_about_b1(&start, t));
            let guard = |t: f64| rotated_about_b1(&start, t).residual(2, 1);
            let (t, which) = first_event(&[&touch, &meets, &guard], PI)
                .ok_or_else(|| TwoEyesError::NoEvent("rotation about B1 found no stop".into()))?;
            f = rotated_about_b1(&start, t);
            record("rotate", &start, &f);
            match which {
                0 => return Ok((f, StopReason::Tangency, subs)),
                2 => return Err(TwoEyesError::NoEvent("B2 reached C1 while rotating".into())),
                _ => {}
            }
        }
        let start = f;
        let t_full = start.b1.height().sqrt() - start.b1.center().dist(start.b2.center());
        let ext = |t: f64| extended(&start, t).unwrap_or(start);
        let touch = |t: f64| ext(t).residual(2, 2);
        let guard = |t: f64| ext(t).residual(2, 1);
        match first_event(&[&touch, &guard], t_full.max(0.0)) {
            Some((t, 0)) => {
                f = ext(t);
                record("extend", &start, &f);
                return Ok((f, StopReason::Tangency, subs));
            }
            Some(_) => {
                return Err(TwoEyesError::NoEvent(
                    "B2 reached C1 while extending".into(),
                ))
            }
            None => {
                f = ext(t_full.max(0.0));
                record("extend", &start, &f);
            }
        }
    }

    // B2 is full-sized: close the gap between the eyes, then swing B2 down
    // onto C2.
    if touching(&f, 2, 2, tol) {
        return Ok((f, StopReason::Tangency, subs));
    }
    let target = slide_target(&f);
    if target < f.c {
        let start = f;
        f.c = target;
        record("slide", &start, &f);
        if touching(&f, 2, 2, tol) {
            return Ok((f, StopReason::Tangency, subs));
        }
    }
    let start = f;
    let touch = |t: f64| rotated_about_b1(&start, t).residual(2, 2);
    let guard = |t: f64| rotated_about_b1(&start, t).residual(2, 1);
    match first_event(&[&touch, &guard], PI) {
        Some((t, 0)) => {
            f = rotated_about_b1(&start, t);
            record("rotate", &start, &f);
            Ok((f, StopReason::Tangency, subs))
        }
        _ => Err(TwoEyesError::NoEvent(
            "full-sized B2 does not reach C2".into(),
        )),
    }
}

/// Applies the elliptic rotation by `theta` about the geodesic joining the
/// partner bead's center to eye `which`'s center, moving bead `which`
/// (1 or 2). Bead 2 rotates about the geodesic from `center(B1)` to
/// `center(C2)`; bead 1 about the geodesic from `center(B2)` to
/// `center(C1)`.
pub fn rotate_tangent_pair(
    cfg: &TwoEyesConfig,
    which: usize,
    theta: f64,
) -> Result<TwoEyesConfig, TwoEyesError> {
    let f = Frame::of(cfg);
    rotate_side(&f, which, theta)?.config()
}

fn rotate_side(f: &Frame, which: usize, theta: f64) -> Result<Frame, TwoEyesError> {
    let (partner, eye, moving) = if which == 2 {
        (f.b1, f.eye_center(2), f.b2)
    } else {
        (f.b2, f.eye_center(1), f.b1)
    };
    let gamma = Geodesic::between(partner.center(), eye)?;
    let m = MobiusMap::elliptic_about_geodesic(&gamma, theta);
    let moved = apply(&m, &moving)?;
    Ok(if which == 2 {
        Frame { b2: moved, ..*f }
    } else {
        Frame { b1: moved, ..*f }
    })
}

/// `psi` for side 2, `phi` for side 1.
fn side_angle(f: &Frame, which: usize) -> f64 {
    if which == 2 {
        angle_at(f.b1.center(), f.b2.center(), f.eye_center(2))
    } else {
        angle_at(f.b2.center(), f.b1.center(), f.eye_center(1))
    }
}

/// Sign of the rotation angle that increases `psi` (side 2) or `phi`
/// (side 1).
pub fn increasing_direction(cfg: &TwoEyesConfig, which: usize) -> Result<f64, TwoEyesError> {
    direction(&Frame::of(cfg), which)
}

fn direction(f: &Frame, which: usize) -> Result<f64, TwoEyesError> {
    let eps = 1e-4;
    let up = side_angle(&rotate_side(f, which, eps)?, which);
    let down = side_angle(&rotate_side(f, which, -eps)?, which);
    Ok(if up >= down { 1.0 } else { -1.0 })
}

/// Step 4: with each bead tangent to its own eye, alternately rotate the
/// beads about the geodesics through the partner bead and the opposite eye
/// until both are full-sized.
pub fn step4_inflate(cfg: &TwoEyesConfig, tol: &Tolerances) -> Result<MoveOutcome, TwoEyesError> {
    let f = Frame::of(cfg);
    if !(touching(&f, 1, 1, tol) && touching(&f, 2, 2, tol)) {
        return Err(TwoEyesError::Precondition(
            "each bead must touch its own eye".into(),
        ));
    }
    let full = |f: &Frame, i: usize| {
        let b = if i == 1 { &f.b1 } else { &f.b2 };
        b.is_full_sized(tol.tangency_tol)
    };
    if full(&f, 1) && full(&f, 2) {
        return outcome(
            MoveKind::Inflate,
            &f,
            &f,
            false,
            StopReason::AlreadySatisfied,
            vec![],
        );
    }
    let mut side = if full(&f, 2) {
        1
    } else if full(&f, 1) || side_angle(&f, 2) <= side_angle(&f, 1) {
        2
    } else {
        1
    };
    let mut cur = f;
    let mut subs = Vec::new();
    for _ in 0..STEP4_ROUND_CAP {
        if full(&cur, 1) && full(&cur, 2) {
            return outcome(
                MoveKind::Inflate,
                &f,
                &cur,
                true,
                StopReason::BothFull,
                subs,
            );
        }
        if !full(&cur, side) && side_angle(&cur, side) < FRAC_PI_2 {
            let start = cur;
            let sign = direction(&start, side)?;
            let at = |t: f64| rotate_side(&start, side, sign * t).unwrap_or(start);
            let grow = |t: f64| {
                let g = at(t);
                1.0 - if side == 2 {
                    g.b2.height()
                } else {
                    g.b1.height()
                }
            };
            let right = |t: f64| FRAC_PI_2 - side_angle(&at(t), side);
            let (t, _) = first_event(&[&grow, &right], PI).ok_or_else(|| {
                TwoEyesError::NoEvent(format!("rotation of bead {side} found no stop"))
            })?;
            cur = at(t);
            let label = if side == 2 { "rotate B2" } else { "rotate B1" };
            subs.push(SubMove {
                label,
                sum_before: start.sum(),
                sum_after: cur.sum(),
            });
        }
        side = 3 - side;
    }
    if full(&cur, 1) && full(&cur, 2) {
        return outcome(
            MoveKind::Inflate,
            &f,
            &cur,
            true,
            StopReason::BothFull,
            subs,
        );
    }
    Err(TwoEyesError::RoundCap(STEP4_ROUND_CAP))
}

/// Step 5: with both beads full-sized and touching their eyes, turn `B2`
/// about the vertical line over `center(C2)` so that `B2 - C2 = B1 - C1`,
/// then slide `B2` and `C2` until the eyes touch.
pub fn step5_align(cfg: &TwoEyesConfig, tol: &Tolerances) -> Result<MoveOutcome, TwoEyesError> {
    let f = Frame::of(cfg);
    let ok = f.b1.is_full_sized(tol.tangency_tol)
        && f.b2.is_full_sized(tol.tangency_tol)
        && touching(&f, 1, 1, tol)
        && touching(&f, 2, 2, tol);
    if !ok {
        return Err(TwoEyesError::Precondition(
            "both beads must be full-sized and touch their eyes".into(),
        ));
    }
    let (p1, p2) = (f.b1.center(), f.b2.center());
    let w1 = p1.y.atan2(p1.x);
    let w2 = p2.y.atan2(p2.x - f.c);
    if (w1 - w2).abs() <= tol.angle_tol && (f.c - 1.0).abs() <= tol.tangency_tol {
        return outcome(
            MoveKind::Align,
            &f,
            &f,
            false,
            StopReason::AlreadySatisfied,
            vec![],
        );
    }
    let turn = MobiusMap::vertical_rotation(f.eye_center(2), w1 - w2);
    let turned = Frame {
        b2: apply(&turn, &f.b2)?,
        ..f
    };
    let shift = MobiusMap::translation(1.0 - f.c, 0.0);
    let aligned = Frame {
        c: 1.0,
        b2: apply(&shift, &turned.b2)?,
        ..turned
    };
    let subs = vec![
        SubMove {
            label: "turn B2",
            sum_before: f.sum(),
            sum_after: turned.sum(),
        },
        SubMove {
            label: "slide",
            sum_before: turned.sum(),
            sum_after: aligned.sum(),
        },
    ];
    outcome(
        MoveKind::Align,
        &f,
        &aligned,
        true,
        StopReason::Aligned,
        subs,
    )
}

type Step = fn(&TwoEyesConfig, &Tolerances) -> Result<MoveOutcome, TwoEyesError>;

/// Runs steps 1 through 5 and checks that the end state has
/// `alpha + beta = pi/3` within `1e-6`.
pub fn improve_to_equality(
    cfg: &TwoEyesConfig,
    tol: &Tolerances,
) -> Result<(TwoEyesConfig, Vec<MoveOutcome>), TwoEyesError> {
    let report = check_hypotheses(cfg, tol);
    if !report.ok {
        return Err(TwoEyesError::Hypotheses(report.failures.join("; ")));
    }
    let mut cur = cfg.normalized()?;
    let mut trace = Vec::new();
    let steps: [Step; 5] = [
        step1_drop,
        step2_slide_eye,
        step3_inflate_toward_eye,
        step4_inflate,
        step5_align,
    ];
    for step in steps {
        let out = step(&cur, tol)?;
        cur = out.config;
        trace.push(out);
    }
    let sum = super::raw_angle_sum(&cur);
    if (sum - PI / 3.0).abs() > 1e-6 {
        return Err(TwoEyesError::NotEquality(sum));
    }
    Ok((cur, trace))
}
