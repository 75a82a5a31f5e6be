//! Necklaces: cyclic chains of sequentially tangent horoballs, and the pair
//! of full-sized "eyes" a necklace may link around.

use std::f64::consts::PI;

use thiserror::Error;

use crate::geom::{
    interiors_disjoint, meets_vertical_plane, tangency_residual, BoundaryPoint, GeomError,
    Horoball, Tolerances, VerticalPlane,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NecklaceError {
    #[error("a necklace needs at least 3 beads, got {0}")]
    TooFewBeads(usize),
    #[error("eye {index} has height {height}, expected a full-sized horoball")]
    EyeNotFullSized { index: usize, height: f64 },
    #[error("the eyes overlap (normalized residual {0})")]
    EyesOverlap(f64),
    #[error("point lies on the polyline (distance {0})")]
    PointOnPolyline(f64),
    #[error("necklace fails validation: {0}")]
    Invalid(String),
    #[error("bead {bead} overlaps eye {eye} (normalized residual {slack})")]
    OverlapsEye { bead: usize, eye: usize, slack: f64 },
    #[error("fewer than two beads meet the vertical plane over eye {0}")]
    MissingCrossing(usize),
    #[error("crossing beads are not distinct")]
    CrossingNotDistinct,
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// A cyclically ordered chain of horoballs; bead `i` is tied to bead
/// `i + 1 mod k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Necklace {
    beads: Vec<Horoball>,
}

impl Necklace {
    pub fn new(beads: Vec<Horoball>) -> Result<Self, NecklaceError> {
        if beads.len() < 3 {
            return Err(NecklaceError::TooFewBeads(beads.len()));
        }
        Ok(Self { beads })
    }

    pub fn beads(&self) -> &[Horoball] {
        &self.beads
    }

    pub fn len(&self) -> usize {
        self.beads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beads.is_empty()
    }

    pub fn bead(&self, i: usize) -> &Horoball {
        &self.beads[i % self.beads.len()]
    }

    /// Projected bead centers, i.e. the polygon traced by the ties.
    pub fn center_polygon(&self) -> Vec<BoundaryPoint> {
        self.beads.iter().map(Horoball::center).collect()
    }

    /// Applies `f` to every bead.
    pub fn map_beads(&self, f: impl Fn(&Horoball) -> Horoball) -> Necklace {
        Necklace {
            beads: self.beads.iter().map(f).collect(),
        }
    }

    pub fn are_adjacent(&self, i: usize, j: usize) -> bool {
        let k = self.len();
        (i + 1) % k == j || (j + 1) % k == i
    }
}

/// Orthonormal frame with the first eye at the origin and the second on the
/// positive x-axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EyeFrame {
    origin: BoundaryPoint,
    axis: (f64, f64),
}

impl EyeFrame {
    pub fn to_frame(&self, p: BoundaryPoint) -> BoundaryPoint {
        let (dx, dy) = p.minus(self.origin);
        BoundaryPoint {
            x: self.axis.0 * dx + self.axis.1 * dy,
            y: self.axis.0 * dy - self.axis.1 * dx,
        }
    }

    pub fn from_frame(&self, p: BoundaryPoint) -> BoundaryPoint {
        BoundaryPoint {
            x: self.origin.x + self.axis.0 * p.x - self.axis.1 * p.y,
            y: self.origin.y + self.axis.1 * p.x + self.axis.0 * p.y,
        }
    }

    pub fn ball_to_frame(&self, b: &Horoball) -> Horoball {
        b.with_center(self.to_frame(b.center()))
    }

    pub fn ball_from_frame(&self, b: &Horoball) -> Horoball {
        b.with_center(self.from_frame(b.center()))
    }
}

/// Two full-sized horoballs with disjoint interiors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EyePair {
    c1: Horoball,
    c2: Horoball,
}

impl EyePair {
    pub fn new(c1: Horoball, c2: Horoball, tol: &Tolerances) -> Result<Self, NecklaceError> {
        for (index, eye) in [c1, c2].iter().enumerate() {
            if !eye.is_full_sized(tol.tangency_tol) {
                return Err(NecklaceError::EyeNotFullSized {
                    index: index + 1,
                    height: eye.height(),
                });
            }
        }
        if !interiors_disjoint(&c1, &c2, tol.disjointness_tol) {
            return Err(NecklaceError::EyesOverlap(tangency_residual(&c1, &c2)));
        }
        Ok(Self { c1, c2 })
    }

    /// Eyes at `(0, 0)` and `(gap, 0)`.
    pub fn on_axis(gap: f64) -> Result<Self, NecklaceError> {
        Self::new(
            Horoball::full(0.0, 0.0)?,
            Horoball::full(gap, 0.0)?,
            &Tolerances::default(),
        )
    }

    pub fn c1(&self) -> &Horoball {
        &self.c1
    }

    pub fn c2(&self) -> &Horoball {
        &self.c2
    }

    pub fn eye(&self, i: usize) -> &Horoball {
        if i == 1 {
            &self.c1
        } else {
            &self.c2
        }
    }

    pub fn swapped(&self) -> EyePair {
        EyePair {
            c1: self.c2,
            c2: self.c1,
        }
    }

    /// Euclidean distance between the eye centers.
    pub fn gap(&self) -> f64 {
        self.c1.center().dist(self.c2.center())
    }

    pub fn frame(&self) -> EyeFrame {
        let (dx, dy) = self.c2.center().minus(self.c1.center());
        let n = dx.hypot(dy);
        EyeFrame {
            origin: self.c1.center(),
            axis: (dx / n, dy / n),
        }
    }

    /// The vertical plane over the line through both eye centers.
    pub fn axis_plane(&self) -> VerticalPlane {
        let f = self.frame();
        VerticalPlane::new(self.c1.center(), f.axis).expect("eye centers are distinct")
    }

    /// The vertical plane over the line through eye `i`'s center,
    /// perpendicular to the axis.
    pub fn cross_plane(&self, i: usize) -> VerticalPlane {
        let f = self.frame();
        VerticalPlane::new(self.eye(i).center(), (-f.axis.1, f.axis.0))
            .expect("eye centers are distinct")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EyeReport {
    /// Winding number of the tie polygon around each eye center; `None` when
    /// the center lies on the polygon.
    pub winding: [Option<i64>; 2],
    /// Minimum normalized bead-to-eye residual.
    pub min_eye_slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub ok: bool,
    /// Absolute normalized tangency residual of each tie `i -> i+1`.
    pub tie_residuals: Vec<f64>,
    pub max_tie_residual: f64,
    /// Minimum normalized residual over all bead pairs (negative = overlap).
    pub min_pair_slack: f64,
    /// `max(h) - 1`; positive when some bead is larger than full-sized.
    pub max_height_excess: f64,
    pub eyes: Option<EyeReport>,
}

impl ValidationReport {
    pub fn summary(&self) -> String {
        let mut parts = vec![
            format!("max tie residual {:e}", self.max_tie_residual),
            format!("min pair slack {:e}", self.min_pair_slack),
            format!("max height excess {:e}", self.max_height_excess),
        ];
        if let Some(e) = &self.eyes {
            parts.push(format!("min eye slack {:e}", e.min_eye_slack));
        }
        parts.join(", ")
    }
}

/// Checks the chain structure of `n`: consecutive tangency, pairwise
/// disjoint interiors and heights at most full-sized.
pub fn validate_necklace(n: &Necklace, tol: &Tolerances) -> ValidationReport {
    validate_impl(n, None, tol)
}

/// As [`validate_necklace`], additionally reporting winding numbers around
/// and disjointness from the eyes.
pub fn validate_with_eyes(n: &Necklace, eyes: &EyePair, tol: &Tolerances) -> ValidationReport {
    validate_impl(n, Some(eyes), tol)
}

fn validate_impl(n: &Necklace, eyes: Option<&EyePair>, tol: &Tolerances) -> ValidationReport {
    let beads = n.beads();
    let k = beads.len();
    let tie_residuals: Vec<f64> = (0..k)
        .map(|i| tangency_residual(&beads[i], &beads[(i + 1) % k]).abs())
        .collect();
    let max_tie_residual = tie_residuals.iter().cloned().fold(0.0, f64::max);
    let mut min_pair_slack = f64::INFINITY;
    for i in 0..k {
        for j in i + 1..k {
            min_pair_slack = min_pair_slack.min(tangency_residual(&beads[i], &beads[j]));
        }
    }
    let max_height_excess = beads
        .iter()
        .map(|b| b.height() - 1.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut ok = max_tie_residual <= tol.tangency_tol
        && min_pair_slack >= -tol.disjointness_tol
        && max_height_excess <= tol.tangency_tol;

    let eyes = eyes.map(|pair| {
        let polygon = n.center_polygon();
        let winding = [1, 2].map(|i| winding_number(&polygon, pair.eye(i).center()).ok());
        let min_eye_slack = beads
            .iter()
            .flat_map(|b| {
                [
                    tangency_residual(b, pair.c1()),
                    tangency_residual(b, pair.c2()),
                ]
            })
            .fold(f64::INFINITY, f64::min);
        ok &= min_eye_slack >= -tol.disjointness_tol;
        EyeReport {
            winding,
            min_eye_slack,
        }
    });

    ValidationReport {
        ok,
        tie_residuals,
        max_tie_residual,
        min_pair_slack,
        max_height_excess,
        eyes,
    }
}

const ON_EDGE_EPS: f64 = 1e-12;

fn point_segment_distance(p: BoundaryPoint, a: BoundaryPoint, b: BoundaryPoint) -> f64 {
    let (abx, aby) = b.minus(a);
    let (apx, apy) = p.minus(a);
    let len2 = abx * abx + aby * aby;
    let t = if len2 > 0.0 {
        ((apx * abx + apy * aby) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    p.dist(a.offset(t * abx, t * aby))
}

/// Signed number of turns the closed polyline makes around `p`, from the
/// sum of signed angles subtended by its edges.
pub fn winding_number(points: &[BoundaryPoint], p: BoundaryPoint) -> Result<i64, NecklaceError> {
    let k = points.len();
    let mut total = 0.0;
    for i in 0..k {
        let a = points[i];
        let b = points[(i + 1) % k];
        let d = point_segment_distance(p, a, b);
        if d <= ON_EDGE_EPS {
            return Err(NecklaceError::PointOnPolyline(d));
        }
        let (ax, ay) = a.minus(p);
        let (bx, by) = b.minus(p);
        total += (ax * by - ay * bx).atan2(ax * bx + ay * by);
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

/// Whether the necklace links around both eyes: the tie polygon has the same
/// nonzero winding number about both eye centers.
///
/// A necklace failing validation, or overlapping an eye, is an error rather
/// than a `false`.
pub fn encircles(n: &Necklace, eyes: &EyePair, tol: &Tolerances) -> Result<bool, NecklaceError> {
    let report = validate_necklace(n, tol);
    if !report.ok {
        return Err(NecklaceError::Invalid(report.summary()));
    }
    for (bead, b) in n.beads().iter().enumerate() {
        for eye in [1, 2] {
            let slack = tangency_residual(b, eyes.eye(eye));
            if slack < -tol.disjointness_tol {
                return Err(NecklaceError::OverlapsEye { bead, eye, slack });
            }
        }
    }
    let polygon = n.center_polygon();
    let w1 = winding_number(&polygon, eyes.c1().center())?;
    let w2 = winding_number(&polygon, eyes.c2().center())?;
    Ok(w1 != 0 && w1 == w2)
}

/// Indices of the beads crossing the vertical planes over the two eyes,
/// above (`upper`) and below (`lower`) the eye axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrossingBeads {
    pub upper1: usize,
    pub lower1: usize,
    pub upper2: usize,
    pub lower2: usize,
}

impl CrossingBeads {
    fn all(&self) -> [usize; 4] {
        [self.upper1, self.lower1, self.upper2, self.lower2]
    }
}

const TIE_EPS: f64 = 1e-12;

/// Picks the extreme bead among `candidates` (frame coordinates) by
/// `better(x_new, x_best)`, breaking near-ties by larger `|y|`.
fn pick_extreme(candidates: &[(usize, BoundaryPoint)], prefer_smaller_x: bool) -> Option<usize> {
    let mut best: Option<(usize, BoundaryPoint)> = None;
    for &(i, p) in candidates {
        best = match best {
            None => Some((i, p)),
            Some((j, q)) => {
                let dx = if prefer_smaller_x {
                    q.x - p.x
                } else {
                    p.x - q.x
                };
                if dx > TIE_EPS || (dx.abs() <= TIE_EPS && p.y.abs() > q.y.abs()) {
                    Some((i, p))
                } else {
                    Some((j, q))
                }
            }
        };
    }
    best.map(|(i, _)| i)
}

/// For each vertical plane over an eye, the beads meeting it whose centers
/// lie above and below the axis. Beads for the first eye take the smallest
/// x-coordinate in the eye frame, beads for the second eye the largest.
///
/// Intended for necklaces that encircle the eyes.
pub fn crossing_beads(
    n: &Necklace,
    eyes: &EyePair,
    tol: &Tolerances,
) -> Result<CrossingBeads, NecklaceError> {
    let frame = eyes.frame();
    let mut picks = [[0usize; 2]; 2];
    for (slot, eye) in [1usize, 2].into_iter().enumerate() {
        let plane = eyes.cross_plane(eye);
        let meeting: Vec<(usize, BoundaryPoint)> = n
            .beads()
            .iter()
            .enumerate()
            .filter(|(_, b)| meets_vertical_plane(b, &plane, tol.tangency_tol).meets())
            .map(|(i, b)| (i, frame.to_frame(b.center())))
            .collect();
        let upper: Vec<_> = meeting.iter().copied().filter(|(_, p)| p.y > 0.0).collect();
        let lower: Vec<_> = meeting.iter().copied().filter(|(_, p)| p.y < 0.0).collect();
        let prefer_smaller = eye == 1;
        match (
            pick_extreme(&upper, prefer_smaller),
            pick_extreme(&lower, prefer_smaller),
        ) {
            (Some(u), Some(l)) => picks[slot] = [u, l],
            _ => return Err(NecklaceError::MissingCrossing(eye)),
        }
    }
    let out = CrossingBeads {
        upper1: picks[0][0],
        lower1: picks[0][1],
        upper2: picks[1][0],
        lower2: picks[1][1],
    };
    let all = out.all();
    for i in 0..4 {
        for j in i + 1..4 {
            if all[i] == all[j] {
                return Err(NecklaceError::CrossingNotDistinct);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{generate_family, FamilyParam};
    use std::f64::consts::FRAC_PI_3;

    fn pt(x: f64, y: f64) -> BoundaryPoint {
        BoundaryPoint { x, y }
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn hexagonal() -> (Necklace, EyePair) {
        generate_family(FamilyParam::new(FRAC_PI_3).unwrap())
    }

    #[test]
    fn rejects_short_necklaces() {
        let b = Horoball::full(0.0, 0.0).unwrap();
        assert_eq!(
            Necklace::new(vec![b, b]),
            Err(NecklaceError::TooFewBeads(2))
        );
    }

    #[test]
    fn hexagonal_configuration_validates() {
        let (n, eyes) = hexagonal();
        let report = validate_with_eyes(&n, &eyes, &tol());
        assert!(report.ok, "{}", report.summary());
        assert!(report.max_tie_residual <= 1e-12);
        assert_eq!(report.eyes.unwrap().winding, [Some(1), Some(1)]);
    }

    #[test]
    fn swapped_beads_break_the_chain() {
        let (n, _) = hexagonal();
        let mut beads = n.beads().to_vec();
        beads.swap(1, 5);
        let report = validate_necklace(&Necklace::new(beads).unwrap(), &tol());
        assert!(!report.ok);
        assert!(report.max_tie_residual > 0.5);
    }

    #[test]
    fn oversized_bead_fails_height_check() {
        let (n, _) = hexagonal();
        let mut beads = n.beads().to_vec();
        beads[3] = Horoball::new(beads[3].center(), 1.1).unwrap();
        let report = validate_necklace(&Necklace::new(beads).unwrap(), &tol());
        assert!(!report.ok);
        assert!((report.max_height_excess - 0.1).abs() < 1e-12);
    }

    #[test]
    fn winding_examples() {
        let square = [pt(-1.0, -1.0), pt(1.0, -1.0), pt(1.0, 1.0), pt(-1.0, 1.0)];
        assert_eq!(winding_number(&square, pt(0.0, 0.0)).unwrap(), 1);
        let reversed: Vec<_> = square.iter().rev().copied().collect();
        assert_eq!(winding_number(&reversed, pt(0.0, 0.0)).unwrap(), -1);
        let triangle = [pt(2.0, 0.0), pt(3.0, 0.0), pt(2.5, 1.0)];
        assert_eq!(winding_number(&triangle, pt(0.0, 0.0)).unwrap(), 0);
        assert!(matches!(
            winding_number(&square, pt(1.0, 0.0)),
            Err(NecklaceError::PointOnPolyline(_))
        ));

        let (n, _) = hexagonal();
        let poly = n.center_polygon();
        assert_eq!(winding_number(&poly, pt(0.0, 0.0)).unwrap(), 1);
        assert_eq!(winding_number(&poly, pt(1.0, 0.0)).unwrap(), 1);
    }

    #[test]
    fn encircling_examples() {
        let (n, eyes) = hexagonal();
        assert!(encircles(&n, &eyes, &tol()).unwrap());

        // six full beads around one eye, the other eye far away
        let ring: Vec<_> = (0..6)
            .map(|i| {
                let a = f64::from(i) * FRAC_PI_3;
                Horoball::full(a.cos(), a.sin()).unwrap()
            })
            .collect();
        let far = EyePair::on_axis(5.0).unwrap();
        assert!(!encircles(&Necklace::new(ring.clone()).unwrap(), &far, &tol()).unwrap());

        // same ring shifted into x > 2
        let shifted: Vec<_> = ring.iter().map(|b| b.translated(4.0, 0.0)).collect();
        let near = EyePair::on_axis(1.0).unwrap();
        assert!(!encircles(&Necklace::new(shifted).unwrap(), &near, &tol()).unwrap());

        // the ring around one eye overlaps the other eye when they touch
        assert!(matches!(
            encircles(&Necklace::new(ring).unwrap(), &near, &tol()),
            Err(NecklaceError::OverlapsEye { .. })
        ));
    }

    #[test]
    fn crossing_beads_on_hexagonal_configuration() {
        let (n, eyes) = hexagonal();
        let cb = crossing_beads(&n, &eyes, &tol()).unwrap();
        let s = 3f64.sqrt() / 2.0;
        let at = |i: usize| n.bead(i).center();
        for (i, (x, y)) in [
            (cb.upper1, (-0.5, s)),
            (cb.lower1, (-0.5, -s)),
            (cb.upper2, (1.5, s)),
            (cb.lower2, (1.5, -s)),
        ] {
            assert!(at(i).dist(pt(x, y)) < 1e-12, "bead {i} at {}", at(i));
        }

        // reflecting across the axis swaps upper and lower picks
        let flip = |b: &Horoball| b.with_center(pt(b.center().x, -b.center().y));
        let flipped = n.map_beads(flip);
        let fb = crossing_beads(&flipped, &eyes, &tol()).unwrap();
        assert_eq!(
            (fb.upper1, fb.lower1, fb.upper2, fb.lower2),
            (cb.lower1, cb.upper1, cb.lower2, cb.upper2)
        );
    }

    #[test]
    fn crossing_beads_interior_member_are_strip_top_neighbours() {
        let (n, eyes) = generate_family(FamilyParam::new(1.3).unwrap());
        let cb = crossing_beads(&n, &eyes, &tol()).unwrap();
        // P0 and Q6 sit across the top of the strip, P3 and Q3 across the bottom
        assert_eq!((cb.upper1, cb.upper2, cb.lower1, cb.lower2), (0, 7, 3, 4));
    }

    #[test]
    fn frame_round_trip() {
        let eyes = EyePair::new(
            Horoball::full(1.0, 2.0).unwrap(),
            Horoball::full(1.6, 3.3).unwrap(),
            &tol(),
        )
        .unwrap();
        let f = eyes.frame();
        let p = pt(-0.7, 4.2);
        assert!(f.from_frame(f.to_frame(p)).dist(p) < 1e-14);
        let c2 = f.to_frame(eyes.c2().center());
        assert!((c2.x - eyes.gap()).abs() < 1e-14 && c2.y.abs() < 1e-14);
    }

    #[test]
    fn eye_pair_validation() {
        let t = tol();
        assert!(matches!(
            EyePair::new(
                Horoball::full(0.0, 0.0).unwrap(),
                Horoball::at(2.0, 0.0, 0.5).unwrap(),
                &t
            ),
            Err(NecklaceError::EyeNotFullSized { index: 2, .. })
        ));
        assert!(matches!(
            EyePair::on_axis(0.9),
            Err(NecklaceError::EyesOverlap(_))
        ));
    }
}
