//! Numerical search for necklaces of `k` beads linking two eyes.
//!
//! A candidate is a vector holding `(x, y, h)` for each bead, followed by
//! the eye gap when it is free; the eyes sit at `(0, 0)` and `(gap, 0)`. Its
//! feasibility slack is the smallest of the normalized constraint margins,
//! with tie equalities folded in as `-|residual|`, so a configuration is a
//! valid necklace exactly when the slack is `>= 0`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::geom::{BoundaryPoint, Horoball};
use crate::necklace::{winding_number, EyePair, Necklace, NecklaceError};
use crate::optimize::{maximize_min, SlpOptions, Term};

/// Slack assigned to candidates whose tie polygon does not wind around both
/// eyes, or that have a non-positive height.
pub const WINDING_PENALTY: f64 = -10.0;

/// Smallest bead height the optimizer may use.
pub const MIN_HEIGHT: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("a necklace needs at least 3 beads, got {0}")]
    TooFewBeads(usize),
    #[error("eye gap range [{0}, {1}] is invalid; gaps must be >= 1")]
    BadGap(f64, f64),
    #[error("expected a vector of length {expected}, got {got}")]
    Length { expected: usize, got: usize },
    #[error("vector entry {0} is not finite")]
    NonFinite(usize),
    #[error("restarts must be at least 1")]
    NoRestarts,
    #[error(transparent)]
    Necklace(#[from] NecklaceError),
}

/// Distance between the eye centers: fixed, or a free variable within a
/// range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EyeGap {
    Fixed(f64),
    Free { min: f64, max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilitySpec {
    k: usize,
    gap: EyeGap,
}

impl FeasibilitySpec {
    pub fn new(k: usize, gap: EyeGap) -> Result<Self, SearchError> {
        if k < 3 {
            return Err(SearchError::TooFewBeads(k));
        }
        let (lo, hi) = match gap {
            EyeGap::Fixed(g) => (g, g),
            EyeGap::Free { min, max } => (min, max),
        };
        if !(lo >= 1.0 && hi >= lo && hi.is_finite()) {
            return Err(SearchError::BadGap(lo, hi));
        }
        Ok(Self { k, gap })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn gap(&self) -> EyeGap {
        self.gap
    }

    pub fn dim(&self) -> usize {
        3 * self.k + usize::from(matches!(self.gap, EyeGap::Free { .. }))
    }

    fn gap_of(&self, x: &[f64]) -> f64 {
        match self.gap {
            EyeGap::Fixed(g) => g,
            EyeGap::Free { .. } => x[3 * self.k],
        }
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        let mut b = Vec::with_capacity(self.dim());
        for _ in 0..self.k {
            b.extend([(-10.0, 10.0), (-10.0, 10.0), (MIN_HEIGHT, 1.0)]);
        }
        if let EyeGap::Free { min, max } = self.gap {
            b.push((min, max));
        }
        b
    }

    fn check(&self, x: &[f64]) -> Result<(), SearchError> {
        if x.len() != self.dim() {
            return Err(SearchError::Length {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(SearchError::NonFinite(i));
        }
        Ok(())
    }

    /// Encodes a necklace, expressed in its eye frame. With a fixed gap the
    /// eyes' own gap is ignored.
    pub fn vectorize(&self, n: &Necklace, eyes: &EyePair) -> Result<Vec<f64>, SearchError> {
        if n.len() != self.k {
            return Err(SearchError::Length {
                expected: self.k,
                got: n.len(),
            });
        }
        let frame = eyes.frame();
        let mut x = Vec::with_capacity(self.dim());
        for b in n.beads() {
            let p = frame.to_frame(b.center());
            x.extend([p.x, p.y, b.height()]);
        }
        if let EyeGap::Free { .. } = self.gap {
            x.push(eyes.gap());
        }
        Ok(x)
    }

    /// Decodes a vector into a necklace and its eyes.
    pub fn configuration(&self, x: &[f64]) -> Result<(Necklace, EyePair), SearchError> {
        self.check(x)?;
        let beads = x[..3 * self.k]
            .chunks(3)
            .map(|c| Horoball::at(c[0], c[1], c[2]))
            .collect::<Result<Vec<_>, _>>()
            .map_err(NecklaceError::from)?;
        let eyes = EyePair::on_axis(self.gap_of(x))?;
        Ok((Necklace::new(beads)?, eyes))
    }

    /// All constraint margins with their gradients.
    fn terms(&self, x: &[f64]) -> Vec<Term> {
        let k = self.k;
        let gap = self.gap_of(x);
        let gap_index = matches!(self.gap, EyeGap::Free { .. }).then_some(3 * k);
        let bead = |i: usize| (x[3 * i], x[3 * i + 1], x[3 * i + 2]);
        let mut out = Vec::with_capacity(k * k + 4 * k);

        for i in 0..k {
            for j in i + 1..k {
                let (xi, yi, hi) = bead(i);
                let (xj, yj, hj) = bead(j);
                let (dx, dy) = (xi - xj, yi - yj);
                let d2 = dx * dx + dy * dy;
                let hh = hi * hj;
                let r = d2 / hh - 1.0;
                let grad = vec![
                    (3 * i, 2.0 * dx / hh),
                    (3 * i + 1, 2.0 * dy / hh),
                    (3 * i + 2, -d2 / (hi * hh)),
                    (3 * j, -2.0 * dx / hh),
                    (3 * j + 1, -2.0 * dy / hh),
                    (3 * j + 2, -d2 / (hj * hh)),
                ];
                let term = Term::new(r, grad);
                if j == i + 1 || (i == 0 && j == k - 1) {
                    out.push(term.negated());
                }
                out.push(term);
            }
        }
        for i in 0..k {
            let (xi, yi, hi) = bead(i);
            for (e, moving) in [(0.0, None), (gap, gap_index)] {
                let dx = xi - e;
                let d2 = dx * dx + yi * yi;
                let mut grad = vec![
                    (3 * i, 2.0 * dx / hi),
                    (3 * i + 1, 2.0 * yi / hi),
                    (3 * i + 2, -d2 / (hi * hi)),
                ];
                if let Some(g) = moving {
                    grad.push((g, -2.0 * dx / hi));
                }
                out.push(Term::new(d2 / hi - 1.0, grad));
            }
            out.push(Term::new(1.0 - hi, vec![(3 * i + 2, -1.0)]));
        }
        out
    }

    fn winds(&self, x: &[f64]) -> bool {
        let pts: Vec<BoundaryPoint> = x[..3 * self.k]
            .chunks(3)
            .map(|c| BoundaryPoint { x: c[0], y: c[1] })
            .collect();
        [0.0, self.gap_of(x)].iter().all(
            |&e| matches!(winding_number(&pts, BoundaryPoint { x: e, y: 0.0 }), Ok(w) if w != 0),
        )
    }

    fn slack_unchecked(&self, x: &[f64]) -> f64 {
        if x[..3 * self.k].chunks(3).any(|c| c[2] <= 0.0) || !self.winds(x) {
            return WINDING_PENALTY;
        }
        self.terms(x)
            .iter()
            .map(|t| t.value)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Minimum constraint margin of a candidate vector.
pub fn feasibility_slack(spec: &FeasibilitySpec, x: &[f64]) -> Result<f64, SearchError> {
    spec.check(x)?;
    Ok(spec.slack_unchecked(x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub seed: u64,
    pub restarts: usize,
    pub slp: SlpOptions,
}

impl SearchOptions {
    pub fn new(seed: u64, restarts: usize) -> Self {
        Self {
            seed,
            restarts,
            slp: SlpOptions {
                initial_radius: 0.05,
                max_radius: 0.3,
                max_iterations: 1500,
                ..SlpOptions::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best_slack: f64,
    pub best_vector: Vec<f64>,
    pub best_config: (Necklace, EyePair),
    /// Restart that produced the best configuration.
    pub best_restart: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Final slack of every restart, in restart order.
    pub trace: Vec<f64>,
}

/// A random starting vector: beads spread in angular order over an annulus
/// around the eye midpoint, heights in `[0.3, 1]`. Redrawn until the tie
/// polygon winds around both eyes.
pub fn initial_point<R: Rng + ?Sized>(spec: &FeasibilitySpec, rng: &mut R) -> Vec<f64> {
    let k = spec.k;
    loop {
        let gap = match spec.gap {
            EyeGap::Fixed(g) => g,
            EyeGap::Free { min, max } => {
                if max > min {
                    rng.random_range(min..=max)
                } else {
                    min
                }
            }
        };
        let mid = gap / 2.0;
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        let mut x = Vec::with_capacity(spec.dim());
        for i in 0..k {
            let a =
                phase + std::f64::consts::TAU * (i as f64 + rng.random_range(-0.3..0.3)) / k as f64;
            let r = mid + rng.random_range(0.3..1.1);
            x.extend([mid + r * a.cos(), r * a.sin(), rng.random_range(0.3..=1.0)]);
        }
        if let EyeGap::Free { .. } = spec.gap {
            x.push(gap);
        }
        if spec.winds(&x) {
            return x;
        }
    }
}

/// Runs `restarts` independent local maximizations of the slack. Restart
/// `i` uses a ChaCha stream `i` keyed by `seed`, so results do not depend on
/// scheduling; ties in the best slack go to the lowest restart index.
pub fn search_necklace(
    spec: &FeasibilitySpec,
    opts: &SearchOptions,
) -> Result<SearchResult, SearchError> {
    if opts.restarts == 0 {
        return Err(SearchError::NoRestarts);
    }
    let bounds = spec.bounds();
    let runs: Vec<(f64, Vec<f64>)> = (0..opts.restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(i as u64);
            let x0 = initial_point(spec, &mut rng);
            let out = maximize_min(
                &x0,
                &bounds,
                |x| Some(spec.terms(x)),
                |x| spec.slack_unchecked(x),
                &opts.slp,
            );
            (out.merit, out.x)
        })
        .collect();
    let (best_restart, (best_slack, best_vector)) = runs
        .iter()
        .enumerate()
        .fold(None::<(usize, &(f64, Vec<f64>))>, |best, cur| match best {
            Some(b) if b.1 .0 >= cur.1 .0 => Some(b),
            _ => Some(cur),
        })
        .map(|(i, r)| (i, r.clone()))
        .expect("at least one restart");
    Ok(SearchResult {
        best_slack,
        best_config: spec.configuration(&best_vector)?,
        best_vector,
        best_restart,
        restarts: opts.restarts,
        seed: opts.seed,
        trace: runs.iter().map(|r| r.0).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{generate_family, FamilyParam};
    use crate::optimize::numeric_gradient;
    use std::f64::consts::FRAC_PI_2;

    fn spec8() -> FeasibilitySpec {
        FeasibilitySpec::new(8, EyeGap::Fixed(1.0)).unwrap()
    }

    #[test]
    fn family_members_are_feasible() {
        let (n, eyes) = generate_family(FamilyParam::new(FRAC_PI_2).unwrap());
        let x = spec8().vectorize(&n, &eyes).unwrap();
        assert!(feasibility_slack(&spec8(), &x).unwrap() >= -1e-9);
        let (n2, _) = spec8().configuration(&x).unwrap();
        assert_eq!(n2.len(), 8);
        for (a, b) in n.beads().iter().zip(n2.beads()) {
            assert!(a.center().dist(b.center()) < 1e-15);
        }
    }

    #[test]
    fn pulled_bead_reports_its_tie_residual() {
        let (n, eyes) = generate_family(FamilyParam::new(FRAC_PI_2).unwrap());
        let mut x = spec8().vectorize(&n, &eyes).unwrap();
        // push bead 2 (at angle pi/2 + 2pi/3 around C1) outward by 0.1
        let a = FRAC_PI_2 + 2.0 * std::f64::consts::FRAC_PI_3;
        x[6] += 0.1 * a.cos();
        x[7] += 0.1 * a.sin();
        let s = feasibility_slack(&spec8(), &x).unwrap();
        let p = BoundaryPoint { x: x[6], y: x[7] };
        let q = BoundaryPoint { x: x[3], y: x[4] };
        let r = p.dist_sq(q) - 1.0;
        assert!(s < 0.0);
        assert!((s + r).abs() < 1e-12, "{s} vs {r}");
    }

    #[test]
    fn far_ring_winds_but_is_not_tied() {
        let mut x = Vec::new();
        for i in 0..8 {
            let a = std::f64::consts::TAU * i as f64 / 8.0;
            x.extend([0.5 + 10.0 * a.cos(), 10.0 * a.sin(), 1.0]);
        }
        assert!(spec8().winds(&x));
        assert!(feasibility_slack(&spec8(), &x).unwrap() < -1.0);
    }

    #[test]
    fn malformed_vectors_are_errors() {
        assert!(matches!(
            feasibility_slack(&spec8(), &[0.0; 5]),
            Err(SearchError::Length { .. })
        ));
        let mut x = vec![1.0; 24];
        x[3] = f64::NAN;
        assert_eq!(
            feasibility_slack(&spec8(), &x),
            Err(SearchError::NonFinite(3))
        );
        assert!(FeasibilitySpec::new(2, EyeGap::Fixed(1.0)).is_err());
        assert!(FeasibilitySpec::new(8, EyeGap::Fixed(0.5)).is_err());
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        let spec = FeasibilitySpec::new(5, EyeGap::Free { min: 1.0, max: 2.0 }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = initial_point(&spec, &mut rng);
        let terms = spec.terms(&x);
        for (j, t) in terms.iter().enumerate() {
            let fd = numeric_gradient(|w| spec.terms(w)[j].value, &x, 1e-6);
            let mut dense = vec![0.0; x.len()];
            for &(i, g) in &t.grad {
                dense[i] += g;
            }
            for (i, g) in fd {
                assert!(
                    (dense[i] - g).abs() < 1e-5 * (1.0 + g.abs()),
                    "term {j} var {i}: {} vs {g}",
                    dense[i]
                );
            }
        }
    }

    #[test]
    fn search_is_deterministic() {
        let spec = FeasibilitySpec::new(6, EyeGap::Fixed(1.0)).unwrap();
        let opts = SearchOptions::new(5, 3);
        let a = search_necklace(&spec, &opts).unwrap();
        let b = search_necklace(&spec, &opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trace.len(), 3);
        assert_eq!(
            a.best_slack,
            a.trace.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        );
    }
}
