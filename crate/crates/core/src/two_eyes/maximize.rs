//! Numerical search for the largest `alpha + beta` over configurations that
//! satisfy the hypotheses.
//!
//! The configuration is parametrized in the normalized frame by
//! `(c, h1, h2, x1, y1, x2, y2)`. Constraints enter through an exact penalty:
//! the optimizer maximizes `min(f, f + K g_1, ..., f + K g_m)` where `f` is
//! the angle sum and `g_j >= 0` are the hypotheses, which equals `f` on the
//! feasible set and drops below it elsewhere.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::geom::{Horoball, Tolerances};
use crate::optimize::{maximize_min, numeric_gradient, SlpOptions, Term};

use super::sample::{random_config, SampleOptions};
use super::{check_hypotheses, raw_angles, FrameCoords, TwoEyesConfig};

const PENALTY: f64 = 100.0;
const MIN_HEIGHT: f64 = 0.05;

const BOUNDS: [(f64, f64); 7] = [
    (1.0, 2.0),
    (MIN_HEIGHT, 1.0),
    (MIN_HEIGHT, 1.0),
    (-0.5, 0.5),
    (0.0, 3.0),
    (0.5, 2.5),
    (0.0, 3.0),
];

#[derive(Debug, Clone, PartialEq)]
pub struct MaximizeRun {
    pub start: TwoEyesConfig,
    pub config: TwoEyesConfig,
    /// Angle sum of the final configuration.
    pub sum: f64,
    /// Whether the final configuration passes the hypothesis check.
    pub feasible: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaximizeResult {
    /// Largest angle sum among feasible final configurations.
    pub best_sum: f64,
    pub best: Option<TwoEyesConfig>,
    pub runs: Vec<MaximizeRun>,
}

fn unpack(v: &[f64]) -> Option<FrameCoords> {
    Some(FrameCoords {
        c: v[0],
        b1: Horoball::at(v[3], v[4], v[1]).ok()?,
        b2: Horoball::at(v[5], v[6], v[2]).ok()?,
        flipped: false,
    })
}

fn pack(cfg: &TwoEyesConfig) -> Vec<f64> {
    let fc = cfg.frame_coords();
    let (p1, p2) = (fc.b1.center(), fc.b2.center());
    vec![fc.c, fc.b1.height(), fc.b2.height(), p1.x, p1.y, p2.x, p2.y]
}

fn objective(v: &[f64]) -> f64 {
    let (c, h1, h2, x1, y1, x2, y2) = (v[0], v[1], v[2], v[3], v[4], v[5], v[6]);
    let d11 = x1.hypot(y1);
    let d22 = (x2 - c).hypot(y2);
    let a = y1.atan2(x1) + (0.5 * h1 / d11).min(1.0).asin();
    let b = -y2.atan2(x2 - c) + (0.5 * h2 / d22).min(1.0).asin();
    a + b
}

/// Hypothesis residuals, each required to be `>= 0`; the bead tangency
/// appears twice with opposite signs.
fn constraints(v: &[f64]) -> [f64; 10] {
    let (c, h1, h2, x1, y1, x2, y2) = (v[0], v[1], v[2], v[3], v[4], v[5], v[6]);
    let tie = ((x1 - x2).powi(2) + (y1 - y2).powi(2)) / (h1 * h2) - 1.0;
    let eye = |x: f64, y: f64, h: f64, e: f64| ((x - e).powi(2) + y * y) / h - 1.0;
    [
        tie,
        -tie,
        eye(x1, y1, h1, 0.0),
        eye(x1, y1, h1, c),
        eye(x2, y2, h2, 0.0),
        eye(x2, y2, h2, c),
        h1 / 2.0 - x1,
        h1 / 2.0 + x1,
        h2 / 2.0 - (x2 - c),
        h2 / 2.0 + (x2 - c),
    ]
}

fn terms(v: &[f64]) -> Option<Vec<Term>> {
    unpack(v)?;
    let step = 1e-7;
    let f = objective(v);
    let gf = numeric_gradient(objective, v, step);
    let mut out = vec![Term::new(f, gf.clone())];
    for j in 0..10 {
        let g = |w: &[f64]| constraints(w)[j];
        let gg = numeric_gradient(g, v, step);
        let grad = gf
            .iter()
            .zip(&gg)
            .map(|(&(i, a), &(_, b))| (i, a + PENALTY * b))
            .collect();
        out.push(Term::new(f + PENALTY * g(v), grad));
    }
    Some(out)
}

fn merit(v: &[f64]) -> f64 {
    if unpack(v).is_none() {
        return f64::NEG_INFINITY;
    }
    let f = objective(v);
    constraints(v)
        .iter()
        .fold(f, |m, &g| m.min(f + PENALTY * g))
}

/// Runs `restarts` local maximizations from random feasible starts; restart
/// `i` draws its start from ChaCha stream `i` keyed by `seed`.
pub fn maximize_angle_sum(seed: u64, restarts: usize) -> MaximizeResult {
    let tol = Tolerances::default();
    let opts = SlpOptions {
        initial_radius: 0.05,
        max_iterations: 5000,
        ..SlpOptions::default()
    };
    let runs: Vec<MaximizeRun> = (0..restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let start = random_config(&mut rng, &SampleOptions::default());
            let out = maximize_min(&pack(&start), &BOUNDS, terms, merit, &opts);
            let fc = unpack(&out.x).expect("optimizer keeps heights positive");
            let config = TwoEyesConfig::in_frame(fc.c, fc.b1, fc.b2).expect("gap stays >= 1");
            let (a, b) = raw_angles(&fc);
            MaximizeRun {
                start,
                config,
                sum: a + b,
                feasible: check_hypotheses(&config, &tol).ok,
                iterations: out.iterations,
            }
        })
        .collect();
    let best = runs
        .iter()
        .filter(|r| r.feasible)
        .max_by(|a, b| a.sum.total_cmp(&b.sum));
    MaximizeResult {
        best_sum: best.map_or(f64::NEG_INFINITY, |r| r.sum),
        best: best.map(|r| r.config),
        runs,
    }
}
