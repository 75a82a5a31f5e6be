//! Random configurations satisfying the two-eyes hypotheses.

use rand::Rng;

use crate::geom::{tangency_residual, Horoball, Tolerances};

use super::{check_hypotheses, TwoEyesConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleOptions {
    pub min_height: f64,
    pub max_gap: f64,
    /// Chance of pinning an optional quantity to its boundary value (eyes
    /// tangent, a bead full-sized, a bead resting on an eye).
    pub boundary_probability: f64,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self {
            min_height: 0.05,
            max_gap: 2.0,
            boundary_probability: 0.25,
        }
    }
}

/// Draws one configuration in the normalized frame by rejection: the eye
/// gap, heights and `B1` are drawn first, then `B2` is placed on the circle
/// of tangency to `B1` within the strip over `C2`. Half of the samples are
/// mirrored so that either bead may be the one resting lowest.
pub fn random_config<R: Rng + ?Sized>(rng: &mut R, opts: &SampleOptions) -> TwoEyesConfig {
    let tol = Tolerances::default();
    loop {
        if let Some(cfg) = attempt(rng, opts) {
            if check_hypotheses(&cfg, &tol).ok {
                return cfg;
            }
        }
    }
}

fn attempt<R: Rng + ?Sized>(rng: &mut R, opts: &SampleOptions) -> Option<TwoEyesConfig> {
    let pin = |rng: &mut R| rng.random::<f64>() < opts.boundary_probability;
    let c = if pin(rng) {
        1.0
    } else {
        rng.random_range(1.0..opts.max_gap)
    };
    let height = |rng: &mut R| {
        if pin(rng) {
            1.0
        } else {
            rng.random_range(opts.min_height..1.0)
        }
    };
    let h1 = height(rng);
    let h2 = height(rng);

    let x1 = rng.random_range(-h1 / 2.0..=h1 / 2.0);
    let floor1 = (h1 - x1 * x1)
        .max(0.0)
        .sqrt()
        .max((h1 - (x1 - c).powi(2)).max(0.0).sqrt());
    let y1 = if pin(rng) {
        floor1
    } else {
        floor1 + rng.random_range(0.0..0.8)
    };

    let b = (h1 * h2).sqrt();
    let lo = (c - h2 / 2.0).max(x1 - b);
    let hi = (c + h2 / 2.0).min(x1 + b);
    if lo > hi {
        return None;
    }
    let x2 = rng.random_range(lo..=hi);
    let dy = (b * b - (x2 - x1).powi(2)).max(0.0).sqrt();
    let y2 = if rng.random::<bool>() {
        y1 + dy
    } else {
        y1 - dy
    };
    if y2 <= 0.0 {
        return None;
    }
    let b1 = Horoball::at(x1, y1, h1).ok()?;
    let b2 = Horoball::at(x2, y2, h2).ok()?;
    for e in [0.0, c] {
        let eye = Horoball::full(e, 0.0).ok()?;
        if tangency_residual(&b2, &eye) < 0.0 {
            return None;
        }
    }
    let (b1, b2) = if rng.random::<bool>() {
        let m = |b: &Horoball| Horoball::at(c - b.center().x, b.center().y, b.height());
        (m(&b2).ok()?, m(&b1).ok()?)
    } else {
        (b1, b2)
    };
    TwoEyesConfig::in_frame(c, b1, b2).ok()
}

/// Which beads a [`random_resting_config`] sample has resting on their own
/// eyes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resting {
    /// Exactly one bead touches its eye; the other is clear of its eye.
    One,
    /// Each bead touches its own eye.
    Both,
    /// Each bead touches its own eye and both are full-sized.
    BothFull,
}

/// Like [`random_config`], but with beads resting on their eyes as
/// requested. These are the inputs of the later improvement moves.
pub fn random_resting_config<R: Rng + ?Sized>(
    rng: &mut R,
    opts: &SampleOptions,
    resting: Resting,
) -> TwoEyesConfig {
    let tol = Tolerances::default();
    loop {
        if let Some(cfg) = attempt_resting(rng, opts, resting) {
            if check_hypotheses(&cfg, &tol).ok {
                return cfg;
            }
        }
    }
}

fn attempt_resting<R: Rng + ?Sized>(
    rng: &mut R,
    opts: &SampleOptions,
    resting: Resting,
) -> Option<TwoEyesConfig> {
    let pin = |rng: &mut R| rng.random::<f64>() < opts.boundary_probability;
    let c = if pin(rng) {
        1.0
    } else {
        rng.random_range(1.0..opts.max_gap)
    };
    let height = |rng: &mut R| {
        if resting == Resting::BothFull || pin(rng) {
            1.0
        } else {
            rng.random_range(opts.min_height..1.0)
        }
    };
    let h1 = height(rng);
    let h2 = height(rng);
    let x1 = rng.random_range(-h1 / 2.0..=h1 / 2.0);
    let y1 = (h1 - x1 * x1).sqrt();
    let b1 = Horoball::at(x1, y1, h1).ok()?;
    let b = (h1 * h2).sqrt();

    let (x2, y2) = if resting == Resting::One {
        let lo = (c - h2 / 2.0).max(x1 - b);
        let hi = (c + h2 / 2.0).min(x1 + b);
        if lo > hi {
            return None;
        }
        let x2 = rng.random_range(lo..=hi);
        (x2, y1 + (b * b - (x2 - x1).powi(2)).max(0.0).sqrt())
    } else {
        // circle of radius sqrt(h2) about (c, 0) against radius b about B1
        let (dx, dy) = (x1 - c, y1);
        let d = dx.hypot(dy);
        let r = h2.sqrt();
        let a = (r * r - b * b + d * d) / (2.0 * d);
        let k2 = r * r - a * a;
        if k2 < 0.0 {
            return None;
        }
        let k = k2.sqrt() * if rng.random::<bool>() { 1.0 } else { -1.0 };
        (c + (a * dx - k * dy) / d, (a * dy + k * dx) / d)
    };
    if y2 <= 0.0 {
        return None;
    }
    let b2 = Horoball::at(x2, y2, h2).ok()?;
    if resting == Resting::One && tangency_residual(&b2, &Horoball::full(c, 0.0).ok()?) < 1e-6 {
        return None;
    }
    let (b1, b2) = if rng.random::<bool>() {
        let m = |b: &Horoball| Horoball::at(c - b.center().x, b.center().y, b.height());
        (m(&b2).ok()?, m(&b1).ok()?)
    } else {
        (b1, b2)
    };
    TwoEyesConfig::in_frame(c, b1, b2).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samples_satisfy_hypotheses() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let tol = Tolerances::default();
        for _ in 0..500 {
            let cfg = random_config(&mut rng, &SampleOptions::default());
            assert!(check_hypotheses(&cfg, &tol).ok);
        }
    }

    #[test]
    fn resting_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let tol = Tolerances::default();
        for resting in [Resting::One, Resting::Both, Resting::BothFull] {
            for _ in 0..300 {
                let cfg = random_resting_config(&mut rng, &SampleOptions::default(), resting);
                let r = check_hypotheses(&cfg, &tol);
                assert!(r.ok);
                let touching = [r.eye_slack[0][0], r.eye_slack[1][1]]
                    .iter()
                    .filter(|s| s.abs() <= 1e-9)
                    .count();
                assert_eq!(
                    touching,
                    if resting == Resting::One { 1 } else { 2 },
                    "{resting:?} {r:?}"
                );
                if resting == Resting::BothFull {
                    assert!(r.height_excess.iter().all(|e| e.abs() <= 1e-12));
                }
            }
        }
    }
}
