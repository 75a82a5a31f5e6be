//! Property tests over random inputs.

use std::f64::consts::{FRAC_PI_3, PI};

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use horonecklace::family::{classify_solution, generate_family, FamilyParam};
use horonecklace::geom::{
    are_tangent, horoball_distance, interiors_disjoint, tangency_residual, visual_angle,
    BoundaryPoint, Horoball, Tolerances,
};
use horonecklace::io::{BallSpec, ConfigDocument};
use horonecklace::isometry::MobiusMap;
use horonecklace::necklace::{
    crossing_beads, encircles, validate_with_eyes, winding_number, EyePair, Necklace,
};
use horonecklace::render::{render_svg, RenderOptions};
use horonecklace::search::{search_necklace, EyeGap, FeasibilitySpec, SearchOptions};
use horonecklace::two_eyes::sample::{
    random_config, random_resting_config, Resting, SampleOptions,
};
use horonecklace::two_eyes::{alpha_beta, rotate_tangent_pair};

fn ball() -> impl Strategy<Value = Horoball> {
    (-5.0..5.0f64, -5.0..5.0f64, 0.01..2.0f64).prop_map(|(x, y, h)| Horoball::at(x, y, h).unwrap())
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn moved(b: &Horoball, f: &impl Fn(BoundaryPoint) -> BoundaryPoint) -> Horoball {
    b.with_center(f(b.center()))
}

proptest! {
    #[test]
    fn distance_is_symmetric(a in ball(), b in ball()) {
        prop_assume!(a.center() != b.center());
        prop_assert_eq!(horoball_distance(&a, &b).unwrap(), horoball_distance(&b, &a).unwrap());
    }

    #[test]
    fn translation_changes_nothing(a in ball(), b in ball(), dx in -3.0..3.0f64, dy in -3.0..3.0f64) {
        prop_assume!(a.center().dist(b.center()) > 1e-3);
        let (ta, tb) = (a.translated(dx, dy), b.translated(dx, dy));
        prop_assert!((horoball_distance(&a, &b).unwrap() - horoball_distance(&ta, &tb).unwrap()).abs() <= 1e-12);
        prop_assert_eq!(are_tangent(&a, &b, 1e-9), are_tangent(&ta, &tb, 1e-9));
        if a.center().dist(b.center()) > b.shadow_radius() + 1e-6 {
            let before = visual_angle(a.center(), &b).unwrap();
            let after = visual_angle(ta.center(), &tb).unwrap();
            prop_assert!((before - after).abs() <= 1e-12);
        }
    }

    #[test]
    fn zero_distance_means_tangent(a in ball(), w in 0.0..6.3f64, h in 0.01..2.0f64, s in -1e-3..1e-3f64) {
        let d = (a.height() * h).sqrt() * (1.0 + s);
        let b = Horoball::at(a.center().x + d * w.cos(), a.center().y + d * w.sin(), h).unwrap();
        let dist = horoball_distance(&a, &b).unwrap();
        prop_assert_eq!(dist.abs() <= 1e-9, are_tangent(&a, &b, 1e-9));
        if dist > 1e-9 {
            prop_assert!(interiors_disjoint(&a, &b, 1e-12) && !are_tangent(&a, &b, 1e-9));
        }
    }

    #[test]
    fn mobius_maps_keep_tangency(
        entries in prop::array::uniform8(-1.5..1.5f64),
        a in ball(),
        w in 0.0..6.3f64,
        h in 0.05..2.0f64,
    ) {
        let z = |i: usize| Complex64::new(entries[2 * i], entries[2 * i + 1]);
        let m = MobiusMap::from_entries(z(0), z(1), z(2), z(3)).unwrap();
        let d = (a.height() * h).sqrt();
        let b = Horoball::at(a.center().x + d * w.cos(), a.center().y + d * w.sin(), h).unwrap();
        let (Some(ia), Some(ib)) = (m.apply_finite(&a), m.apply_finite(&b)) else { return Ok(()) };
        prop_assume!(ia.height() < 1e3 && ib.height() < 1e3);
        prop_assert!(tangency_residual(&ia, &ib).abs() <= 1e-9);
    }

    #[test]
    fn winding_survives_tiny_vertex_noise(
        pts in prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), 3..12),
        noise in prop::collection::vec((-1e-9..1e-9f64, -1e-9..1e-9f64), 12),
        p in (-3.0..3.0f64, -3.0..3.0f64),
    ) {
        let poly: Vec<BoundaryPoint> = pts.iter().map(|&(x, y)| BoundaryPoint { x, y }).collect();
        let p = BoundaryPoint { x: p.0, y: p.1 };
        let k = poly.len();
        let far = (0..k).all(|i| segment_distance(p, poly[i], poly[(i + 1) % k]) >= 1e-6);
        prop_assume!(far);
        let shaken: Vec<BoundaryPoint> =
            poly.iter().zip(&noise).map(|(q, (dx, dy))| BoundaryPoint { x: q.x + dx, y: q.y + dy }).collect();
        prop_assert_eq!(winding_number(&poly, p).unwrap(), winding_number(&shaken, p).unwrap());
    }

    #[test]
    fn rigid_motions_preserve_validation(theta in FRAC_PI_3..2.0 * FRAC_PI_3, turn in -PI..PI, dx in -4.0..4.0f64, dy in -4.0..4.0f64) {
        let (n, eyes) = generate_family(FamilyParam::new(theta).unwrap());
        let (cs, sn) = (turn.cos(), turn.sin());
        let f = |p: BoundaryPoint| BoundaryPoint { x: dx + cs * p.x - sn * p.y, y: dy + sn * p.x + cs * p.y };
        let moved_n = Necklace::new(n.beads().iter().map(|b| moved(b, &f)).collect()).unwrap();
        let moved_eyes = EyePair::new(moved(eyes.c1(), &f), moved(eyes.c2(), &f), &tol()).unwrap();
        let (r0, r1) = (validate_with_eyes(&n, &eyes, &tol()), validate_with_eyes(&moved_n, &moved_eyes, &tol()));
        prop_assert_eq!(r0.ok, r1.ok);
        prop_assert!((r0.max_tie_residual - r1.max_tie_residual).abs() <= 1e-9);
        prop_assert!((r0.min_pair_slack - r1.min_pair_slack).abs() <= 1e-9);
        prop_assert_eq!(encircles(&n, &eyes, &tol()).unwrap(), encircles(&moved_n, &moved_eyes, &tol()).unwrap());
        let cb = crossing_beads(&moved_n, &moved_eyes, &tol()).unwrap();
        let mut ids = [cb.upper1, cb.lower1, cb.upper2, cb.lower2];
        ids.sort_unstable();
        prop_assert!(ids.windows(2).all(|w| w[0] != w[1]));
    }

    #[test]
    fn documents_round_trip(
        beads in prop::collection::vec((any::<f64>(), any::<f64>(), any::<f64>()), 0..10),
    ) {
        let finite = |v: f64| if v.is_finite() { v } else { 0.5 };
        let doc = ConfigDocument {
            eyes: [BallSpec { center: [0.0, 0.0], height: 1.0 }, BallSpec { center: [1.0, 0.0], height: 1.0 }],
            beads: beads.iter().map(|&(x, y, h)| BallSpec { center: [finite(x), finite(y)], height: finite(h) }).collect(),
            metadata: None,
        };
        let text = doc.to_json();
        let back = ConfigDocument::parse(&text).unwrap();
        prop_assert_eq!(back.to_json(), text);
        for (a, b) in doc.beads.iter().zip(&back.beads) {
            prop_assert_eq!(a.center[0].to_bits(), b.center[0].to_bits());
            prop_assert_eq!(a.height.to_bits(), b.height.to_bits());
        }
    }
}

fn segment_distance(p: BoundaryPoint, a: BoundaryPoint, b: BoundaryPoint) -> f64 {
    let (vx, vy) = (b.x - a.x, b.y - a.y);
    let len2 = vx * vx + vy * vy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.x - a.x) * vx + (p.y - a.y) * vy) / len2).clamp(0.0, 1.0)
    };
    (p.x - a.x - t * vx).hypot(p.y - a.y - t * vy)
}

#[test]
fn rotations_keep_both_tangencies() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..200 {
        let cfg = random_resting_config(&mut rng, &SampleOptions::default(), Resting::Both);
        for which in [1, 2] {
            for i in 0..=16 {
                let out = rotate_tangent_pair(&cfg, which, PI * i as f64 / 16.0)
                    .unwrap()
                    .frame_coords();
                let eye = Horoball::full(if which == 1 { 0.0 } else { out.c }, 0.0).unwrap();
                let moving = if which == 1 { out.b1 } else { out.b2 };
                assert!(tangency_residual(&out.b1, &out.b2).abs() <= 1e-9);
                assert!(tangency_residual(&moving, &eye).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn primed_angles_stay_below_sixty_degrees() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..2000 {
        let cfg = random_resting_config(&mut rng, &SampleOptions::default(), Resting::Both);
        let d = alpha_beta(&cfg, &tol()).unwrap();
        assert!(
            d.psi_prime <= FRAC_PI_3 + 1e-9 && d.phi_prime <= FRAC_PI_3 + 1e-9,
            "{d:?}"
        );
    }
}

#[test]
fn angle_diagnostics_are_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..2000 {
        let cfg = random_config(&mut rng, &SampleOptions::default());
        let d = alpha_beta(&cfg, &tol()).unwrap();
        assert_eq!(d.sum, d.alpha + d.beta);
        for a in [d.alpha, d.beta, d.psi, d.phi, d.psi_prime, d.phi_prime] {
            assert!((0.0..=PI).contains(&a), "{d:?}");
        }
        assert!(d.sum <= FRAC_PI_3 + 1e-9, "{d:?}");
    }
}

#[test]
fn feasible_search_results_validate() {
    for k in [8, 9] {
        let spec = FeasibilitySpec::new(k, EyeGap::Free { min: 1.0, max: 2.0 }).unwrap();
        let result = search_necklace(&spec, &SearchOptions::new(3, 16)).unwrap();
        if result.best_slack >= -1e-6 {
            let (n, eyes) = &result.best_config;
            let loose = Tolerances::uniform(1e-4).unwrap();
            let report = validate_with_eyes(n, eyes, &loose);
            assert!(report.ok, "k = {k}: {}", report.summary());
            assert!(encircles(n, eyes, &loose).unwrap());
        }
    }
}

#[test]
fn svg_is_well_formed() {
    for theta in [FRAC_PI_3, 1.3, 1.7, 2.0 * FRAC_PI_3] {
        let (n, eyes) = generate_family(FamilyParam::new(theta).unwrap());
        let svg = render_svg(
            &ConfigDocument::from_parts(n.beads(), &eyes, None),
            &RenderOptions::default(),
        );
        let tree = roxmltree::Document::parse(&svg).unwrap();
        assert_eq!(tree.root_element().tag_name().name(), "svg");
        assert!(tree
            .descendants()
            .all(|e| e.attributes().all(|a| !a.name().contains("href"))));
    }
}

#[test]
fn shrunk_bead_leaves_the_family() {
    let (n, eyes) = generate_family(FamilyParam::new(1.5).unwrap());
    for i in 0..8 {
        let mut beads = n.beads().to_vec();
        let b = beads[i];
        beads[i] = Horoball::at(b.center().x, b.center().y, 0.999).unwrap();
        let c = classify_solution(&Necklace::new(beads).unwrap(), &eyes, 1e-6);
        assert!(!c.in_family, "bead {i}: {c:?}");
    }
}
