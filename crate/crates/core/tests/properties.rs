use heislim_core::covers::{build_cover, segment_net};
use heislim_core::group::{in_horizontal_plane, sample_rect, HeisPoint, HeisRect, Radii};
use heislim_core::svf::{phi, PhiBranch};
use heislim_core::SeedStream;
use proptest::prelude::*;

fn point() -> impl Strategy<Value = HeisPoint> {
    (-10.0..10.0f64, -10.0..10.0f64, -50.0..50.0f64)
        .prop_map(|(x, y, z)| HeisPoint::new(x, y, z).unwrap())
}

fn radii() -> impl Strategy<Value = Radii> {
    (-8.0..1.0f64, -8.0..1.0f64).prop_map(|(a, b)| Radii::new(a.exp2(), b.exp2()).unwrap())
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + scale)
}

proptest! {
    #[test]
    fn group_law(p in point(), q in point(), r in point()) {
        let lhs = p.mul(&q).mul(&r);
        let rhs = p.mul(&q.mul(&r));
        let scale = lhs.coords().iter().chain(&p.coords()).map(|v| v.abs()).fold(0.0, f64::max) * 100.0;
        for (a, b) in lhs.coords().iter().zip(rhs.coords()) {
            prop_assert!(close(*a, b, scale));
        }
        let e = p.mul(&p.inv());
        prop_assert!(e.coords().iter().all(|v| v.abs() <= 1e-9 * (1.0 + scale)));
    }

    #[test]
    fn metric_axioms(p in point(), q in point(), r in point()) {
        let (pq, qp) = (p.dist(&q), q.dist(&p));
        prop_assert!(close(pq, qp, pq));
        prop_assert_eq!(p.dist(&p), 0.0);
        prop_assert!(pq <= p.dist(&r) + r.dist(&q) + 1e-9 * (1.0 + pq));
        prop_assert!(pq + 1e-9 * (1.0 + pq) >= p.planar_dist(&q));
    }

    #[test]
    fn left_invariance(g in point(), p in point(), q in point()) {
        let d = p.dist(&q);
        let dg = g.mul(&p).dist(&g.mul(&q));
        prop_assert!((d - dg).abs() <= 1e-7 * (1.0 + d));
    }

    #[test]
    fn planar_equality_on_horizontal_plane(p in point(), dx in -1.0..1.0f64, dy in -1.0..1.0f64) {
        let q = p.mul(&HeisPoint::new(dx, dy, 0.0).unwrap());
        prop_assert!(in_horizontal_plane(&p, &q));
        let d = p.dist(&q);
        prop_assert!((d - p.planar_dist(&q)).abs() <= 1e-9 * (1.0 + d));
    }

    #[test]
    fn dilation_scales_distance(p in point(), q in point(), s in 0.1..10.0f64) {
        let d = p.dist(&q);
        prop_assert!((p.dilate(s).dist(&q.dilate(s)) - s * d).abs() <= 1e-7 * (1.0 + s * d));
    }

    #[test]
    fn rectangles_are_left_equivariant(g in point(), r in radii(), seed in 0u64..1000) {
        let mut rng = SeedStream::new(seed, 0).rng();
        let at_origin = HeisRect::at_origin(r);
        let moved = HeisRect::new(g, r);
        for _ in 0..20 {
            let h = sample_rect(&at_origin, &mut rng);
            prop_assert!(at_origin.contains(&h));
            let gh = g.mul(&h);
            prop_assert!(moved.contains(&gh));
            prop_assert!(g.dist(&gh) <= r.diameter_bound() * (1.0 + 1e-9));
        }
    }

    #[test]
    fn phi_branches_agree_on_diagonal(t in 0.0..=4.0f64, s in 1e-3..1.0f64) {
        let r = Radii::new(s, s).unwrap();
        let v = phi(t, &r).unwrap();
        let expected = s.powf(t);
        prop_assert!((v.value - expected).abs() <= 1e-12 * expected.max(1e-300) + 1e-300);
    }

    #[test]
    fn phi_is_monotone_in_radii(t in 0.0..=4.0f64, r in radii(), g in 1.0..4.0f64) {
        let v = phi(t, &r).unwrap().value;
        let bigger1 = phi(t, &Radii::new(r.r1() * g, r.r2()).unwrap()).unwrap().value;
        let bigger2 = phi(t, &Radii::new(r.r1(), r.r2() * g).unwrap()).unwrap().value;
        prop_assert!(bigger1 >= v * (1.0 - 1e-12));
        prop_assert!(bigger2 >= v * (1.0 - 1e-12));
    }

    #[test]
    fn phi_branch_matches_shape(t in 0.0..=4.0f64, r in radii()) {
        let v = phi(t, &r).unwrap();
        prop_assert_eq!(v.branch, PhiBranch::select(r.is_thin(), t));
    }

    #[test]
    fn covers_are_well_formed(r in radii(), t in 0.0..4.0f64) {
        let c = build_cover(&r, t).unwrap();
        prop_assert!(c.element_count() >= 1);
        prop_assert!(c.min_radius() > 0.0);
        prop_assert!(c.density_claim() >= c.min_radius());
        prop_assert!(c.content(t) > 0.0);
        if r.is_thin() {
            prop_assert!(segment_net(&r).is_ok());
        }
    }
}
