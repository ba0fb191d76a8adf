use apollo_qmc_core::cubature::mean_value_check;
use apollo_qmc_core::domain::{build_square_lattice, build_three_tangent, canonical_gaps, detect_gaps};
use apollo_qmc_core::geometry::{
    descartes_defect, descartes_fourth_curvature, gap_area, inscribed_circle, tangency_residual, Root,
};
use apollo_qmc_core::greedy::{ConvexRegion, GreedyState};
use apollo_qmc_core::packing::residual_series;
use apollo_qmc_core::{Circle, Gap, HarmonicFn, PackingGenerator, StopCriterion, TangencyTolerance, Vec2};
use proptest::prelude::*;

fn radius() -> impl Strategy<Value = f64> {
    (-2.0f64..2.0).prop_map(|e| 10f64.powf(e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn descartes_inner_root(k1 in 0.05f64..50.0, k2 in 0.05f64..50.0, k3 in 0.05f64..50.0) {
        let k4 = descartes_fourth_curvature(k1, k2, k3, Root::Inner).unwrap();
        prop_assert!(k4 >= k1.max(k2).max(k3));
        let outer = descartes_fourth_curvature(k1, k2, k3, Root::Outer).unwrap();
        prop_assert!(outer < k4);
        prop_assert!(descartes_defect([k1, k2, k3, k4]) <= 1e-12);
        prop_assert!(descartes_defect([k1, k2, k3, outer]) <= 1e-12);
    }

    #[test]
    fn inscribed_circle_touches_its_parents(r1 in radius(), r2 in radius(), r3 in radius()) {
        let d = build_three_tangent(r1, r2, r3).unwrap();
        let [a, b, c] = [d.base_disks()[0], d.base_disks()[1], d.base_disks()[2]];
        let tol = TangencyTolerance::default();
        let child = inscribed_circle(&a, &b, &c, &tol).unwrap();
        prop_assert!(tangency_residual(&child, [&a, &b, &c]) <= tol.slack(child.radius + r1.min(r2).min(r3)));
        prop_assert!(descartes_defect([a.curvature, b.curvature, c.curvature, child.curvature]) <= 1e-9);
    }

    #[test]
    fn gap_area_symmetry_and_scaling(r1 in radius(), r2 in radius(), r3 in radius(), s in 0.1f64..10.0) {
        let g = gap_area(r1, r2, r3);
        prop_assert!(g > 0.0);
        for perm in [gap_area(r2, r1, r3), gap_area(r3, r2, r1), gap_area(r2, r3, r1)] {
            prop_assert!((perm - g).abs() <= 1e-12 * g);
        }
        let scaled = gap_area(s * r1, s * r2, s * r3);
        prop_assert!((scaled - s * s * g).abs() <= 1e-9 * scaled);
    }

    #[test]
    fn area_bookkeeping_closes(r1 in radius(), r2 in radius(), r3 in radius()) {
        let d = build_three_tangent(r1, r2, r3).unwrap();
        let mut gen = PackingGenerator::new(&d, TangencyTolerance::default()).unwrap();
        gen.generate_until(StopCriterion::MaxCount(300)).unwrap();
        let series = residual_series(gen.emitted(), &d);
        let packed: f64 = gen.emitted().iter().map(|e| e.circle.area()).sum();
        prop_assert!((packed + series[300].1 - d.exact_area()).abs() <= 1e-12 * d.exact_area());
        prop_assert!(series.windows(2).all(|w| w[1].1 < w[0].1));
        prop_assert!(gen.emitted().windows(2).all(|w| w[1].circle.radius <= w[0].circle.radius));
    }

    #[test]
    fn gap_detection_ignores_disk_order(perm in Just((0..13usize).collect::<Vec<_>>()).prop_shuffle()) {
        let d = build_square_lattice(2, 2).unwrap();
        let shuffled: Vec<Circle> = perm.iter().map(|&i| d.base_disks()[i]).collect();
        let found = detect_gaps(&shuffled, &TangencyTolerance::default()).unwrap();
        let mapped: Vec<Gap> = found
            .iter()
            .map(|g| Gap::new(perm[g.members[0]], perm[g.members[1]], perm[g.members[2]]))
            .collect();
        prop_assert_eq!(canonical_gaps(&mapped), canonical_gaps(d.gaps()));
    }

    #[test]
    fn mean_value_holds_for_harmonic_polynomials(
        degree in 0u32..6,
        cx in -3.0f64..3.0, cy in -3.0f64..3.0, r in 0.05f64..2.0,
        ox in -2.0f64..2.0, oy in -2.0f64..2.0, imag in any::<bool>(),
    ) {
        let origin = Vec2::new(ox, oy);
        let u = if imag { HarmonicFn::PolyIm { degree, origin } } else { HarmonicFn::PolyRe { degree, origin } };
        let disk = Circle::new(Vec2::new(cx, cy), r).unwrap();
        prop_assert!(mean_value_check(&u, &disk) <= 1e-10);
    }

    #[test]
    fn greedy_disks_stay_disjoint_and_inside(seed in any::<u64>(), which in 0usize..3) {
        let region = [
            ConvexRegion::Square { side: 2.0 },
            ConvexRegion::Disk { radius: 1.0 },
            ConvexRegion::Ellipse { a: 1.0, b: 0.3 },
        ][which];
        let mut s = GreedyState::new(region, seed);
        while s.accepted < 150 {
            s.step();
        }
        let placed = s.placed();
        for (i, c) in placed.iter().enumerate() {
            prop_assert!(region.signed_distance(c.center) >= c.radius * (1.0 - 1e-12));
            for d in &placed[i + 1..] {
                prop_assert!(c.center.dist(d.center) >= (c.radius + d.radius) * (1.0 - 1e-12));
            }
        }
        prop_assert!(s.residual() > 0.0);
    }
}
