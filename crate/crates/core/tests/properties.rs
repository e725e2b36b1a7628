use etherphase::config::Grid;
use etherphase::ether::fixtures::{darboux_pullback, euclid_weyl, sphere_chart};
use etherphase::geometry::{point, Point};
use etherphase::groupoid::{chord_phase, element_of_pair, left_map, right_map, LagrangianCurve};
use etherphase::phase_product::triangle_phase;
use proptest::prelude::*;

fn pt(r: f64) -> impl Strategy<Value = Point> {
    (-r..r, -r..r).prop_map(|(q, p)| point(&[q, p]))
}

fn cross(a: &Point, b: &Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn euclid_reflection_is_point_inversion(x in pt(2.0), z in pt(2.0)) {
        let e = euclid_weyl(1);
        let s = e.reflection(&x, &z).unwrap();
        prop_assert!((&s - (&x * 2.0 - &z)).amax() < 1e-12);
        prop_assert!((e.reflection(&x, &s).unwrap() - &z).amax() < 1e-12);
    }

    #[test]
    fn darboux_skew_and_involution(x in pt(0.8), dz in pt(0.3)) {
        let e = darboux_pullback(1, 0.3).unwrap();
        let z = &x + dz;
        let s = e.reflection(&x, &z).unwrap();
        prop_assert!((e.hamiltonian(&x, &s).unwrap() + e.hamiltonian(&x, &z).unwrap()).amax() < 1e-9);
        prop_assert!((e.reflection(&x, &s).unwrap() - &z).amax() < 1e-9);
    }

    #[test]
    fn sphere_reflection_fixes_its_centre(x in pt(0.6)) {
        let e = sphere_chart();
        prop_assert!((e.reflection(&x, &x).unwrap() - &x).amax() < 1e-10);
    }

    #[test]
    fn euclid_triangle_is_four_midpoint_areas(x in pt(1.0), y in pt(1.0), z in pt(1.0)) {
        let e = euclid_weyl(1);
        let v = triangle_phase(&e, &x, &y, &z).unwrap();
        let want = -2.0 * cross(&(&y - &x), &(&z - &x));
        prop_assert!((v - want).abs() < 1e-9 * (1.0 + want.abs()), "{} vs {}", v, want);
    }

    #[test]
    fn circle_chord_is_segment_area(rho in 0.1f64..0.95, phi in 0.0f64..std::f64::consts::TAU, r in 0.5f64..1.5) {
        let e = euclid_weyl(1);
        let lam = LagrangianCurve::circle(point(&[0.0, 0.0]), r);
        let x = point(&[rho * r * phi.cos(), rho * r * phi.sin()]);
        let want = r * r * (rho.acos() - rho * (1.0 - rho * rho).sqrt());
        let v = chord_phase(&e, &lam, &x).unwrap();
        prop_assert!((v - want).abs() < 1e-7, "{} vs {}", v, want);
    }

    #[test]
    fn pair_round_trip(l in pt(0.6), dr in pt(0.3)) {
        let e = darboux_pullback(1, 0.3).unwrap();
        let r = &l + dr;
        let m = element_of_pair(&e, &l, &r).unwrap();
        prop_assert!((left_map(&e, &m).unwrap() - &l).amax() < 1e-9);
        prop_assert!((right_map(&e, &m).unwrap() - &r).amax() < 1e-9);
    }

    #[test]
    fn grid_points_are_an_ordered_product(q0 in -1.0f64..0.0, q1 in 0.0f64..1.0, nq in 1usize..6, np in 1usize..6) {
        let g = Grid::parse(&format!("{q0}:{q1}:{nq},-0.5:0.5:{np}")).unwrap();
        let pts = g.points();
        prop_assert_eq!(pts.len(), nq * np);
        prop_assert_eq!(pts[0], (q0, -0.5));
        prop_assert!(pts.iter().all(|(q, p)| *q >= q0 && *q <= q1 + 1e-15 && p.abs() <= 0.5 + 1e-15));
    }
}
