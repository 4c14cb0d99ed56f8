use geoblock::blocking::{
    blocking_lower_bound, min_blockers, min_hitting_set, verify_blocking, LightRay, RayPath, DEFAULT_EXACT_LIMIT,
};
use geoblock::graph::QuotientGraph;
use geoblock::rational::{rat, Rational};
use geoblock::torus::{hit_fractions, TorusSpace};
use num_traits::{One, Zero};
use proptest::prelude::*;

fn fraction() -> impl Strategy<Value = Rational> {
    (1i64..=12).prop_flat_map(|d| (0..d).prop_map(move |n| rat(n, d)))
}

fn torus_point() -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(fraction(), 2)
}

fn displacement(ray: &LightRay) -> Vec<Rational> {
    match &ray.path {
        RayPath::ExactSegment { start, end } => end.iter().zip(start).map(|(a, b)| a - b).collect(),
        other => panic!("unexpected path {other:?}"),
    }
}

fn sorted_displacements(rays: &[LightRay], sign: i64) -> Vec<Vec<Rational>> {
    let mut out: Vec<Vec<Rational>> =
        rays.iter().map(|r| displacement(r).into_iter().map(|c| c * rat(sign, 1)).collect()).collect();
    out.sort();
    out
}

fn graph_point_text() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("u".to_string()),
        Just("w".to_string()),
        (prop::sample::select(vec!["a", "b", "c"]), prop::sample::select(vec!["1/4", "1/3", "1/2", "5/7"]))
            .prop_map(|(e, f)| format!("{e}@{f}")),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn torus_light_is_reversal_symmetric(x in torus_point(), y in torus_point()) {
        let s = TorusSpace::unit(2).unwrap();
        let (px, py) = (s.point(x).unwrap(), s.point(y).unwrap());
        let forward = s.enumerate_light(&px, &py, 5.0).unwrap();
        let backward = s.enumerate_light(&py, &px, 5.0).unwrap();
        prop_assert_eq!(sorted_displacements(&forward, 1), sorted_displacements(&backward, -1));
    }

    #[test]
    fn torus_counts_are_monotone_and_light_is_a_subset(x in torus_point(), y in torus_point()) {
        let s = TorusSpace::unit(2).unwrap();
        let (px, py) = (s.point(x).unwrap(), s.point(y).unwrap());
        let series = s.growth_series(&px, &py, 8.0, 1.0).unwrap();
        prop_assert!(series.n.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(series.m.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(series.m.iter().zip(&series.n).all(|(m, n)| m <= n));
        let geodesics = sorted_displacements(&s.enumerate_geodesics(&px, &py, 8.0).unwrap(), 1);
        for d in sorted_displacements(&s.enumerate_light(&px, &py, 8.0).unwrap(), 1) {
            prop_assert!(geodesics.binary_search(&d).is_ok());
        }
    }

    #[test]
    fn torus_midpoint_certificate_replays(x in torus_point(), y in torus_point()) {
        let s = TorusSpace::new(vec![vec![rat(1, 1), rat(1, 3)], vec![rat(0, 1), rat(3, 2)]]).unwrap();
        let (px, py) = (s.point(x).unwrap(), s.point(y).unwrap());
        let rays = s.enumerate_light(&px, &py, 8.0).unwrap();
        let blockers = s.midpoint_blocking_set(&px, &py);
        let cert = verify_blocking(&s, &blockers, &rays, 0.0).unwrap().into_certificate().unwrap();
        cert.replay(&s, &rays).unwrap();
        prop_assert!(cert.hits.iter().all(|h| h.fraction == Some(rat(1, 2))));
    }

    #[test]
    fn hit_fractions_match_translate_search(
        start in torus_point(),
        v in prop::collection::vec((-3i64..=3, 1i64..=4).prop_map(|(n, d)| rat(n, d)), 2),
        point in torus_point(),
    ) {
        let found = hit_fractions(&start, &v, &point).unwrap();
        let mut expected = Vec::new();
        if v.iter().any(|c| !c.is_zero()) {
            let axis = v.iter().position(|c| !c.is_zero()).unwrap();
            for z0 in -5i64..=5 {
                for z1 in -5i64..=5 {
                    let target = [&point[0] + rat(z0, 1), &point[1] + rat(z1, 1)];
                    let f = (&target[axis] - &start[axis]) / &v[axis];
                    let on_line = (0..2).all(|i| &start[i] + &f * &v[i] == target[i]);
                    if on_line && f > Rational::zero() && f < Rational::one() {
                        expected.push(f);
                    }
                }
            }
        }
        expected.sort();
        expected.dedup();
        prop_assert_eq!(found, expected);
    }

    #[test]
    fn graph_lower_bound_is_below_min_blockers(x in graph_point_text(), y in graph_point_text()) {
        let g = QuotientGraph::theta();
        let (px, py) = (g.parse_point(&x).unwrap(), g.parse_point(&y).unwrap());
        let rays = g.enumerate_light(&px, &py, 3.0).unwrap();
        prop_assume!(!rays.is_empty());
        let candidates = g.type_blocking_set(&px, &py).unwrap();
        let cert = verify_blocking(&g, &candidates, &rays, 0.0).unwrap().into_certificate().unwrap();
        cert.replay(&g, &rays).unwrap();
        let best = min_blockers(&g, &rays, &candidates, 0.0).unwrap();
        let lower = blocking_lower_bound(&g, &rays, DEFAULT_EXACT_LIMIT, 0.0).unwrap();
        prop_assert!(lower.size() <= best.count);
        prop_assert!(best.count <= cert.used_blockers().len());
    }

    #[test]
    fn min_hitting_set_is_minimum(
        sets in prop::collection::vec(prop::collection::btree_set(0usize..6, 1..4), 1..7),
    ) {
        let sets: Vec<Vec<usize>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let chosen = min_hitting_set(6, &sets);
        prop_assert!(sets.iter().all(|s| s.iter().any(|e| chosen.contains(e))));
        let best = (0u32..64)
            .filter(|mask| sets.iter().all(|s| s.iter().any(|e| mask & (1 << e) != 0)))
            .map(|mask| mask.count_ones() as usize)
            .min()
            .unwrap();
        prop_assert_eq!(chosen.len(), best);
    }
}
