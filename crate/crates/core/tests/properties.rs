use std::cmp::Ordering;

use cat0_boundary::metrics::{self, BoundaryMetric};
use cat0_boundary::quasisymmetry::{compose_eta, ControlFunction};
use cat0_boundary::space::{self, branch_time, rebase_ray, sample_boundary, sample_interior};
use cat0_boundary::value::{exact, int, ratio};
use cat0_boundary::{BoundaryPoint, MetricSpec, Point, Ray, Space, Value};
use num_rational::BigRational;
use proptest::prelude::*;

fn t4() -> Space {
    Space::tree(4).unwrap()
}

/// Ends of the 4-valent tree with a nonempty preperiod.
fn tree_end() -> impl Strategy<Value = BoundaryPoint> {
    (0u8..4, prop::collection::vec(0u8..3, 0..6), prop::collection::vec(0u8..3, 1..4)).prop_map(
        |(first, rest, period)| {
            let mut pre = vec![first];
            pre.extend(rest);
            BoundaryPoint::tree(pre, period).unwrap()
        },
    )
}

fn not_greater(a: &Value, b: &Value) -> bool {
    matches!(a.partial_cmp(b), Some(Ordering::Less | Ordering::Equal))
}

fn relabel_root(xi: &BoundaryPoint, perm: &[u8; 4]) -> BoundaryPoint {
    let e = xi.as_tree().unwrap();
    // a prefix long enough to end where the period starts over
    let mut pre = e.prefix(e.preperiod().len() + e.period().len());
    pre[0] = perm[pre[0] as usize];
    BoundaryPoint::tree(pre, e.period().to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn tree_metrics_are_ultrametric(x in tree_end(), y in tree_end(), z in tree_end()) {
        let t = t4();
        for spec in [MetricSpec::d_a(&t, 1.0).unwrap(), MetricSpec::dbar(&t)] {
            let m = BoundaryMetric::new(&t, spec).unwrap();
            let (xy, yz, xz) = (m.distance(&x, &y).unwrap(), m.distance(&y, &z).unwrap(), m.distance(&x, &z).unwrap());
            prop_assert_eq!(xy.is_zero(), x == y);
            prop_assert_eq!(m.distance(&y, &x).unwrap().exact_cmp(&xy), Some(Ordering::Equal));
            // d(x,z) <= max(d(x,y), d(y,z)) decided exactly
            prop_assert!(xz.exact_cmp(&xy).is_some() && xz.exact_cmp(&yz).is_some());
            prop_assert!(not_greater(&xz, &xy) || not_greater(&xz, &yz));
        }
    }

    #[test]
    fn tree_separation_is_twice_the_overshoot(x in tree_end(), y in tree_end(), t8 in 0i64..200) {
        prop_assume!(x != y);
        let t = t4();
        let b = branch_time(&t, &x, &y).unwrap();
        let time = ratio(t8, 8);
        let rx = Ray::from_basepoint(&t, x).unwrap();
        let ry = Ray::from_basepoint(&t, y).unwrap();
        let d = space::dist(&t, &rx.point_exact(&time).unwrap(), &ry.point_exact(&time).unwrap()).unwrap();
        let over = (&time - &b).max(BigRational::from_integer(0.into()));
        prop_assert_eq!(d, Value::Rational(int(2) * over));
    }

    #[test]
    fn root_automorphisms_preserve_both_metrics(x in tree_end(), y in tree_end(), k in 0usize..24) {
        let mut perm = [0u8, 1, 2, 3];
        // the k-th permutation of four letters
        let mut pool = vec![0u8, 1, 2, 3];
        let mut code = k;
        for slot in perm.iter_mut() {
            let f = pool.len();
            let fact: usize = (1..f).product();
            *slot = pool.remove(code / fact);
            code %= fact;
        }
        let t = t4();
        for spec in [MetricSpec::d_a(&t, 3.0).unwrap(), MetricSpec::dbar(&t)] {
            let m = BoundaryMetric::new(&t, spec).unwrap();
            let before = m.distance(&x, &y).unwrap();
            let after = m.distance(&relabel_root(&x, &perm), &relabel_root(&y, &perm)).unwrap();
            prop_assert_eq!(before.exact_cmp(&after), Some(Ordering::Equal));
        }
    }

    #[test]
    fn planar_metrics_obey_the_triangle_inequality(a in 0.0f64..6.3, b in 0.0f64..6.3, c in 0.0f64..6.3, big_a in 0.2f64..5.0) {
        for (space, make) in [
            (Space::euclidean(2).unwrap(), BoundaryPoint::circle as fn(f64) -> BoundaryPoint),
            (Space::hyperbolic_plane(), BoundaryPoint::ideal as fn(f64) -> BoundaryPoint),
        ] {
            let (x, y, z) = (make(a), make(b), make(c));
            for spec in [MetricSpec::d_a(&space, big_a).unwrap(), MetricSpec::dbar(&space)] {
                let d = |p: &BoundaryPoint, q: &BoundaryPoint| metrics::evaluate(&space, &spec, p, q).unwrap().to_f64();
                prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-9);
                prop_assert!((d(&x, &y) - d(&y, &x)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn planar_ray_pairs_satisfy_the_comparison(a in 0.0f64..6.3, b in 0.0f64..6.3, s in 0.01f64..20.0, frac in 0.01f64..1.0) {
        let t = s / frac;
        for (space, make) in [
            (Space::euclidean(2).unwrap(), BoundaryPoint::circle as fn(f64) -> BoundaryPoint),
            (Space::hyperbolic_plane(), BoundaryPoint::ideal as fn(f64) -> BoundaryPoint),
        ] {
            let ra = Ray::from_basepoint(&space, make(a)).unwrap();
            let rb = Ray::from_basepoint(&space, make(b)).unwrap();
            let f = |u: f64| space::dist(&space, &ra.point(u).unwrap(), &rb.point(u).unwrap()).unwrap().to_f64();
            let ft = f(t);
            prop_assert!(f(s) <= s / t * ft + 1e-10 * ft.max(1.0));
        }
    }

    #[test]
    fn rebased_rays_stay_within_the_basepoint_distance(seed in 0u64..1000, u in 0.0f64..30.0) {
        for space in [Space::euclidean(2).unwrap(), Space::hyperbolic_plane(), t4()] {
            let xi = sample_boundary(&space, 1, seed).unwrap().remove(0);
            let origin = sample_interior(&space, 3.0, 1, seed).unwrap().remove(0);
            let x0 = space.basepoint().clone();
            let d0 = space::dist(&space, &x0, &origin).unwrap().to_f64();
            let c = Ray::from_basepoint(&space, xi.clone()).unwrap();
            let c2 = rebase_ray(&space, &origin, &xi).unwrap();
            let (p, q) = if space.is_tree() {
                let e = exact(u).unwrap();
                (c.point_exact(&e).unwrap(), c2.point_exact(&e).unwrap())
            } else {
                (c.point(u).unwrap(), c2.point(u).unwrap())
            };
            let d = space::dist(&space, &p, &q).unwrap().to_f64();
            prop_assert!(d <= d0 + 1e-9 * d0.max(1.0), "{} > {}", d, d0);
        }
    }

    #[test]
    fn composition_is_associative(s1 in 1u32..50, s2 in 1u32..50, c in 1.0f64..5.0, delta in 0.1f64..1.0, t in 0.01f64..100.0) {
        let f = ControlFunction::linear(int(s1 as i64)).unwrap();
        let g = ControlFunction::power(c, delta).unwrap();
        let h = ControlFunction::linear(ratio(1, s2 as i64)).unwrap();
        let left = compose_eta(&compose_eta(&f, &g), &h);
        let right = compose_eta(&f, &compose_eta(&g, &h));
        let (l, r) = (left.eval(t), right.eval(t));
        prop_assert!((l - r).abs() <= 1e-12 * l.abs().max(1.0));
        // and agrees with applying the stages by hand: f first, then g, then h
        let by_hand = h.eval(g.eval(f.eval(t)));
        prop_assert!((l - by_hand).abs() <= 1e-12 * l.abs().max(1.0));
    }
}

#[test]
fn sampling_is_deterministic() {
    for space in [Space::euclidean(3).unwrap(), Space::hyperbolic_plane(), t4()] {
        assert_eq!(sample_boundary(&space, 50, 7).unwrap(), sample_boundary(&space, 50, 7).unwrap());
        assert_ne!(sample_boundary(&space, 50, 7).unwrap(), sample_boundary(&space, 50, 8).unwrap());
        let a: Vec<Point> = sample_interior(&space, 5.0, 40, 3).unwrap();
        assert_eq!(a, sample_interior(&space, 5.0, 40, 3).unwrap());
    }
}

#[test]
fn pair_distances_do_not_depend_on_thread_scheduling() {
    let space = Space::hyperbolic_plane();
    let pts = sample_boundary(&space, 40, 11).unwrap();
    let m = BoundaryMetric::new(&space, MetricSpec::dbar(&space)).unwrap();
    let first = m.matrix(&pts).unwrap();
    for _ in 0..3 {
        assert_eq!(m.matrix(&pts).unwrap(), first);
    }
}
