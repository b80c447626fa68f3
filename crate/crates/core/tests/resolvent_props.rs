use nalgebra::{Matrix2, Vector2};
use proptest::prelude::*;
use proxcat_core::checkers::{check_mutual_fne, check_mutual_p2, check_nonexpansive, SampleConfig};
use proxcat_core::geometry::{Point, Space};
use proxcat_core::resolvents::{prox_oracle_1d, ConvexSet, Family, NonexpansiveMap, ResolventFamily};

fn families(space: &Space) -> Vec<ResolventFamily> {
    match space {
        Space::Euclidean { .. } => vec![
            ResolventFamily::ProxQuadraticToPoint { anchor: Point::euclidean([1.0, -0.5]) },
            ResolventFamily::ProxDistanceToPoint { anchor: Point::euclidean([0.3, 0.2]) },
            ResolventFamily::ProxQuadraticToSet {
                set: ConvexSet::Segment { a: Point::euclidean([-1.0, 0.0]), b: Point::euclidean([1.0, 1.0]) },
            },
            ResolventFamily::ProxScaledSquaredNorm { c: 2.0 },
        ],
        Space::HalfPlane => vec![
            ResolventFamily::ProxQuadraticToPoint { anchor: Point::half_plane(0.5, 1.5) },
            ResolventFamily::ProxDistanceToPoint { anchor: Point::half_plane(-0.2, 0.7) },
            ResolventFamily::ProxQuadraticToSet {
                set: ConvexSet::Segment { a: Point::half_plane(-1.0, 1.0), b: Point::half_plane(1.0, 2.0) },
            },
        ],
        Space::Spider { .. } => vec![
            ResolventFamily::ProxQuadraticToPoint { anchor: Point::spider(1, 0.8) },
            ResolventFamily::ProxDistanceToPoint { anchor: Point::spider(2, 0.4) },
            ResolventFamily::ProxQuadraticToSet { set: ConvexSet::SpiderRaySegment { ray: 0, r_min: 0.5, r_max: 1.5 } },
        ],
    }
}

fn point_in(space: Space) -> BoxedStrategy<Point> {
    match space {
        Space::Euclidean { dim } => prop::collection::vec(-3.0f64..3.0, dim).prop_map(Point::euclidean).boxed(),
        Space::HalfPlane => (-2.0f64..2.0, 0.2f64..3.0).prop_map(|(x, y)| Point::half_plane(x, y)).boxed(),
        Space::Spider { rays } => (0..rays, 0.0f64..3.0).prop_map(|(r, s)| Point::spider(r, s)).boxed(),
    }
}

fn space_and_point() -> impl Strategy<Value = (Space, Point)> {
    prop_oneof![Just(Space::Euclidean { dim: 2 }), Just(Space::HalfPlane), Just(Space::Spider { rays: 3 })]
        .prop_flat_map(|s| (Just(s), point_in(s)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn closed_forms_match_brute_force((space, x) in space_and_point(), gamma in 0.05f64..5.0) {
        for fam in families(&space) {
            let closed = fam.apply(&space, gamma, &x).unwrap();
            let oracle = prox_oracle_1d(&space, &fam, gamma, &x, 1e-12).unwrap();
            let gap = space.dist(&closed, &oracle).unwrap();
            prop_assert!(gap <= 1e-6, "{} γ={gamma}: gap {gap}", fam.name());
        }
    }

    #[test]
    fn rotation_resolvent_solves_linear_system(a in -3.0f64..3.0, b in -3.0f64..3.0, angle in -3.0f64..3.0, gamma in 0.1f64..10.0) {
        // R_{T,γ} = (I + γ(I - T))⁻¹ for linear T
        let e2 = Space::Euclidean { dim: 2 };
        let fam = ResolventFamily::ResolventOfNonexpansive { map: NonexpansiveMap::Rotation { angle }, tol: 1e-12 };
        let got = fam.apply(&e2, gamma, &Point::euclidean([a, b])).unwrap();
        let (s, c) = angle.sin_cos();
        let rot = Matrix2::new(c, -s, s, c);
        let sys = Matrix2::identity() + (Matrix2::identity() - rot) * gamma;
        let want = sys.lu().solve(&Vector2::new(a, b)).unwrap();
        let g = got.coords().unwrap();
        prop_assert!((g[0] - want[0]).hypot(g[1] - want[1]) <= 1e-9);
    }

    #[test]
    fn monotone_linear_residual(m01 in -2.0f64..2.0, d0 in 0.0f64..2.0, d1 in 0.0f64..2.0, a in -3.0f64..3.0, b in -3.0f64..3.0, gamma in 0.1f64..10.0) {
        // skew part plus a nonnegative diagonal is monotone
        let matrix = vec![vec![d0, m01], vec![-m01, d1]];
        let e2 = Space::Euclidean { dim: 2 };
        let fam = ResolventFamily::ResolventOfMonotoneLinear { matrix: matrix.clone() };
        let y = fam.apply(&e2, gamma, &Point::euclidean([a, b])).unwrap();
        let y = y.coords().unwrap();
        let r0 = y[0] + gamma * (matrix[0][0] * y[0] + matrix[0][1] * y[1]) - a;
        let r1 = y[1] + gamma * (matrix[1][0] * y[0] + matrix[1][1] * y[1]) - b;
        prop_assert!(r0.hypot(r1) <= 1e-10 * (1.0 + a.hypot(b)));
    }
}

fn base(space: &Space) -> Point {
    match space {
        Space::Euclidean { dim } => Point::euclidean(vec![0.0; *dim]),
        Space::HalfPlane => Point::half_plane(0.0, 1.0),
        Space::Spider { .. } => Point::hub(),
    }
}

#[test]
fn mutual_fne_and_p2_agree_on_catalog() {
    let pairs = [(0.5, 0.5), (0.5, 2.0), (2.0, 0.5), (1.0, 3.0)];
    for space in [Space::Euclidean { dim: 2 }, Space::HalfPlane, Space::Spider { rays: 3 }] {
        let cfg = SampleConfig::new(7, 300, 2.0, base(&space));
        for fam in families(&space) {
            for &(l, m) in &pairs {
                let fne = check_mutual_fne(&space, &fam.at(l), &fam.at(m), l, m, &cfg, 1e-8).unwrap();
                let p2 = check_mutual_p2(&space, &fam.at(l), &fam.at(m), l, m, &cfg, 1e-8).unwrap();
                assert!(fne.pass && p2.pass, "{} on {space:?} (λ={l}, μ={m}): {fne:?} {p2:?}", fam.name());
            }
            assert!(check_nonexpansive(&space, &fam.at(1.0), &cfg, 1e-8).unwrap().pass);
        }
    }
}

#[test]
fn reversed_orders_break_p2_for_scaled_norm() {
    // with λ and μ swapped in the pairing, the inequality fails on ℝ
    let line = Space::Euclidean { dim: 1 };
    let fam = ResolventFamily::ProxScaledSquaredNorm { c: 1.0 };
    let cfg = SampleConfig::new(3, 300, 2.0, base(&line));
    let r = check_mutual_p2(&line, &fam.at(0.5), &fam.at(4.0), 4.0, 0.5, &cfg, 1e-8).unwrap();
    assert!(!r.pass);
}
