use palmshift_core::*;
use proptest::prelude::*;

const E1: GroupModel = GroupModel::Euclidean { dim: 1 };
const E2: GroupModel = GroupModel::Euclidean { dim: 2 };
const T2: GroupModel = GroupModel::Torus { dim: 2 };
const AXB: GroupModel = GroupModel::AxB;

fn element(model: GroupModel) -> BoxedStrategy<GroupElement> {
    match model {
        GroupModel::AxB => (-3.0f64..3.0, -10.0f64..10.0)
            .prop_map(|(l, b)| GroupElement::ab(10f64.powf(l), b))
            .boxed(),
        GroupModel::Torus { dim } => proptest::collection::vec(0.0f64..1.0, dim)
            .prop_map(|c| GroupElement::new(&c))
            .boxed(),
        GroupModel::Euclidean { dim } => proptest::collection::vec(-100.0f64..100.0, dim)
            .prop_map(|c| GroupElement::new(&c))
            .boxed(),
    }
}

fn model() -> impl Strategy<Value = GroupModel> {
    prop_oneof![Just(E1), Just(E2), Just(T2), Just(AXB)]
}

fn scaled_deviation(m: GroupModel, x: &GroupElement, y: &GroupElement) -> f64 {
    let scale = x.coords().iter().fold(1.0f64, |s, c| s.max(c.abs()));
    m.coord_deviation(x, y) / scale
}

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig {
        cases: n,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(cases(10_000))]

    #[test]
    fn multiplication_is_associative((m, x, y, z) in model().prop_flat_map(|m| (Just(m), element(m), element(m), element(m)))) {
        let left = m.multiply(&m.multiply(&x, &y).unwrap(), &z).unwrap();
        let right = m.multiply(&x, &m.multiply(&y, &z).unwrap()).unwrap();
        prop_assert!(scaled_deviation(m, &left, &right) <= 1e-12, "{left:?} vs {right:?}");
    }

    #[test]
    fn modular_is_a_homomorphism((m, x, y) in model().prop_flat_map(|m| (Just(m), element(m), element(m)))) {
        let xy = m.multiply(&x, &y).unwrap();
        let lhs = m.modular(&xy).unwrap();
        let rhs = m.modular(&x).unwrap() * m.modular(&y).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
    }

    #[test]
    fn inverse_cancels((m, x) in model().prop_flat_map(|m| (Just(m), element(m)))) {
        let p = m.multiply(&x, &m.invert(&x).unwrap()).unwrap();
        prop_assert!(m.coord_deviation(&p, &m.identity()) <= 1e-12);
    }
}

proptest! {
    #![proptest_config(cases(1_000))]

    #[test]
    fn haar_mass_is_left_invariant(
        z in element(AXB),
        a_lo in 0.01f64..10.0,
        a_ratio in 1.01f64..100.0,
        b_lo in -5.0f64..5.0,
        b_len in 0.01f64..10.0,
    ) {
        let w = Window::ab_box(a_lo, a_lo * a_ratio, b_lo, b_lo + b_len);
        let moved = translate_window(AXB, &z, &w).unwrap();
        let before = haar_mass(AXB, &w).unwrap();
        let after = haar_mass(AXB, &moved).unwrap();
        prop_assert!((before - after).abs() <= 1e-9 * before);
        let quad = haar_mass_quadrature(AXB, &moved).unwrap();
        prop_assert!((quad - before).abs() <= 1e-9 * before.max(1.0));
    }

    #[test]
    fn strip_tail_is_analytic(a in 0.001f64..1000.0, b in -10.0f64..10.0, delta in 0.01f64..2.0, ratio in 1.5f64..1e6) {
        let anchor = GroupElement::ab(a, b);
        let full = haar_mass(AXB, &Window::strip(anchor.clone(), delta, f64::INFINITY)).unwrap();
        let cut = haar_mass(AXB, &Window::strip(anchor, delta, a * ratio)).unwrap();
        prop_assert!((full - cut - strip_tail_mass(a, delta, a * ratio)).abs() <= 1e-9);
    }

    #[test]
    fn strip_membership_is_a_left_coset(x in element(AXB), u_a in 0.0f64..3.0, u_b in -0.3f64..0.3) {
        let delta = 0.1;
        let a_max = 1e3;
        let y = AXB.multiply(&x, &GroupElement::ab(10f64.powf(u_a), u_b)).unwrap();
        let here = contains(AXB, &Window::strip(x.clone(), delta, a_max * x.a()), &y);
        let rel = AXB.multiply(&AXB.invert(&x).unwrap(), &y).unwrap();
        let at_e = contains(AXB, &Window::strip(AXB.identity(), delta, a_max), &rel);
        prop_assert_eq!(here, at_e);
    }

    #[test]
    fn shifts_are_flow_equivariant(
        (m, shift, window, intensity, z) in prop_oneof![
            element(E1).prop_map(|z| (E1, PointShiftSpec::RightNeighbor, Window::interval(-20.0, 20.0), 1.0, z)),
            element(E2).prop_map(|z| (E2, PointShiftSpec::NearestNeighbor, Window::cube(2, 3.0), 2.0, z)),
            element(T2).prop_map(|z| (T2, PointShiftSpec::NearestNeighbor, Window::Whole, 50.0, z)),
            element(AXB).prop_map(|z| (AXB, PointShiftSpec::Strip { delta: 0.1, a_max: 100.0 }, Window::cone(1.0, 0.1, 1e4), 1.0, z)),
        ],
        seed in any::<u64>(),
    ) {
        let mut rng = RngStream::new(seed, 0).rng();
        let c = sample(ProcessSpec::Poisson { intensity }, m, &window, &mut rng).unwrap();
        let moved = c.translated(&z).unwrap();
        for x in 0..c.len() {
            let before = apply(&shift, &c, x).unwrap();
            if before.censored {
                continue;
            }
            let after = apply(&shift, &moved, x).unwrap();
            prop_assert!(!after.censored);
            let (hi, hj) = (before.image.unwrap(), after.image.unwrap());
            prop_assert_eq!(hi, hj);
            let expected = m.multiply(&z, c.point(hi)).unwrap();
            prop_assert!(scaled_deviation(m, &expected, moved.point(hj)) <= 1e-12);
        }
    }

    #[test]
    fn right_neighbor_reverse_inverts_apply(seed in any::<u64>(), lattice in any::<bool>()) {
        let mut rng = RngStream::new(seed, 0).rng();
        let process = if lattice {
            ProcessSpec::Lattice { spacing: 0.7 }
        } else {
            ProcessSpec::Poisson { intensity: 1.0 }
        };
        let c = sample(process, E1, &Window::interval(-15.0, 15.0), &mut rng).unwrap();
        let shift = PointShiftSpec::RightNeighbor;
        for x in 0..c.len() {
            let fwd = apply(&shift, &c, x).unwrap();
            if let Some(h) = fwd.image {
                let back = reverse(&shift, &c, h).unwrap();
                prop_assert_eq!(back.image, Some(x));
            }
            let back = reverse(&shift, &c, x).unwrap();
            if let Some(y) = back.image {
                prop_assert_eq!(apply(&shift, &c, y).unwrap().image, Some(x));
                prop_assert_eq!(preimages(&shift, &c, x).unwrap(), vec![y]);
            }
        }
    }

    #[test]
    fn embedding_round_trip_and_rebasing(
        (m, rule, window, intensity) in prop_oneof![
            Just((E1, GraphRule::Delaunay1d, Window::interval(-5.0, 5.0), 2.0)),
            Just((E1, GraphRule::ShiftGraph(PointShiftSpec::Identity), Window::interval(-1.0, 1.0), 1e-9)),
            Just((T2, GraphRule::Complete, Window::Whole, 10.0)),
            Just((AXB, GraphRule::Complete, Window::cone(1.0, 0.2, 5.0), 2.0)),
        ],
        seed in any::<u64>(),
    ) {
        let mut rng = RngStream::new(seed, 0).rng();
        let c = palm_sample(ProcessSpec::Poisson { intensity }, m, &window, &mut rng).unwrap();
        let net = network_from_config(&c, rule).unwrap();
        let t = embedding_map(&net).unwrap();
        let back = reconstruct(&net).unwrap();
        prop_assert_eq!(back.len(), c.len());
        for (p, q) in back.points.iter().zip(&c.points) {
            prop_assert!(m.coord_deviation(p, q) <= 1e-12);
        }
        let parsed = parse_network(&write_network(&net)).unwrap();
        prop_assert_eq!(&parsed, &net);
        for v in 0..net.len() {
            let rebased = reconstruct(&net.rerooted(v).unwrap()).unwrap();
            let tv_inv = m.invert(&t[v]).unwrap();
            for (u, p) in rebased.points.iter().enumerate() {
                let want = m.multiply(&tv_inv, &t[u]).unwrap();
                prop_assert!(m.coord_deviation(p, &want) <= 1e-12);
            }
        }
    }

    #[test]
    fn torus_coordinates_stay_in_unit_interval(x in element(T2), y in element(T2)) {
        for p in [T2.multiply(&x, &y).unwrap(), T2.invert(&x).unwrap()] {
            prop_assert!(p.coords().iter().all(|&c| (0.0..1.0).contains(&c)));
        }
    }
}
