use causalbox::causal_geometry::{
    apply_poincare, common_future_nonempty, operationally_separated, strictly_precedes, Backend, Event, FiniteOrder,
    PoincareMap,
};
use causalbox::layouts::Preset;
use causalbox::rational::{int, rat};
use causalbox::Rational;
use proptest::prelude::*;

fn half(k: i64) -> Rational {
    rat(k, 2)
}

fn mink1_event() -> impl Strategy<Value = Event> {
    (-8i64..=8, -8i64..=8).prop_map(|(t, x)| Event::point(half(t), vec![half(x)]))
}

fn mink2_event() -> impl Strategy<Value = Event> {
    (-6i64..=6, -6i64..=6, -6i64..=6).prop_map(|(t, x, y)| Event::point(int(t), vec![int(x), int(y)]))
}

fn black_hole() -> Backend {
    Preset::BlackHole.layout().backend
}

fn bh_event() -> impl Strategy<Value = Event> {
    // every point with t < 1 lies below the singularity polyline
    (-12i64..2, -16i64..=16).prop_map(|(t, x)| Event::point(half(t), vec![half(x)]))
}

/// A random order on 7 elements generated by covers `a < b`.
fn finite_order() -> impl Strategy<Value = Backend> {
    proptest::collection::vec(any::<bool>(), 21).prop_map(|bits| {
        let mut covers = Vec::new();
        let mut k = 0;
        for a in 0..7 {
            for b in a + 1..7 {
                if bits[k] {
                    covers.push((a, b));
                }
                k += 1;
            }
        }
        Backend::FiniteOrder(FiniteOrder::from_covers(7, &covers).unwrap())
    })
}

fn element() -> impl Strategy<Value = Event> {
    (0usize..7).prop_map(Event::element)
}

/// `(backend, events)` over the three decidable backends.
fn scenario(n: usize) -> impl Strategy<Value = (Backend, Vec<Event>)> {
    prop_oneof![
        proptest::collection::vec(mink1_event(), n).prop_map(|v| (Backend::minkowski(1), v)),
        proptest::collection::vec(bh_event(), n).prop_map(|v| (black_hole(), v)),
        (finite_order(), proptest::collection::vec(element(), n)),
    ]
}

proptest! {
    #[test]
    fn strict_precedence_is_irreflexive_and_transitive((b, e) in scenario(3)) {
        prop_assert!(!strictly_precedes(&b, &e[0], &e[0]).unwrap());
        if strictly_precedes(&b, &e[0], &e[1]).unwrap() && strictly_precedes(&b, &e[1], &e[2]).unwrap() {
            prop_assert!(strictly_precedes(&b, &e[0], &e[2]).unwrap());
        }
    }

    #[test]
    fn single_receiver_reduces_to_precedence((b, e) in scenario(4)) {
        let (q, ps) = (&e[0], &e[1..]);
        let v = operationally_separated(&b, std::slice::from_ref(q), ps).unwrap();
        let free = ps.iter().all(|p| !strictly_precedes(&b, p, q).unwrap());
        prop_assert_eq!(v.is_separated(), free);
        prop_assert!(!v.is_unknown());
    }

    #[test]
    fn sender_before_a_receiver_blocks((b, e) in scenario(5)) {
        let (qs, ps) = (&e[..3], &e[3..]);
        let v = operationally_separated(&b, qs, ps).unwrap();
        let blocked = ps.iter().any(|p| qs.iter().any(|q| strictly_precedes(&b, p, q).unwrap()));
        if blocked {
            prop_assert!(v.is_not_separated());
        }
        for q in qs {
            if operationally_separated(&b, std::slice::from_ref(q), ps).unwrap().is_not_separated() {
                prop_assert!(v.is_not_separated());
            }
        }
    }

    #[test]
    fn separation_is_monotone((b, e) in scenario(5)) {
        // receivers: shrink qs' = e[0..3] to qs = e[0..2]
        let ps = &e[3..4];
        let big = operationally_separated(&b, &e[0..3], ps).unwrap();
        let small = operationally_separated(&b, &e[0..2], ps).unwrap();
        if big.is_separated() {
            prop_assert!(small.is_separated());
        }
        // senders: grow ps = e[3..4] to ps' = e[3..5]
        let qs = &e[0..2];
        let few = operationally_separated(&b, qs, &e[3..4]).unwrap();
        let many = operationally_separated(&b, qs, &e[3..5]).unwrap();
        if few.is_not_separated() {
            prop_assert!(many.is_not_separated());
        }
    }

    #[test]
    fn certificates_reverify((b, e) in scenario(5)) {
        let (qs, ps) = (&e[..3], &e[3..]);
        let v = operationally_separated(&b, qs, ps).unwrap();
        prop_assert!(v.verify(&b, qs, ps).unwrap());
        if let Some(q) = v.gathering_point() {
            prop_assert!(v.is_separated());
            for p in ps {
                prop_assert!(!strictly_precedes(&b, p, q).unwrap());
            }
        }
    }

    #[test]
    fn empty_common_future_is_never_separated((b, e) in scenario(4)) {
        let (qs, p) = (&e[..3], &e[3]);
        let (nonempty, _) = common_future_nonempty(&b, qs).unwrap();
        if !nonempty {
            prop_assert!(operationally_separated(&b, qs, std::slice::from_ref(p)).unwrap().is_not_separated());
        }
    }

    #[test]
    fn single_sender_in_two_plus_one(e in proptest::collection::vec(mink2_event(), 3)) {
        let b = Backend::minkowski(2);
        let v = operationally_separated(&b, &e[..2], &e[2..]).unwrap();
        if !v.is_unknown() {
            prop_assert!(v.verify(&b, &e[..2], &e[2..]).unwrap());
        }
        if e[..2].iter().any(|q| strictly_precedes(&b, &e[2], q).unwrap()) {
            prop_assert!(v.is_not_separated());
        }
    }

    #[test]
    fn poincare_maps_are_exact_isometries(
        k in 1i64..6,
        (a, bb, c) in prop_oneof![Just((3i64, 4i64, 5i64)), Just((5, 12, 13)), Just((8, 15, 17))],
        shift in proptest::collection::vec(-5i64..=5, 3),
        e in proptest::collection::vec(mink2_event(), 2),
    ) {
        let map = PoincareMap::boost(2, 1, &rat(k + 1, k))
            .compose(&PoincareMap::pythagorean_rotation(2, 1, 2, a, bb, c))
            .with_translation(shift.into_iter().map(int).collect());
        prop_assert!(map.is_lorentz());
        let b = Backend::minkowski(2);
        let (lp, lq) = (apply_poincare(&b, &map, &e[0]).unwrap(), apply_poincare(&b, &map, &e[1]).unwrap());
        prop_assert_eq!(strictly_precedes(&b, &e[0], &e[1]).unwrap(), strictly_precedes(&b, &lp, &lq).unwrap());
        let back = map.inverse();
        prop_assert_eq!(apply_poincare(&b, &back, &lp).unwrap(), e[0].clone());
    }
}
