use causalbox::boxes::{
    embed_general, extend_with_intervention, marginalize, marginalize_further, random_causal_box, random_table_box,
    validate_box, CorrelationBox,
};
use causalbox::layouts::{Layout, Preset};
use causalbox::ons::{check_ons, enumerate_constraints, nonempty_subsets, separation_table};
use causalbox::protocol::{build_protocol, exhaustive_protocol_search, hybrid_localize};
use causalbox::rational::rat;
use causalbox::Rational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn layout() -> impl Strategy<Value = Layout> {
    prop_oneof![
        Just(Preset::JammingTriangle.layout()),
        Just(Preset::FourParty.layout()),
        Just(Preset::BellStandard.layout()),
        Just(Preset::SixConfig.layout()),
    ]
}

fn table_box(l: &Layout, seed: u64) -> CorrelationBox {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_table_box(l.backend.clone(), l.binary_inputs(), l.binary_outputs(), &mut rng).unwrap()
}

fn causal_box(l: &Layout, seed: u64, strategies: usize) -> CorrelationBox {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_causal_box(
        l.backend.clone(),
        l.binary_inputs(),
        l.binary_outputs(),
        strategies,
        &mut rng,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_boxes_are_valid(l in layout(), seed in any::<u64>()) {
        prop_assert!(validate_box(&table_box(&l, seed)).is_valid());
        prop_assert!(validate_box(&causal_box(&l, seed, 3)).is_valid());
    }

    #[test]
    fn causal_mechanisms_satisfy_ons(l in layout(), seed in any::<u64>(), k in 1usize..5) {
        let b = causal_box(&l, seed, k);
        prop_assert!(check_ons(&b).unwrap().is_empty());
        prop_assert!(exhaustive_protocol_search(&b).unwrap().is_empty());
    }

    #[test]
    fn separated_pairs_are_closed_under_subsets(l in layout()) {
        let b = table_box(&l, 0);
        let table = separation_table(&b).unwrap();
        let lookup = |f: &[usize], g: &[usize]| {
            table.iter().find(|((tf, tg), _)| tf == f && tg == g).unwrap().1.is_separated()
        };
        for ((f, g), v) in &table {
            if !v.is_separated() {
                continue;
            }
            for sf in nonempty_subsets(f.len()) {
                for sg in nonempty_subsets(g.len()) {
                    let f2: Vec<usize> = sf.iter().map(|&i| f[i]).collect();
                    let g2: Vec<usize> = sg.iter().map(|&j| g[j]).collect();
                    prop_assert!(lookup(&f2, &g2));
                }
            }
        }
    }

    #[test]
    fn every_violation_yields_a_verified_protocol(l in layout(), seed in any::<u64>()) {
        let b = table_box(&l, seed);
        for inst in enumerate_constraints(&b).unwrap() {
            prop_assert!(inst.verify(&b).unwrap());
        }
        let violations = check_ons(&b).unwrap();
        for v in violations.iter().take(8) {
            let step = hybrid_localize(&b, v).unwrap();
            prop_assert!(v.instance.f.contains(&step.input));
            let p = build_protocol(&b, v).unwrap();
            prop_assert!(p.verify(&b).unwrap());
            prop_assert!(p.exact_tv() > Rational::from_integer(0.into()));
        }
        // converse: a protocol exists exactly when some constraint fails
        let protocols = exhaustive_protocol_search(&b).unwrap();
        prop_assert_eq!(protocols.is_empty(), violations.is_empty());
        for p in &protocols {
            prop_assert!(p.verify(&b).unwrap());
        }
    }

    #[test]
    fn marginalization_composes(l in layout(), seed in any::<u64>()) {
        let b = table_box(&l, seed);
        let n = b.outputs().len();
        let all: Vec<usize> = (0..n).collect();
        for x in b.setting_radix().iter() {
            let full = marginalize(&b, &all, &x).unwrap();
            for g in nonempty_subsets(n) {
                let direct = marginalize(&b, &g, &x).unwrap();
                let chained = marginalize_further(&full, &g).unwrap();
                prop_assert_eq!(&direct.probs, &chained.probs);
                let total: Rational = direct.probs.iter().sum();
                prop_assert_eq!(total, rat(1, 1));
            }
        }
    }

    #[test]
    fn embedding_round_trips(l in layout(), seed in any::<u64>()) {
        let b = table_box(&l, seed);
        let e = embed_general(&b);
        prop_assert_eq!(e.restrict(&b), b.table().to_vec());
        let mass: Rational = e.table.iter().sum();
        // padded settings carry no mass
        prop_assert_eq!(mass, rat(b.setting_count() as i64, 1));
    }

    #[test]
    fn interventions_respect_pre_and_post(l in layout(), seed in any::<u64>(), j in 0usize..3) {
        let b = causal_box(&l, seed, 2);
        let j = j % b.outputs().len();
        let rest = b.outcome_count() / 2;
        let post = vec![vec![vec![rat(1, rest as i64); rest]; b.setting_count()]; 2];
        let at = b.outputs()[j].location.clone();
        let ext = extend_with_intervention(&b, j, at, &post).unwrap();
        prop_assert!(ext.check_ppre());
        prop_assert!(ext.check_ppost());
        prop_assert!(validate_box(&ext.extended).is_valid());
    }
}
