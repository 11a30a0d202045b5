mod common;

use std::collections::BTreeMap;
use std::sync::OnceLock;

use milw::construction::{lemma_step, verify_step};
use milw::order::{canonical_code, enumerate_orders, Labeling, OrderKind};
use milw::pmorphism::OrderMap;
use milw::semantics::{extension, frame_valid, Model};
use milw::{parse, FinOrder, Formula, Limits, Mode};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(Formula::Falsum),
        Just(Formula::Verum),
        prop::sample::select(vec!["p", "q", "r"]).prop_map(Formula::prop),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            inner.clone().prop_map(Formula::past),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::fuse(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::residual(a, b)),
        ]
    })
}

/// A small order plus a valuation of p, q, r, all derived from a seed.
fn model(seed: u64, n: usize, poset: bool) -> (common::Rel, Model, BTreeMap<String, Vec<bool>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = if poset {
        common::random_poset(&mut rng, n, 0.4)
    } else {
        common::random_preorder(&mut rng, n, 0.3)
    };
    let mut m = Model::new(common::order_of(&r));
    let mut raw = BTreeMap::new();
    for l in ["p", "q", "r"] {
        let bits: Vec<bool> = (0..n).map(|_| rand::Rng::gen_bool(&mut rng, 0.5)).collect();
        let set = m.frame.set_of((0..n).filter(|&i| bits[i]));
        m.valuation.insert(l.to_string(), set);
        raw.insert(l.to_string(), bits);
    }
    (r, m, raw)
}

fn permuted(order: &FinOrder, perm: &[usize]) -> FinOrder {
    let n = order.len();
    let mut rel = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            rel[perm[i]][perm[j]] = order.leq(i, j);
        }
    }
    FinOrder::validate(milw::order::default_names(n), &rel).unwrap()
}

/// Posets of 4 to 6 points (up to isomorphism) with a violating triple.
fn violating_bases() -> &'static [FinOrder] {
    static BASES: OnceLock<Vec<FinOrder>> = OnceLock::new();
    BASES.get_or_init(|| {
        (4..=6)
            .flat_map(|n| enumerate_orders(n, OrderKind::Poset, Labeling::UpToIso, 8).unwrap())
            .filter(|o| !o.violating_triples().unwrap().is_empty())
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn print_then_parse_is_identity(f in formula()) {
        prop_assert_eq!(parse(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn desugar_is_idempotent_and_core(f in formula()) {
        let d = f.desugar();
        prop_assert!(d.is_core());
        prop_assert_eq!(d.desugar(), d.clone());
        prop_assert_eq!(d.prop_letters(), f.prop_letters());
        prop_assert_eq!(d.modal_depth(), f.modal_depth());
    }

    #[test]
    fn substitution_commutes_with_desugar(f in formula(), a in formula(), b in formula()) {
        let sigma: BTreeMap<String, Formula> = [("p".to_string(), a), ("q".to_string(), b)].into();
        let sigma_core: BTreeMap<String, Formula> =
            sigma.iter().map(|(k, v)| (k.clone(), v.desugar())).collect();
        prop_assert_eq!(f.substitute(&sigma).desugar(), f.desugar().substitute(&sigma_core));
    }

    #[test]
    fn parser_never_panics(s in "[pq()<>*&|~\\\\ PtruefalsE-]{0,24}") {
        let _ = parse(&s);
    }

    #[test]
    fn evaluator_agrees_with_oracle(f in formula(), seed in any::<u64>(), n in 1usize..=5, poset in any::<bool>()) {
        let (r, m, raw) = model(seed, n, poset);
        for mode in Mode::BOTH {
            let ext = extension(&m, &f, mode);
            for s in 0..n {
                prop_assert_eq!(ext.contains(s), common::sat(&r, &raw, mode, s, &f), "{} at {} under {}", f, s, mode);
            }
        }
    }

    #[test]
    fn sup_fusion_implies_mub_fusion_on_posets(a in formula(), b in formula(), seed in any::<u64>(), n in 1usize..=6) {
        let (_, m, _) = model(seed, n, true);
        let phi = Formula::fuse(a, b);
        let sup = extension(&m, &phi, Mode::Sup);
        let mub = extension(&m, &phi, Mode::Mub);
        prop_assert!(sup.is_subset(&mub));
    }

    #[test]
    fn past_means_true_somewhere_below(a in formula(), seed in any::<u64>(), n in 1usize..=6, poset in any::<bool>()) {
        let (_, m, _) = model(seed, n, poset);
        let inner = extension(&m, &a, Mode::Mub);
        for mode in Mode::BOTH {
            let past = extension(&m, &Formula::past(a.clone()), mode);
            for s in 0..n {
                let below = m.frame.downset(s).ones().any(|t| inner.contains(t));
                prop_assert_eq!(past.contains(s), below);
            }
        }
    }

    #[test]
    fn validity_is_invariant_under_relabeling(f in formula(), idx in 0usize..63, perm in Just((0..4).collect::<Vec<usize>>()).prop_shuffle()) {
        let limits = Limits { valuation_bits: 12, ..Limits::default() };
        prop_assume!(f.prop_letters().len() <= 3);
        let orders = enumerate_orders(4, OrderKind::Poset, Labeling::UpToIso, 8).unwrap();
        let order = orders.get(idx % orders.total());
        let other = permuted(&order, &perm);
        prop_assert_eq!(canonical_code(&order).unwrap(), canonical_code(&other).unwrap());
        for mode in Mode::BOTH {
            let a = frame_valid(&order, &f, mode, &limits).unwrap().valid;
            let b = frame_valid(&other, &f, mode, &limits).unwrap().valid;
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn enumerated_orders_are_preorders(n in 1usize..=5, kind in prop::sample::select(vec![OrderKind::Poset, OrderKind::Preorder]), pick in any::<usize>()) {
        let stream = enumerate_orders(n, kind, Labeling::Labeled, 8).unwrap();
        let order = stream.get(pick % stream.total());
        let r = common::rel_of(&order);
        for i in 0..n {
            prop_assert!(r[i][i]);
            for j in 0..n {
                for k in 0..n {
                    prop_assert!(!(r[i][j] && r[j][k]) || r[i][k]);
                }
            }
        }
        prop_assert_eq!(order.is_poset(), common::is_antisymmetric(&r));
        if kind == OrderKind::Poset {
            prop_assert!(order.is_poset());
        }
    }

    #[test]
    fn composed_extension_maps_are_pmorphisms(pick in any::<usize>(), which in any::<usize>()) {
        let bases = violating_bases();
        let base = &bases[pick % bases.len()];
        let triples = base.violating_triples().unwrap();
        let first = lemma_step(base, triples[which % triples.len()]).unwrap();
        prop_assert!(verify_step(&first).passed());
        let again = first.extended.violating_triples().unwrap();
        prop_assume!(!again.is_empty());
        let second = milw::construction::lemma_step_at(&first.extended, again[0], 2).unwrap();
        let composed = second.f.then(&first.f).unwrap();
        prop_assert!(composed.check_all().unwrap().is_empty());
        let id = OrderMap::identity(second.extended.clone());
        prop_assert_eq!(id.then(&composed).unwrap(), composed);
    }
}
