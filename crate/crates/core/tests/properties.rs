use nalgebra::DMatrix;
use proptest::prelude::*;

use nspdpp_core::dpp::subset_probability;
use nspdpp_core::format::{format_collection, format_database, parse_database, parse_patterns};
use nspdpp_core::implicit::{cirs, dependent_itemsets, inemi, mine_link_universe};
use nspdpp_core::metrics::{avg_item_frequency, item_coverage, sequence_coverage};
use nspdpp_core::miner::mine_nsp;
use nspdpp_core::nemi::nemi;
use nspdpp_core::rng::seeded;
use nspdpp_core::sampler::MixtureSampler;
use nspdpp_core::seq::{contains_negative, contains_positive, support};
use nspdpp_core::{esp, DataSequence, DualKernel, Element, Item, Pattern, SelectionMode, SequenceDatabase};

const UNIVERSE: u32 = 4;

fn itemset() -> impl Strategy<Value = Vec<Item>> {
    (1u16..(1 << UNIVERSE)).prop_map(|m| (0..UNIVERSE).filter(|b| m & (1 << b) != 0).map(|b| b + 1).collect())
}

fn sequence() -> impl Strategy<Value = DataSequence> {
    prop::collection::vec(itemset(), 1..6).prop_map(|e| DataSequence::new(e).unwrap())
}

fn database() -> impl Strategy<Value = SequenceDatabase> {
    prop::collection::vec(sequence(), 1..10).prop_map(|s| SequenceDatabase::new(s, UNIVERSE).unwrap())
}

fn pattern() -> impl Strategy<Value = Pattern> {
    prop::collection::vec((itemset(), any::<bool>()), 1..5).prop_filter_map("format constraints", |elems| {
        Pattern::new(
            elems
                .iter()
                .map(|(items, neg)| if *neg { Element::neg(items) } else { Element::pos(items) })
                .collect(),
        )
        .ok()
    })
}

fn features(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-2.0f64..2.0, rows * cols).prop_map(move |v| DMatrix::from_vec(rows, cols, v))
}

fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..(1 << n))
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|i| m & (1 << i) != 0).collect())
        .collect()
}

proptest! {
    #[test]
    fn nemi_is_bounded_and_symmetric(a in 0.0f64..=1.0, b in 0.0f64..=1.0, t in 0.0f64..=1.0) {
        let joint = t * a.min(b);
        let v = nemi(a, b, joint);
        prop_assert!((-1.0..=1.0).contains(&v));
        prop_assert_eq!(v, nemi(b, a, joint));
    }

    #[test]
    fn negative_containment_needs_the_mps(s in sequence(), p in pattern()) {
        if contains_negative(&s, &p) {
            prop_assert!(contains_positive(&s, p.mps()));
        }
        if p.is_positive() {
            prop_assert_eq!(contains_negative(&s, &p), contains_positive(&s, p.mps()));
        }
    }

    #[test]
    fn support_is_bounded_by_the_mps(db in database(), p in pattern()) {
        let mps: Vec<&[Item]> = p.mps();
        let mps = Pattern::positive(&mps);
        prop_assert!(support(&p, &db) <= support(&mps, &db));
    }

    #[test]
    fn database_text_round_trips(db in database()) {
        let parsed = parse_database(&format_database(&db), Some(UNIVERSE)).unwrap();
        prop_assert_eq!(parsed.sequences(), db.sequences());
    }

    #[test]
    fn esp_scales_homogeneously(lambda in prop::collection::vec(0.0f64..2.0, 1..10), c in 0.1f64..3.0) {
        let n = lambda.len();
        let scaled: Vec<f64> = lambda.iter().map(|l| l * c).collect();
        let (a, b) = (esp(&lambda, n), esp(&scaled, n));
        for k in 0..=n {
            let want = a.total(k) * c.powi(k as i32);
            prop_assert!((b.total(k) - want).abs() <= 1e-9 * want.abs().max(1.0));
        }
    }

    #[test]
    fn cirs_is_the_minimum_inemi(db in database(), i in 1u32..=UNIVERSE, j in 1u32..=UNIVERSE, h in 1u32..=UNIVERSE) {
        prop_assume!(h != i && h != j);
        let c = cirs(&[i, j], &[h], &db).unwrap();
        let (a, b) = (inemi(i, &[h], &db).unwrap(), inemi(j, &[h], &db).unwrap());
        prop_assert_eq!(c, a.min(b));
    }

    #[test]
    fn dependents_shrink_as_epsilon_grows(db in database(), i in 1u32..=UNIVERSE, lo in -1.0f64..0.0, hi in -1.0f64..0.0) {
        let (lo, hi) = (lo.min(hi), lo.max(hi));
        let universe = mine_link_universe(&db, 0.1, 2).unwrap();
        let strict = dependent_itemsets(i, &universe, &db, hi);
        let loose = dependent_itemsets(i, &universe, &db, lo);
        prop_assert!(strict.iter().all(|h| loose.contains(h)));
    }

    #[test]
    fn metrics_stay_in_range(db in database(), s in prop::collection::vec(pattern(), 1..6)) {
        let refs: Vec<&Pattern> = s.iter().collect();
        let sc = sequence_coverage(&refs, &db);
        let ic = item_coverage(&refs, &db);
        let af = avg_item_frequency(&refs).unwrap();
        prop_assert!((0.0..=1.0).contains(&sc));
        prop_assert!((0.0..=1.0).contains(&ic));
        prop_assert!(af > 0.0 && af <= 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kdpp_probabilities_sum_to_one(b in features(4, 6), k in 1usize..=3) {
        let kernel = DualKernel::from_features(b);
        prop_assume!(kernel.rank() >= k);
        let total: f64 = k_subsets(6, k).iter().map(|ids| subset_probability(ids, &kernel, k).unwrap()).sum();
        prop_assert!((total - 1.0).abs() < 1e-8);
    }

    #[test]
    fn kdpp_ignores_global_quality_scale(b in features(4, 6), c in 0.2f64..5.0) {
        let kernel = DualKernel::from_features(b.clone());
        prop_assume!(kernel.rank() >= 2);
        let scaled = DualKernel::from_features(b * c);
        for ids in k_subsets(6, 2) {
            let (p, q) = (subset_probability(&ids, &kernel, 2).unwrap(), subset_probability(&ids, &scaled, 2).unwrap());
            prop_assert!((p - q).abs() < 1e-9);
        }
    }

    #[test]
    fn samples_have_k_distinct_patterns(a in features(5, 9), b in features(5, 9), w in 0.0f64..=1.0, seed in any::<u64>()) {
        let (ka, kb) = (DualKernel::from_features(a), DualKernel::from_features(b));
        let k = ka.rank().min(kb.rank()).min(3);
        prop_assume!(k >= 1);
        let sampler = MixtureSampler::new(&[(w, &ka), (1.0 - w, &kb)], k).unwrap();
        let mut rng = seeded(seed);
        for mode in [SelectionMode::Algorithm1, SelectionMode::ExactMixture] {
            let mut ids = sampler.sample(&mut rng, mode).chosen;
            ids.sort_unstable();
            ids.dedup();
            prop_assert_eq!(ids.len(), k);
            prop_assert!(ids.iter().all(|&i| i < 9));
        }
    }

    #[test]
    fn mined_supports_are_exact_and_round_trip(db in database(), min_sup in 0.3f64..0.9) {
        let coll = mine_nsp(&db, min_sup).unwrap();
        for (_, p, s) in coll.iter() {
            prop_assert!(s >= min_sup - 1e-12);
            prop_assert!((support(p, &db) - s).abs() < 1e-12);
        }
        let back = parse_patterns(&format_collection(&coll)).unwrap().into_collection().unwrap();
        prop_assert_eq!(back.patterns(), coll.patterns());
        prop_assert_eq!(back.supports(), coll.supports());
    }
}
