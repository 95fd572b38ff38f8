//! Rewriting laws over generated steps: the result is always a valid
//! hierarchy, untouched elements survive unchanged, flattening commutes,
//! and the rewiring arithmetic holds.

use ahp_core::{apply, check_flatten_commutes, find_matches, Rewiring};
use ahp_gen::{GenParams, ModelGen, RuleParams};
use proptest::prelude::*;

fn step_case(
    seed: u64,
) -> (
    ahp_core::Rule,
    ahp_core::AhpGraph,
    ahp_core::Signature,
    Vec<ahp_core::Match>,
) {
    let mut gen = ModelGen::new(seed);
    let host = gen.ahp(&GenParams::default());
    let rule = gen.applicable_rule(&host, &RuleParams::default());
    let matches = find_matches(&rule, &host);
    let sig = gen.signature().clone();
    (rule, host, sig, matches)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rewriting_preserves_validity(seed in any::<u64>()) {
        let (rule, host, sig, matches) = step_case(seed);
        prop_assert!(!matches.is_empty());
        for m in matches.iter().take(3) {
            let applied = apply(&rule, &host, m).unwrap();
            prop_assert_eq!(applied.result.validate(&sig, false), vec![]);
        }
    }

    #[test]
    fn untouched_elements_keep_their_records(seed in any::<u64>()) {
        let (rule, host, _, matches) = step_case(seed);
        let m = &matches[0];
        let applied = apply(&rule, &host, m).unwrap();
        for (id, n) in applied.result.top().nodes() {
            if let Some(original) = host.top().node(id) {
                prop_assert!(!m.image.nodes.contains(&id));
                prop_assert_eq!(&original.record, &n.record);
                prop_assert_eq!(&original.ports, &n.ports);
            }
        }
        for (id, e) in applied.result.top().edges() {
            if let Some(original) = host.top().edge(id) {
                prop_assert_eq!(original, e);
            }
        }
    }

    #[test]
    fn flattening_commutes_on_graph_variable_free_steps(seed in any::<u64>()) {
        let (rule, host, _, matches) = step_case(seed);
        if rule.lhs.has_graph_vars() || rule.rhs.has_graph_vars() {
            return Ok(());
        }
        for m in matches.iter().take(2) {
            prop_assert!(check_flatten_commutes(&rule, &host, m).unwrap());
        }
    }

    #[test]
    fn bridge_fan_out_counts(degree in 0usize..6, fanout in 1usize..4) {
        let mut gen = ModelGen::new(degree as u64 * 31 + fanout as u64);
        let (host, rule) = gen.bridge_case(degree, fanout);
        let matches = find_matches(&rule, &host);
        prop_assert_eq!(matches.len(), 1);
        let applied = apply(&rule, &host, &matches[0]).unwrap();
        prop_assert_eq!(applied.result.top().edge_count(), degree * fanout);
        prop_assert_eq!(applied.result.validate(gen.signature(), false), vec![]);
    }

    #[test]
    fn wire_product_counts(k1 in 0usize..5, k2 in 0usize..5) {
        let mut gen = ModelGen::new(k1 as u64 * 17 + k2 as u64);
        let (host, rule) = gen.wire_case(k1, k2);
        let matches = find_matches(&rule, &host);
        prop_assert_eq!(matches.len(), 1);
        let applied = apply(&rule, &host, &matches[0]).unwrap();
        let wire_edges = applied
            .rewirings
            .iter()
            .filter(|r| matches!(r, Rewiring::WireEdge { .. }))
            .count();
        prop_assert_eq!(wire_edges, k1 * k2);
        prop_assert_eq!(applied.result.top().edge_count(), k1 * k2);
    }
}
