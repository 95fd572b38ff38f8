//! The matcher against the exhaustive oracle, plus replay and determinism
//! laws, over generated (rule, host) pairs small enough to enumerate.

use ahp_core::{brute_force_matches, find_matches, verify_match};
use ahp_gen::{GenParams, ModelGen, RuleParams};
use proptest::prelude::*;

// the element bound is soft (interface carriers and loop edges may push a
// ladder slightly over), so the oracle cap sits a little above it
const ORACLE_CAP: usize = 18;

fn small_case(seed: u64) -> (ahp_core::Rule, ahp_core::AhpGraph) {
    let mut gen = ModelGen::new(seed);
    let host = gen.ahp(&GenParams {
        max_elements: 10,
        max_depth: 2,
        ladder_prob: 0.35,
        edge_prob: 0.4,
    });
    let rule = gen.applicable_rule(&host, &RuleParams::default());
    (rule, host)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matcher_agrees_with_the_oracle(seed in any::<u64>()) {
        let (rule, host) = small_case(seed);
        prop_assume!(host.element_count() <= ORACLE_CAP);
        let fast = find_matches(&rule, &host);
        let slow = brute_force_matches(&rule, &host, ORACLE_CAP).unwrap();
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn every_match_replays_against_the_laws(seed in any::<u64>()) {
        let (rule, host) = small_case(seed);
        for m in find_matches(&rule, &host) {
            prop_assert!(verify_match(&rule, &host, &m).is_ok());
        }
    }

    #[test]
    fn substituted_pattern_records_equal_their_images(seed in any::<u64>()) {
        let (rule, host) = small_case(seed);
        for m in find_matches(&rule, &host) {
            let bindings = &m.morphism.bindings;
            for (pn, hn) in &m.morphism.nodes {
                let pattern = &rule.lhs.top().node(*pn).unwrap().record;
                let image = &host.top().node(*hn).unwrap().record;
                prop_assert_eq!(&bindings.substitute_record(pattern).unwrap(), image);
            }
        }
    }

    #[test]
    fn match_lists_are_deterministic(seed in any::<u64>()) {
        let (rule, host) = small_case(seed);
        prop_assert_eq!(find_matches(&rule, &host), find_matches(&rule, &host));
    }
}
