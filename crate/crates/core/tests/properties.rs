use std::collections::BTreeSet;

use ccwlan_core::delivery::{build_ccc_messages, build_codewords, NullingPlan};
use ccwlan_core::experiment::emit_cdf;
use ccwlan_core::fairness::{maximize_fairness, FairnessObjective, SolverOptions};
use ccwlan_core::placement::{PlacementParams, ProfileAssignment, Requests, SubpacketIndex};
use ccwlan_core::policy::RateVector;
use ccwlan_core::topology::{ActivationPattern, NetworkTopology};
use proptest::prelude::*;

fn rate_vectors(max_users: usize, max_vectors: usize) -> impl Strategy<Value = Vec<RateVector>> {
    (1..=max_users, 1..=max_vectors).prop_flat_map(|(k, n)| {
        prop::collection::vec(
            prop::collection::vec(prop_oneof![Just(0.0), (1u32..=12).prop_map(|d| 1.0 / d as f64)], k)
                .prop_map(RateVector),
            n,
        )
    })
}

/// Decodes a schedule the slow way: a user learns a term when it is the
/// only one in the transmission it neither caches nor has nulled at it.
fn decode(txs: &[ccwlan_core::Transmission], user: usize, profile: usize) -> BTreeSet<SubpacketIndex> {
    let mut got = BTreeSet::new();
    for tx in txs {
        let unknown: Vec<_> = tx
            .terms
            .iter()
            .filter(|t| !t.nulled_users.contains(&user))
            .filter(|t| !t.subpacket.profile_set.contains(profile))
            .collect();
        if let [one] = unknown.as_slice() {
            if one.intended_user == user {
                got.insert(one.subpacket);
            }
        }
    }
    got
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fairness_weights_form_a_distribution(vectors in rate_vectors(5, 6)) {
        prop_assume!(vectors.iter().any(|v| v.0.iter().any(|&r| r > 0.0)));
        let p = maximize_fairness(&vectors, &FairnessObjective::proportional(), &SolverOptions::default()).unwrap();
        let total: f64 = p.weights.iter().map(|w| w.weight).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!(p.weights.iter().all(|w| w.weight > 0.0));
        // the trace never decreases
        prop_assert!(p.diagnostics.trace.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        prop_assert!(p.diagnostics.final_gap <= 1e-6 || p.diagnostics.cap_hit);
    }

    #[test]
    fn fairness_is_scale_invariant(vectors in rate_vectors(4, 5), scale in 0.1f64..10.0) {
        prop_assume!(vectors.iter().any(|v| v.0.iter().any(|&r| r > 0.0)));
        let scaled: Vec<RateVector> = vectors.iter().map(|v| RateVector(v.0.iter().map(|r| r * scale).collect())).collect();
        let obj = FairnessObjective::proportional();
        let a = maximize_fairness(&vectors, &obj, &SolverOptions::default()).unwrap();
        let b = maximize_fairness(&scaled, &obj, &SolverOptions::default()).unwrap();
        let counted = a.counted().iter().filter(|&&c| c).count() as f64;
        prop_assert!((b.utility - a.utility - counted * scale.ln()).abs() < 1e-4);
    }

    #[test]
    fn dominated_vectors_do_not_change_the_optimum(vectors in rate_vectors(4, 4), shrink in 0.0f64..1.0, pick in 0usize..4) {
        prop_assume!(vectors.iter().any(|v| v.0.iter().any(|&r| r > 0.0)));
        let mut extended = vectors.clone();
        let base = &vectors[pick % vectors.len()];
        extended.push(RateVector(base.0.iter().map(|r| r * shrink).collect()));
        let obj = FairnessObjective::sum_rate();
        let a = maximize_fairness(&vectors, &obj, &SolverOptions::default()).unwrap();
        let b = maximize_fairness(&extended, &obj, &SolverOptions::default()).unwrap();
        prop_assert!((a.utility - b.utility).abs() < 1e-6);
    }

    #[test]
    fn codewords_deliver_exactly_the_missing_subpackets(
        l in 1usize..=6,
        t_seed in 0usize..6,
        mask in 1u32..64,
    ) {
        let t = t_seed % l;
        let params = PlacementParams::new(l, t).unwrap();
        let present: Vec<usize> = (0..l).filter(|p| mask & (1 << p) != 0).collect();
        prop_assume!(!present.is_empty());
        let a = ProfileAssignment::new(present.clone(), l).unwrap();
        let users: Vec<usize> = (0..present.len()).collect();
        let requests = Requests::distinct(users.len());
        let txs = build_codewords(0, &users, &a, &requests, &params, &[]).unwrap();
        for &k in &users {
            let profile = present[k];
            let expected: BTreeSet<SubpacketIndex> = params
                .subpacket_indices()
                .into_iter()
                .filter(|s| !s.contains(profile))
                .map(|s| SubpacketIndex::new(k, s))
                .collect();
            prop_assert_eq!(decode(&txs, k, profile), expected);
        }
    }

    #[test]
    fn ccc_messages_deliver_exactly_the_missing_subpackets(
        profiles in prop::collection::vec(0usize..4, 1..8),
        t in 1usize..3,
        mux in 1usize..4,
    ) {
        let l = 4;
        let params = PlacementParams::new(l, t).unwrap();
        let a = ProfileAssignment::new(profiles.clone(), l).unwrap();
        // at most `mux` users per profile form a valid feasible set
        let mut users = Vec::new();
        let mut per = [0usize; 4];
        for (k, &p) in profiles.iter().enumerate() {
            if per[p] < mux {
                per[p] += 1;
                users.push(k);
            }
        }
        let requests = Requests::distinct(profiles.len());
        let msgs = build_ccc_messages(0, &users, &a, &requests, &params, mux).unwrap();
        for &k in &users {
            let expected: BTreeSet<SubpacketIndex> = params
                .subpacket_indices()
                .into_iter()
                .filter(|s| !s.contains(profiles[k]))
                .map(|s| SubpacketIndex::new(k, s))
                .collect();
            prop_assert_eq!(decode(&msgs, k, profiles[k]), expected);
        }
        prop_assert!(msgs.iter().all(|m| m.terms.iter().all(|t| t.nulled_users.len() < mux)));
    }

    #[test]
    fn coverage_sets_are_disjoint_and_shrink_with_more_helpers(
        k in 1usize..8,
        seed_trans in prop::collection::vec(prop::collection::vec(any::<bool>(), 8), 3),
        seed_extra in prop::collection::vec(prop::collection::vec(any::<bool>(), 8), 3),
        bits in prop::collection::vec(any::<bool>(), 3),
    ) {
        let trans: Vec<Vec<usize>> = seed_trans.iter().map(|r| (0..k).filter(|&u| r[u]).collect()).collect();
        let inter: Vec<Vec<usize>> = (0..3)
            .map(|h| (0..k).filter(|&u| seed_trans[h][u] || seed_extra[h][u]).collect())
            .collect();
        let topo = NetworkTopology::from_reachability(k, &trans, &inter).unwrap();
        let pattern = ActivationPattern::from_bits(&bits);
        let cov = topo.coverage_sets(&pattern, &NullingPlan::default()).unwrap();
        let mut seen = BTreeSet::new();
        for users in cov.values() {
            for &u in users {
                prop_assert!(seen.insert(u), "user {} covered twice", u);
            }
        }
        // switching on one more helper never enlarges anyone else's coverage
        for extra in (0..3).filter(|&h| !bits[h]) {
            let mut more = bits.clone();
            more[extra] = true;
            let bigger = topo.coverage_sets(&ActivationPattern::from_bits(&more), &NullingPlan::default()).unwrap();
            for (h, users) in &bigger {
                if *h != extra {
                    let before: BTreeSet<_> = cov.get(h).into_iter().flatten().collect();
                    prop_assert!(users.iter().all(|u| before.contains(u)));
                }
            }
        }
    }

    #[test]
    fn cdf_is_monotone_and_ends_at_one(rates in prop::collection::vec(0.0f64..2.0, 1..50)) {
        let rows = emit_cdf(&rates);
        prop_assert!(rows.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1));
        prop_assert!((rows.last().unwrap().1 - 1.0).abs() < 1e-12);
        let distinct: BTreeSet<u64> = rates.iter().map(|r| r.to_bits()).collect();
        prop_assert_eq!(rows.len(), distinct.len());
    }
}
