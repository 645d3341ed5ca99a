//! Randomized invariant checks over small graphs, where every exhaustive
//! analysis is cheap enough to cross-validate against a naive reimplementation
//! or against a second route to the same answer.

use num_traits::{One, Zero};
use proptest::prelude::*;

use restake_core::analysis::{
    check_header_overcollateralization, enumerate_valid_attacks, header_max_gamma,
    is_attacking_coalition, is_gamma_slack_secure, is_secure, is_stable_attack, is_valid_attack,
    max_slack, min_attack_stake, Attack, EnumLimits, SlackStatus,
};
use restake_core::cascade::{
    flatten_cascade, reference_depth, shock_admissible, verify_cascade, worst_case_loss_global,
    worst_case_loss_local, Cascade, CascadeMode,
};
use restake_core::conditions::{
    el_condition, el_condition_local, el_condition_scaled, el_max_gamma, GammaStatus,
};
use restake_core::{rat, rat_int, Rational, RestakingGraph, ServiceSet, ValidatorSet};

fn limits() -> EnumLimits {
    EnumLimits::default()
}

/// Small random graphs: up to 3 services and 4 validators, grid-valued
/// rationals, arbitrary bipartite adjacency (services may be uncovered).
fn arb_graph() -> impl Strategy<Value = RestakingGraph> {
    (1usize..=3, 1usize..=4)
        .prop_flat_map(|(n_s, n_v)| {
            let profit = (0i64..=8, prop::sample::select(vec![1i64, 2, 4]));
            let alpha = prop::sample::select(vec![rat(1, 4), rat(1, 2), rat(3, 4), rat_int(1)]);
            let stake = (0i64..=8, prop::sample::select(vec![1i64, 2, 4]));
            (
                prop::collection::vec((profit, alpha), n_s),
                prop::collection::vec(stake, n_v),
                prop::collection::vec(0u32..(1u32 << n_v), n_s),
            )
        })
        .prop_map(|(services, stakes, adj)| {
            let svc: Vec<(String, Rational, Rational)> = services
                .into_iter()
                .enumerate()
                .map(|(i, ((n, d), alpha))| (format!("s{i}"), rat(n, d), alpha))
                .collect();
            let vals: Vec<(String, Rational)> = stakes
                .into_iter()
                .enumerate()
                .map(|(j, (n, d))| (format!("v{j}"), rat(n, d)))
                .collect();
            let mut edges = Vec::new();
            for (i, mask) in adj.iter().enumerate() {
                for (j, _) in vals.iter().enumerate() {
                    if mask & (1 << j) != 0 {
                        edges.push((format!("s{i}"), format!("v{j}")));
                    }
                }
            }
            let svc_refs: Vec<(&str, Rational, Rational)> = svc
                .iter()
                .map(|(id, p, a)| (id.as_str(), p.clone(), a.clone()))
                .collect();
            let val_refs: Vec<(&str, Rational)> =
                vals.iter().map(|(id, s)| (id.as_str(), s.clone())).collect();
            let edge_refs: Vec<(&str, &str)> =
                edges.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
            restake_core::build_graph(&svc_refs, &val_refs, &edge_refs).unwrap()
        })
}

/// Picks an arbitrary sub-bitmask of `set` using a random seed mask.
fn pick_subset_v(set: ValidatorSet, seed: u128) -> ValidatorSet {
    ValidatorSet::from_bits(set.bits() & seed)
}

fn pick_subset_s(set: ServiceSet, seed: u128) -> ServiceSet {
    ServiceSet::from_bits(set.bits() & seed)
}

/// The stability definition, verbatim: no valid proper sub-attack may spare
/// enough stake to cover the profit it walks away from.
fn naive_is_stable(g: &RestakingGraph, attack: &Attack) -> bool {
    for a_sub in attack.services.subsets() {
        for b_sub in attack.attackers.subsets() {
            let sub = Attack::new(a_sub, b_sub);
            if sub == *attack {
                continue;
            }
            if !is_valid_attack(g, &sub).unwrap() {
                continue;
            }
            let spared = g
                .total_stake(attack.attackers.difference(b_sub))
                .unwrap();
            let stranded = g.total_profit(attack.services.difference(a_sub)).unwrap();
            if spared >= stranded {
                return false;
            }
        }
    }
    true
}

/// Grows a cascade by repeatedly applying some enumerated valid attack that
/// is disjoint from everything used so far. Returns the shock and the steps.
fn grow_cascade(
    g: &RestakingGraph,
    shock_seed: u128,
    choices: &[prop::sample::Index],
) -> (ValidatorSet, Cascade) {
    let shock = pick_subset_v(g.present_validators(), shock_seed);
    let mut current = g.remove_validators(shock).unwrap();
    let mut used_s = ServiceSet::empty();
    let mut used_v = ValidatorSet::empty();
    let mut steps = Vec::new();
    for choice in choices {
        let candidates: Vec<Attack> = enumerate_valid_attacks(&current, &limits())
            .unwrap()
            .into_iter()
            .filter(|a| a.services.is_disjoint(used_s) && a.attackers.is_disjoint(used_v))
            .collect();
        if candidates.is_empty() {
            break;
        }
        let attack = candidates[choice.index(candidates.len())];
        used_s = used_s.union(attack.services);
        used_v = used_v.union(attack.attackers);
        current = current.remove_validators(attack.attackers).unwrap();
        steps.push(attack);
    }
    (
        shock,
        Cascade {
            steps,
            mode: CascadeMode::Valid,
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn serialization_round_trips(g in arb_graph()) {
        let text = restake_core::serialize_graph(&g);
        let back = restake_core::parse_graph(&text).unwrap();
        prop_assert_eq!(restake_core::serialize_graph(&back), text);
    }

    #[test]
    fn neighborhoods_are_monotone_and_additive(g in arb_graph(), seed_a in any::<u128>(), seed_b in any::<u128>()) {
        let a = pick_subset_s(g.all_services(), seed_a);
        let b = pick_subset_s(g.all_services(), seed_b);
        let na = g.neighbors_of_services(a).unwrap();
        let nb = g.neighbors_of_services(b).unwrap();
        let nab = g.neighbors_of_services(a.union(b)).unwrap();
        prop_assert!(na.is_subset(nab));
        prop_assert_eq!(nab, na.union(nb));
    }

    #[test]
    fn exclusive_validators_grow_with_the_coalition(g in arb_graph(), seed_a in any::<u128>(), seed_b in any::<u128>()) {
        let c = pick_subset_s(g.all_services(), seed_a);
        let larger = c.union(pick_subset_s(g.all_services(), seed_b));
        let small = g.exclusive_validators(c).unwrap();
        let big = g.exclusive_validators(larger).unwrap();
        prop_assert!(small.is_subset(big));
        // Exclusive validators of a coalition secure no outside services, so
        // they sit inside the coalition's neighborhood or secure nothing.
        for v in small.iter() {
            prop_assert!(g.validator_neighbors(v).is_subset(c));
        }
    }

    #[test]
    fn removal_composes(g in arb_graph(), seed_1 in any::<u128>(), seed_2 in any::<u128>()) {
        let d1 = pick_subset_v(g.present_validators(), seed_1);
        let d2 = pick_subset_v(g.present_validators(), seed_2).difference(d1);
        let sequential = g.remove_validators(d1).unwrap().remove_validators(d2).unwrap();
        let joint = g.remove_validators(d1.union(d2)).unwrap();
        prop_assert_eq!(sequential.present_validators(), joint.present_validators());
        prop_assert_eq!(
            is_secure(&sequential, &limits()).unwrap().secure,
            is_secure(&joint, &limits()).unwrap().secure
        );
    }

    #[test]
    fn coalitions_are_monotone_in_attackers(g in arb_graph(), seed_extra in any::<u128>()) {
        for attack in enumerate_valid_attacks(&g, &limits()).unwrap() {
            prop_assert!(is_attacking_coalition(&g, &attack).unwrap());
            let extra = pick_subset_v(g.present_validators(), seed_extra);
            let bigger = Attack::new(attack.services, attack.attackers.union(extra));
            prop_assert!(is_attacking_coalition(&g, &bigger).unwrap());
        }
    }

    #[test]
    fn shocked_coalitions_lift_to_the_original_graph(g in arb_graph(), seed_d in any::<u128>()) {
        // An attacking coalition after a shock is still one before it, once
        // the shocked validators are counted among the attackers.
        let d = pick_subset_v(g.present_validators(), seed_d);
        let shocked = g.remove_validators(d).unwrap();
        for attack in enumerate_valid_attacks(&shocked, &limits()).unwrap() {
            let lifted = Attack::new(attack.services, attack.attackers.union(d));
            prop_assert!(is_attacking_coalition(&g, &lifted).unwrap());
        }
    }

    #[test]
    fn security_routes_agree(g in arb_graph()) {
        let report = is_secure(&g, &limits()).unwrap();
        let attacks = enumerate_valid_attacks(&g, &limits()).unwrap();
        prop_assert_eq!(report.secure, attacks.is_empty());
        prop_assert_eq!(report.secure, is_gamma_slack_secure(&g, &rat_int(0), &limits()).unwrap());
        if let Some(witness) = report.counterexample {
            prop_assert!(is_valid_attack(&g, &witness).unwrap());
        }
        match max_slack(&g, &limits()).unwrap().status {
            SlackStatus::Insecure => prop_assert!(!report.secure),
            _ => prop_assert!(report.secure),
        }
    }

    #[test]
    fn max_slack_characterizes_margined_security(g in arb_graph()) {
        let result = max_slack(&g, &limits()).unwrap();
        match result.status {
            SlackStatus::Insecure => {
                prop_assert!(!is_gamma_slack_secure(&g, &rat_int(0), &limits()).unwrap());
            }
            SlackStatus::Finite(gamma) => {
                prop_assert!(is_gamma_slack_secure(&g, &gamma, &limits()).unwrap());
                prop_assert!(!is_gamma_slack_secure(&g, &(&gamma + rat(1, 7)), &limits()).unwrap());
                prop_assert!(!is_gamma_slack_secure(&g, &(&gamma + rat_int(1)), &limits()).unwrap());
                // The witness coalition attains the slack exactly.
                let witness = result.witness.unwrap();
                let (attackers, stake) = min_attack_stake(&g, witness.services).unwrap().unwrap();
                prop_assert_eq!(attackers, witness.attackers);
                let profit = g.total_profit(witness.services).unwrap();
                prop_assert_eq!(stake / profit, Rational::one() + gamma);
            }
            SlackStatus::Unbounded => {
                for gamma in [rat_int(0), rat_int(1), rat_int(100)] {
                    prop_assert!(is_gamma_slack_secure(&g, &gamma, &limits()).unwrap());
                }
            }
        }
    }

    #[test]
    fn load_condition_implies_security(g in arb_graph()) {
        if el_condition(&g).unwrap().holds {
            prop_assert!(is_secure(&g, &limits()).unwrap().secure);
        }
    }

    #[test]
    fn scaled_load_condition_implies_margined_security(g in arb_graph()) {
        for gamma in [rat_int(0), rat(1, 2), rat_int(1), rat_int(3)] {
            if el_condition_scaled(&g, &gamma).unwrap().holds {
                prop_assert!(is_gamma_slack_secure(&g, &gamma, &limits()).unwrap());
            }
        }
    }

    #[test]
    fn max_load_margin_brackets_the_scaled_condition(g in arb_graph()) {
        match el_max_gamma(&g).unwrap() {
            GammaStatus::Never => {
                prop_assert!(!el_condition(&g).unwrap().holds);
            }
            GammaStatus::Finite(gamma) => {
                prop_assert!(el_condition_scaled(&g, &gamma).unwrap().holds);
                prop_assert!(!el_condition_scaled(&g, &(&gamma + rat(1, 5))).unwrap().holds);
            }
            GammaStatus::Unbounded => {
                prop_assert!(el_condition_scaled(&g, &rat_int(7)).unwrap().holds);
            }
        }
    }

    #[test]
    fn local_load_condition_implies_header_condition(g in arb_graph(), seed_c in any::<u128>()) {
        let c = pick_subset_s(g.all_services(), seed_c);
        for gamma in [rat_int(0), rat(1, 2)] {
            if el_condition_local(&g, c, &gamma).unwrap().holds {
                let report = check_header_overcollateralization(&g, c, &gamma, &limits()).unwrap();
                prop_assert!(report.holds);
            }
        }
    }

    #[test]
    fn header_margin_brackets_the_header_condition(g in arb_graph(), seed_c in any::<u128>()) {
        let c = pick_subset_s(g.all_services(), seed_c);
        match header_max_gamma(&g, c, &limits()).unwrap() {
            GammaStatus::Never => {
                prop_assert!(!check_header_overcollateralization(&g, c, &rat_int(0), &limits()).unwrap().holds);
            }
            GammaStatus::Finite(gamma) => {
                prop_assert!(check_header_overcollateralization(&g, c, &gamma, &limits()).unwrap().holds);
                let above = &gamma + rat(1, 3);
                prop_assert!(!check_header_overcollateralization(&g, c, &above, &limits()).unwrap().holds);
            }
            GammaStatus::Unbounded => {
                prop_assert!(check_header_overcollateralization(&g, c, &rat_int(9), &limits()).unwrap().holds);
            }
        }
    }

    #[test]
    fn header_violations_are_replayable(g in arb_graph(), seed_c in any::<u128>()) {
        let c = pick_subset_s(g.all_services(), seed_c);
        let report = check_header_overcollateralization(&g, c, &rat(1, 2), &limits()).unwrap();
        if let Some(header) = report.violation {
            prop_assert!(!report.holds);
            prop_assert!(header.services.is_subset(c));
            // The witness draws only on the coalition's exclusive validators
            // that actually cover the head.
            let exclusive = g.exclusive_validators(c).unwrap();
            let nbhd = g.neighbors_of_services(header.services).unwrap();
            prop_assert!(header.attackers.is_subset(exclusive.intersection(nbhd)));
            // Completing it with everything non-exclusive forms an attacking
            // coalition on the head.
            let completion = header.attackers.union(g.present_validators().difference(exclusive));
            prop_assert!(is_attacking_coalition(&g, &Attack::new(header.services, completion)).unwrap());
            // And the violated inequality: the exclusive stake the attack
            // burns stays below the margined profit.
            let stake = g.total_stake(header.attackers).unwrap();
            let profit = g.total_profit(header.services).unwrap();
            prop_assert!(stake < (Rational::one() + rat(1, 2)) * profit);
        } else {
            prop_assert!(report.holds);
        }
    }

    #[test]
    fn stability_matches_the_naive_definition(g in arb_graph()) {
        for attack in enumerate_valid_attacks(&g, &limits()).unwrap() {
            let fast = is_stable_attack(&g, &attack, &limits()).unwrap();
            prop_assert_eq!(fast.stable, naive_is_stable(&g, &attack));
            if let Some(sub) = fast.destabilizer {
                prop_assert!(!fast.stable);
                prop_assert!(sub.services.is_subset(attack.services));
                prop_assert!(sub.attackers.is_subset(attack.attackers));
                prop_assert!(sub != attack);
                prop_assert!(is_valid_attack(&g, &sub).unwrap());
                let spared = g.total_stake(attack.attackers.difference(sub.attackers)).unwrap();
                let stranded = g.total_profit(attack.services.difference(sub.services)).unwrap();
                prop_assert!(spared >= stranded);
            }
        }
    }

    #[test]
    fn grown_cascades_verify_and_flatten(
        g in arb_graph(),
        shock_seed in any::<u128>(),
        choices in prop::collection::vec(any::<prop::sample::Index>(), 0..=3),
    ) {
        let (shock, cascade) = grow_cascade(&g, shock_seed, &choices);
        let verdict = verify_cascade(&g, shock, &cascade, &limits()).unwrap();
        prop_assert!(verdict.ok, "grown cascade must verify: {:?}", verdict.reason);
        if !cascade.steps.is_empty() {
            // Union of the steps is a single valid attack on the shocked graph.
            let flat = flatten_cascade(&cascade);
            let shocked = g.remove_validators(shock).unwrap();
            prop_assert!(is_valid_attack(&shocked, &flat).unwrap());
            // Lifting the shock into the attackers gives a coalition on g.
            let lifted = Attack::new(flat.services, flat.attackers.union(shock));
            prop_assert!(is_attacking_coalition(&g, &lifted).unwrap());
        }
    }

    #[test]
    fn reference_depth_matches_the_naive_scan(
        g in arb_graph(),
        shock_seed in any::<u128>(),
        choices in prop::collection::vec(any::<prop::sample::Index>(), 0..=3),
    ) {
        let (shock, cascade) = grow_cascade(&g, shock_seed, &choices);
        let k = reference_depth(&g, shock, &cascade).unwrap();
        let mut naive = 0usize;
        let blocks: Vec<ValidatorSet> = std::iter::once(shock)
            .chain(cascade.steps.iter().map(|a| a.attackers))
            .collect();
        for (t0, step) in cascade.steps.iter().enumerate() {
            let t = t0 + 1;
            let nbhd = g.neighbors_of_services(step.services).unwrap();
            for i in 1..=t {
                if !nbhd.is_disjoint(blocks[t - i]) {
                    naive = naive.max(i);
                }
            }
        }
        prop_assert_eq!(k, naive);
    }

    #[test]
    fn global_loss_is_bounded_monotone_and_witnessed(g in arb_graph()) {
        let total = g.total_stake(g.present_validators()).unwrap();
        prop_assume!(!total.is_zero());
        let mut previous = None;
        for psi in [rat_int(0), rat(1, 8), rat(1, 2)] {
            let report = worst_case_loss_global(&g, &psi, &limits()).unwrap();
            prop_assert!(report.loss >= psi);
            prop_assert!(report.loss <= Rational::one());
            if let Some(p) = previous {
                prop_assert!(report.loss >= p);
            }
            previous = Some(report.loss.clone());
            // Witness replay: admissible shock, verifying cascade, and the
            // claimed loss is exactly what the witness realizes.
            let removed = report.witness_shock.removed;
            prop_assert!(shock_admissible(&g, removed, &psi, None).unwrap());
            prop_assert_eq!(
                &report.realized_shock_fraction,
                &(g.total_stake(removed).unwrap() / &total)
            );
            prop_assert!(verify_cascade(&g, removed, &report.witness_cascade, &limits()).unwrap().ok);
            let burned = report
                .witness_cascade
                .steps
                .iter()
                .fold(ValidatorSet::empty(), |acc, a| acc.union(a.attackers));
            let mut realized = &psi + g.total_stake(burned).unwrap() / &total;
            if realized > Rational::one() {
                realized = Rational::one();
            }
            prop_assert_eq!(report.loss, realized);
        }
    }

    #[test]
    fn local_loss_is_bounded_witnessed_and_mode_monotone(g in arb_graph(), seed_c in any::<u128>()) {
        let c = pick_subset_s(g.all_services(), seed_c);
        let exclusive = g.exclusive_validators(c).unwrap();
        prop_assume!(!exclusive.is_empty());
        let exclusive_total = g.total_stake(exclusive).unwrap();
        prop_assume!(!exclusive_total.is_zero());
        let psi = rat(1, 8);
        let mut by_mode = Vec::new();
        for mode in [CascadeMode::Stable, CascadeMode::Valid] {
            let report = worst_case_loss_local(&g, c, &psi, mode, &limits()).unwrap();
            prop_assert!(report.loss >= psi);
            prop_assert!(report.loss <= Rational::one());
            let removed = report.witness_shock.removed;
            prop_assert!(shock_admissible(&g, removed, &psi, Some(c)).unwrap());
            prop_assert!(verify_cascade(&g, removed, &report.witness_cascade, &limits()).unwrap().ok);
            prop_assert_eq!(report.witness_cascade.mode, mode);
            let burned = report
                .witness_cascade
                .steps
                .iter()
                .fold(ValidatorSet::empty(), |acc, a| acc.union(a.attackers));
            let mut realized =
                &psi + g.total_stake(burned.intersection(exclusive)).unwrap() / &exclusive_total;
            if realized > Rational::one() {
                realized = Rational::one();
            }
            prop_assert_eq!(&report.loss, &realized);
            by_mode.push(report.loss);
        }
        // Every stable cascade is a valid cascade, so the valid-mode optimum
        // dominates the stable-mode optimum.
        prop_assert!(by_mode[0] <= by_mode[1]);
    }

    #[test]
    fn loss_witnesses_round_trip_through_json(g in arb_graph()) {
        let total = g.total_stake(g.present_validators()).unwrap();
        prop_assume!(!total.is_zero());
        let report = worst_case_loss_global(&g, &rat(1, 8), &limits()).unwrap();
        let text = restake_core::cascade::serialize_cascade_witness(
            &g,
            report.witness_shock.removed,
            &report.witness_cascade,
        )
        .unwrap();
        let (shock, cascade) = restake_core::cascade::parse_cascade_witness(&g, &text).unwrap();
        prop_assert_eq!(shock, report.witness_shock.removed);
        prop_assert_eq!(&cascade, &report.witness_cascade);
        let again = restake_core::cascade::serialize_cascade_witness(&g, shock, &cascade).unwrap();
        prop_assert_eq!(again, text);
    }
}
