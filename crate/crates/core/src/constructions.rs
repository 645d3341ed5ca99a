//! Deterministic generators for benchmark networks, each bundled with
//! machine-checkable claims about what the analyses must find on them.
//!
//! The generators realize the boundary cases of the theory at desk scale:
//! tight security conditions, losses that meet their bounds exactly, attacks
//! that are valid but not stable, and families where local guarantees cannot
//! be certified from local information. The claim list attached to each
//! output is the executable statement of those facts; `check_claim` verifies
//! any claim against any graph.

use std::collections::{BTreeSet, VecDeque};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::analysis::{
    is_secure, is_stable_attack, is_valid_attack, max_slack, Attack, EnumLimits, SlackStatus,
};
use crate::cascade::{
    shock_admissible, verify_cascade, worst_case_loss_global, worst_case_loss_local, Cascade,
    CascadeMode,
};
use crate::conditions::{el_condition, el_condition_scaled, el_max_gamma, GammaStatus};
use crate::error::{Error, Result};
use crate::model::{build_graph, RestakingGraph, Service, ServiceId, Validator, ValidatorId};
use crate::rational::{format_rational, rat_int, rational_serde, Rational};
use crate::sets::{ServiceSet, ValidatorSet};

/// One step of a cascade witness, by vertex ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClaimStep {
    pub services: Vec<String>,
    pub validators: Vec<String>,
}

/// A machine-checkable statement about a graph. Claims carry their own
/// witnesses where one is needed, so checking never guesses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "claim", rename_all = "snake_case", deny_unknown_fields)]
pub enum Claim {
    /// The per-validator sufficient condition holds.
    ElHolds,
    /// The condition holds with profits scaled by (1+gamma).
    ElScaledHolds {
        #[serde(with = "rational_serde")]
        gamma: Rational,
    },
    /// The scaled load is exactly 1 for each listed validator.
    ElScaledEquality {
        #[serde(with = "rational_serde")]
        gamma: Rational,
        validators: Vec<String>,
    },
    /// The largest gamma the per-validator condition tolerates.
    ElMaxGamma { status: GammaStatus },
    Secure,
    Insecure,
    /// max_slack is exactly this gamma, witnessed by this coalition head.
    MaxSlackFinite {
        #[serde(with = "rational_serde")]
        gamma: Rational,
        services: Vec<String>,
    },
    TotalStake {
        #[serde(with = "rational_serde")]
        value: Rational,
    },
    /// Largest service profit over smallest validator stake.
    MaxProfitStakeRatio {
        #[serde(with = "rational_serde")]
        value: Rational,
    },
    /// The bipartite graph is one connected component.
    Connected,
    /// Every nonempty proper service subset A has sigma_{N(A)} >= pi_A + margin.
    ProperCoalitionsOvercollateralized {
        #[serde(with = "rational_serde")]
        margin: Rational,
    },
    /// The coalition's exclusive validators are exactly this set.
    ExclusiveValidators {
        coalition: Vec<String>,
        validators: Vec<String>,
    },
    ShockAdmissible {
        shock: Vec<String>,
        #[serde(with = "rational_serde")]
        psi: Rational,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coalition: Option<Vec<String>>,
    },
    ValidAfterShock {
        shock: Vec<String>,
        services: Vec<String>,
        validators: Vec<String>,
    },
    StableAfterShock {
        shock: Vec<String>,
        services: Vec<String>,
        validators: Vec<String>,
    },
    /// The attack is valid but not stable, and the given sub-attack proves it.
    UnstableAfterShock {
        shock: Vec<String>,
        services: Vec<String>,
        validators: Vec<String>,
        destabilizer_services: Vec<String>,
        destabilizer_validators: Vec<String>,
    },
    /// The step sequence is a verified stable cascade after the shock.
    StableCascadeAfterShock {
        shock: Vec<String>,
        steps: Vec<ClaimStep>,
    },
    /// Post-shock attack profit minus burned stake equals this value.
    AttackSurplus {
        shock: Vec<String>,
        services: Vec<String>,
        validators: Vec<String>,
        #[serde(with = "rational_serde")]
        value: Rational,
    },
    GlobalLossExact {
        #[serde(with = "rational_serde")]
        psi: Rational,
        #[serde(with = "rational_serde")]
        value: Rational,
    },
    /// The witness shock and cascade demonstrate at least this global loss.
    GlobalLossAtLeast {
        #[serde(with = "rational_serde")]
        psi: Rational,
        #[serde(with = "rational_serde")]
        value: Rational,
        shock: Vec<String>,
        steps: Vec<ClaimStep>,
    },
    LocalLossExact {
        coalition: Vec<String>,
        #[serde(with = "rational_serde")]
        psi: Rational,
        mode: CascadeMode,
        #[serde(with = "rational_serde")]
        value: Rational,
    },
    /// The witness shock and cascade demonstrate at least this local loss.
    LocalLossAtLeast {
        coalition: Vec<String>,
        #[serde(with = "rational_serde")]
        psi: Rational,
        mode: CascadeMode,
        #[serde(with = "rational_serde")]
        value: Rational,
        shock: Vec<String>,
        steps: Vec<ClaimStep>,
    },
    /// Header overcollateralization fails at gamma, with this violating header.
    HeaderConditionFails {
        coalition: Vec<String>,
        #[serde(with = "rational_serde")]
        gamma: Rational,
        witness_services: Vec<String>,
        witness_validators: Vec<String>,
    },
}

/// A generated graph together with the claims its construction guarantees.
#[derive(Debug, Clone)]
pub struct ConstructionOutput {
    pub graph: RestakingGraph,
    pub claims: Vec<Claim>,
}

fn param(name: &'static str, detail: String) -> Error {
    Error::ParamConstraint { name, detail }
}

fn ids(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn steps_to_cascade(
    g: &RestakingGraph,
    steps: &[ClaimStep],
    mode: CascadeMode,
) -> Result<Cascade> {
    let mut out = Vec::new();
    for step in steps {
        out.push(Attack::new(
            g.service_set(&step.services)?,
            g.validator_set(&step.validators)?,
        ));
    }
    Ok(Cascade { steps: out, mode })
}

/// Is the bipartite graph (services plus present validators) one connected
/// component? Vacuously true when it has no vertices at all.
pub fn is_connected(g: &RestakingGraph) -> bool {
    let service_count = g.service_count();
    let present = g.present_validators();
    if service_count == 0 && present.is_empty() {
        return true;
    }
    let mut seen_s = ServiceSet::empty();
    let mut seen_v = ValidatorSet::empty();
    let mut queue: VecDeque<(bool, usize)> = VecDeque::new();
    if service_count > 0 {
        seen_s = seen_s.with(0);
        queue.push_back((true, 0));
    } else {
        let v = present.iter().next().expect("nonempty present set");
        seen_v = seen_v.with(v);
        queue.push_back((false, v));
    }
    while let Some((is_service, i)) = queue.pop_front() {
        if is_service {
            for v in g.service_neighbors(i).iter() {
                if !seen_v.contains(v) {
                    seen_v = seen_v.with(v);
                    queue.push_back((false, v));
                }
            }
        } else {
            for s in g.validator_neighbors(i).iter() {
                if !seen_s.contains(s) {
                    seen_s = seen_s.with(s);
                    queue.push_back((true, s));
                }
            }
        }
    }
    seen_s.len() == service_count && seen_v == present
}

/// Verifies one claim against a graph. Witness-carrying claims are checked by
/// replaying the witness; quantified claims run the corresponding exact
/// analysis (and inherit its enumeration caps).
pub fn check_claim(g: &RestakingGraph, claim: &Claim, limits: &EnumLimits) -> Result<bool> {
    match claim {
        Claim::ElHolds => Ok(el_condition(g)?.holds),
        Claim::ElScaledHolds { gamma } => Ok(el_condition_scaled(g, gamma)?.holds),
        Claim::ElScaledEquality { gamma, validators } => {
            let report = el_condition_scaled(g, gamma)?;
            if !report.holds {
                return Ok(false);
            }
            for id in validators {
                let entry = report
                    .per_validator_load
                    .iter()
                    .find(|(v, _)| v.as_str() == id);
                match entry {
                    Some((_, load)) if load.is_one() => {}
                    _ => return Ok(false),
                }
            }
            Ok(true)
        }
        Claim::ElMaxGamma { status } => Ok(el_max_gamma(g)? == *status),
        Claim::Secure => Ok(is_secure(g, limits)?.secure),
        Claim::Insecure => Ok(!is_secure(g, limits)?.secure),
        Claim::MaxSlackFinite { gamma, services } => {
            let result = max_slack(g, limits)?;
            Ok(result.status == SlackStatus::Finite(gamma.clone())
                && result.witness.map(|w| w.services) == Some(g.service_set(services)?))
        }
        Claim::TotalStake { value } => Ok(g.total_stake(g.present_validators())? == *value),
        Claim::MaxProfitStakeRatio { value } => {
            let max_profit = (0..g.service_count()).map(|s| &g.service(s).profit).max();
            let min_stake = g
                .present_validators()
                .iter()
                .map(|v| &g.validator(v).stake)
                .min();
            match (max_profit, min_stake) {
                (Some(p), Some(s)) if !s.is_zero() => Ok(&(p / s) == value),
                _ => Ok(false),
            }
        }
        Claim::Connected => Ok(is_connected(g)),
        Claim::ProperCoalitionsOvercollateralized { margin } => {
            limits.check(g)?;
            let all = g.all_services();
            for a in all.subsets() {
                if a.is_empty() || a == all {
                    continue;
                }
                let nbhd = g.neighbors_of_services(a)?;
                if g.total_stake(nbhd)? < g.total_profit(a)? + margin {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Claim::ExclusiveValidators {
            coalition,
            validators,
        } => Ok(g.exclusive_validators(g.service_set(coalition)?)? == g.validator_set(validators)?),
        Claim::ShockAdmissible {
            shock,
            psi,
            coalition,
        } => {
            let c = match coalition {
                None => None,
                Some(ids) => Some(g.service_set(ids)?),
            };
            shock_admissible(g, g.validator_set(shock)?, psi, c)
        }
        Claim::ValidAfterShock {
            shock,
            services,
            validators,
        } => {
            let shocked = g.remove_validators(g.validator_set(shock)?)?;
            let attack = Attack::from_ids(&shocked, services, validators)?;
            is_valid_attack(&shocked, &attack)
        }
        Claim::StableAfterShock {
            shock,
            services,
            validators,
        } => {
            let shocked = g.remove_validators(g.validator_set(shock)?)?;
            let attack = Attack::from_ids(&shocked, services, validators)?;
            Ok(is_stable_attack(&shocked, &attack, limits)?.stable)
        }
        Claim::UnstableAfterShock {
            shock,
            services,
            validators,
            destabilizer_services,
            destabilizer_validators,
        } => {
            let shocked = g.remove_validators(g.validator_set(shock)?)?;
            let attack = Attack::from_ids(&shocked, services, validators)?;
            let sub = Attack::from_ids(&shocked, destabilizer_services, destabilizer_validators)?;
            if is_stable_attack(&shocked, &attack, limits)?.stable {
                return Ok(false);
            }
            // The claimed destabilizer must itself prove instability: a valid
            // proper sub-attack sparing at least the stranded profit.
            let proper = sub.services.is_subset(attack.services)
                && sub.attackers.is_subset(attack.attackers)
                && sub != attack;
            Ok(proper
                && is_valid_attack(&shocked, &sub)?
                && shocked.total_stake(attack.attackers.difference(sub.attackers))?
                    >= shocked.total_profit(attack.services.difference(sub.services))?)
        }
        Claim::StableCascadeAfterShock { shock, steps } => {
            let cascade = steps_to_cascade(g, steps, CascadeMode::Stable)?;
            Ok(verify_cascade(g, g.validator_set(shock)?, &cascade, limits)?.ok)
        }
        Claim::AttackSurplus {
            shock,
            services,
            validators,
            value,
        } => {
            let shocked = g.remove_validators(g.validator_set(shock)?)?;
            let attack = Attack::from_ids(&shocked, services, validators)?;
            Ok(shocked.total_profit(attack.services)? - shocked.total_stake(attack.attackers)?
                == *value)
        }
        Claim::GlobalLossExact { psi, value } => {
            Ok(worst_case_loss_global(g, psi, limits)?.loss == *value)
        }
        Claim::GlobalLossAtLeast {
            psi,
            value,
            shock,
            steps,
        } => {
            let removed = g.validator_set(shock)?;
            if !shock_admissible(g, removed, psi, None)? {
                return Ok(false);
            }
            let cascade = steps_to_cascade(g, steps, CascadeMode::Valid)?;
            if !verify_cascade(g, removed, &cascade, limits)?.ok {
                return Ok(false);
            }
            let burned: ValidatorSet = cascade
                .steps
                .iter()
                .fold(ValidatorSet::empty(), |acc, a| acc.union(a.attackers));
            let total = g.total_stake(g.present_validators())?;
            if total.is_zero() {
                return Err(Error::ZeroTotalStake);
            }
            let shown = psi + g.total_stake(burned)? / total;
            let shown = if shown > Rational::one() {
                Rational::one()
            } else {
                shown
            };
            Ok(shown >= *value)
        }
        Claim::LocalLossExact {
            coalition,
            psi,
            mode,
            value,
        } => Ok(worst_case_loss_local(g, g.service_set(coalition)?, psi, *mode, limits)?.loss
            == *value),
        Claim::LocalLossAtLeast {
            coalition,
            psi,
            mode,
            value,
            shock,
            steps,
        } => {
            let c = g.service_set(coalition)?;
            let removed = g.validator_set(shock)?;
            if !shock_admissible(g, removed, psi, Some(c))? {
                return Ok(false);
            }
            let cascade = steps_to_cascade(g, steps, *mode)?;
            if !verify_cascade(g, removed, &cascade, limits)?.ok {
                return Ok(false);
            }
            let exclusive = g.exclusive_validators(c)?;
            let exclusive_total = g.total_stake(exclusive)?;
            if exclusive_total.is_zero() {
                return Err(Error::ZeroExclusiveStake);
            }
            let burned: ValidatorSet = cascade
                .steps
                .iter()
                .fold(ValidatorSet::empty(), |acc, a| acc.union(a.attackers));
            let shown = psi + g.total_stake(burned.intersection(exclusive))? / exclusive_total;
            let shown = if shown > Rational::one() {
                Rational::one()
            } else {
                shown
            };
            Ok(shown >= *value)
        }
        Claim::HeaderConditionFails {
            coalition,
            gamma,
            witness_services,
            witness_validators,
        } => {
            let report = crate::analysis::check_header_overcollateralization(
                g,
                g.service_set(coalition)?,
                gamma,
                limits,
            )?;
            match report.violation {
                None => Ok(false),
                Some(header) => Ok(!report.holds
                    && header.services == g.service_set(witness_services)?
                    && header.attackers == g.validator_set(witness_validators)?),
            }
        }
    }
}

/// One service split across a tiny and a large validator. The security
/// condition holds with equality, yet shocking away the tiny validator makes
/// attacking the remainder strictly profitable: worst-case loss is total.
pub fn gen_two_validator(epsilon: &Rational) -> Result<ConstructionOutput> {
    if epsilon <= &Rational::zero() || epsilon >= &Rational::one() {
        return Err(param(
            "epsilon_in_open_unit_interval",
            format!("epsilon = {}, need 0 < epsilon < 1", format_rational(epsilon)),
        ));
    }
    let one = Rational::one();
    let graph = build_graph(
        &[("x", one.clone(), one.clone())],
        &[("a", epsilon.clone()), ("b", &one - epsilon)],
        &[("x", "a"), ("x", "b")],
    )?;
    let claims = vec![
        Claim::ElHolds,
        Claim::ElScaledEquality {
            gamma: rat_int(0),
            validators: ids(&["a", "b"]),
        },
        Claim::ElMaxGamma {
            status: GammaStatus::Finite(rat_int(0)),
        },
        Claim::Secure,
        Claim::MaxSlackFinite {
            gamma: rat_int(0),
            services: ids(&["x"]),
        },
        Claim::GlobalLossExact {
            psi: epsilon.clone(),
            value: rat_int(1),
        },
        Claim::GlobalLossAtLeast {
            psi: epsilon.clone(),
            value: rat_int(1),
            shock: ids(&["a"]),
            steps: vec![ClaimStep {
                services: ids(&["x"]),
                validators: ids(&["b"]),
            }],
        },
    ];
    Ok(ConstructionOutput { graph, claims })
}

/// One service, two coupled validators and one isolated one, sized so the
/// scaled security condition holds with equality while a budget-psi shock
/// already realizes the generic loss bound: no slack is left anywhere.
pub fn gen_noslack(
    psi: &Rational,
    gamma: &Rational,
    epsilon: &Rational,
    sigma_a: &Rational,
) -> Result<ConstructionOutput> {
    for (name, v) in [
        ("psi_positive", psi),
        ("gamma_positive", gamma),
        ("epsilon_positive", epsilon),
        ("sigma_a_positive", sigma_a),
    ] {
        if *v <= Rational::zero() {
            return Err(param(name, format!("got {}", format_rational(v))));
        }
    }
    let one = Rational::one();
    // loss_target = (1 + 1/gamma) psi - epsilon, the loss the shock realizes.
    let loss_target = (&one + &(&one / gamma)) * psi - epsilon;
    if loss_target < Rational::zero() {
        return Err(param(
            "loss_bound_nonnegative",
            format!("(1 + 1/gamma) psi - epsilon = {}", format_rational(&loss_target)),
        ));
    }
    if loss_target > one {
        return Err(param(
            "loss_bound_at_most_one",
            format!("(1 + 1/gamma) psi - epsilon = {}", format_rational(&loss_target)),
        ));
    }
    if epsilon > &(psi / gamma) {
        return Err(param(
            "epsilon_within_shock_budget",
            format!(
                "epsilon = {} exceeds psi/gamma = {}",
                format_rational(epsilon),
                format_rational(&(psi / gamma))
            ),
        ));
    }
    let total = sigma_a / psi;
    let sigma_b = sigma_a * (&one / gamma - &(epsilon / psi));
    let sigma_c = sigma_a * ((&one - psi + epsilon) / psi - &one / gamma);
    let pi_x = &loss_target / (&one + gamma) * &total;
    debug_assert_eq!(sigma_a + &sigma_b + &sigma_c, total);
    let graph = build_graph(
        &[("x", pi_x, one.clone())],
        &[
            ("a", sigma_a.clone()),
            ("b", sigma_b.clone()),
            ("c", sigma_c),
        ],
        &[("x", "a"), ("x", "b")],
    )?;
    let surplus = gamma * epsilon * sigma_a / ((&one + gamma) * psi);
    debug_assert_eq!(
        surplus,
        graph.total_profit(graph.all_services())? - sigma_b
    );
    let claims = vec![
        Claim::ElScaledHolds {
            gamma: gamma.clone(),
        },
        Claim::ElScaledEquality {
            gamma: gamma.clone(),
            validators: ids(&["a", "b"]),
        },
        Claim::TotalStake { value: total },
        Claim::ShockAdmissible {
            shock: ids(&["a"]),
            psi: psi.clone(),
            coalition: None,
        },
        Claim::ValidAfterShock {
            shock: ids(&["a"]),
            services: ids(&["x"]),
            validators: ids(&["b"]),
        },
        Claim::AttackSurplus {
            shock: ids(&["a"]),
            services: ids(&["x"]),
            validators: ids(&["b"]),
            value: surplus,
        },
        Claim::GlobalLossAtLeast {
            psi: psi.clone(),
            value: loss_target,
            shock: ids(&["a"]),
            steps: vec![ClaimStep {
                services: ids(&["x"]),
                validators: ids(&["b"]),
            }],
        },
    ];
    Ok(ConstructionOutput { graph, claims })
}

/// A six-cycle of three services and three validators where the scaled
/// security condition holds globally, yet the coalition {x, z} can lose all
/// of its exclusive stake: no local overcollateralization certificate exists.
pub fn gen_triangle(
    gamma: &Rational,
    pi: &Rational,
    sigma_a: &Rational,
) -> Result<ConstructionOutput> {
    if gamma <= &Rational::zero() {
        return Err(param("gamma_positive", format!("got {}", format_rational(gamma))));
    }
    if pi <= &Rational::zero() {
        return Err(param("pi_positive", format!("got {}", format_rational(pi))));
    }
    let two_pi = rat_int(2) * pi;
    if sigma_a >= &two_pi {
        return Err(param(
            "sigma_a_below_two_pi",
            format!(
                "sigma_a = {} but the exclusive validator must be outweighed: need sigma_a < {}",
                format_rational(sigma_a),
                format_rational(&two_pi)
            ),
        ));
    }
    let one = Rational::one();
    // A zero-stake attacker can always be dropped from a stable attack: the
    // sub-attack without it spares no stake and strands no profit. The stable
    // witness therefore includes a exactly when a has stake to burn.
    let exclusive_attackers = if sigma_a > &Rational::zero() {
        ids(&["a"])
    } else {
        vec![]
    };
    let sigma_bc = rat_int(2) * (&one + gamma) * pi;
    let graph = build_graph(
        &[
            ("x", pi.clone(), one.clone()),
            ("y", pi.clone(), one.clone()),
            ("z", pi.clone(), one.clone()),
        ],
        &[
            ("a", sigma_a.clone()),
            ("b", sigma_bc.clone()),
            ("c", sigma_bc.clone()),
        ],
        &[
            ("x", "a"),
            ("x", "b"),
            ("y", "b"),
            ("y", "c"),
            ("z", "c"),
            ("z", "a"),
        ],
    )?;
    // Slack is always minimized by the full service set: its joint
    // neighborhood is everything, and smaller heads pay for the same large
    // validators with less profit.
    let slack = (sigma_a + rat_int(2) * &sigma_bc) / (rat_int(3) * pi) - &one;
    let mut claims = vec![
        Claim::ElScaledHolds {
            gamma: gamma.clone(),
        },
        Claim::MaxSlackFinite {
            gamma: slack,
            services: ids(&["x", "y", "z"]),
        },
        Claim::ExclusiveValidators {
            coalition: ids(&["x", "z"]),
            validators: ids(&["a"]),
        },
        Claim::ShockAdmissible {
            shock: ids(&["b", "c"]),
            psi: rat_int(0),
            coalition: Some(ids(&["x", "z"])),
        },
        Claim::StableAfterShock {
            shock: ids(&["b", "c"]),
            services: ids(&["x", "z"]),
            validators: exclusive_attackers,
        },
    ];
    // With zero exclusive stake the cheapest violating header needs no
    // exclusive attackers at all, and relative loss is undefined.
    if sigma_a > &Rational::zero() {
        claims.push(Claim::HeaderConditionFails {
            coalition: ids(&["x", "z"]),
            gamma: rat_int(0),
            witness_services: ids(&["x", "z"]),
            witness_validators: ids(&["a"]),
        });
        claims.push(Claim::HeaderConditionFails {
            coalition: ids(&["x", "z"]),
            gamma: gamma.clone(),
            witness_services: ids(&["x", "z"]),
            witness_validators: ids(&["a"]),
        });
        claims.push(Claim::LocalLossExact {
            coalition: ids(&["x", "z"]),
            psi: rat_int(0),
            mode: CascadeMode::Stable,
            value: rat_int(1),
        });
    } else {
        claims.push(Claim::HeaderConditionFails {
            coalition: ids(&["x", "z"]),
            gamma: rat_int(0),
            witness_services: ids(&["x", "z"]),
            witness_validators: vec![],
        });
    }
    Ok(ConstructionOutput { graph, claims })
}

/// A ring of n unit-stake validators covered by block services (six in a
/// row) and triple services (three in a row, offset by one so the whole ring
/// is connected). Every validator's load is exactly 1, every proper
/// coalition is overcollateralized by a full unit, and yet removing one
/// validator lets a stable attack burn everything else.
pub fn gen_ring(n: usize) -> Result<ConstructionOutput> {
    if n < 6 || n % 6 != 0 {
        return Err(param(
            "n_divisible_by_six",
            format!("got n = {n}, need a positive multiple of 6"),
        ));
    }
    let blocks = n / 6;
    let one = Rational::one();
    let two = rat_int(2);
    let mut services = Vec::new();
    let mut edges: Vec<(String, String)> = Vec::new();
    for i in 0..blocks {
        let id = format!("b{i}");
        for j in 0..6 {
            edges.push((id.clone(), format!("v{}", 6 * i + j)));
        }
        services.push(Service {
            id: ServiceId::new(&id),
            profit: two.clone(),
            alpha: one.clone(),
        });
    }
    for j in 0..2 * blocks {
        let id = format!("t{j}");
        for offset in 1..=3 {
            edges.push((id.clone(), format!("v{}", (3 * j + offset) % n)));
        }
        services.push(Service {
            id: ServiceId::new(&id),
            profit: two.clone(),
            alpha: one.clone(),
        });
    }
    let validators: Vec<Validator> = (0..n)
        .map(|k| Validator {
            id: ValidatorId::new(&format!("v{k}")),
            stake: one.clone(),
        })
        .collect();
    let graph = RestakingGraph::new(services, validators, &edges)?;

    let all_service_ids = graph.service_ids(graph.all_services());
    let all_validator_ids = graph.validator_ids(graph.present_validators());
    let after_v0: Vec<String> = (1..n).map(|k| format!("v{k}")).collect();
    let mut claims = vec![
        Claim::ElHolds,
        Claim::ElScaledEquality {
            gamma: rat_int(0),
            validators: all_validator_ids,
        },
        Claim::ElMaxGamma {
            status: GammaStatus::Finite(rat_int(0)),
        },
        Claim::MaxProfitStakeRatio { value: two },
        Claim::Connected,
        Claim::ProperCoalitionsOvercollateralized { margin: rat_int(1) },
        Claim::StableAfterShock {
            shock: ids(&["v0"]),
            services: all_service_ids.clone(),
            validators: after_v0.clone(),
        },
    ];
    // The coalition blind to v0: services not secured by it. Its exclusive
    // validators (empty for n = 6) all burn in the one post-shock attack.
    let blind = graph
        .all_services()
        .difference(graph.validator_neighbors(0));
    if !graph.exclusive_validators(blind)?.is_empty() {
        claims.push(Claim::LocalLossAtLeast {
            coalition: graph.service_ids(blind),
            psi: rat_int(0),
            mode: CascadeMode::Stable,
            value: rat_int(1),
            shock: ids(&["v0"]),
            steps: vec![ClaimStep {
                services: all_service_ids.clone(),
                validators: after_v0.clone(),
            }],
        });
    }
    if n == 6 {
        // Small enough for the exhaustive analyses.
        claims.push(Claim::Secure);
        claims.push(Claim::LocalLossExact {
            coalition: all_service_ids,
            psi: Rational::new(1.into(), (n as i64).into()),
            mode: CascadeMode::Stable,
            value: rat_int(1),
        });
        claims.push(Claim::LocalLossExact {
            coalition: ids(&["b0", "t0"]),
            psi: rat_int(0),
            mode: CascadeMode::Stable,
            value: rat_int(1),
        });
    }
    Ok(ConstructionOutput { graph, claims })
}

/// Extends a secure graph with one service and two fresh validators so that
/// nothing changes from the coalition's viewpoint, yet the coalition's
/// entire exclusive stake becomes attackable after a free shock: local
/// security cannot be certified from local information.
pub fn gen_local_variant(
    g: &RestakingGraph,
    coalition: ServiceSet,
    epsilon: &Rational,
    limits: &EnumLimits,
) -> Result<ConstructionOutput> {
    if epsilon <= &Rational::zero() {
        return Err(param(
            "epsilon_positive",
            format!("got {}", format_rational(epsilon)),
        ));
    }
    let security = is_secure(g, limits)?;
    if !security.secure {
        let attack = security.counterexample.expect("insecure graph has a witness");
        return Err(Error::Precondition(format!(
            "input graph is insecure (services [{}] vs attackers [{}]); \
             the extension argument needs a secure base",
            g.service_ids(attack.services).join(","),
            g.validator_ids(attack.attackers).join(","),
        )));
    }
    let nbhd = g.neighbors_of_services(coalition)?;
    // Security makes every (A, N(A)) unprofitable, so delta >= 0.
    let delta = g.total_stake(nbhd)? - g.total_profit(coalition)?;
    debug_assert!(delta >= Rational::zero());

    let mut services: Vec<Service> = (0..g.service_count())
        .map(|s| g.service(s).clone())
        .collect();
    let mut validators: Vec<Validator> = g
        .present_validators()
        .iter()
        .map(|v| g.validator(v).clone())
        .collect();
    let mut edges = g.edges();
    services.push(Service {
        id: ServiceId::new("s*"),
        profit: &delta + rat_int(2) * epsilon,
        alpha: Rational::one(),
    });
    validators.push(Validator {
        id: ValidatorId::new("a*"),
        stake: &delta + epsilon,
    });
    validators.push(Validator {
        id: ValidatorId::new("b*"),
        stake: epsilon.clone(),
    });
    edges.push(("s*".to_string(), "a*".to_string()));
    edges.push(("s*".to_string(), "b*".to_string()));
    let variant = RestakingGraph::new(services, validators, &edges)?;

    let mut attack_services = g.service_ids(coalition);
    attack_services.push("s*".to_string());
    let mut attack_validators = g.validator_ids(nbhd);
    attack_validators.push("b*".to_string());
    let mut claims = vec![
        Claim::Secure,
        Claim::ValidAfterShock {
            shock: ids(&["a*"]),
            services: attack_services.clone(),
            validators: attack_validators.clone(),
        },
    ];
    // The new validators are exclusive only to s*, so the coalition's
    // exclusive set is untouched. Loss claims need it nonempty, and reach 1
    // exactly when all of it sits inside N(coalition).
    let exclusive = g.exclusive_validators(coalition)?;
    if !exclusive.is_empty() && !g.total_stake(exclusive)?.is_zero() {
        let witnessed =
            g.total_stake(exclusive.intersection(nbhd))? / g.total_stake(exclusive)?;
        claims.push(Claim::LocalLossAtLeast {
            coalition: g.service_ids(coalition),
            psi: rat_int(0),
            mode: CascadeMode::Valid,
            value: witnessed.clone(),
            shock: ids(&["a*"]),
            steps: vec![ClaimStep {
                services: attack_services,
                validators: attack_validators,
            }],
        });
        if witnessed.is_one() {
            claims.push(Claim::LocalLossExact {
                coalition: g.service_ids(coalition),
                psi: rat_int(0),
                mode: CascadeMode::Valid,
                value: rat_int(1),
            });
        }
    }
    Ok(ConstructionOutput {
        graph: variant,
        claims,
    })
}

/// Can the variant be told apart from the original by looking only at the
/// coalition? Checks that the coalition's services, their profits and
/// thresholds, their neighborhood, and every neighborhood validator's stake
/// and full adjacency are identical (by id) in both graphs.
pub fn is_local_variant(
    original: &RestakingGraph,
    variant: &RestakingGraph,
    coalition: ServiceSet,
) -> Result<bool> {
    original.total_profit(coalition)?;
    for s in coalition.iter() {
        let svc = original.service(s);
        let in_variant = match variant.service_set(&[svc.id.as_str()]) {
            Ok(set) => set,
            Err(Error::UnknownService(_)) => return Ok(false),
            Err(e) => return Err(e),
        };
        let t = in_variant.iter().next().expect("singleton");
        if variant.service(t).profit != svc.profit || variant.service(t).alpha != svc.alpha {
            return Ok(false);
        }
    }
    let nbhd = original.neighbors_of_services(coalition)?;
    let original_nbhd_ids: BTreeSet<String> = original.validator_ids(nbhd).into_iter().collect();
    let variant_services: Vec<String> = match variant
        .service_set(&original.service_ids(coalition))
    {
        Ok(set) => {
            let variant_nbhd = variant.neighbors_of_services(set)?;
            let variant_ids: BTreeSet<String> =
                variant.validator_ids(variant_nbhd).into_iter().collect();
            if variant_ids != original_nbhd_ids {
                return Ok(false);
            }
            Vec::new()
        }
        Err(Error::UnknownService(_)) => return Ok(false),
        Err(e) => return Err(e),
    };
    let _ = variant_services;
    for v in nbhd.iter() {
        let val = original.validator(v);
        let in_variant = match variant.validator_set(&[val.id.as_str()]) {
            Ok(set) => set,
            Err(Error::UnknownValidator(_)) => return Ok(false),
            Err(e) => return Err(e),
        };
        let w = in_variant.iter().next().expect("singleton");
        if variant.validator(w).stake != val.stake {
            return Ok(false);
        }
        let original_adj: BTreeSet<String> = original
            .service_ids(original.validator_neighbors(v))
            .into_iter()
            .collect();
        let variant_adj: BTreeSet<String> = variant
            .service_ids(variant.validator_neighbors(w))
            .into_iter()
            .collect();
        if original_adj != variant_adj {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Two services fully shared by two validators: each validator alone can be
/// burned in a stable single-service attack, the two attacks chain into a
/// stable cascade, but their union is valid and not stable — stability is
/// not closed under union, so local losses cannot be searched one flat
/// attack at a time.
pub fn gen_stable_union_counterexample() -> Result<ConstructionOutput> {
    let one = Rational::one();
    let half = Rational::new(1.into(), 2.into());
    let graph = build_graph(
        &[("x", rat_int(2), half.clone()), ("y", rat_int(2), half)],
        &[("a", one.clone()), ("b", one)],
        &[("x", "a"), ("x", "b"), ("y", "a"), ("y", "b")],
    )?;
    let claims = vec![
        Claim::Insecure,
        Claim::StableCascadeAfterShock {
            shock: vec![],
            steps: vec![
                ClaimStep {
                    services: ids(&["x"]),
                    validators: ids(&["a"]),
                },
                ClaimStep {
                    services: ids(&["y"]),
                    validators: ids(&["b"]),
                },
            ],
        },
        Claim::ValidAfterShock {
            shock: vec![],
            services: ids(&["x", "y"]),
            validators: ids(&["a", "b"]),
        },
        Claim::UnstableAfterShock {
            shock: vec![],
            services: ids(&["x", "y"]),
            validators: ids(&["a", "b"]),
            destabilizer_services: ids(&["x", "y"]),
            destabilizer_validators: ids(&["a"]),
        },
    ];
    Ok(ConstructionOutput { graph, claims })
}

/// A big service backed by one deep and one thin validator, next to a small
/// service backed by its own whale. Secure as built; after the deep
/// validator is shocked away, attacking everything at once turns a profit —
/// but the whale would be burned for a pittance, so the attack is not
/// stable: the whale free-rides on instability.
pub fn gen_freerider_demo() -> Result<ConstructionOutput> {
    let one = Rational::one();
    let graph = build_graph(
        &[
            ("s1", rat_int(101), one.clone()),
            ("s2", rat_int(1), one.clone()),
        ],
        &[
            ("r", rat_int(100)),
            ("w1", one),
            ("w2", rat_int(100)),
        ],
        &[("s1", "r"), ("s1", "w1"), ("s2", "w2")],
    )?;
    let claims = vec![
        Claim::Secure,
        Claim::ValidAfterShock {
            shock: ids(&["r"]),
            services: ids(&["s1", "s2"]),
            validators: ids(&["w1", "w2"]),
        },
        Claim::UnstableAfterShock {
            shock: ids(&["r"]),
            services: ids(&["s1", "s2"]),
            validators: ids(&["w1", "w2"]),
            destabilizer_services: ids(&["s1"]),
            destabilizer_validators: ids(&["w1"]),
        },
    ];
    Ok(ConstructionOutput { graph, claims })
}

/// Three services in a cycle with three validators, each securing two
/// neighbors. Secure as built; after one validator is shocked away, the
/// remaining two can profitably attack all three services, and no sub-attack
/// spares anything: the cascade-triggering attack is stable.
pub fn gen_cycle_demo() -> Result<ConstructionOutput> {
    let one = Rational::one();
    let graph = build_graph(
        &[
            ("x", one.clone(), one.clone()),
            ("y", one.clone(), one.clone()),
            ("z", one.clone(), one.clone()),
        ],
        &[("xy", one.clone()), ("yz", one.clone()), ("zx", one)],
        &[
            ("x", "xy"),
            ("y", "xy"),
            ("y", "yz"),
            ("z", "yz"),
            ("z", "zx"),
            ("x", "zx"),
        ],
    )?;
    let claims = vec![
        Claim::ElHolds,
        Claim::ElScaledEquality {
            gamma: rat_int(0),
            validators: ids(&["xy", "yz", "zx"]),
        },
        Claim::Secure,
        Claim::StableAfterShock {
            shock: ids(&["yz"]),
            services: ids(&["x", "y", "z"]),
            validators: ids(&["xy", "zx"]),
        },
    ];
    Ok(ConstructionOutput { graph, claims })
}
