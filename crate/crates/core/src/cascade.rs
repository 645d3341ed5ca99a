//! Shocks, cascades of attacks, exact worst-case stake loss, and the cascade
//! length bound.
//!
//! A shock removes validators; a cascade is a sequence of pairwise-disjoint
//! attacks, each valid (or stable) on the graph left by the shock and all
//! earlier steps. Worst-case loss searches every admissible shock and every
//! cascade within the enumeration cap, in exact arithmetic.
//!
//! Witness determinism: shocks, heads, and attacker sets are scanned in
//! ascending bitmask order over file-order indices, and the first optimum
//! found is kept. All reported witnesses re-verify.

use std::collections::HashMap;
use std::ops::ControlFlow;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::analysis::{
    coverage_needs, is_stable_attack, is_valid_attack, Attack, EnumLimits,
};
use crate::error::{Error, Result};
use crate::model::RestakingGraph;
use crate::rational::{format_rational, Rational};
use crate::sets::{ServiceSet, ValidatorSet};

/// A stake shock: the removed validators together with the budget fraction
/// they were drawn under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shock {
    pub removed: ValidatorSet,
    pub budget: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CascadeMode {
    Valid,
    Stable,
}

/// An ordered sequence of attacks, each to be checked against the graph left
/// by the shock and all earlier steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cascade {
    pub steps: Vec<Attack>,
    pub mode: CascadeMode,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CascadeVerdict {
    pub ok: bool,
    /// Zero-based index of the first failing step.
    pub failing_step: Option<usize>,
    pub reason: Option<String>,
}

impl CascadeVerdict {
    fn pass() -> Self {
        CascadeVerdict {
            ok: true,
            failing_step: None,
            reason: None,
        }
    }

    fn fail(step: usize, reason: String) -> Self {
        CascadeVerdict {
            ok: false,
            failing_step: Some(step),
            reason: Some(reason),
        }
    }
}

/// Replays a cascade step by step: every head must be fresh, every attacker
/// set must still be present, and every step must be a valid (or, in stable
/// mode, stable) attack on the progressively reduced graph.
pub fn verify_cascade(
    g: &RestakingGraph,
    shock: ValidatorSet,
    cascade: &Cascade,
    limits: &EnumLimits,
) -> Result<CascadeVerdict> {
    g.total_stake(shock)?;
    for step in &cascade.steps {
        g.total_profit(step.services)?;
        g.total_stake(step.attackers)?;
    }
    let mut current = g.remove_validators(shock)?;
    let mut used_services = ServiceSet::empty();
    for (t, step) in cascade.steps.iter().enumerate() {
        if !step.services.is_disjoint(used_services) {
            return Ok(CascadeVerdict::fail(
                t,
                "services overlap an earlier step".to_string(),
            ));
        }
        if !step.attackers.is_subset(current.present_validators()) {
            return Ok(CascadeVerdict::fail(
                t,
                "attackers overlap the shock or an earlier step".to_string(),
            ));
        }
        if !is_valid_attack(&current, step)? {
            return Ok(CascadeVerdict::fail(
                t,
                "not a valid attack on the reduced graph".to_string(),
            ));
        }
        if cascade.mode == CascadeMode::Stable {
            let report = is_stable_attack(&current, step, limits)?;
            if !report.stable {
                let d = report.destabilizer.expect("unstable attack has a destabilizer");
                return Ok(CascadeVerdict::fail(
                    t,
                    format!(
                        "not stable: dropping to services [{}], attackers [{}] spares enough stake",
                        current.service_ids(d.services).join(","),
                        current.validator_ids(d.attackers).join(","),
                    ),
                ));
            }
        }
        current = current.remove_validators(step.attackers)?;
        used_services = used_services.union(step.services);
    }
    Ok(CascadeVerdict::pass())
}

/// The union of all steps. For a verified valid cascade the result is itself
/// a valid attack on the shocked graph.
pub fn flatten_cascade(cascade: &Cascade) -> Attack {
    let mut services = ServiceSet::empty();
    let mut attackers = ValidatorSet::empty();
    for step in &cascade.steps {
        services = services.union(step.services);
        attackers = attackers.union(step.attackers);
    }
    Attack::new(services, attackers)
}

/// Is the shock within budget? Globally the removed stake may be at most a
/// psi fraction of all stake; locally only the removed share of the
/// coalition's exclusive stake is constrained.
pub fn shock_admissible(
    g: &RestakingGraph,
    removed: ValidatorSet,
    psi: &Rational,
    coalition: Option<ServiceSet>,
) -> Result<bool> {
    if psi.is_negative() {
        return Err(Error::PsiOutOfRange(format_rational(psi)));
    }
    g.total_stake(removed)?;
    match coalition {
        None => Ok(g.stake_sum(removed) <= psi * g.stake_sum(g.present_validators())),
        Some(c) => {
            let exclusive = g.exclusive_validators(c)?;
            if exclusive.is_empty() {
                return Err(Error::NoExclusiveValidators);
            }
            Ok(g.stake_sum(removed.intersection(exclusive)) <= psi * g.stake_sum(exclusive))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LossReport {
    /// Worst-case lost stake fraction: budget plus worst cascading loss,
    /// capped at 1 (the whole stake).
    pub loss: Rational,
    pub witness_shock: Shock,
    pub witness_cascade: Cascade,
    /// Stake fraction the witness shock actually removes (global: of all
    /// stake; local: of the coalition's exclusive stake). At most the budget.
    pub realized_shock_fraction: Rational,
}

fn check_psi(psi: &Rational) -> Result<()> {
    if psi.is_negative() || psi > &Rational::one() {
        return Err(Error::PsiOutOfRange(format_rational(psi)));
    }
    Ok(())
}

/// The heaviest valid attack on the graph: maximizes burned stake over all
/// attacker sets, pairing each with the maximal head it can corrupt.
fn heaviest_attack(g: &RestakingGraph) -> Option<(Attack, Rational)> {
    let needs = coverage_needs(g);
    let masks: Vec<ValidatorSet> = (0..g.service_count())
        .map(|s| g.service_neighbors(s))
        .collect();
    let mut best: Option<(Attack, Rational)> = None;
    let _ = crate::analysis::walk_subsets_with_coverage(
        g,
        g.present_validators(),
        &masks,
        &mut |set, stake, covered| {
            let mut head = ServiceSet::empty();
            let mut profit = Rational::zero();
            for s in 0..needs.len() {
                if covered[s] >= needs[s] {
                    head = head.with(s);
                    profit += &g.service(s).profit;
                }
            }
            if profit > *stake {
                let better = match &best {
                    None => true,
                    Some((b, b_stake)) => {
                        stake > b_stake
                            || (stake == b_stake && set.cmp_canonical(b.attackers).is_lt())
                    }
                };
                if better {
                    best = Some((Attack::new(head, set), stake.clone()));
                }
            }
            ControlFlow::Continue(())
        },
    );
    best
}

/// Worst-case global stake loss under a psi-budget shock. Any valid cascade
/// flattens to a single valid attack on the shocked graph, so the search
/// ranges over shocks and single attacks, maximizing burned stake.
pub fn worst_case_loss_global(
    g: &RestakingGraph,
    psi: &Rational,
    limits: &EnumLimits,
) -> Result<LossReport> {
    check_psi(psi)?;
    limits.check(g)?;
    let total = g.stake_sum(g.present_validators());
    if total.is_zero() {
        return Err(Error::ZeroTotalStake);
    }
    let budget = psi * &total;
    // Base candidate: the empty shock with no attack. Strict improvement
    // keeps the first (ascending) optimal shock, so ties never displace it.
    let mut best_term = Rational::zero();
    let mut best_shock = ValidatorSet::empty();
    let mut best_steps: Vec<Attack> = Vec::new();
    for removed in g.present_validators().subsets() {
        if g.stake_sum(removed) > budget {
            continue;
        }
        let shocked = g.remove_validators(removed)?;
        if let Some((attack, burned)) = heaviest_attack(&shocked) {
            if burned > best_term {
                best_term = burned;
                best_shock = removed;
                best_steps = vec![attack];
            }
        }
    }
    let loss_raw = psi + &best_term / &total;
    let loss = if loss_raw > Rational::one() {
        Rational::one()
    } else {
        loss_raw
    };
    Ok(LossReport {
        loss,
        realized_shock_fraction: g.stake_sum(best_shock) / &total,
        witness_shock: Shock {
            removed: best_shock,
            budget: psi.clone(),
        },
        witness_cascade: Cascade {
            steps: best_steps,
            mode: CascadeMode::Valid,
        },
    })
}

/// Search state for the local-loss cascade DFS, keyed by the validators still
/// present and the services already attacked. The best continuation from a
/// state is independent of how it was reached, so it is shared across shocks.
struct LocalSearch<'a> {
    g: &'a RestakingGraph,
    exclusive: ValidatorSet,
    mode: CascadeMode,
    limits: EnumLimits,
    memo: HashMap<(u128, u128), (Rational, Option<Attack>)>,
}

impl LocalSearch<'_> {
    /// Maximum exclusive stake a cascade can still burn from this state,
    /// with the first step of the first maximizing cascade in scan order.
    /// Zero-attacker steps are excluded: they remove nothing and never
    /// increase the total, so every optimum is reachable without them.
    fn best(&mut self, current: &RestakingGraph, used: ServiceSet) -> Result<(Rational, Option<Attack>)> {
        let key = (current.present_validators().bits(), used.bits());
        if let Some(hit) = self.memo.get(&key) {
            return Ok(hit.clone());
        }
        let mut best_value = Rational::zero();
        let mut best_step: Option<Attack> = None;
        let fresh = current.all_services().difference(used);
        for services in fresh.subsets() {
            if services.is_empty() || current.profit_sum(services).is_zero() {
                continue;
            }
            // Stable attacks cannot carry attackers outside the joint
            // neighborhood (dropping such a validator spares stake for
            // free), so the stable search prunes to it; valid attacks may
            // pad freely, so the valid search scans every present subset.
            let space = match self.mode {
                CascadeMode::Stable => current.neighbors_of_services_unchecked(services),
                CascadeMode::Valid => current.present_validators(),
            };
            for attackers in space.subsets() {
                if attackers.is_empty() {
                    continue;
                }
                let attack = Attack::new(services, attackers);
                if !is_valid_attack(current, &attack)? {
                    continue;
                }
                if self.mode == CascadeMode::Stable
                    && !is_stable_attack(current, &attack, &self.limits)?.stable
                {
                    continue;
                }
                let burned = current.stake_sum(attackers.intersection(self.exclusive));
                let after = current.remove_validators(attackers)?;
                let (tail, _) = self.best(&after, used.union(services))?;
                let value = burned + tail;
                if value > best_value {
                    best_value = value;
                    best_step = Some(attack);
                }
            }
        }
        self.memo.insert(key, (best_value.clone(), best_step));
        Ok((best_value, best_step))
    }

    fn reconstruct(&mut self, shocked: &RestakingGraph) -> Result<Vec<Attack>> {
        let mut steps = Vec::new();
        let mut current = shocked.clone();
        let mut used = ServiceSet::empty();
        loop {
            let (_, step) = self.best(&current, used)?;
            match step {
                None => break,
                Some(attack) => {
                    current = current.remove_validators(attack.attackers)?;
                    used = used.union(attack.services);
                    steps.push(attack);
                }
            }
        }
        Ok(steps)
    }
}

/// Worst-case loss of a coalition's exclusive stake under a psi-budget shock
/// of that stake (validators outside it may be removed freely). Cascades do
/// not flatten in stable mode, so the search walks genuine sequences of
/// disjoint attacks over progressively reduced graphs.
pub fn worst_case_loss_local(
    g: &RestakingGraph,
    coalition: ServiceSet,
    psi: &Rational,
    mode: CascadeMode,
    limits: &EnumLimits,
) -> Result<LossReport> {
    check_psi(psi)?;
    limits.check(g)?;
    let exclusive = g.exclusive_validators(coalition)?;
    if exclusive.is_empty() {
        return Err(Error::NoExclusiveValidators);
    }
    let exclusive_total = g.stake_sum(exclusive);
    if exclusive_total.is_zero() {
        return Err(Error::ZeroExclusiveStake);
    }
    let budget = psi * &exclusive_total;
    let mut search = LocalSearch {
        g,
        exclusive,
        mode,
        limits: *limits,
        memo: HashMap::new(),
    };
    let _ = search.g; // graph retained for lifetime clarity; states carry reduced copies
    let mut best_term = Rational::zero();
    let mut best_shock: Option<ValidatorSet> = None;
    for removed in g.present_validators().subsets() {
        if g.stake_sum(removed.intersection(search.exclusive)) > budget {
            continue;
        }
        let shocked = g.remove_validators(removed)?;
        let (value, _) = search.best(&shocked, ServiceSet::empty())?;
        if best_shock.is_none() || value > best_term {
            best_term = value;
            best_shock = Some(removed);
        }
    }
    let best_shock = best_shock.expect("empty shock is always admissible");
    let steps = search.reconstruct(&g.remove_validators(best_shock)?)?;
    let loss_raw = psi + &best_term / &exclusive_total;
    let loss = if loss_raw > Rational::one() {
        Rational::one()
    } else {
        loss_raw
    };
    Ok(LossReport {
        loss,
        realized_shock_fraction: g.stake_sum(best_shock.intersection(search.exclusive))
            / &exclusive_total,
        witness_shock: Shock {
            removed: best_shock,
            budget: psi.clone(),
        },
        witness_cascade: Cascade { steps, mode },
    })
}

/// How far back any step's service neighborhoods (in the original graph)
/// reach into previously removed validator sets, counting the shock as
/// removal zero. Zero means no step references earlier removals.
pub fn reference_depth(
    g: &RestakingGraph,
    shock: ValidatorSet,
    cascade: &Cascade,
) -> Result<usize> {
    g.total_stake(shock)?;
    let mut removed: Vec<ValidatorSet> = vec![shock];
    for step in &cascade.steps {
        g.total_profit(step.services)?;
        g.total_stake(step.attackers)?;
        removed.push(step.attackers);
    }
    let mut depth = 0;
    for (t, step) in cascade.steps.iter().enumerate() {
        let nbhd = g.neighbors_of_services_unchecked(step.services);
        for i in 1..=(t + 1) {
            if !nbhd.is_disjoint(removed[t + 1 - i]) {
                depth = depth.max(i);
            }
        }
    }
    Ok(depth)
}

/// The cascade length bound for a graph with gamma-slack: the smallest
/// integer at least k(1 + log over base (1+gamma) of psi*sigma_V/(eps*gamma)),
/// where eps is the minimum validator stake. The logarithm is bracketed by
/// exact integer powers; no floating point is involved.
pub fn length_bound(
    g: &RestakingGraph,
    gamma: &Rational,
    psi: &Rational,
    k: usize,
) -> Result<Rational> {
    if gamma <= &Rational::zero() {
        return Err(Error::NonpositiveGamma);
    }
    if psi <= &Rational::zero() {
        return Err(Error::NonpositivePsi);
    }
    if k < 1 {
        return Err(Error::DepthOutOfRange);
    }
    let present = g.present_validators();
    if present.is_empty() {
        return Err(Error::Precondition(
            "length bound needs at least one validator".to_string(),
        ));
    }
    let mut eps: Option<Rational> = None;
    let mut total = Rational::zero();
    for v in present.iter() {
        let stake = &g.validator(v).stake;
        if stake.is_zero() {
            return Err(Error::ZeroStakeValidator(g.validator(v).id.to_string()));
        }
        if eps.as_ref().map_or(true, |e| stake < e) {
            eps = Some(stake.clone());
        }
        total += stake;
    }
    let eps = eps.expect("nonempty validator set");
    let ratio = psi * total / (eps * gamma);
    // target = ratio^k, computed by exact repeated multiplication.
    let mut target = Rational::one();
    for _ in 0..k {
        target *= &ratio;
    }
    // Smallest integer j with (1+gamma)^j >= target; the bound is k + j.
    let base = Rational::one() + gamma;
    let mut j: i64 = 0;
    let mut power = Rational::one();
    let mut guard = 0u32;
    if power >= target {
        loop {
            let lower = &power / &base;
            if lower >= target {
                power = lower;
                j -= 1;
            } else {
                break;
            }
            guard += 1;
            if guard > 1_000_000 {
                return Err(Error::LengthBoundOverflow);
            }
        }
    } else {
        while power < target {
            power *= &base;
            j += 1;
            guard += 1;
            if guard > 1_000_000 {
                return Err(Error::LengthBoundOverflow);
            }
        }
    }
    Ok(Rational::from_integer((k as i64 + j).into()))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CascadeStepFile {
    services: Vec<String>,
    validators: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CascadeWitnessFile {
    shock: Vec<String>,
    steps: Vec<CascadeStepFile>,
    mode: CascadeMode,
}

/// Reads a shock-plus-cascade witness from its JSON form, resolving ids
/// against the graph.
pub fn parse_cascade_witness(g: &RestakingGraph, text: &str) -> Result<(ValidatorSet, Cascade)> {
    let file: CascadeWitnessFile = serde_json::from_str(text)?;
    let shock = g.validator_set(&file.shock)?;
    let mut steps = Vec::new();
    for step in &file.steps {
        steps.push(Attack::new(
            g.service_set(&step.services)?,
            g.validator_set(&step.validators)?,
        ));
    }
    Ok((
        shock,
        Cascade {
            steps,
            mode: file.mode,
        },
    ))
}

/// Writes a shock-plus-cascade witness as canonical JSON: ids in file order,
/// fixed field order, trailing newline. Parsing it back yields the same sets.
pub fn serialize_cascade_witness(
    g: &RestakingGraph,
    shock: ValidatorSet,
    cascade: &Cascade,
) -> Result<String> {
    g.total_stake(shock)?;
    let mut steps = Vec::new();
    for step in &cascade.steps {
        g.total_profit(step.services)?;
        g.total_stake(step.attackers)?;
        steps.push(CascadeStepFile {
            services: g.service_ids(step.services),
            validators: g.validator_ids(step.attackers),
        });
    }
    let file = CascadeWitnessFile {
        shock: g.validator_ids(shock),
        steps,
        mode: cascade.mode,
    };
    Ok(serde_json::to_string_pretty(&file)? + "\n")
}
