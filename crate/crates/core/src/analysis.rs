//! Attack-level analysis: attacking coalitions, valid attacks, exact
//! overcollateralization slack, attack stability, and attack headers.
//!
//! Everything here is an exhaustive search over subset lattices, guarded by an
//! explicit [`EnumLimits`] cap. Results are deterministic: enumeration follows
//! ascending bitmask order over file-order indices, and ties between
//! equally-good witnesses are broken by canonical set order
//! ([`crate::sets::IndexSet::cmp_canonical`]).

use std::ops::ControlFlow;

use num_traits::{One, Zero};

use crate::conditions::GammaStatus;
use crate::error::{Error, Result};
use crate::model::RestakingGraph;
use crate::rational::{format_rational, Rational};
use crate::sets::{ServiceSet, ValidatorSet};

/// Cap on exhaustive enumeration. Exceeding it is a refusal, never a silent
/// approximation: callers must raise the cap to acknowledge the exponential
/// cost of a larger search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumLimits {
    pub max_services: usize,
    pub max_validators: usize,
}

impl Default for EnumLimits {
    fn default() -> Self {
        EnumLimits {
            max_services: 16,
            max_validators: 20,
        }
    }
}

impl EnumLimits {
    pub fn check(&self, g: &RestakingGraph) -> Result<()> {
        if g.service_count() > self.max_services || g.validator_count() > self.max_validators {
            return Err(Error::CapExceeded {
                services: g.service_count(),
                validators: g.validator_count(),
                max_services: self.max_services,
                max_validators: self.max_validators,
            });
        }
        Ok(())
    }
}

/// A candidate attack: a set of services to corrupt and a set of validators
/// whose stake is burned. The attacker set may include validators outside the
/// services' neighborhoods; classification accepts them (they only add cost),
/// while stake-minimal searches prune them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Attack {
    pub services: ServiceSet,
    pub attackers: ValidatorSet,
}

impl Attack {
    pub fn new(services: ServiceSet, attackers: ValidatorSet) -> Self {
        Attack { services, attackers }
    }

    pub fn from_ids<S: AsRef<str>, V: AsRef<str>>(
        g: &RestakingGraph,
        services: &[S],
        attackers: &[V],
    ) -> Result<Self> {
        Ok(Attack {
            services: g.service_set(services)?,
            attackers: g.validator_set(attackers)?,
        })
    }
}

/// An attack header: a coalition of services together with attackers drawn
/// only from its exclusive validators. The non-exclusive remainder of the
/// validator set is presumed adversarial when checking that the header can
/// head a real attacking coalition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttackHeader {
    pub services: ServiceSet,
    pub attackers: ValidatorSet,
}

fn validate_attack(g: &RestakingGraph, attack: &Attack) -> Result<()> {
    g.total_profit(attack.services)?;
    g.total_stake(attack.attackers)?;
    Ok(())
}

/// Per-service coverage requirement: alpha_s times the stake currently
/// allocated to s. A service whose neighborhood stake is zero needs zero.
pub(crate) fn coverage_needs(g: &RestakingGraph) -> Vec<Rational> {
    (0..g.service_count())
        .map(|s| g.service(s).alpha.clone() * g.stake_sum(g.service_neighbors(s)))
        .collect()
}

/// Walks every subset of `space`, maintaining the subset's total stake and,
/// for each watched service, the stake the subset contributes to that
/// service's neighborhood. The visitor can stop the walk early.
///
/// The walk order is a fixed depth-first order (exclude before include), so
/// any caller that needs a canonical optimum must compare candidates
/// explicitly rather than rely on visit order.
pub(crate) fn walk_subsets_with_coverage<F>(
    g: &RestakingGraph,
    space: ValidatorSet,
    watched_neighborhoods: &[ValidatorSet],
    f: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(ValidatorSet, &Rational, &[Rational]) -> ControlFlow<()>,
{
    struct Walker<'a, F> {
        g: &'a RestakingGraph,
        order: Vec<usize>,
        watched: &'a [ValidatorSet],
        f: &'a mut F,
    }

    impl<F> Walker<'_, F>
    where
        F: FnMut(ValidatorSet, &Rational, &[Rational]) -> ControlFlow<()>,
    {
        fn go(
            &mut self,
            pos: usize,
            current: ValidatorSet,
            stake: &mut Rational,
            covered: &mut [Rational],
        ) -> ControlFlow<()> {
            if pos == self.order.len() {
                return (self.f)(current, stake, covered);
            }
            let v = self.order[pos];
            self.go(pos + 1, current, stake, covered)?;
            let s_v = self.g.validator(v).stake.clone();
            *stake += &s_v;
            for (k, nbhd) in self.watched.iter().enumerate() {
                if nbhd.contains(v) {
                    covered[k] += &s_v;
                }
            }
            let result = self.go(pos + 1, current.with(v), stake, covered);
            *stake -= &s_v;
            for (k, nbhd) in self.watched.iter().enumerate() {
                if nbhd.contains(v) {
                    covered[k] -= &s_v;
                }
            }
            result
        }
    }

    let mut walker = Walker {
        g,
        order: space.iter().collect(),
        watched: watched_neighborhoods,
        f,
    };
    let mut stake = Rational::zero();
    let mut covered = vec![Rational::zero(); watched_neighborhoods.len()];
    walker.go(0, ValidatorSet::empty(), &mut stake, &mut covered)
}

/// Does every service in the attack see enough attacker stake in its current
/// neighborhood? Vacuously true for an empty service set.
pub fn is_attacking_coalition(g: &RestakingGraph, attack: &Attack) -> Result<bool> {
    validate_attack(g, attack)?;
    for s in attack.services.iter() {
        let nbhd = g.service_neighbors(s);
        let covered = g.stake_sum(attack.attackers.intersection(nbhd));
        let need = g.service(s).alpha.clone() * g.stake_sum(nbhd);
        if covered < need {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A valid attack is an attacking coalition whose corruption profit strictly
/// exceeds the stake it burns. An empty service set is never valid.
pub fn is_valid_attack(g: &RestakingGraph, attack: &Attack) -> Result<bool> {
    Ok(is_attacking_coalition(g, attack)?
        && g.profit_sum(attack.services) > g.stake_sum(attack.attackers))
}

/// Can every service in `services` be corrupted with alpha = 1 shortcuts?
/// Requires positive stakes so that full coverage forces full containment.
fn alpha_one_fast_path(g: &RestakingGraph, services: ServiceSet) -> bool {
    services
        .iter()
        .all(|s| g.service(s).alpha == Rational::one())
        && g.present_validators()
            .iter()
            .all(|v| g.validator(v).stake > Rational::zero())
}

/// The cheapest validator set that forms an attacking coalition with the
/// given services, searched over subsets of their joint neighborhood
/// (validators outside it only add cost). Ties go to canonical set order
/// within that pruned space. Always `Some`: the full neighborhood works.
pub fn min_attack_stake(
    g: &RestakingGraph,
    services: ServiceSet,
) -> Result<Option<(ValidatorSet, Rational)>> {
    g.total_profit(services)?;
    if services.is_empty() {
        return Ok(Some((ValidatorSet::empty(), Rational::zero())));
    }
    let space = g.neighbors_of_services_unchecked(services);
    if alpha_one_fast_path(g, services) {
        // With alpha = 1 and positive stakes, each service needs its whole
        // neighborhood, so the joint neighborhood is the unique minimum.
        let stake = g.stake_sum(space);
        return Ok(Some((space, stake)));
    }
    let watched: Vec<usize> = services.iter().collect();
    let masks: Vec<ValidatorSet> = watched.iter().map(|&s| g.service_neighbors(s)).collect();
    let needs: Vec<Rational> = watched
        .iter()
        .zip(&masks)
        .map(|(&s, &m)| g.service(s).alpha.clone() * g.stake_sum(m))
        .collect();
    let mut best: Option<(ValidatorSet, Rational)> = None;
    let _ = walk_subsets_with_coverage(g, space, &masks, &mut |set, stake, covered| {
        if covered.iter().zip(&needs).all(|(c, n)| c >= n) {
            let better = match &best {
                None => true,
                Some((b_set, b_stake)) => {
                    stake < b_stake
                        || (stake == b_stake && set.cmp_canonical(*b_set).is_lt())
                }
            };
            if better {
                best = Some((set, stake.clone()));
            }
        }
        ControlFlow::Continue(())
    });
    Ok(best)
}

/// Every valid attack, in ascending (services, attackers) bitmask order.
/// Attacker sets range over all present validators, including ones outside
/// the services' neighborhoods.
pub fn enumerate_valid_attacks(g: &RestakingGraph, limits: &EnumLimits) -> Result<Vec<Attack>> {
    limits.check(g)?;
    let needs = coverage_needs(g);
    let mut out = Vec::new();
    for services in g.all_services().subsets() {
        if services.is_empty() {
            continue;
        }
        let profit = g.profit_sum(services);
        for attackers in g.present_validators().subsets() {
            if profit <= g.stake_sum(attackers) {
                continue;
            }
            let coalition = services.iter().all(|s| {
                let nbhd = g.service_neighbors(s);
                g.stake_sum(attackers.intersection(nbhd)) >= needs[s]
            });
            if coalition {
                out.push(Attack::new(services, attackers));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecurityReport {
    pub secure: bool,
    /// A valid attack when the graph is insecure.
    pub counterexample: Option<Attack>,
}

/// Decides security by scanning attacker sets once: for a fixed attacker set
/// B the most profitable head is the maximal set of services whose thresholds
/// B meets, so the graph is insecure iff some B beats its own stake.
pub fn is_secure(g: &RestakingGraph, limits: &EnumLimits) -> Result<SecurityReport> {
    limits.check(g)?;
    let needs = coverage_needs(g);
    let masks: Vec<ValidatorSet> = (0..g.service_count())
        .map(|s| g.service_neighbors(s))
        .collect();
    let mut found: Option<Attack> = None;
    let _ = walk_subsets_with_coverage(g, g.present_validators(), &masks, &mut |set, stake, covered| {
        let mut head = ServiceSet::empty();
        let mut profit = Rational::zero();
        for s in 0..needs.len() {
            if covered[s] >= needs[s] {
                head = head.with(s);
                profit += &g.service(s).profit;
            }
        }
        if profit > *stake {
            found = Some(Attack::new(head, set));
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    Ok(SecurityReport {
        secure: found.is_none(),
        counterexample: found,
    })
}

/// Checks that every attacking coalition keeps a gamma margin: profits scaled
/// by (1 + gamma) still do not exceed the attackers' stake.
pub fn is_gamma_slack_secure(
    g: &RestakingGraph,
    gamma: &Rational,
    limits: &EnumLimits,
) -> Result<bool> {
    if gamma < &Rational::zero() {
        return Err(Error::NegativeGamma(format_rational(gamma)));
    }
    limits.check(g)?;
    let factor = Rational::one() + gamma;
    let needs = coverage_needs(g);
    let masks: Vec<ValidatorSet> = (0..g.service_count())
        .map(|s| g.service_neighbors(s))
        .collect();
    let mut holds = true;
    let _ = walk_subsets_with_coverage(g, g.present_validators(), &masks, &mut |_set, stake, covered| {
        let mut profit = Rational::zero();
        for s in 0..needs.len() {
            if covered[s] >= needs[s] {
                profit += &g.service(s).profit;
            }
        }
        if profit * &factor > *stake {
            holds = false;
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    Ok(holds)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SlackStatus {
    /// Some coalition already attacks at a profit; no nonnegative slack exists.
    Insecure,
    /// The largest gamma for which the graph is gamma-slack secure.
    Finite(Rational),
    /// No coalition has positive profit, so every gamma works.
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlackResult {
    pub status: SlackStatus,
    /// The coalition minimizing stake-to-profit, with its cheapest attackers.
    pub witness: Option<Attack>,
}

/// Exact maximum slack: minimizes sigma_B / pi_A over all attacking
/// coalitions with positive profit, using the cheapest attacker set per head.
pub fn max_slack(g: &RestakingGraph, limits: &EnumLimits) -> Result<SlackResult> {
    limits.check(g)?;
    let mut best: Option<(Rational, Attack)> = None;
    for services in g.all_services().subsets() {
        if services.is_empty() {
            continue;
        }
        let profit = g.profit_sum(services);
        if profit.is_zero() {
            continue;
        }
        let (attackers, stake) = min_attack_stake(g, services)?.expect("joint neighborhood always works");
        let ratio = stake / &profit;
        let better = match &best {
            None => true,
            Some((b_ratio, b_attack)) => {
                ratio < *b_ratio
                    || (ratio == *b_ratio
                        && services.cmp_canonical(b_attack.services).is_lt())
            }
        };
        if better {
            best = Some((ratio, Attack::new(services, attackers)));
        }
    }
    Ok(match best {
        None => SlackResult {
            status: SlackStatus::Unbounded,
            witness: None,
        },
        Some((ratio, attack)) => {
            let gamma = ratio - Rational::one();
            let status = if gamma < Rational::zero() {
                SlackStatus::Insecure
            } else {
                SlackStatus::Finite(gamma)
            };
            SlackResult {
                status,
                witness: Some(attack),
            }
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilityReport {
    pub stable: bool,
    /// A valid proper sub-attack whose omitted attackers keep at least as
    /// much stake as the omitted services were worth.
    pub destabilizer: Option<Attack>,
}

/// A valid attack is stable when every valid proper sub-attack strands more
/// profit than the stake it would spare. The attack itself is excluded from
/// the comparison set.
pub fn is_stable_attack(
    g: &RestakingGraph,
    attack: &Attack,
    limits: &EnumLimits,
) -> Result<StabilityReport> {
    if !is_valid_attack(g, attack)? {
        return Err(Error::NotAValidAttack);
    }
    if alpha_one_fast_path(g, attack.services) {
        return Ok(is_stable_attack_alpha_one(g, attack));
    }
    limits.check(g)?;
    Ok(is_stable_attack_general(g, attack))
}

/// alpha = 1 with positive stakes: a sub-attack on services A' needs exactly
/// their joint surviving neighborhood, so only the 2^|A| sub-coalitions need
/// checking instead of the full sub-attack lattice.
fn is_stable_attack_alpha_one(g: &RestakingGraph, attack: &Attack) -> StabilityReport {
    let full_nbhd = g.neighbors_of_services_unchecked(attack.services);
    if attack.attackers != full_nbhd {
        // Coalition-hood forces attackers to contain the joint neighborhood;
        // dropping the surplus is a valid sub-attack that spares stake while
        // stranding no profit at all.
        return StabilityReport {
            stable: false,
            destabilizer: Some(Attack::new(attack.services, full_nbhd)),
        };
    }
    for sub in attack.services.subsets() {
        if sub.is_empty() || sub == attack.services {
            continue;
        }
        let sub_attackers = g.neighbors_of_services_unchecked(sub);
        let valid = g.profit_sum(sub) > g.stake_sum(sub_attackers);
        if !valid {
            continue;
        }
        let spared = g.stake_sum(attack.attackers.difference(sub_attackers));
        let stranded = g.profit_sum(attack.services.difference(sub));
        if spared >= stranded {
            return StabilityReport {
                stable: false,
                destabilizer: Some(Attack::new(sub, sub_attackers)),
            };
        }
    }
    StabilityReport {
        stable: true,
        destabilizer: None,
    }
}

pub(crate) fn is_stable_attack_general(g: &RestakingGraph, attack: &Attack) -> StabilityReport {
    let needs = coverage_needs(g);
    let total_stake = g.stake_sum(attack.attackers);
    let total_profit = g.profit_sum(attack.services);
    for sub_services in attack.services.subsets() {
        let sub_profit = g.profit_sum(sub_services);
        let stranded = &total_profit - &sub_profit;
        for sub_attackers in attack.attackers.subsets() {
            if sub_services == attack.services && sub_attackers == attack.attackers {
                continue;
            }
            let sub_stake = g.stake_sum(sub_attackers);
            if sub_profit <= sub_stake {
                continue;
            }
            let coalition = sub_services.iter().all(|s| {
                let nbhd = g.service_neighbors(s);
                g.stake_sum(sub_attackers.intersection(nbhd)) >= needs[s]
            });
            if !coalition {
                continue;
            }
            let spared = &total_stake - &sub_stake;
            if spared >= stranded {
                return StabilityReport {
                    stable: false,
                    destabilizer: Some(Attack::new(sub_services, sub_attackers)),
                };
            }
        }
    }
    StabilityReport {
        stable: true,
        destabilizer: None,
    }
}

/// Is (X, Y) an attack header: Y lies in X's exclusive validators and the
/// pair heads an attacking coalition once all non-exclusive validators are
/// presumed adversarial. Coalition-hood is monotone in the attacker set, so
/// testing the maximal completion decides existence.
pub fn is_attack_header(
    g: &RestakingGraph,
    services: ServiceSet,
    attackers: ValidatorSet,
) -> Result<bool> {
    let exclusive = g.exclusive_validators(services)?;
    g.total_stake(attackers)?;
    if !attackers.is_subset(exclusive) {
        return Err(Error::HeaderAttackersNotExclusive {
            x: g.service_ids(services).join(","),
            y: g.validator_ids(attackers).join(","),
        });
    }
    let completion = attackers.union(g.present_validators().difference(exclusive));
    is_attacking_coalition(g, &Attack::new(services, completion))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeaderReport {
    pub holds: bool,
    /// The violating header with its cheapest exclusive attacker set.
    pub violation: Option<AttackHeader>,
}

/// Finds, for a head X drawn from a coalition with exclusive validator set
/// `exclusive`, the cheapest exclusive attacker set that completes an
/// attacking coalition on X once every non-exclusive validator is presumed
/// adversarial. `None` when X heads no attacking coalition at all.
///
/// The completion base is the complement of the *coalition's* exclusive set,
/// not the head's own: stake exclusive to the coalition is precisely what the
/// coalition can still count on, whichever sub-head is attacked, and it is
/// what the local load condition reasons about.
fn min_header_attackers(
    g: &RestakingGraph,
    services: ServiceSet,
    exclusive: ValidatorSet,
) -> Option<(ValidatorSet, Rational)> {
    let base = g.present_validators().difference(exclusive);
    let watched: Vec<usize> = services.iter().collect();
    let masks: Vec<ValidatorSet> = watched.iter().map(|&s| g.service_neighbors(s)).collect();
    // Exclusive validators adjacent to no service in X cannot help meet any
    // threshold; they would only add stake, so the search skips them.
    let space = exclusive.intersection(g.neighbors_of_services_unchecked(services));
    let residual: Vec<Rational> = watched
        .iter()
        .zip(&masks)
        .map(|(&s, &m)| {
            g.service(s).alpha.clone() * g.stake_sum(m) - g.stake_sum(base.intersection(m))
        })
        .collect();
    let mut best: Option<(ValidatorSet, Rational)> = None;
    let _ = walk_subsets_with_coverage(g, space, &masks, &mut |set, stake, covered| {
        if covered.iter().zip(&residual).all(|(c, n)| c >= n) {
            let better = match &best {
                None => true,
                Some((b_set, b_stake)) => {
                    stake < b_stake || (stake == b_stake && set.cmp_canonical(*b_set).is_lt())
                }
            };
            if better {
                best = Some((set, stake.clone()));
            }
        }
        ControlFlow::Continue(())
    });
    best
}

/// Checks that every attack on a head drawn from within the coalition must
/// burn exclusive stake with a gamma margin over the head's profit, when all
/// stake not exclusive to the coalition is presumed adversarial. Heads are
/// scanned largest first so a violation is reported at its most aggregated
/// form. This verdict depends only on the coalition's local view, so it is
/// identical across local variants of the graph.
pub fn check_header_overcollateralization(
    g: &RestakingGraph,
    coalition: ServiceSet,
    gamma: &Rational,
    limits: &EnumLimits,
) -> Result<HeaderReport> {
    if gamma < &Rational::zero() {
        return Err(Error::NegativeGamma(format_rational(gamma)));
    }
    g.total_profit(coalition)?;
    limits.check(g)?;
    let exclusive = g.exclusive_validators(coalition)?;
    let factor = Rational::one() + gamma;
    for head in coalition.subsets_descending() {
        let profit = g.profit_sum(head);
        if profit.is_zero() {
            continue;
        }
        if let Some((attackers, stake)) = min_header_attackers(g, head, exclusive) {
            if profit * &factor > stake {
                return Ok(HeaderReport {
                    holds: false,
                    violation: Some(AttackHeader {
                        services: head,
                        attackers,
                    }),
                });
            }
        }
    }
    Ok(HeaderReport {
        holds: true,
        violation: None,
    })
}

/// The largest gamma at which header overcollateralization holds for the
/// coalition: the minimum stake-to-profit ratio over all profitable heads.
pub fn header_max_gamma(
    g: &RestakingGraph,
    coalition: ServiceSet,
    limits: &EnumLimits,
) -> Result<GammaStatus> {
    g.total_profit(coalition)?;
    limits.check(g)?;
    let exclusive = g.exclusive_validators(coalition)?;
    let mut min_ratio: Option<Rational> = None;
    for head in coalition.subsets_descending() {
        let profit = g.profit_sum(head);
        if profit.is_zero() {
            continue;
        }
        if let Some((_, stake)) = min_header_attackers(g, head, exclusive) {
            let ratio = stake / profit;
            if min_ratio.as_ref().map_or(true, |m| ratio < *m) {
                min_ratio = Some(ratio);
            }
        }
    }
    Ok(match min_ratio {
        None => GammaStatus::Unbounded,
        Some(r) if r < Rational::one() => GammaStatus::Never,
        Some(r) => GammaStatus::Finite(r - Rational::one()),
    })
}
