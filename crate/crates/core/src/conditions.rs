//! Polynomial-time sufficient conditions for security and its margined and
//! coalition-local refinements.
//!
//! The core check assigns each validator a load: the sum over its services of
//! profit divided by threshold-weighted neighborhood stake. Loads at most 1
//! everywhere guarantee no profitable attack exists; scaling profits by
//! (1 + gamma) gives the margined variant, and substituting coalition-adjusted
//! thresholds gives the local variant that presumes all non-exclusive stake
//! adversarial.

use serde::{Deserialize, Serialize};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::{RestakingGraph, ServiceId, ValidatorId};
use crate::rational::{format_rational, Rational};
use crate::sets::ServiceSet;

/// The largest margin gamma at which a condition holds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum GammaStatus {
    /// The condition fails even at gamma = 0.
    Never,
    /// Holds exactly for gamma at most this value.
    Finite(#[serde(with = "crate::rational::rational_serde")] Rational),
    /// Holds for every gamma.
    Unbounded,
}

impl std::fmt::Display for GammaStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GammaStatus::Never => write!(f, "never"),
            GammaStatus::Finite(g) => write!(f, "{}", format_rational(g)),
            GammaStatus::Unbounded => write!(f, "unbounded"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionReport {
    pub holds: bool,
    /// Normalized load per quantified validator (its left-hand side divided
    /// by its stake): at most 1 means the validator passes.
    pub per_validator_load: Vec<(ValidatorId, Rational)>,
    /// Positive-stake validators whose load exceeds 1.
    pub violating_validators: Vec<ValidatorId>,
    /// Services corruptible at zero attacker cost (zero securing stake, or an
    /// adjusted threshold at or below zero, while promising profit). Their
    /// presence fails the condition outright.
    pub unsatisfiable_services: Vec<ServiceId>,
}

/// Per-service normalized term pi_s / (alpha_s * sigma_N(s)), or `None` when
/// the neighborhood stake is zero (the term is undefined; harmless when the
/// profit is zero, unsatisfiable otherwise).
fn service_terms(g: &RestakingGraph) -> Vec<Option<Rational>> {
    (0..g.service_count())
        .map(|s| {
            let svc = g.service(s);
            let nbhd_stake = g.stake_sum(g.service_neighbors(s));
            if nbhd_stake.is_zero() {
                None
            } else {
                Some(svc.profit.clone() / (svc.alpha.clone() * nbhd_stake))
            }
        })
        .collect()
}

/// Checks that every validator's load, with profits scaled by (1 + gamma),
/// stays within its stake. Holding implies no coalition can attack with a
/// gamma profit margin; at gamma = 0 it implies security outright.
pub fn el_condition_scaled(g: &RestakingGraph, gamma: &Rational) -> Result<ConditionReport> {
    if gamma < &Rational::zero() {
        return Err(Error::NegativeGamma(format_rational(gamma)));
    }
    let factor = Rational::one() + gamma;
    let terms = service_terms(g);
    let unsatisfiable: Vec<ServiceId> = (0..g.service_count())
        .filter(|&s| terms[s].is_none() && g.service(s).profit > Rational::zero())
        .map(|s| g.service(s).id.clone())
        .collect();
    let mut per_validator_load = Vec::new();
    let mut violating = Vec::new();
    for v in g.present_validators().iter() {
        let nbhd = g.validator_neighbors(v);
        if nbhd.is_empty() {
            continue;
        }
        // Undefined terms are skipped: they can only occur when this
        // validator's own stake is zero, which passes vacuously, and any
        // dangerous service behind them is already flagged above.
        let mut load = Rational::zero();
        for s in nbhd.iter() {
            if let Some(t) = &terms[s] {
                load += t;
            }
        }
        load *= &factor;
        if g.validator(v).stake > Rational::zero() && load > Rational::one() {
            violating.push(g.validator(v).id.clone());
        }
        per_validator_load.push((g.validator(v).id.clone(), load));
    }
    Ok(ConditionReport {
        holds: violating.is_empty() && unsatisfiable.is_empty(),
        per_validator_load,
        violating_validators: violating,
        unsatisfiable_services: unsatisfiable,
    })
}

/// The unscaled load condition: a sufficient test for security.
pub fn el_condition(g: &RestakingGraph) -> Result<ConditionReport> {
    el_condition_scaled(g, &Rational::zero())
}

/// The exact threshold margin of the load condition: the scaled condition
/// holds iff gamma is at most the returned value.
pub fn el_max_gamma(g: &RestakingGraph) -> Result<GammaStatus> {
    let terms = service_terms(g);
    for s in 0..g.service_count() {
        if terms[s].is_none() && g.service(s).profit > Rational::zero() {
            return Ok(GammaStatus::Never);
        }
    }
    let mut max_load: Option<Rational> = None;
    for v in g.present_validators().iter() {
        // Zero-stake validators satisfy the condition at every gamma, so
        // they never constrain the margin.
        if g.validator(v).stake.is_zero() || g.validator_neighbors(v).is_empty() {
            continue;
        }
        let mut load = Rational::zero();
        for s in g.validator_neighbors(v).iter() {
            if let Some(t) = &terms[s] {
                load += t;
            }
        }
        if max_load.as_ref().map_or(true, |m| load > *m) {
            max_load = Some(load);
        }
    }
    Ok(match max_load {
        None => GammaStatus::Unbounded,
        Some(l) if l.is_zero() => GammaStatus::Unbounded,
        Some(l) if l > Rational::one() => GammaStatus::Never,
        Some(l) => GammaStatus::Finite(l.recip() - Rational::one()),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjustedAlpha {
    pub service: ServiceId,
    /// May be zero or negative: the coalition's non-exclusive stake already
    /// covers (or over-covers) the service's threshold.
    pub alpha_prime: Rational,
}

/// The coalition-adjusted threshold: the original threshold minus the share
/// of the service's neighborhood stake held outside the coalition's exclusive
/// validators (stake presumed adversarial in local analysis).
pub fn adjusted_alpha(
    g: &RestakingGraph,
    coalition: ServiceSet,
    service: usize,
) -> Result<AdjustedAlpha> {
    g.total_profit(coalition)?;
    let svc = g.service(service);
    if !coalition.contains(service) {
        return Err(Error::ServiceOutsideCoalition(svc.id.to_string()));
    }
    let nbhd = g.service_neighbors(service);
    let nbhd_stake = g.stake_sum(nbhd);
    if nbhd_stake.is_zero() {
        return Err(Error::ZeroNeighborhoodStake(svc.id.to_string()));
    }
    let exclusive = g.exclusive_validators(coalition)?;
    let outside = g.stake_sum(nbhd.difference(exclusive));
    Ok(AdjustedAlpha {
        service: svc.id.clone(),
        alpha_prime: svc.alpha.clone() - outside / nbhd_stake,
    })
}

/// Adjusted per-service terms for a coalition: pi_s / (alpha'_s * sigma_N(s))
/// for s in the coalition, `None` when undefined (zero neighborhood stake or
/// nonpositive adjusted threshold).
fn local_terms(g: &RestakingGraph, coalition: ServiceSet) -> Vec<Option<Rational>> {
    let exclusive = g
        .exclusive_validators(coalition)
        .expect("coalition validated by caller");
    (0..g.service_count())
        .map(|s| {
            if !coalition.contains(s) {
                return None;
            }
            let svc = g.service(s);
            let nbhd = g.service_neighbors(s);
            let nbhd_stake = g.stake_sum(nbhd);
            if nbhd_stake.is_zero() {
                return None;
            }
            let alpha_prime =
                svc.alpha.clone() - g.stake_sum(nbhd.difference(exclusive)) / &nbhd_stake;
            if alpha_prime <= Rational::zero() {
                return None;
            }
            Some(svc.profit.clone() / (alpha_prime * nbhd_stake))
        })
        .collect()
}

/// Services in the coalition that promise profit yet can be corrupted for
/// free once non-exclusive stake is presumed adversarial.
fn local_unsatisfiable(g: &RestakingGraph, coalition: ServiceSet) -> Result<Vec<ServiceId>> {
    let exclusive = g.exclusive_validators(coalition)?;
    let mut out = Vec::new();
    for s in coalition.iter() {
        let svc = g.service(s);
        if svc.profit.is_zero() {
            continue;
        }
        let nbhd = g.service_neighbors(s);
        let nbhd_stake = g.stake_sum(nbhd);
        let hopeless = if nbhd_stake.is_zero() {
            true
        } else {
            let alpha_prime =
                svc.alpha.clone() - g.stake_sum(nbhd.difference(exclusive)) / nbhd_stake;
            alpha_prime <= Rational::zero()
        };
        if hopeless {
            out.push(svc.id.clone());
        }
    }
    Ok(out)
}

/// The coalition-local load condition: quantifies only over the coalition's
/// exclusive validators with nonempty neighborhoods, using adjusted
/// thresholds. Holding implies the coalition's attack headers keep a gamma
/// margin. Any profitable coalition service corruptible for free fails the
/// condition outright, whether or not an exclusive validator sees it.
pub fn el_condition_local(
    g: &RestakingGraph,
    coalition: ServiceSet,
    gamma: &Rational,
) -> Result<ConditionReport> {
    if gamma < &Rational::zero() {
        return Err(Error::NegativeGamma(format_rational(gamma)));
    }
    g.total_profit(coalition)?;
    let factor = Rational::one() + gamma;
    let unsatisfiable = local_unsatisfiable(g, coalition)?;
    let terms = local_terms(g, coalition);
    let exclusive = g.exclusive_validators(coalition)?;
    let mut per_validator_load = Vec::new();
    let mut violating = Vec::new();
    for v in g.present_validators().intersection(exclusive).iter() {
        let nbhd = g.validator_neighbors(v);
        if nbhd.is_empty() {
            continue;
        }
        let mut load = Rational::zero();
        for s in nbhd.iter() {
            if let Some(t) = &terms[s] {
                load += t;
            }
        }
        load *= &factor;
        if g.validator(v).stake > Rational::zero() && load > Rational::one() {
            violating.push(g.validator(v).id.clone());
        }
        per_validator_load.push((g.validator(v).id.clone(), load));
    }
    Ok(ConditionReport {
        holds: violating.is_empty() && unsatisfiable.is_empty(),
        per_validator_load,
        violating_validators: violating,
        unsatisfiable_services: unsatisfiable,
    })
}

/// The exact threshold margin of the local load condition.
pub fn el_max_gamma_local(g: &RestakingGraph, coalition: ServiceSet) -> Result<GammaStatus> {
    g.total_profit(coalition)?;
    if !local_unsatisfiable(g, coalition)?.is_empty() {
        return Ok(GammaStatus::Never);
    }
    let terms = local_terms(g, coalition);
    let exclusive = g.exclusive_validators(coalition)?;
    let mut max_load: Option<Rational> = None;
    for v in g.present_validators().intersection(exclusive).iter() {
        if g.validator(v).stake.is_zero() || g.validator_neighbors(v).is_empty() {
            continue;
        }
        let mut load = Rational::zero();
        for s in g.validator_neighbors(v).iter() {
            if let Some(t) = &terms[s] {
                load += t;
            }
        }
        if max_load.as_ref().map_or(true, |m| load > *m) {
            max_load = Some(load);
        }
    }
    Ok(match max_load {
        None => GammaStatus::Unbounded,
        Some(l) if l.is_zero() => GammaStatus::Unbounded,
        Some(l) if l > Rational::one() => GammaStatus::Never,
        Some(l) => GammaStatus::Finite(l.recip() - Rational::one()),
    })
}
