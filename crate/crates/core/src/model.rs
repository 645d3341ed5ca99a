//! The restaking graph: services with corruption profits and thresholds,
//! validators with stakes, and the bipartite allocation between them.
//!
//! A graph is immutable once built. Removing validators (a stake shock)
//! produces a new value that shares the underlying storage and masks out the
//! removed validators, so vertex indices stay stable across shocks. Services
//! are never removed. All iteration orders follow file order, which makes
//! every downstream witness deterministic.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, Rational};
use crate::sets::{ServiceSet, ValidatorSet, MAX_VERTICES_PER_SIDE};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ServiceId(String);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ValidatorId(String);

impl ServiceId {
    pub fn new(id: impl Into<String>) -> Self {
        ServiceId(id.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl ValidatorId {
    pub fn new(id: impl Into<String>) -> Self {
        ValidatorId(id.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for ServiceId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::fmt::Display for ValidatorId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// A service: `profit` is what corrupting it is worth to an attacker, `alpha`
/// in (0, 1] is the fraction of its allocated stake an attacker must control.
#[derive(Debug, Clone, PartialEq)]
pub struct Service {
    pub id: ServiceId,
    pub profit: Rational,
    pub alpha: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Validator {
    pub id: ValidatorId,
    pub stake: Rational,
}

#[derive(Debug)]
struct GraphCore {
    services: Vec<Service>,
    validators: Vec<Validator>,
    svc_adj: Vec<ValidatorSet>,
    val_adj: Vec<ServiceSet>,
    service_index: HashMap<String, usize>,
    validator_index: HashMap<String, usize>,
}

/// An immutable restaking graph, possibly with some validators shocked away.
#[derive(Debug, Clone)]
pub struct RestakingGraph {
    core: Arc<GraphCore>,
    present: ValidatorSet,
}

impl RestakingGraph {
    /// Builds and validates a graph from its raw parts. Edges are
    /// (service id, validator id) pairs.
    pub fn new(
        services: Vec<Service>,
        validators: Vec<Validator>,
        edges: &[(String, String)],
    ) -> Result<Self> {
        if services.len() > MAX_VERTICES_PER_SIDE {
            return Err(Error::TooManyVertices {
                side: "services",
                count: services.len(),
                max: MAX_VERTICES_PER_SIDE,
            });
        }
        if validators.len() > MAX_VERTICES_PER_SIDE {
            return Err(Error::TooManyVertices {
                side: "validators",
                count: validators.len(),
                max: MAX_VERTICES_PER_SIDE,
            });
        }

        let mut service_index = HashMap::new();
        for (i, s) in services.iter().enumerate() {
            if s.id.as_str().is_empty() {
                return Err(Error::EmptyId { role: "services" });
            }
            if s.profit < Rational::zero() {
                return Err(Error::NegativeProfit {
                    id: s.id.as_str().to_string(),
                    value: format_rational(&s.profit),
                });
            }
            if s.alpha <= Rational::zero() || s.alpha > Rational::from_integer(1.into()) {
                return Err(Error::InvalidAlpha {
                    id: s.id.as_str().to_string(),
                    value: format_rational(&s.alpha),
                });
            }
            if service_index.insert(s.id.as_str().to_string(), i).is_some() {
                return Err(Error::DuplicateService(s.id.as_str().to_string()));
            }
        }

        let mut validator_index = HashMap::new();
        for (i, v) in validators.iter().enumerate() {
            if v.id.as_str().is_empty() {
                return Err(Error::EmptyId { role: "validators" });
            }
            if v.stake < Rational::zero() {
                return Err(Error::NegativeStake {
                    id: v.id.as_str().to_string(),
                    value: format_rational(&v.stake),
                });
            }
            if validator_index.insert(v.id.as_str().to_string(), i).is_some() {
                return Err(Error::DuplicateValidator(v.id.as_str().to_string()));
            }
        }

        let mut svc_adj = vec![ValidatorSet::empty(); services.len()];
        let mut val_adj = vec![ServiceSet::empty(); validators.len()];
        for (sid, vid) in edges {
            let &si = service_index.get(sid.as_str()).ok_or(Error::DanglingEdge {
                service: sid.clone(),
                validator: vid.clone(),
                missing: "service",
            })?;
            let &vi = validator_index.get(vid.as_str()).ok_or(Error::DanglingEdge {
                service: sid.clone(),
                validator: vid.clone(),
                missing: "validator",
            })?;
            if svc_adj[si].contains(vi) {
                return Err(Error::DuplicateEdge {
                    service: sid.clone(),
                    validator: vid.clone(),
                });
            }
            svc_adj[si] = svc_adj[si].with(vi);
            val_adj[vi] = val_adj[vi].with(si);
        }

        let present = ValidatorSet::all(validators.len());
        Ok(RestakingGraph {
            core: Arc::new(GraphCore {
                services,
                validators,
                svc_adj,
                val_adj,
                service_index,
                validator_index,
            }),
            present,
        })
    }

    pub fn service_count(&self) -> usize {
        self.core.services.len()
    }

    /// Number of validators still present after any shocks.
    pub fn validator_count(&self) -> usize {
        self.present.len()
    }

    pub fn all_services(&self) -> ServiceSet {
        ServiceSet::all(self.core.services.len())
    }

    pub fn present_validators(&self) -> ValidatorSet {
        self.present
    }

    pub fn service(&self, i: usize) -> &Service {
        &self.core.services[i]
    }

    pub fn validator(&self, i: usize) -> &Validator {
        &self.core.validators[i]
    }

    /// Neighbors of one service among the present validators.
    pub fn service_neighbors(&self, i: usize) -> ValidatorSet {
        self.core.svc_adj[i].intersection(self.present)
    }

    /// Neighbors of one validator. Services are never removed, so this never
    /// shrinks under shocks.
    pub fn validator_neighbors(&self, i: usize) -> ServiceSet {
        self.core.val_adj[i]
    }

    fn check_services(&self, set: ServiceSet) -> Result<()> {
        let unknown = set.difference(self.all_services());
        match unknown.iter().next() {
            None => Ok(()),
            Some(i) => Err(Error::UnknownService(format!("#{i}"))),
        }
    }

    fn check_validators(&self, set: ValidatorSet) -> Result<()> {
        let unknown = set.difference(self.present);
        match unknown.iter().next() {
            None => Ok(()),
            Some(i) if i < self.core.validators.len() => Err(Error::UnknownValidator(
                self.core.validators[i].id.as_str().to_string(),
            )),
            Some(i) => Err(Error::UnknownValidator(format!("#{i}"))),
        }
    }

    /// Union of neighborhoods of a set of services.
    pub fn neighbors_of_services(&self, set: ServiceSet) -> Result<ValidatorSet> {
        self.check_services(set)?;
        Ok(self.neighbors_of_services_unchecked(set))
    }

    pub(crate) fn neighbors_of_services_unchecked(&self, set: ServiceSet) -> ValidatorSet {
        let mut out = ValidatorSet::empty();
        for i in set.iter() {
            out = out.union(self.core.svc_adj[i]);
        }
        out.intersection(self.present)
    }

    /// Union of neighborhoods of a set of present validators.
    pub fn neighbors_of_validators(&self, set: ValidatorSet) -> Result<ServiceSet> {
        self.check_validators(set)?;
        let mut out = ServiceSet::empty();
        for i in set.iter() {
            out = out.union(self.core.val_adj[i]);
        }
        Ok(out)
    }

    pub fn total_stake(&self, set: ValidatorSet) -> Result<Rational> {
        self.check_validators(set)?;
        Ok(self.stake_sum(set))
    }

    pub(crate) fn stake_sum(&self, set: ValidatorSet) -> Rational {
        let mut sum = Rational::zero();
        for i in set.iter() {
            sum += &self.core.validators[i].stake;
        }
        sum
    }

    pub fn total_profit(&self, set: ServiceSet) -> Result<Rational> {
        self.check_services(set)?;
        Ok(self.profit_sum(set))
    }

    pub(crate) fn profit_sum(&self, set: ServiceSet) -> Rational {
        let mut sum = Rational::zero();
        for i in set.iter() {
            sum += &self.core.services[i].profit;
        }
        sum
    }

    /// The graph after the validators in `removed` are slashed away along
    /// with their incident edges. Services always stay. Indices of surviving
    /// vertices are unchanged, so sets remain meaningful across shocks.
    pub fn remove_validators(&self, removed: ValidatorSet) -> Result<RestakingGraph> {
        self.check_validators(removed)?;
        Ok(RestakingGraph {
            core: Arc::clone(&self.core),
            present: self.present.difference(removed),
        })
    }

    /// Validators whose entire (unshocked) neighborhood lies inside the given
    /// coalition of services. Validators with no services at all qualify for
    /// every coalition, including the empty one.
    pub fn exclusive_validators(&self, coalition: ServiceSet) -> Result<ValidatorSet> {
        self.check_services(coalition)?;
        let mut out = ValidatorSet::empty();
        for v in self.present.iter() {
            if self.core.val_adj[v].is_subset(coalition) {
                out = out.with(v);
            }
        }
        Ok(out)
    }

    pub fn service_set<S: AsRef<str>>(&self, ids: &[S]) -> Result<ServiceSet> {
        let mut out = ServiceSet::empty();
        for id in ids {
            let &i = self
                .core
                .service_index
                .get(id.as_ref())
                .ok_or_else(|| Error::UnknownService(id.as_ref().to_string()))?;
            out = out.with(i);
        }
        Ok(out)
    }

    pub fn validator_set<S: AsRef<str>>(&self, ids: &[S]) -> Result<ValidatorSet> {
        let mut out = ValidatorSet::empty();
        for id in ids {
            let &i = self
                .core
                .validator_index
                .get(id.as_ref())
                .filter(|&&i| self.present.contains(i))
                .ok_or_else(|| Error::UnknownValidator(id.as_ref().to_string()))?;
            out = out.with(i);
        }
        Ok(out)
    }

    pub fn service_ids(&self, set: ServiceSet) -> Vec<String> {
        set.iter()
            .map(|i| self.core.services[i].id.as_str().to_string())
            .collect()
    }

    pub fn validator_ids(&self, set: ValidatorSet) -> Vec<String> {
        set.iter()
            .map(|i| self.core.validators[i].id.as_str().to_string())
            .collect()
    }

    /// Present edges in canonical order: services in file order, then their
    /// surviving neighbors in file order.
    pub fn edges(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (si, s) in self.core.services.iter().enumerate() {
            for vi in self.service_neighbors(si).iter() {
                out.push((
                    s.id.as_str().to_string(),
                    self.core.validators[vi].id.as_str().to_string(),
                ));
            }
        }
        out
    }
}

// Structural equality over the *present* content: same services in order,
// same surviving validators in order (with stakes), same surviving edges.
// A shocked graph equals its own serialized-and-reparsed form.
impl PartialEq for RestakingGraph {
    fn eq(&self, other: &Self) -> bool {
        if self.core.services != other.core.services {
            return false;
        }
        let mine: Vec<&Validator> = self.present.iter().map(|i| &self.core.validators[i]).collect();
        let theirs: Vec<&Validator> = other
            .present
            .iter()
            .map(|i| &other.core.validators[i])
            .collect();
        mine == theirs && self.edges() == other.edges()
    }
}

impl Eq for RestakingGraph {}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ServiceSpec {
    id: String,
    profit: String,
    alpha: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ValidatorSpec {
    id: String,
    stake: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    services: Vec<ServiceSpec>,
    validators: Vec<ValidatorSpec>,
    edges: Vec<(String, String)>,
}

/// Parses the JSON graph format. Unknown keys are rejected; every validation
/// failure carries its own diagnostic.
pub fn parse_graph(text: &str) -> Result<RestakingGraph> {
    let file: GraphFile = serde_json::from_str(text)?;
    let services = file
        .services
        .into_iter()
        .map(|s| {
            Ok(Service {
                id: ServiceId::new(s.id),
                profit: parse_rational(&s.profit)?,
                alpha: parse_rational(&s.alpha)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let validators = file
        .validators
        .into_iter()
        .map(|v| {
            Ok(Validator {
                id: ValidatorId::new(v.id),
                stake: parse_rational(&v.stake)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    RestakingGraph::new(services, validators, &file.edges)
}

/// Serializes the present portion of a graph in canonical order with
/// canonical rational rendering. Output is byte-stable for equal graphs.
pub fn serialize_graph(g: &RestakingGraph) -> String {
    let file = GraphFile {
        services: (0..g.service_count())
            .map(|i| {
                let s = g.service(i);
                ServiceSpec {
                    id: s.id.as_str().to_string(),
                    profit: format_rational(&s.profit),
                    alpha: format_rational(&s.alpha),
                }
            })
            .collect(),
        validators: g
            .present_validators()
            .iter()
            .map(|i| {
                let v = g.validator(i);
                ValidatorSpec {
                    id: v.id.as_str().to_string(),
                    stake: format_rational(&v.stake),
                }
            })
            .collect(),
        edges: g.edges(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("graph serialization cannot fail");
    out.push('\n');
    out
}

/// Convenience constructor used by tests and the bundled generators.
pub fn build_graph(
    services: &[(&str, Rational, Rational)],
    validators: &[(&str, Rational)],
    edges: &[(&str, &str)],
) -> Result<RestakingGraph> {
    RestakingGraph::new(
        services
            .iter()
            .map(|(id, profit, alpha)| Service {
                id: ServiceId::new(*id),
                profit: profit.clone(),
                alpha: alpha.clone(),
            })
            .collect(),
        validators
            .iter()
            .map(|(id, stake)| Validator {
                id: ValidatorId::new(*id),
                stake: stake.clone(),
            })
            .collect(),
        &edges
            .iter()
            .map(|(s, v)| (s.to_string(), v.to_string()))
            .collect::<Vec<_>>(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    fn one() -> Rational {
        rat_int(1)
    }

    /// One service backed by a tiny and a large validator.
    fn two_validator() -> RestakingGraph {
        build_graph(
            &[("x", one(), one())],
            &[("a", rat(1, 10)), ("b", rat(9, 10))],
            &[("x", "a"), ("x", "b")],
        )
        .unwrap()
    }

    fn triangle_shape() -> RestakingGraph {
        build_graph(
            &[("x", one(), one()), ("y", one(), one()), ("z", one(), one())],
            &[("a", rat(19, 10)), ("b", rat_int(4)), ("c", rat_int(4))],
            &[("x", "a"), ("x", "b"), ("y", "b"), ("y", "c"), ("z", "c"), ("z", "a")],
        )
        .unwrap()
    }

    #[test]
    fn neighbors_of_service_sets() {
        let g = two_validator();
        let x = g.service_set(&["x"]).unwrap();
        assert_eq!(g.neighbors_of_services(x).unwrap(), g.validator_set(&["a", "b"]).unwrap());
        assert_eq!(
            g.neighbors_of_services(ServiceSet::empty()).unwrap(),
            ValidatorSet::empty()
        );

        let t = triangle_shape();
        let xz = t.service_set(&["x", "z"]).unwrap();
        assert_eq!(
            t.neighbors_of_services(xz).unwrap(),
            t.validator_set(&["a", "b", "c"]).unwrap()
        );
    }

    #[test]
    fn totals() {
        let g = triangle_shape();
        assert_eq!(g.total_stake(g.present_validators()).unwrap(), rat(99, 10));
        assert_eq!(g.total_stake(ValidatorSet::empty()).unwrap(), rat_int(0));
        assert_eq!(g.total_profit(g.all_services()).unwrap(), rat_int(3));
    }

    #[test]
    fn removal_masks_validators_and_composes() {
        let g = two_validator();
        let a = g.validator_set(&["a"]).unwrap();
        let shocked = g.remove_validators(a).unwrap();
        assert_eq!(shocked.validator_count(), 1);
        assert_eq!(shocked.validator_ids(shocked.present_validators()), vec!["b"]);
        let x = g.service_set(&["x"]).unwrap();
        assert_eq!(
            shocked.neighbors_of_services(x).unwrap(),
            shocked.validator_set(&["b"]).unwrap()
        );
        // Removing nothing is identity.
        assert_eq!(g.remove_validators(ValidatorSet::empty()).unwrap(), g);
        // Removal composes as union.
        let t = triangle_shape();
        let bc = t.validator_set(&["b", "c"]).unwrap();
        let two_step = t
            .remove_validators(t.validator_set(&["b"]).unwrap())
            .unwrap()
            .remove_validators(
                t.remove_validators(t.validator_set(&["b"]).unwrap())
                    .unwrap()
                    .validator_set(&["c"])
                    .unwrap(),
            )
            .unwrap();
        assert_eq!(two_step, t.remove_validators(bc).unwrap());
        // A removed validator becomes unknown.
        assert!(shocked.validator_set(&["a"]).is_err());
    }

    #[test]
    fn removal_leaves_service_roster_alone() {
        let t = triangle_shape();
        let bc = t.validator_set(&["b", "c"]).unwrap();
        let g2 = t.remove_validators(bc).unwrap();
        assert_eq!(g2.service_count(), 3);
        let y = g2.service_set(&["y"]).unwrap();
        assert!(g2.neighbors_of_services(y).unwrap().is_empty());
    }

    #[test]
    fn exclusive_validators_examples() {
        let t = triangle_shape();
        let xz = t.service_set(&["x", "z"]).unwrap();
        assert_eq!(t.exclusive_validators(xz).unwrap(), t.validator_set(&["a"]).unwrap());

        // An isolated validator is exclusive to every coalition.
        let g = build_graph(
            &[("x", rat(3, 4), one())],
            &[("a", one()), ("b", rat(1, 2)), ("c", rat(17, 2))],
            &[("x", "a"), ("x", "b")],
        )
        .unwrap();
        assert_eq!(
            g.exclusive_validators(ServiceSet::empty()).unwrap(),
            g.validator_set(&["c"]).unwrap()
        );

        // Validators shared with services outside the coalition never qualify.
        let cycle = build_graph(
            &[("x", one(), one()), ("y", one(), one()), ("z", one(), one())],
            &[("xy", one()), ("yz", one()), ("zx", one())],
            &[("x", "xy"), ("y", "xy"), ("y", "yz"), ("z", "yz"), ("z", "zx"), ("x", "zx")],
        )
        .unwrap();
        let x = cycle.service_set(&["x"]).unwrap();
        assert!(cycle.exclusive_validators(x).unwrap().is_empty());
    }

    #[test]
    fn parses_the_documented_format() {
        let text = r#"{
            "services": [{"id": "x", "profit": "1", "alpha": "1"}],
            "validators": [{"id": "a", "stake": "1/10"}],
            "edges": [["x", "a"]]
        }"#;
        let g = parse_graph(text).unwrap();
        assert_eq!(g.service_count(), 1);
        assert_eq!(g.validator(0).stake, rat(1, 10));
        // Decimal literals mean the same thing as fractions.
        let decimal = text.replace("1/10", "0.1");
        assert_eq!(parse_graph(&decimal).unwrap(), g);
    }

    #[test]
    fn parse_rejects_each_rule_violation_distinctly() {
        let dup_service = r#"{"services":[{"id":"x","profit":"1","alpha":"1"},{"id":"x","profit":"2","alpha":"1"}],"validators":[],"edges":[]}"#;
        assert!(matches!(parse_graph(dup_service), Err(Error::DuplicateService(_))));

        let dup_validator = r#"{"services":[],"validators":[{"id":"a","stake":"1"},{"id":"a","stake":"2"}],"edges":[]}"#;
        assert!(matches!(parse_graph(dup_validator), Err(Error::DuplicateValidator(_))));

        let dangling = r#"{"services":[{"id":"x","profit":"1","alpha":"1"}],"validators":[],"edges":[["x","ghost"]]}"#;
        assert!(matches!(parse_graph(dangling), Err(Error::DanglingEdge { .. })));

        let negative = r#"{"services":[],"validators":[{"id":"a","stake":"-1"}],"edges":[]}"#;
        assert!(matches!(parse_graph(negative), Err(Error::NegativeStake { .. })));

        let alpha_zero = r#"{"services":[{"id":"x","profit":"1","alpha":"0"}],"validators":[],"edges":[]}"#;
        assert!(matches!(parse_graph(alpha_zero), Err(Error::InvalidAlpha { .. })));

        let alpha_big = r#"{"services":[{"id":"x","profit":"1","alpha":"3/2"}],"validators":[],"edges":[]}"#;
        assert!(matches!(parse_graph(alpha_big), Err(Error::InvalidAlpha { .. })));

        let unknown_key = r#"{"services":[],"validators":[],"edges":[],"coffee":true}"#;
        assert!(matches!(parse_graph(unknown_key), Err(Error::Json(_))));

        let bad_number = r#"{"services":[{"id":"x","profit":"1e3","alpha":"1"}],"validators":[],"edges":[]}"#;
        assert!(matches!(parse_graph(bad_number), Err(Error::BadNumber { .. })));

        let dup_edge = r#"{"services":[{"id":"x","profit":"1","alpha":"1"}],"validators":[{"id":"a","stake":"1"}],"edges":[["x","a"],["x","a"]]}"#;
        assert!(matches!(parse_graph(dup_edge), Err(Error::DuplicateEdge { .. })));
    }

    #[test]
    fn serialization_round_trips_and_is_stable() {
        let g = triangle_shape();
        let text = serialize_graph(&g);
        let back = parse_graph(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(serialize_graph(&back), text);

        // A shocked graph serializes to its surviving structure.
        let shocked = g.remove_validators(g.validator_set(&["b"]).unwrap()).unwrap();
        let back2 = parse_graph(&serialize_graph(&shocked)).unwrap();
        assert_eq!(back2, shocked);
    }

    #[test]
    fn empty_sides_are_representable() {
        let g = parse_graph(r#"{"services":[],"validators":[],"edges":[]}"#).unwrap();
        assert_eq!(g.service_count(), 0);
        assert_eq!(g.validator_count(), 0);
    }
}
