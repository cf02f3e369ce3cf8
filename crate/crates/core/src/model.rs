//! Domain model: states, typed agents, beliefs, contracts and menus.
//!
//! All values are immutable once constructed and safe to share across
//! threads. State and type order is fixed by input order and preserved in
//! every output, so identical inputs produce identical outputs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::rational::{dot, Rational};
use crate::Error;

/// Exact probability vector over the environment's states.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Belief {
    probs: Vec<Rational>,
}

impl Belief {
    /// Validates nonnegativity and exact normalization.
    pub fn new(probs: Vec<Rational>) -> Result<Self, Error> {
        for (index, p) in probs.iter().enumerate() {
            if p.is_negative() {
                return Err(Error::NegativeBeliefEntry {
                    index,
                    value: p.clone(),
                });
            }
        }
        let sum: Rational = probs.iter().sum();
        if sum != Rational::one() {
            return Err(Error::BeliefNotNormalized { sum });
        }
        Ok(Belief { probs })
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Expected transfer `Σ_ω p(ω)·c(ω)`, computed exactly.
pub fn expected_transfer(belief: &Belief, contract: &Contract) -> Result<Rational, Error> {
    if belief.len() != contract.len() {
        return Err(Error::Dimension {
            context: "expected_transfer",
            expected: belief.len(),
            actual: contract.len(),
        });
    }
    Ok(dot(belief.probs(), contract.transfers()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TypeKind {
    /// Picks the cost-minimizing contract from the menu.
    Strategic,
    /// Always reports truthfully; imposes no incentive constraints.
    Behavioral,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeRecord {
    pub id: String,
    pub kind: TypeKind,
    pub valuation: Rational,
    pub belief: Belief,
}

impl TypeRecord {
    pub fn is_strategic(&self) -> bool {
        self.kind == TypeKind::Strategic
    }

    pub fn is_behavioral(&self) -> bool {
        self.kind == TypeKind::Behavioral
    }
}

/// A finite set of states and typed agents. Construction validates every
/// invariant, so holding an `Environment` means holding a checked one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Environment {
    states: Vec<String>,
    types: Vec<TypeRecord>,
}

impl Environment {
    pub fn new(states: Vec<String>, types: Vec<TypeRecord>) -> Result<Self, Error> {
        if states.is_empty() {
            return Err(Error::NoStates);
        }
        if types.is_empty() {
            return Err(Error::NoTypes);
        }
        for (i, t) in types.iter().enumerate() {
            if t.belief.len() != states.len() {
                return Err(Error::Dimension {
                    context: "belief length vs states",
                    expected: states.len(),
                    actual: t.belief.len(),
                });
            }
            if t.valuation.is_negative() {
                return Err(Error::NegativeValuation {
                    id: t.id.clone(),
                    value: t.valuation.clone(),
                });
            }
            for other in &types[..i] {
                if other.id == t.id {
                    return Err(Error::DuplicateTypeId { id: t.id.clone() });
                }
                if other.belief == t.belief {
                    return Err(Error::DistinctBeliefsViolated {
                        first: other.id.clone(),
                        second: t.id.clone(),
                    });
                }
            }
        }
        Ok(Environment { states, types })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn types(&self) -> &[TypeRecord] {
        &self.types
    }

    pub fn get(&self, id: &str) -> Option<&TypeRecord> {
        self.types.iter().find(|t| t.id == id)
    }

    pub fn require(&self, id: &str) -> Result<&TypeRecord, Error> {
        self.get(id).ok_or_else(|| Error::UnknownTypeId { id: id.to_string() })
    }

    pub fn strategic(&self) -> Vec<&TypeRecord> {
        self.types.iter().filter(|t| t.is_strategic()).collect()
    }

    pub fn behavioral(&self) -> Vec<&TypeRecord> {
        self.types.iter().filter(|t| t.is_behavioral()).collect()
    }

    /// Copy of the environment with one type removed. Used to test that
    /// dropping a behavioral type leaves every other contract unchanged.
    pub fn without_type(&self, id: &str) -> Result<Environment, Error> {
        self.require(id)?;
        Environment::new(
            self.states.clone(),
            self.types.iter().filter(|t| t.id != id).cloned().collect(),
        )
    }
}

/// Re-validates an environment, returning it unchanged when all invariants
/// hold. Environments built through [`Environment::new`] already hold them;
/// this exists for callers that assemble raw parts.
pub fn validate_environment(env: Environment) -> Result<Environment, Error> {
    Environment::new(env.states.clone(), env.types.clone())
}

/// State-contingent transfer schedule. Entries may be negative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contract {
    transfers: Vec<Rational>,
}

impl Contract {
    pub fn new(transfers: Vec<Rational>) -> Self {
        Contract { transfers }
    }

    /// The constant contract `value·𝟙`.
    pub fn flat(value: &Rational, num_states: usize) -> Self {
        Contract {
            transfers: vec![value.clone(); num_states],
        }
    }

    pub fn transfers(&self) -> &[Rational] {
        &self.transfers
    }

    pub fn len(&self) -> usize {
        self.transfers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transfers.is_empty()
    }

    pub fn scaled(&self, factor: &Rational) -> Contract {
        Contract {
            transfers: self.transfers.iter().map(|t| t * factor).collect(),
        }
    }

    pub fn plus(&self, other: &Contract) -> Contract {
        debug_assert_eq!(self.len(), other.len());
        Contract {
            transfers: self
                .transfers
                .iter()
                .zip(other.transfers())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

/// One contract per type id. Iteration order is id-sorted, so serialized
/// menus are reproducible.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ContractMenu {
    contracts: BTreeMap<String, Contract>,
}

impl ContractMenu {
    pub fn new() -> Self {
        ContractMenu::default()
    }

    pub fn insert(&mut self, id: impl Into<String>, contract: Contract) {
        self.contracts.insert(id.into(), contract);
    }

    pub fn get(&self, id: &str) -> Option<&Contract> {
        self.contracts.get(id)
    }

    pub fn require(&self, id: &str) -> Result<&Contract, Error> {
        self.get(id).ok_or_else(|| Error::MissingContract { id: id.to_string() })
    }

    pub fn len(&self) -> usize {
        self.contracts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contracts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Contract)> {
        self.contracts.iter()
    }

    /// Menu with the contract for `id` removed.
    pub fn without(&self, id: &str) -> ContractMenu {
        let mut contracts = self.contracts.clone();
        contracts.remove(id);
        ContractMenu { contracts }
    }
}

/// How a contract was produced, with enough data to re-derive it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivationMethod {
    /// Separator-based contract for a strategic type.
    StrategicSeparation,
    /// Separator-based contract for a behavioral type outside the strategic hull.
    BehavioralSeparation,
    /// Constant contract at the type's own valuation.
    FlatContract,
    /// In-hull behavioral contract under the valuation threshold condition;
    /// the contract itself comes from a feasibility LP, the recorded mix is
    /// the closed-form audit trail.
    HullMix,
    /// Contract taken directly from an LP feasibility point.
    DirectLp,
}

/// Named weight in a convex decomposition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Weight {
    pub type_id: String,
    pub value: Rational,
}

/// Audit record attached to each constructed contract.
///
/// `separator` is present exactly for the separation methods, `lambda`
/// exactly for `HullMix`. `closed_form_gap` reports, for `HullMix`, the exact
/// difference between the type's valuation and the expected cost of the
/// closed-form mix contract; a non-zero gap means the closed form would not
/// have extracted fully and the LP contract is the one in force.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractDerivation {
    pub type_id: String,
    pub method: DerivationMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub separator: Option<Vec<Rational>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<Weight>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form_gap: Option<Rational>,
    /// Largest decomposition value `Σ λ_s v_s` over all decompositions of the
    /// type's belief; full extraction for an in-hull type is feasible exactly
    /// when its valuation reaches this bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value_threshold: Option<Rational>,
}

impl ContractDerivation {
    pub fn new(type_id: impl Into<String>, method: DerivationMethod) -> Self {
        ContractDerivation {
            type_id: type_id.into(),
            method,
            separator: None,
            alpha: None,
            lambda: None,
            closed_form_gap: None,
            value_threshold: None,
        }
    }
}
