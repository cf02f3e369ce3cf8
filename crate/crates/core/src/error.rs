use crate::rational::Rational;

/// Errors for malformed inputs and violated preconditions. Domain outcomes
/// (infeasibility, failed checks) are not errors; they are reported through
/// the result types of the operations that produce them.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid rational {text:?}: expected an integer or \"p/q\" with positive q")]
    InvalidRational { text: String },

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("belief entry {index} is negative ({value})")]
    NegativeBeliefEntry { index: usize, value: Rational },

    #[error("belief does not sum to 1 (sum = {sum})")]
    BeliefNotNormalized { sum: Rational },

    #[error("environment has no states")]
    NoStates,

    #[error("environment has no types")]
    NoTypes,

    #[error("duplicate type id {id:?}")]
    DuplicateTypeId { id: String },

    #[error("negative valuation for type {id:?} ({value})")]
    NegativeValuation { id: String, value: Rational },

    #[error("distinct-beliefs violated: types {first:?} and {second:?} hold the same belief")]
    DistinctBeliefsViolated { first: String, second: String },

    #[error("unknown type id {id:?}")]
    UnknownTypeId { id: String },

    #[error("type {id:?} is not a behavioral type")]
    NotBehavioral { id: String },

    #[error("menu is missing a contract for type {id:?}")]
    MissingContract { id: String },

    #[error("menu has a contract for unknown type {id:?}")]
    ExtraContract { id: String },

    #[error("contract for type {id:?} has {actual} transfers, expected {expected}")]
    ContractLength {
        id: String,
        expected: usize,
        actual: usize,
    },

    #[error("reference belief set is empty")]
    EmptyReferenceSet,

    #[error("menu is not incentive compatible: type {strategic:?} prefers the contract of {tempting:?}")]
    NotIncentiveCompatible { strategic: String, tempting: String },

    #[error("menu does not extract fully from type {id:?} (expected cost {expected}, got {actual})")]
    NotFullyExtracting {
        id: String,
        expected: Rational,
        actual: Rational,
    },

    #[error("auction needs at least two bidders")]
    TooFewBidders,

    #[error("duplicate bidder id {id:?}")]
    DuplicateBidderId { id: String },

    #[error("unknown bidder id {id:?}")]
    UnknownBidderId { id: String },

    #[error("missing valuation grid for bidder {id:?}")]
    MissingGrid { id: String },

    #[error("duplicate valuation {value} in grid of bidder {id:?}")]
    DuplicateGridValue { id: String, value: Rational },

    #[error("empty valuation grid for bidder {id:?}")]
    EmptyGrid { id: String },

    #[error("profile entry {value} for bidder {id:?} is not on that bidder's grid")]
    ProfileValueOffGrid { id: String, value: Rational },

    #[error("profile has {actual} entries, expected one per bidder ({expected})")]
    ProfileLength { expected: usize, actual: usize },

    #[error("duplicate prior entry for a valuation profile")]
    DuplicateProfile,

    #[error("negative prior probability {value}")]
    NegativePriorProbability { value: Rational },

    #[error("prior does not sum to 1 (sum = {sum})")]
    PriorNotNormalized { sum: Rational },

    #[error("zero marginal probability for bidder {id:?} valuation {value}")]
    ZeroMarginal { id: String, value: Rational },

    #[error("behavioral valuation {value} for bidder {id:?} is not on that bidder's grid")]
    BehavioralOffGrid { id: String, value: Rational },

    #[error("priority order must list every bidder exactly once")]
    BadPriority,

    #[error("generation failed: {reason}")]
    Generation { reason: String },

    #[error("parse error: {0}")]
    Parse(String),
}
