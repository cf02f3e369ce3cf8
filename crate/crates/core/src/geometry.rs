//! Belief-space predicates: convex-hull membership, convex independence, and
//! the per-environment feasibility conditions. Every answer carries an
//! exactly verifiable witness — reconstruction weights on the inside,
//! a separating functional on the outside — and both are re-checked before
//! being returned.

use serde::{Deserialize, Serialize};

use crate::lp::{self, LpOutcome, LpProblem};
use crate::model::{Belief, Environment};
use crate::rational::{dot, Rational};
use crate::Error;

/// Witness for a hull-membership query of `p` against a reference set `Q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HullResult {
    /// `p = Σ λ_q·q` with `λ ≥ 0` summing to one, aligned with `Q`'s order.
    Member { lambda: Vec<Rational> },
    /// `z` with `⟨p,z⟩ = 0` and `⟨q,z⟩ ≥ 1` for every `q ∈ Q`, normalized so
    /// the smallest `⟨q,z⟩` is exactly 1.
    Separated { z: Vec<Rational> },
}

impl HullResult {
    pub fn is_member(&self) -> bool {
        matches!(self, HullResult::Member { .. })
    }

    pub fn is_separated(&self) -> bool {
        matches!(self, HullResult::Separated { .. })
    }
}

/// Checks a membership witness by direct evaluation.
pub fn verify_member(p: &Belief, refs: &[&Belief], lambda: &[Rational]) -> bool {
    if lambda.len() != refs.len() || lambda.iter().any(Rational::is_negative) {
        return false;
    }
    let total: Rational = lambda.iter().sum();
    if total != Rational::one() {
        return false;
    }
    for (i, target) in p.probs().iter().enumerate() {
        let mixed: Rational = refs
            .iter()
            .zip(lambda)
            .map(|(q, w)| &q.probs()[i] * w)
            .sum();
        if &mixed != target {
            return false;
        }
    }
    true
}

/// Checks a separation witness by direct evaluation: zero expected value
/// under `p`, at least 1 under every reference belief.
pub fn verify_separator(p: &Belief, refs: &[&Belief], z: &[Rational]) -> bool {
    if z.len() != p.len() {
        return false;
    }
    if !dot(p.probs(), z).is_zero() {
        return false;
    }
    refs.iter().all(|q| dot(q.probs(), z) >= Rational::one())
}

/// Decides whether `p` lies in the closed convex hull of `refs`, returning an
/// exact witness either way. Boundary points count as members.
pub fn hull_membership(p: &Belief, refs: &[&Belief]) -> Result<HullResult, Error> {
    if refs.is_empty() {
        return Err(Error::EmptyReferenceSet);
    }
    for q in refs {
        if q.len() != p.len() {
            return Err(Error::Dimension {
                context: "hull_membership beliefs",
                expected: p.len(),
                actual: q.len(),
            });
        }
    }

    // Membership program: λ ≥ 0, Σλ = 1, Σ λ_q·q = p.
    let mut membership = LpProblem::new(refs.len());
    for state in 0..p.len() {
        let coeffs: Vec<Rational> = refs.iter().map(|q| q.probs()[state].clone()).collect();
        membership.push_eq(coeffs, p.probs()[state].clone());
    }
    membership.push_eq(vec![Rational::one(); refs.len()], Rational::one());
    for v in 0..refs.len() {
        membership.set_lower(v, Rational::zero());
    }

    if let LpOutcome::Feasible { point, .. } = lp::solve(&membership)? {
        assert!(
            verify_member(p, refs, &point),
            "membership witness failed re-verification"
        );
        return Ok(HullResult::Member { lambda: point });
    }

    // Separation program: ⟨p,z⟩ = 0, ⟨q,z⟩ ≥ 1 for all q. Exactly one of the
    // two programs is feasible.
    let mut separation = LpProblem::new(p.len());
    separation.push_eq(p.probs().to_vec(), Rational::zero());
    for q in refs {
        separation.push_ge(q.probs().to_vec(), Rational::one());
    }
    let LpOutcome::Feasible { point: raw, .. } = lp::solve(&separation)? else {
        unreachable!("membership and separation programs cannot both be infeasible");
    };

    let min_value = refs
        .iter()
        .map(|q| dot(q.probs(), &raw))
        .min()
        .expect("refs is non-empty");
    let inv = min_value.recip().expect("separation values are >= 1");
    let z: Vec<Rational> = raw.iter().map(|v| v * &inv).collect();
    assert!(
        verify_separator(p, refs, &z),
        "separation witness failed re-verification"
    );
    Ok(HullResult::Separated { z })
}

/// One belief's verdict within an independence check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndependenceCheck {
    pub index: usize,
    pub passed: bool,
    /// True when the reference set was empty and the verdict holds trivially.
    pub vacuous: bool,
    pub witness: HullResult,
}

/// Per-belief convex-independence verdicts: passes when no belief lies in
/// the convex hull of the others.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndependenceReport {
    pub checks: Vec<IndependenceCheck>,
    pub passed: bool,
}

/// Checks convex independence of a set of pairwise-distinct beliefs.
pub fn check_convex_independence(beliefs: &[&Belief]) -> Result<IndependenceReport, Error> {
    for (i, b) in beliefs.iter().enumerate() {
        for (j, other) in beliefs.iter().enumerate().take(i) {
            if b == other {
                return Err(Error::DistinctBeliefsViolated {
                    first: format!("#{j}"),
                    second: format!("#{i}"),
                });
            }
        }
    }
    let mut checks = Vec::with_capacity(beliefs.len());
    for (i, b) in beliefs.iter().enumerate() {
        let others: Vec<&Belief> = beliefs
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, q)| *q)
            .collect();
        let check = if others.is_empty() {
            IndependenceCheck {
                index: i,
                passed: true,
                vacuous: true,
                witness: HullResult::Separated {
                    z: vec![Rational::zero(); b.len()],
                },
            }
        } else {
            let witness = hull_membership(b, &others)?;
            IndependenceCheck {
                index: i,
                passed: witness.is_separated(),
                vacuous: false,
                witness,
            }
        };
        checks.push(check);
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(IndependenceReport { checks, passed })
}

/// One type's verdict within a [`ConditionReport`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub type_id: String,
    pub passed: bool,
    pub vacuous: bool,
    /// Ids of the beliefs the witness refers to, in witness order.
    pub reference_ids: Vec<String>,
    pub witness: HullResult,
}

/// The two feasibility conditions for an environment: every strategic belief
/// convex-independent of the other strategic beliefs, and every behavioral
/// belief outside the strategic hull.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub strategic_independence: Vec<ConditionCheck>,
    pub strategic_passed: bool,
    pub behavioral_separation: Vec<ConditionCheck>,
    pub behavioral_passed: bool,
    pub passed: bool,
}

impl ConditionReport {
    /// First failing check, if any, in report order.
    pub fn first_failure(&self) -> Option<&ConditionCheck> {
        self.strategic_independence
            .iter()
            .chain(&self.behavioral_separation)
            .find(|c| !c.passed)
    }
}

/// Evaluates both feasibility conditions with witnesses for every type.
/// Empty reference sets (no strategic types, or a single strategic type) are
/// reported as vacuous passes with a zero separator.
pub fn check_extraction_conditions(env: &Environment) -> Result<ConditionReport, Error> {
    let strategic = env.strategic();
    let vacuous_check = |id: &str| ConditionCheck {
        type_id: id.to_string(),
        passed: true,
        vacuous: true,
        reference_ids: Vec::new(),
        witness: HullResult::Separated {
            z: vec![Rational::zero(); env.num_states()],
        },
    };

    let mut strategic_independence = Vec::with_capacity(strategic.len());
    for s in &strategic {
        let others: Vec<&crate::model::TypeRecord> = strategic
            .iter()
            .filter(|t| t.id != s.id)
            .copied()
            .collect();
        if others.is_empty() {
            strategic_independence.push(vacuous_check(&s.id));
            continue;
        }
        let refs: Vec<&Belief> = others.iter().map(|t| &t.belief).collect();
        let witness = hull_membership(&s.belief, &refs)?;
        strategic_independence.push(ConditionCheck {
            type_id: s.id.clone(),
            passed: witness.is_separated(),
            vacuous: false,
            reference_ids: others.iter().map(|t| t.id.clone()).collect(),
            witness,
        });
    }

    let mut behavioral_separation = Vec::new();
    for b in env.behavioral() {
        if strategic.is_empty() {
            behavioral_separation.push(vacuous_check(&b.id));
            continue;
        }
        let refs: Vec<&Belief> = strategic.iter().map(|t| &t.belief).collect();
        let witness = hull_membership(&b.belief, &refs)?;
        behavioral_separation.push(ConditionCheck {
            type_id: b.id.clone(),
            passed: witness.is_separated(),
            vacuous: false,
            reference_ids: strategic.iter().map(|t| t.id.clone()).collect(),
            witness,
        });
    }

    let strategic_passed = strategic_independence.iter().all(|c| c.passed);
    let behavioral_passed = behavioral_separation.iter().all(|c| c.passed);
    Ok(ConditionReport {
        strategic_independence,
        strategic_passed,
        behavioral_separation,
        behavioral_passed,
        passed: strategic_passed && behavioral_passed,
    })
}
