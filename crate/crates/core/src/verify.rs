//! Independent menu auditing and the whole-menu feasibility oracle.
//!
//! The checkers evaluate a menu against the two defining requirements —
//! exact extraction of each type's valuation, and cost-minimization for
//! strategic types — by direct evaluation. The oracle encodes both
//! requirements jointly as one LP over all contract entries; it never touches
//! separators or scaling formulas, so it serves as construction-free ground
//! truth for the constructive paths.

use serde::{Deserialize, Serialize};

use crate::lp::{self, LpOutcome, LpProblem};
use crate::model::{expected_transfer, Contract, ContractMenu, Environment};
use crate::rational::Rational;
use crate::Error;

/// A type whose expected transfer differs from its valuation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionViolation {
    pub type_id: String,
    pub achieved: Rational,
    pub required: Rational,
}

/// A strategic type that would save by taking another type's contract.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IcViolation {
    pub strategic: String,
    pub tempting: String,
    pub own_cost: Rational,
    pub tempting_cost: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub extraction_violations: Vec<ExtractionViolation>,
    pub ic_violations: Vec<IcViolation>,
    pub passed: bool,
}

fn contract_for<'m>(
    env: &Environment,
    menu: &'m ContractMenu,
    id: &str,
) -> Result<&'m Contract, Error> {
    let contract = menu.require(id)?;
    if contract.len() != env.num_states() {
        return Err(Error::ContractLength {
            id: id.to_string(),
            expected: env.num_states(),
            actual: contract.len(),
        });
    }
    Ok(contract)
}

fn check_coverage(env: &Environment, menu: &ContractMenu) -> Result<(), Error> {
    for (id, _) in menu.iter() {
        if env.get(id).is_none() {
            return Err(Error::ExtraContract { id: id.clone() });
        }
    }
    for t in env.types() {
        contract_for(env, menu, &t.id)?;
    }
    Ok(())
}

/// Lists every type whose expected transfer is not exactly its valuation.
pub fn check_extraction(
    env: &Environment,
    menu: &ContractMenu,
) -> Result<Vec<ExtractionViolation>, Error> {
    check_coverage(env, menu)?;
    let mut violations = Vec::new();
    for t in env.types() {
        let contract = contract_for(env, menu, &t.id)?;
        let achieved = expected_transfer(&t.belief, contract)?;
        if achieved != t.valuation {
            violations.push(ExtractionViolation {
                type_id: t.id.clone(),
                achieved,
                required: t.valuation.clone(),
            });
        }
    }
    Ok(violations)
}

/// Flags every strategic type that strictly prefers another contract.
/// Ties are allowed; behavioral types impose no constraints.
pub fn check_incentive_compatibility(
    env: &Environment,
    menu: &ContractMenu,
) -> Result<Vec<IcViolation>, Error> {
    check_coverage(env, menu)?;
    let mut violations = Vec::new();
    for s in env.strategic() {
        let own_cost = expected_transfer(&s.belief, contract_for(env, menu, &s.id)?)?;
        for t in env.types() {
            if t.id == s.id {
                continue;
            }
            let tempting_cost = expected_transfer(&s.belief, contract_for(env, menu, &t.id)?)?;
            if tempting_cost < own_cost {
                violations.push(IcViolation {
                    strategic: s.id.clone(),
                    tempting: t.id.clone(),
                    own_cost: own_cost.clone(),
                    tempting_cost,
                });
            }
        }
    }
    Ok(violations)
}

/// Runs both checks and combines them into one report.
pub fn verify_menu(env: &Environment, menu: &ContractMenu) -> Result<VerificationReport, Error> {
    let extraction_violations = check_extraction(env, menu)?;
    let ic_violations = check_incentive_compatibility(env, menu)?;
    let passed = extraction_violations.is_empty() && ic_violations.is_empty();
    Ok(VerificationReport {
        extraction_violations,
        ic_violations,
        passed,
    })
}

/// Joint feasibility program over all contract entries `c_t(ω)`:
/// `⟨p_t,c_t⟩ = v_t` for every type, and `⟨p_s,c_t⟩ − ⟨p_s,c_s⟩ ≥ 0` for
/// every strategic `s` and every other type `t`.
pub fn oracle_problem(env: &Environment) -> LpProblem {
    let num_states = env.num_states();
    let num_types = env.types().len();
    let var = |type_index: usize, state: usize| type_index * num_states + state;
    let mut problem = LpProblem::new(num_types * num_states);

    for (ti, t) in env.types().iter().enumerate() {
        let mut coeffs = vec![Rational::zero(); problem.num_vars];
        for (w, p) in t.belief.probs().iter().enumerate() {
            coeffs[var(ti, w)] = p.clone();
        }
        problem.push_eq(coeffs, t.valuation.clone());
    }

    for (si, s) in env.types().iter().enumerate() {
        if !s.is_strategic() {
            continue;
        }
        for ti in 0..num_types {
            if ti == si {
                continue;
            }
            let mut coeffs = vec![Rational::zero(); problem.num_vars];
            for (w, p) in s.belief.probs().iter().enumerate() {
                coeffs[var(ti, w)] = p.clone();
                coeffs[var(si, w)] = -p;
            }
            problem.push_ge(coeffs, Rational::zero());
        }
    }
    problem
}

/// Outcome of the whole-menu oracle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleOutcome {
    /// Some fully extracting incentive-compatible menu (not necessarily the
    /// constructive one).
    Feasible { menu: ContractMenu },
    /// Farkas certificate for the joint program, one multiplier per row of
    /// [`oracle_problem`]'s row list.
    Infeasible { certificate: Vec<Rational> },
}

/// Decides feasibility of full extraction by brute LP, with a witness menu
/// or an exact infeasibility certificate.
pub fn oracle_feasibility(env: &Environment) -> Result<OracleOutcome, Error> {
    let problem = oracle_problem(env);
    match lp::solve(&problem)? {
        LpOutcome::Feasible { point, .. } => {
            let num_states = env.num_states();
            let mut menu = ContractMenu::new();
            for (ti, t) in env.types().iter().enumerate() {
                let transfers = point[ti * num_states..(ti + 1) * num_states].to_vec();
                menu.insert(t.id.clone(), Contract::new(transfers));
            }
            let report = verify_menu(env, &menu)?;
            assert!(report.passed, "oracle menu failed its own audit");
            Ok(OracleOutcome::Feasible { menu })
        }
        LpOutcome::Infeasible { certificate } => Ok(OracleOutcome::Infeasible { certificate }),
        LpOutcome::Unbounded { .. } => {
            unreachable!("feasibility program has no objective to unbound")
        }
    }
}
