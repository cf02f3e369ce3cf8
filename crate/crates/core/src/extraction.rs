//! Constructs fully extracting, incentive-compatible contract menus.
//!
//! Strategic types get separator-based contracts priced so that truth-telling
//! costs exactly the type's valuation and every other contract costs weakly
//! more. Behavioral types outside the strategic hull get the analogous
//! one-sided construction. Behavioral types inside the hull are handled by
//! the value-condition path: a flat contract when the valuation dominates
//! every strategic one, otherwise a feasibility LP that succeeds exactly when
//! the valuation reaches the largest decomposition value of the type's
//! belief.
//!
//! Every returned menu is re-audited by the `verify` module before leaving
//! this module. Contracts for behavioral types never depend on each other,
//! so removing one behavioral type leaves the rest of the menu unchanged.

use serde::{Deserialize, Serialize};

use crate::geometry::{check_extraction_conditions, hull_membership, ConditionCheck, HullResult};
use crate::lp::{self, LpOutcome, LpProblem};
use crate::model::{
    expected_transfer, Belief, Contract, ContractDerivation, ContractMenu, DerivationMethod,
    Environment, TypeRecord, Weight,
};
use crate::rational::{dot, primitive_integer_scale, Rational};
use crate::verify;
use crate::Error;

/// Why no fully extracting menu was produced, with the witness that proves it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SolveFailure {
    /// A strategic belief decomposes over the other strategic beliefs.
    StrategicDependence {
        type_id: String,
        lambda: Vec<Weight>,
    },
    /// A behavioral belief lies inside the strategic hull, so no separator
    /// exists.
    BehavioralInHull {
        type_id: String,
        lambda: Vec<Weight>,
    },
    /// An in-hull behavioral type's valuation is below the largest
    /// decomposition value of its belief, making extraction infeasible.
    ValuationBelowThreshold {
        type_id: String,
        valuation: Rational,
        threshold: Rational,
    },
}

impl SolveFailure {
    pub fn type_id(&self) -> &str {
        match self {
            SolveFailure::StrategicDependence { type_id, .. }
            | SolveFailure::BehavioralInHull { type_id, .. }
            | SolveFailure::ValuationBelowThreshold { type_id, .. } => type_id,
        }
    }
}

/// Outcome of a menu construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveResult {
    Menu {
        menu: ContractMenu,
        derivations: Vec<ContractDerivation>,
    },
    Failure(SolveFailure),
}

impl SolveResult {
    pub fn is_menu(&self) -> bool {
        matches!(self, SolveResult::Menu { .. })
    }

    pub fn menu(&self) -> Option<&ContractMenu> {
        match self {
            SolveResult::Menu { menu, .. } => Some(menu),
            SolveResult::Failure(_) => None,
        }
    }
}

/// Outcome of a single-contract construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ContractResult {
    Built {
        contract: Contract,
        derivation: ContractDerivation,
    },
    Failure(SolveFailure),
}

fn weights(lambda: &[Rational], refs: &[&TypeRecord]) -> Vec<Weight> {
    refs.iter()
        .zip(lambda)
        .map(|(t, w)| Weight {
            type_id: t.id.clone(),
            value: w.clone(),
        })
        .collect()
}

/// Separator-priced contract: `v·𝟙 + α·z` with
/// `α = max(0, max_r (target_r − v)/⟨p_r,z⟩)`. The separator is rescaled to
/// its primitive integer representative first; `α` absorbs scale, so the
/// contract itself is scale-invariant.
fn separator_contract(
    valuation: &Rational,
    z: &[Rational],
    refs: &[(&Belief, Rational)],
    num_states: usize,
) -> (Contract, Vec<Rational>, Rational) {
    let z = primitive_integer_scale(z);
    let mut alpha = Rational::zero();
    for (belief, target) in refs {
        let margin = dot(belief.probs(), &z);
        debug_assert!(margin.is_positive(), "separator margin must be positive");
        let needed = (target - valuation) / &margin;
        if needed > alpha {
            alpha = needed;
        }
    }
    let transfers: Vec<Rational> = (0..num_states)
        .map(|w| valuation + &(&alpha * &z[w]))
        .collect();
    (Contract::new(transfers), z, alpha)
}

/// Builds the fully extracting menu for the strategic types alone. Fails with
/// a decomposition witness when some strategic belief lies in the hull of the
/// others.
pub fn strategic_menu(env: &Environment) -> Result<SolveResult, Error> {
    let strategic = env.strategic();
    let mut menu = ContractMenu::new();
    let mut derivations = Vec::with_capacity(strategic.len());

    for s in &strategic {
        let others: Vec<&TypeRecord> = strategic
            .iter()
            .filter(|t| t.id != s.id)
            .copied()
            .collect();
        let (contract, z, alpha) = if others.is_empty() {
            // no competing constraints: flat contract, zero separator
            (
                Contract::flat(&s.valuation, env.num_states()),
                vec![Rational::zero(); env.num_states()],
                Rational::zero(),
            )
        } else {
            let refs: Vec<&Belief> = others.iter().map(|t| &t.belief).collect();
            match hull_membership(&s.belief, &refs)? {
                HullResult::Member { lambda } => {
                    return Ok(SolveResult::Failure(SolveFailure::StrategicDependence {
                        type_id: s.id.clone(),
                        lambda: weights(&lambda, &others),
                    }));
                }
                HullResult::Separated { z } => {
                    let targets: Vec<(&Belief, Rational)> = others
                        .iter()
                        .map(|t| (&t.belief, t.valuation.clone()))
                        .collect();
                    separator_contract(&s.valuation, &z, &targets, env.num_states())
                }
            }
        };
        menu.insert(s.id.clone(), contract);
        let mut derivation = ContractDerivation::new(&s.id, DerivationMethod::StrategicSeparation);
        derivation.separator = Some(z);
        derivation.alpha = Some(alpha);
        derivations.push(derivation);
    }

    if !strategic.is_empty() {
        let restricted = Environment::new(
            env.states().to_vec(),
            strategic.iter().map(|t| (*t).clone()).collect(),
        )?;
        let report = verify::verify_menu(&restricted, &menu)?;
        assert!(report.passed, "strategic menu failed its own audit");
    }
    Ok(SolveResult::Menu { menu, derivations })
}

fn check_menu_extracts(env: &Environment, menu: &ContractMenu) -> Result<(), Error> {
    for s in env.strategic() {
        let contract = menu.require(&s.id)?;
        let cost = expected_transfer(&s.belief, contract)?;
        if cost != s.valuation {
            return Err(Error::NotFullyExtracting {
                id: s.id.clone(),
                expected: s.valuation.clone(),
                actual: cost,
            });
        }
    }
    Ok(())
}

/// Contract for one behavioral type against a fully extracting strategic
/// menu: costs exactly the type's valuation under its own belief and at
/// least each strategic type's valuation under theirs. Independent of every
/// other behavioral type.
pub fn behavioral_contract(
    env: &Environment,
    strategic_menu: &ContractMenu,
    type_id: &str,
) -> Result<ContractResult, Error> {
    let b = env.require(type_id)?;
    if !b.is_behavioral() {
        return Err(Error::NotBehavioral {
            id: type_id.to_string(),
        });
    }
    let strategic = env.strategic();
    if strategic.is_empty() {
        // no incentive constraints exist
        return Ok(ContractResult::Built {
            contract: Contract::flat(&b.valuation, env.num_states()),
            derivation: ContractDerivation::new(type_id, DerivationMethod::FlatContract),
        });
    }
    check_menu_extracts(env, strategic_menu)?;

    let refs: Vec<&Belief> = strategic.iter().map(|t| &t.belief).collect();
    match hull_membership(&b.belief, &refs)? {
        HullResult::Member { lambda } => Ok(ContractResult::Failure(
            SolveFailure::BehavioralInHull {
                type_id: type_id.to_string(),
                lambda: weights(&lambda, &strategic),
            },
        )),
        HullResult::Separated { z } => {
            let targets: Vec<(&Belief, Rational)> = strategic
                .iter()
                .map(|t| (&t.belief, t.valuation.clone()))
                .collect();
            let (contract, z, alpha) =
                separator_contract(&b.valuation, &z, &targets, env.num_states());
            let mut derivation =
                ContractDerivation::new(type_id, DerivationMethod::BehavioralSeparation);
            derivation.separator = Some(z);
            derivation.alpha = Some(alpha);
            Ok(ContractResult::Built {
                contract,
                derivation,
            })
        }
    }
}

fn dependence_failure(check: &ConditionCheck, strategic: bool) -> SolveFailure {
    let HullResult::Member { lambda } = &check.witness else {
        unreachable!("failing checks carry membership witnesses");
    };
    let weights: Vec<Weight> = check
        .reference_ids
        .iter()
        .zip(lambda)
        .map(|(id, w)| Weight {
            type_id: id.clone(),
            value: w.clone(),
        })
        .collect();
    if strategic {
        SolveFailure::StrategicDependence {
            type_id: check.type_id.clone(),
            lambda: weights,
        }
    } else {
        SolveFailure::BehavioralInHull {
            type_id: check.type_id.clone(),
            lambda: weights,
        }
    }
}

/// Full extraction under the separation conditions: checks both conditions,
/// builds the strategic menu, then one independent contract per behavioral
/// type. Never returns an unverified menu.
pub fn full_extraction_menu(env: &Environment) -> Result<SolveResult, Error> {
    let report = check_extraction_conditions(env)?;
    if let Some(check) = report
        .strategic_independence
        .iter()
        .find(|c| !c.passed)
    {
        return Ok(SolveResult::Failure(dependence_failure(check, true)));
    }
    if let Some(check) = report.behavioral_separation.iter().find(|c| !c.passed) {
        return Ok(SolveResult::Failure(dependence_failure(check, false)));
    }

    let SolveResult::Menu {
        menu: base,
        derivations: strategic_derivations,
    } = strategic_menu(env)?
    else {
        unreachable!("independence verified before building the strategic menu");
    };

    let mut by_id: std::collections::BTreeMap<String, (Contract, ContractDerivation)> =
        std::collections::BTreeMap::new();
    for d in strategic_derivations {
        let contract = base.require(&d.type_id)?.clone();
        by_id.insert(d.type_id.clone(), (contract, d));
    }
    for b in env.behavioral() {
        match behavioral_contract(env, &base, &b.id)? {
            ContractResult::Built {
                contract,
                derivation,
            } => {
                by_id.insert(b.id.clone(), (contract, derivation));
            }
            ContractResult::Failure(failure) => return Ok(SolveResult::Failure(failure)),
        }
    }

    finish_menu(env, by_id)
}

fn finish_menu(
    env: &Environment,
    by_id: std::collections::BTreeMap<String, (Contract, ContractDerivation)>,
) -> Result<SolveResult, Error> {
    let mut menu = ContractMenu::new();
    let mut derivations = Vec::with_capacity(by_id.len());
    for t in env.types() {
        let (contract, derivation) = by_id
            .get(&t.id)
            .unwrap_or_else(|| panic!("missing contract for {}", t.id));
        menu.insert(t.id.clone(), contract.clone());
        derivations.push(derivation.clone());
    }
    let report = verify::verify_menu(env, &menu)?;
    assert!(report.passed, "constructed menu failed its own audit");
    Ok(SolveResult::Menu { menu, derivations })
}

/// Extends a menu that is incentive compatible for the types other than `b`
/// with a contract for the behavioral type `b`, extracting `v_b` exactly
/// while keeping the extended menu incentive compatible. Works whether or not
/// the given menu extracts fully: the separator is priced against the given
/// menu's actual costs.
pub fn extend_menu(
    env: &Environment,
    menu_without_b: &ContractMenu,
    type_id: &str,
) -> Result<ContractResult, Error> {
    let b = env.require(type_id)?;
    if !b.is_behavioral() {
        return Err(Error::NotBehavioral {
            id: type_id.to_string(),
        });
    }
    // precondition: the partial menu covers every other type and is IC for them
    let mut costs: Vec<(&TypeRecord, Rational)> = Vec::new();
    for t in env.types() {
        if t.id == type_id {
            continue;
        }
        let contract = menu_without_b.require(&t.id)?;
        if contract.len() != env.num_states() {
            return Err(Error::ContractLength {
                id: t.id.clone(),
                expected: env.num_states(),
                actual: contract.len(),
            });
        }
        costs.push((t, expected_transfer(&t.belief, contract)?));
    }
    for (s, own_cost) in &costs {
        if !s.is_strategic() {
            continue;
        }
        for (t, _) in &costs {
            if t.id == s.id {
                continue;
            }
            let tempting = expected_transfer(&s.belief, menu_without_b.require(&t.id)?)?;
            if tempting < *own_cost {
                return Err(Error::NotIncentiveCompatible {
                    strategic: s.id.clone(),
                    tempting: t.id.clone(),
                });
            }
        }
    }

    let strategic = env.strategic();
    if strategic.is_empty() {
        return Ok(ContractResult::Built {
            contract: Contract::flat(&b.valuation, env.num_states()),
            derivation: ContractDerivation::new(type_id, DerivationMethod::FlatContract),
        });
    }
    let refs: Vec<&Belief> = strategic.iter().map(|t| &t.belief).collect();
    match hull_membership(&b.belief, &refs)? {
        HullResult::Member { lambda } => Ok(ContractResult::Failure(
            SolveFailure::BehavioralInHull {
                type_id: type_id.to_string(),
                lambda: weights(&lambda, &strategic),
            },
        )),
        HullResult::Separated { z } => {
            // price against the menu's actual costs, not the valuations
            let targets: Vec<(&Belief, Rational)> = costs
                .iter()
                .filter(|(t, _)| t.is_strategic())
                .map(|(t, cost)| (&t.belief, cost.clone()))
                .collect();
            let (contract, z, alpha) =
                separator_contract(&b.valuation, &z, &targets, env.num_states());
            debug_assert_eq!(
                expected_transfer(&b.belief, &contract)?,
                b.valuation,
                "extension must extract exactly"
            );
            let mut derivation =
                ContractDerivation::new(type_id, DerivationMethod::BehavioralSeparation);
            derivation.separator = Some(z);
            derivation.alpha = Some(alpha);
            Ok(ContractResult::Built {
                contract,
                derivation,
            })
        }
    }
}

/// Largest total valuation `Σ λ_s v_s` over all convex decompositions of `p`
/// into the reference beliefs; `None` when `p` is outside their hull. For an
/// in-hull behavioral type this is the exact feasibility threshold for its
/// valuation.
pub fn max_decomposition_value(
    p: &Belief,
    refs: &[(&Belief, &Rational)],
) -> Result<Option<Rational>, Error> {
    if refs.is_empty() {
        return Ok(None);
    }
    let mut problem = LpProblem::new(refs.len());
    for state in 0..p.len() {
        let coeffs: Vec<Rational> = refs.iter().map(|(q, _)| q.probs()[state].clone()).collect();
        problem.push_eq(coeffs, p.probs()[state].clone());
    }
    problem.push_eq(vec![Rational::one(); refs.len()], Rational::one());
    for v in 0..refs.len() {
        problem.set_lower(v, Rational::zero());
    }
    problem.maximize(refs.iter().map(|(_, v)| (*v).clone()).collect());
    match lp::solve(&problem)? {
        LpOutcome::Feasible { objective, .. } => {
            Ok(Some(objective.expect("objective was supplied")))
        }
        LpOutcome::Infeasible { .. } => Ok(None),
        LpOutcome::Unbounded { .. } => unreachable!("simplex over a bounded domain"),
    }
}

/// Full extraction with the valuation-threshold fallback for behavioral
/// types inside the strategic hull: such a type gets a flat contract when its
/// valuation weakly dominates every strategic valuation, otherwise a contract
/// from a feasibility LP that exists exactly when the valuation reaches
/// [`max_decomposition_value`]. The closed-form mix over the strategic menu
/// is recorded in the derivation for auditing, together with the exact gap by
/// which it misses full extraction (non-zero whenever the strategic menu's
/// incentive constraints are slack on the decomposition's support).
pub fn value_condition_menu(env: &Environment) -> Result<SolveResult, Error> {
    let strategic = env.strategic();
    let strategic_result = strategic_menu(env)?;
    let SolveResult::Menu {
        menu: base,
        derivations: strategic_derivations,
    } = strategic_result
    else {
        return Ok(strategic_result);
    };

    let mut by_id: std::collections::BTreeMap<String, (Contract, ContractDerivation)> =
        std::collections::BTreeMap::new();
    for d in strategic_derivations {
        let contract = base.require(&d.type_id)?.clone();
        by_id.insert(d.type_id.clone(), (contract, d));
    }

    for b in env.behavioral() {
        if strategic.is_empty() {
            by_id.insert(
                b.id.clone(),
                (
                    Contract::flat(&b.valuation, env.num_states()),
                    ContractDerivation::new(&b.id, DerivationMethod::FlatContract),
                ),
            );
            continue;
        }
        let refs: Vec<&Belief> = strategic.iter().map(|t| &t.belief).collect();
        match hull_membership(&b.belief, &refs)? {
            HullResult::Separated { .. } => match behavioral_contract(env, &base, &b.id)? {
                ContractResult::Built {
                    contract,
                    derivation,
                } => {
                    by_id.insert(b.id.clone(), (contract, derivation));
                }
                ContractResult::Failure(failure) => return Ok(SolveResult::Failure(failure)),
            },
            HullResult::Member { lambda } => {
                let v_max = strategic
                    .iter()
                    .map(|t| t.valuation.clone())
                    .max()
                    .expect("strategic set is non-empty");
                if b.valuation >= v_max {
                    let mut derivation =
                        ContractDerivation::new(&b.id, DerivationMethod::FlatContract);
                    derivation.alpha = None;
                    by_id.insert(
                        b.id.clone(),
                        (Contract::flat(&b.valuation, env.num_states()), derivation),
                    );
                    continue;
                }

                // feasibility LP: cost v_b under b's belief, at least v_s under
                // each strategic belief
                let mut direct = LpProblem::new(env.num_states());
                direct.push_eq(b.belief.probs().to_vec(), b.valuation.clone());
                for s in &strategic {
                    direct.push_ge(s.belief.probs().to_vec(), s.valuation.clone());
                }
                match lp::solve(&direct)? {
                    LpOutcome::Feasible { point, .. } => {
                        let value_refs: Vec<(&Belief, &Rational)> = strategic
                            .iter()
                            .map(|t| (&t.belief, &t.valuation))
                            .collect();
                        let threshold = max_decomposition_value(&b.belief, &value_refs)?
                            .expect("membership was just established");

                        // closed-form audit record
                        let mixture_value: Rational = strategic
                            .iter()
                            .zip(&lambda)
                            .map(|(s, w)| &s.valuation * w)
                            .sum();
                        let alpha =
                            (&b.valuation - &mixture_value) / (&v_max - &mixture_value);
                        let mut mix = Contract::flat(&Rational::zero(), env.num_states());
                        for (s, w) in strategic.iter().zip(&lambda) {
                            mix = mix.plus(&base.require(&s.id)?.scaled(w));
                        }
                        let closed_form = mix
                            .scaled(&alpha)
                            .plus(&Contract::flat(
                                &(&(&Rational::one() - &alpha) * &v_max),
                                env.num_states(),
                            ));
                        let gap =
                            &b.valuation - &expected_transfer(&b.belief, &closed_form)?;

                        let mut derivation =
                            ContractDerivation::new(&b.id, DerivationMethod::HullMix);
                        derivation.lambda = Some(weights(&lambda, &strategic));
                        derivation.alpha = Some(alpha);
                        derivation.closed_form_gap = Some(gap);
                        derivation.value_threshold = Some(threshold);
                        by_id.insert(b.id.clone(), (Contract::new(point), derivation));
                    }
                    LpOutcome::Infeasible { .. } => {
                        let value_refs: Vec<(&Belief, &Rational)> = strategic
                            .iter()
                            .map(|t| (&t.belief, &t.valuation))
                            .collect();
                        let threshold = max_decomposition_value(&b.belief, &value_refs)?
                            .expect("membership was just established");
                        debug_assert!(b.valuation < threshold);
                        return Ok(SolveResult::Failure(
                            SolveFailure::ValuationBelowThreshold {
                                type_id: b.id.clone(),
                                valuation: b.valuation.clone(),
                                threshold,
                            },
                        ));
                    }
                    LpOutcome::Unbounded { .. } => {
                        unreachable!("feasibility program has no objective")
                    }
                }
            }
        }
    }

    finish_menu(env, by_id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TypeKind;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn qv(parts: &[&str]) -> Vec<Rational> {
        parts.iter().map(|s| q(s)).collect()
    }

    fn ty(id: &str, kind: TypeKind, v: &str, probs: &[&str]) -> TypeRecord {
        TypeRecord {
            id: id.to_string(),
            kind,
            valuation: q(v),
            belief: Belief::new(qv(probs)).unwrap(),
        }
    }

    fn env_two_strategic() -> Environment {
        Environment::new(
            vec!["w1".into(), "w2".into()],
            vec![
                ty("s1", TypeKind::Strategic, "1", &["3/4", "1/4"]),
                ty("s2", TypeKind::Strategic, "2", &["1/4", "3/4"]),
            ],
        )
        .unwrap()
    }

    fn env_with_behavioral(v: &str, probs: &[&str]) -> Environment {
        Environment::new(
            vec!["w1".into(), "w2".into()],
            vec![
                ty("s1", TypeKind::Strategic, "1", &["3/4", "1/4"]),
                ty("s2", TypeKind::Strategic, "2", &["1/4", "3/4"]),
                ty("b", TypeKind::Behavioral, v, probs),
            ],
        )
        .unwrap()
    }

    #[test]
    fn strategic_menu_matches_hand_arithmetic() {
        let SolveResult::Menu { menu, derivations } =
            strategic_menu(&env_two_strategic()).unwrap()
        else {
            panic!("expected a menu");
        };
        assert_eq!(menu.get("s1").unwrap().transfers(), &qv(&["1/2", "5/2"]));
        // the raw scaling requirement is negative here, so alpha clamps to 0
        assert_eq!(menu.get("s2").unwrap().transfers(), &qv(&["2", "2"]));

        let d1 = &derivations[0];
        assert_eq!(d1.separator.as_ref().unwrap(), &qv(&["-1", "3"]));
        assert_eq!(d1.alpha.as_ref().unwrap(), &q("1/2"));
        let d2 = &derivations[1];
        assert_eq!(d2.separator.as_ref().unwrap(), &qv(&["3", "-1"]));
        assert_eq!(d2.alpha.as_ref().unwrap(), &q("0"));

        let env = env_two_strategic();
        let s1 = env.get("s1").unwrap();
        let s2 = env.get("s2").unwrap();
        assert_eq!(
            expected_transfer(&s1.belief, menu.get("s1").unwrap()).unwrap(),
            q("1")
        );
        assert_eq!(
            expected_transfer(&s2.belief, menu.get("s1").unwrap()).unwrap(),
            q("2")
        );
        assert_eq!(
            expected_transfer(&s1.belief, menu.get("s2").unwrap()).unwrap(),
            q("2")
        );
    }

    #[test]
    fn single_strategic_type_gets_flat_contract() {
        let env = Environment::new(
            vec!["w1".into(), "w2".into(), "w3".into()],
            vec![ty("s", TypeKind::Strategic, "5", &["1/3", "1/3", "1/3"])],
        )
        .unwrap();
        let SolveResult::Menu { menu, derivations } = strategic_menu(&env).unwrap() else {
            panic!("expected a menu");
        };
        assert_eq!(menu.get("s").unwrap().transfers(), &qv(&["5", "5", "5"]));
        assert_eq!(derivations[0].alpha.as_ref().unwrap(), &q("0"));
        assert_eq!(
            derivations[0].separator.as_ref().unwrap(),
            &qv(&["0", "0", "0"])
        );
    }

    #[test]
    fn behavioral_contract_matches_hand_arithmetic() {
        let env = env_with_behavioral("0", &["9/10", "1/10"]);
        let SolveResult::Menu { menu: base, .. } = strategic_menu(&env).unwrap() else {
            panic!("expected strategic menu");
        };
        let ContractResult::Built {
            contract,
            derivation,
        } = behavioral_contract(&env, &base, "b").unwrap()
        else {
            panic!("expected a contract");
        };
        assert_eq!(contract.transfers(), &qv(&["-2/3", "6"]));
        assert_eq!(derivation.separator.as_ref().unwrap(), &qv(&["-1", "9"]));
        assert_eq!(derivation.alpha.as_ref().unwrap(), &q("2/3"));

        let b = env.get("b").unwrap();
        let s1 = env.get("s1").unwrap();
        let s2 = env.get("s2").unwrap();
        assert_eq!(expected_transfer(&b.belief, &contract).unwrap(), q("0"));
        assert_eq!(expected_transfer(&s1.belief, &contract).unwrap(), q("1"));
        assert_eq!(expected_transfer(&s2.belief, &contract).unwrap(), q("13/3"));
    }

    #[test]
    fn high_valuation_behavioral_gets_flat_contract_via_clamp() {
        let env = env_with_behavioral("5", &["9/10", "1/10"]);
        let SolveResult::Menu { menu: base, .. } = strategic_menu(&env).unwrap() else {
            panic!("expected strategic menu");
        };
        let ContractResult::Built {
            contract,
            derivation,
        } = behavioral_contract(&env, &base, "b").unwrap()
        else {
            panic!("expected a contract");
        };
        assert_eq!(contract.transfers(), &qv(&["5", "5"]));
        assert_eq!(derivation.alpha.as_ref().unwrap(), &q("0"));
        assert!(derivation.separator.is_some());
    }

    #[test]
    fn behavioral_without_strategic_types_is_flat() {
        let env = Environment::new(
            vec!["w1".into(), "w2".into()],
            vec![ty("b", TypeKind::Behavioral, "3", &["1/2", "1/2"])],
        )
        .unwrap();
        let ContractResult::Built {
            contract,
            derivation,
        } = behavioral_contract(&env, &ContractMenu::new(), "b").unwrap()
        else {
            panic!("expected a contract");
        };
        assert_eq!(contract.transfers(), &qv(&["3", "3"]));
        assert_eq!(derivation.method, DerivationMethod::FlatContract);
    }

    #[test]
    fn full_menu_on_separated_behavioral() {
        let env = env_with_behavioral("0", &["9/10", "1/10"]);
        let SolveResult::Menu { menu, derivations } = full_extraction_menu(&env).unwrap() else {
            panic!("expected a menu");
        };
        assert_eq!(menu.get("s1").unwrap().transfers(), &qv(&["1/2", "5/2"]));
        assert_eq!(menu.get("s2").unwrap().transfers(), &qv(&["2", "2"]));
        assert_eq!(menu.get("b").unwrap().transfers(), &qv(&["-2/3", "6"]));
        assert_eq!(derivations.len(), 3);
    }

    #[test]
    fn in_hull_behavioral_fails_with_midpoint_witness() {
        let env = env_with_behavioral("7", &["1/2", "1/2"]);
        let SolveResult::Failure(SolveFailure::BehavioralInHull { type_id, lambda }) =
            full_extraction_menu(&env).unwrap()
        else {
            panic!("expected in-hull failure");
        };
        assert_eq!(type_id, "b");
        assert_eq!(
            lambda,
            vec![
                Weight {
                    type_id: "s1".into(),
                    value: q("1/2")
                },
                Weight {
                    type_id: "s2".into(),
                    value: q("1/2")
                },
            ]
        );
    }

    #[test]
    fn dependent_strategic_beliefs_fail_first() {
        let env = Environment::new(
            vec!["w1".into(), "w2".into(), "w3".into()],
            vec![
                ty("s1", TypeKind::Strategic, "1", &["1", "0", "0"]),
                ty("s2", TypeKind::Strategic, "1", &["0", "1", "0"]),
                ty("s3", TypeKind::Strategic, "1", &["1/2", "1/2", "0"]),
            ],
        )
        .unwrap();
        let SolveResult::Failure(SolveFailure::StrategicDependence { type_id, .. }) =
            full_extraction_menu(&env).unwrap()
        else {
            panic!("expected dependence failure");
        };
        assert_eq!(type_id, "s3");
    }

    #[test]
    fn extend_menu_prices_against_given_costs() {
        // non-extracting but IC strategic menu: both contracts flat at 0
        let env = env_with_behavioral("0", &["9/10", "1/10"]);
        let mut flat = ContractMenu::new();
        flat.insert("s1", Contract::flat(&q("0"), 2));
        flat.insert("s2", Contract::flat(&q("0"), 2));
        let ContractResult::Built { contract, .. } = extend_menu(&env, &flat, "b").unwrap() else {
            panic!("expected a contract");
        };
        assert_eq!(contract.transfers(), &qv(&["0", "0"]));
        let mut extended = flat.clone();
        extended.insert("b", contract);
        assert!(verify::check_incentive_compatibility(&env, &extended)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn extend_menu_flat_when_costs_below_valuation() {
        let env = env_with_behavioral("3", &["9/10", "1/10"]);
        let mut flat = ContractMenu::new();
        flat.insert("s1", Contract::flat(&q("0"), 2));
        flat.insert("s2", Contract::flat(&q("0"), 2));
        let ContractResult::Built {
            contract,
            derivation,
        } = extend_menu(&env, &flat, "b").unwrap()
        else {
            panic!("expected a contract");
        };
        assert_eq!(contract.transfers(), &qv(&["3", "3"]));
        assert_eq!(derivation.alpha.as_ref().unwrap(), &q("0"));
    }

    #[test]
    fn extend_menu_rejects_non_ic_input() {
        let env = env_with_behavioral("0", &["9/10", "1/10"]);
        let mut bad = ContractMenu::new();
        bad.insert("s1", Contract::flat(&q("0"), 2));
        bad.insert("s2", Contract::flat(&q("-1"), 2));
        let err = extend_menu(&env, &bad, "b").unwrap_err();
        assert_eq!(
            err,
            Error::NotIncentiveCompatible {
                strategic: "s1".into(),
                tempting: "s2".into()
            }
        );
    }

    #[test]
    fn extend_menu_from_simplex_vertex_belief() {
        // behavioral belief at a simplex vertex, strategic beliefs interior:
        // separation always holds, any IC menu extends
        let env = Environment::new(
            vec!["w1".into(), "w2".into()],
            vec![
                ty("s1", TypeKind::Strategic, "1", &["3/5", "2/5"]),
                ty("s2", TypeKind::Strategic, "2", &["2/5", "3/5"]),
                ty("b", TypeKind::Behavioral, "1", &["1", "0"]),
            ],
        )
        .unwrap();
        let mut menu = ContractMenu::new();
        menu.insert("s1", Contract::new(vec![q("7"), q("2")]));
        menu.insert("s2", Contract::new(vec![q("2"), q("5")]));
        // check IC of the handcrafted menu first: s1 cost 5 vs 16/5? compute:
        // ⟨s1,(7,2)⟩ = 21/5+4/5 = 5; ⟨s1,(2,5)⟩ = 6/5+2 = 16/5 < 5 → not IC.
        // Use flat contracts instead.
        let mut menu = ContractMenu::new();
        menu.insert("s1", Contract::flat(&q("4"), 2));
        menu.insert("s2", Contract::flat(&q("4"), 2));
        let result = extend_menu(&env, &menu, "b").unwrap();
        let ContractResult::Built { contract, .. } = result else {
            panic!("expected a contract");
        };
        let b = env.get("b").unwrap();
        assert_eq!(expected_transfer(&b.belief, &contract).unwrap(), q("1"));
        let mut extended = menu.clone();
        extended.insert("b", contract);
        assert!(verify::check_incentive_compatibility(&env, &extended)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn value_menu_solves_in_hull_type_above_mixture_value() {
        let env = env_with_behavioral("7/4", &["1/2", "1/2"]);
        let SolveResult::Menu { menu, derivations } = value_condition_menu(&env).unwrap() else {
            panic!("expected a menu");
        };
        let d = derivations.iter().find(|d| d.type_id == "b").unwrap();
        assert_eq!(d.method, DerivationMethod::HullMix);
        assert_eq!(d.alpha.as_ref().unwrap(), &q("1/2"));
        assert_eq!(d.value_threshold.as_ref().unwrap(), &q("3/2"));
        let lambda = d.lambda.as_ref().unwrap();
        assert_eq!(lambda[0].value, q("1/2"));
        assert_eq!(lambda[1].value, q("1/2"));

        // the LP contract satisfies the construction's constraints exactly
        let b = env.get("b").unwrap();
        let s1 = env.get("s1").unwrap();
        let s2 = env.get("s2").unwrap();
        let contract = menu.get("b").unwrap();
        assert_eq!(expected_transfer(&b.belief, contract).unwrap(), q("7/4"));
        assert!(expected_transfer(&s1.belief, contract).unwrap() >= q("1"));
        assert!(expected_transfer(&s2.belief, contract).unwrap() >= q("2"));

        // closed-form gap is non-zero here because the strategic menu's
        // incentive constraints are slack on the decomposition's support
        assert_eq!(d.closed_form_gap.as_ref().unwrap(), &q("-1/8"));
    }

    #[test]
    fn closed_form_reproduces_hand_mix_on_unclamped_menu() {
        // with the unclamped strategic contracts (both (1/2,5/2)), the mix
        // at alpha = 1/2 gives (5/4,9/4) and extracts exactly
        let c = Contract::new(qv(&["1/2", "5/2"]));
        let mix = c.scaled(&q("1/2")).plus(&c.scaled(&q("1/2")));
        let closed = mix.scaled(&q("1/2")).plus(&Contract::flat(&q("1"), 2));
        assert_eq!(closed.transfers(), &qv(&["5/4", "9/4"]));
        let pb = Belief::new(qv(&["1/2", "1/2"])).unwrap();
        assert_eq!(
            expected_transfer(&pb, &closed).unwrap(),
            q("7/4")
        );
    }

    #[test]
    fn value_menu_flat_case_when_valuation_dominates() {
        let env = env_with_behavioral("3", &["1/2", "1/2"]);
        let SolveResult::Menu { menu, derivations } = value_condition_menu(&env).unwrap() else {
            panic!("expected a menu");
        };
        assert_eq!(menu.get("b").unwrap().transfers(), &qv(&["3", "3"]));
        let d = derivations.iter().find(|d| d.type_id == "b").unwrap();
        assert_eq!(d.method, DerivationMethod::FlatContract);
    }

    #[test]
    fn value_menu_fails_below_threshold() {
        let env = env_with_behavioral("1", &["1/2", "1/2"]);
        let SolveResult::Failure(SolveFailure::ValuationBelowThreshold {
            type_id,
            valuation,
            threshold,
        }) = value_condition_menu(&env).unwrap()
        else {
            panic!("expected threshold failure");
        };
        assert_eq!(type_id, "b");
        assert_eq!(valuation, q("1"));
        assert_eq!(threshold, q("3/2"));
    }

    #[test]
    fn removing_a_behavioral_type_changes_nothing_else() {
        let env = Environment::new(
            vec!["w1".into(), "w2".into(), "w3".into()],
            vec![
                ty("s1", TypeKind::Strategic, "1", &["3/5", "1/5", "1/5"]),
                ty("s2", TypeKind::Strategic, "2", &["1/5", "3/5", "1/5"]),
                ty("b1", TypeKind::Behavioral, "1", &["1/10", "1/10", "4/5"]),
                ty("b2", TypeKind::Behavioral, "0", &["1/5", "1/5", "3/5"]),
            ],
        )
        .unwrap();
        let SolveResult::Menu { menu: full, .. } = full_extraction_menu(&env).unwrap() else {
            panic!("expected a menu");
        };
        let smaller_env = env.without_type("b2").unwrap();
        let SolveResult::Menu { menu: smaller, .. } =
            full_extraction_menu(&smaller_env).unwrap()
        else {
            panic!("expected a menu");
        };
        for id in ["s1", "s2", "b1"] {
            assert_eq!(full.get(id), smaller.get(id), "contract changed for {id}");
        }
    }

    #[test]
    fn scaled_up_alpha_still_verifies() {
        // any alpha at or above the formula's value keeps all inequalities
        let env = env_with_behavioral("0", &["9/10", "1/10"]);
        let b = env.get("b").unwrap();
        let z = qv(&["-1", "9"]);
        for extra in ["0", "1/3", "2", "10"] {
            let alpha = q("2/3") + q(extra);
            let contract = Contract::new(
                z.iter()
                    .map(|zi| &b.valuation + &(&alpha * zi))
                    .collect(),
            );
            assert_eq!(expected_transfer(&b.belief, &contract).unwrap(), q("0"));
            for s in env.strategic() {
                assert!(
                    expected_transfer(&s.belief, &contract).unwrap() >= s.valuation,
                    "alpha {alpha} violated for {}",
                    s.id
                );
            }
        }
    }

    #[test]
    fn max_decomposition_value_picks_the_costliest_route() {
        // three collinear strategic beliefs give a non-unique decomposition
        let p1 = Belief::new(qv(&["0", "1"])).unwrap();
        let p2 = Belief::new(qv(&["1/2", "1/2"])).unwrap();
        let p3 = Belief::new(qv(&["1", "0"])).unwrap();
        let pb = Belief::new(qv(&["1/4", "3/4"])).unwrap();
        let (v1, v2, v3) = (q("0"), q("1"), q("0"));
        let threshold = max_decomposition_value(&pb, &[(&p1, &v1), (&p2, &v2), (&p3, &v3)])
            .unwrap()
            .unwrap();
        // decompositions trade p2 weight against p1/p3; max total value is 1/2
        assert_eq!(threshold, q("1/2"));

        let outside = Belief::new(qv(&["1", "0"])).unwrap();
        assert_eq!(
            max_decomposition_value(&outside, &[(&p1, &v1), (&p2, &v2)])
                .unwrap(),
            None
        );
    }
}
