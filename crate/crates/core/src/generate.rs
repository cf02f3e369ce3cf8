//! Deterministic instance generator for property tests and batch runs.
//!
//! Beliefs are sampled on a rational grid with denominators at most the
//! configured bound; regime guarantees are enforced by construction where
//! possible (placing a belief as an explicit convex combination) and by
//! bounded rejection sampling otherwise. Every instance is re-verified
//! against its regime's claim before being returned, so downstream tests can
//! trust the labels. Identical specs produce identical environments.

use std::fmt;
use std::str::FromStr;

use crate::extraction::max_decomposition_value;
use crate::geometry::{check_extraction_conditions, hull_membership};
use crate::model::{Belief, Environment, TypeKind, TypeRecord};
use crate::rational::Rational;
use crate::Error;

/// Geometric/valuation regime the generated environment must realize.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// Both feasibility conditions hold.
    Feasible,
    /// Some strategic belief lies in the hull of the other strategic beliefs.
    StrategicDependent,
    /// Strategic beliefs independent, but a behavioral belief is inside
    /// their hull.
    BehavioralInHull,
    /// As `BehavioralInHull`, with the in-hull type's valuation at or above
    /// its decomposition-value threshold.
    ValueFeasible,
    /// As `BehavioralInHull`, with the in-hull type's valuation strictly
    /// below its threshold.
    ValueInfeasible,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Regime::Feasible => "feasible",
            Regime::StrategicDependent => "strategic-dependent",
            Regime::BehavioralInHull => "behavioral-in-hull",
            Regime::ValueFeasible => "value-feasible",
            Regime::ValueInfeasible => "value-infeasible",
        };
        f.write_str(name)
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "feasible" => Ok(Regime::Feasible),
            "strategic-dependent" => Ok(Regime::StrategicDependent),
            "behavioral-in-hull" => Ok(Regime::BehavioralInHull),
            "value-feasible" => Ok(Regime::ValueFeasible),
            "value-infeasible" => Ok(Regime::ValueInfeasible),
            other => Err(Error::Parse(format!(
                "unknown regime {other:?}: expected feasible, strategic-dependent, \
                 behavioral-in-hull, value-feasible or value-infeasible"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub seed: u64,
    pub num_states: usize,
    pub num_strategic: usize,
    pub num_behavioral: usize,
    pub regime: Regime,
    pub denominator_bound: u64,
}

/// splitmix64; deterministic across platforms, which is all the generator
/// needs.
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform-enough draw in `0..n`. Modulo bias is irrelevant here.
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        self.next_u64() % n
    }
}

const MAX_ATTEMPTS: usize = 1000;

fn sample_belief(rng: &mut SplitMix64, num_states: usize, denom: u64) -> Belief {
    // composition of `denom` into `num_states` nonnegative parts
    let mut cuts: Vec<u64> = (0..num_states - 1).map(|_| rng.below(denom + 1)).collect();
    cuts.sort_unstable();
    cuts.push(denom);
    let mut parts = Vec::with_capacity(num_states);
    let mut prev = 0u64;
    for c in cuts {
        parts.push(Rational::new((c - prev) as i64, denom as i64));
        prev = c;
    }
    Belief::new(parts).expect("composition sums to one")
}

fn sample_valuation(rng: &mut SplitMix64, denom: u64, positive: bool) -> Rational {
    let lo = if positive { 1 } else { 0 };
    let k = lo + rng.below(3 * denom - lo + 1);
    Rational::new(k as i64, denom as i64)
}

/// Strict convex mix of the given beliefs with random integer weights.
fn sample_mix(rng: &mut SplitMix64, beliefs: &[&Belief], denom: u64) -> Belief {
    let weights: Vec<Rational> = beliefs
        .iter()
        .map(|_| Rational::new((1 + rng.below(denom)) as i64, 1))
        .collect();
    let total: Rational = weights.iter().sum();
    let inv = total.recip().expect("weights are positive");
    let n = beliefs[0].len();
    let probs: Vec<Rational> = (0..n)
        .map(|w| {
            let mixed: Rational = beliefs
                .iter()
                .zip(&weights)
                .map(|(b, wt)| &b.probs()[w] * wt)
                .sum();
            &mixed * &inv
        })
        .collect();
    Belief::new(probs).expect("convex mix of beliefs is a belief")
}

fn distinct(beliefs: &[Belief]) -> bool {
    for (i, b) in beliefs.iter().enumerate() {
        if beliefs[..i].contains(b) {
            return false;
        }
    }
    true
}

fn sample_distinct_beliefs(
    rng: &mut SplitMix64,
    count: usize,
    num_states: usize,
    denom: u64,
) -> Result<Vec<Belief>, Error> {
    for _ in 0..MAX_ATTEMPTS {
        let candidate: Vec<Belief> = (0..count)
            .map(|_| sample_belief(rng, num_states, denom))
            .collect();
        if distinct(&candidate) {
            return Ok(candidate);
        }
    }
    Err(Error::Generation {
        reason: format!(
            "could not sample {count} distinct beliefs over {num_states} states \
             with denominator {denom}"
        ),
    })
}

fn build_env(
    states: usize,
    strategic: Vec<(Belief, Rational)>,
    behavioral: Vec<(Belief, Rational)>,
) -> Result<Environment, Error> {
    let state_labels = (1..=states).map(|i| format!("w{i}")).collect();
    let mut types = Vec::new();
    for (i, (belief, valuation)) in strategic.into_iter().enumerate() {
        types.push(TypeRecord {
            id: format!("s{}", i + 1),
            kind: TypeKind::Strategic,
            valuation,
            belief,
        });
    }
    for (i, (belief, valuation)) in behavioral.into_iter().enumerate() {
        types.push(TypeRecord {
            id: format!("b{}", i + 1),
            kind: TypeKind::Behavioral,
            valuation,
            belief,
        });
    }
    Environment::new(state_labels, types)
}

/// Strategic belief sets satisfying convex independence, by rejection.
fn sample_independent_strategic(
    rng: &mut SplitMix64,
    count: usize,
    num_states: usize,
    denom: u64,
) -> Result<Vec<Belief>, Error> {
    for _ in 0..MAX_ATTEMPTS {
        let candidate = sample_distinct_beliefs(rng, count, num_states, denom)?;
        let views: Vec<&Belief> = candidate.iter().collect();
        if crate::geometry::check_convex_independence(&views)?.passed {
            return Ok(candidate);
        }
    }
    Err(Error::Generation {
        reason: format!(
            "could not sample {count} convex-independent strategic beliefs over \
             {num_states} states (denominator {denom})"
        ),
    })
}

/// Generates an environment realizing the spec's regime. Deterministic in the
/// spec. Fails with a generation error when the regime is unsatisfiable for
/// the requested counts or the attempt budget runs out.
pub fn generate(spec: &GeneratorSpec) -> Result<Environment, Error> {
    if spec.num_states == 0 {
        return Err(Error::Generation {
            reason: "need at least one state".into(),
        });
    }
    if spec.num_strategic + spec.num_behavioral == 0 {
        return Err(Error::Generation {
            reason: "need at least one type".into(),
        });
    }
    if spec.denominator_bound == 0 {
        return Err(Error::Generation {
            reason: "denominator bound must be positive".into(),
        });
    }
    let mut rng = SplitMix64::new(spec.seed);
    let d = spec.denominator_bound;

    let env = match spec.regime {
        Regime::Feasible => generate_feasible(spec, &mut rng, d)?,
        Regime::StrategicDependent => generate_strategic_dependent(spec, &mut rng, d)?,
        Regime::BehavioralInHull => generate_in_hull(spec, &mut rng, d, ValueRule::Free)?,
        Regime::ValueFeasible => generate_in_hull(spec, &mut rng, d, ValueRule::AtOrAbove)?,
        Regime::ValueInfeasible => generate_in_hull(spec, &mut rng, d, ValueRule::Below)?,
    };
    post_check(spec, &env)?;
    Ok(env)
}

fn generate_feasible(
    spec: &GeneratorSpec,
    rng: &mut SplitMix64,
    d: u64,
) -> Result<Environment, Error> {
    for _ in 0..MAX_ATTEMPTS {
        let beliefs = sample_distinct_beliefs(
            rng,
            spec.num_strategic + spec.num_behavioral,
            spec.num_states,
            d,
        )?;
        let strategic: Vec<(Belief, Rational)> = beliefs[..spec.num_strategic]
            .iter()
            .map(|b| (b.clone(), sample_valuation(rng, d, false)))
            .collect();
        let behavioral: Vec<(Belief, Rational)> = beliefs[spec.num_strategic..]
            .iter()
            .map(|b| (b.clone(), sample_valuation(rng, d, false)))
            .collect();
        let env = build_env(spec.num_states, strategic, behavioral)?;
        if check_extraction_conditions(&env)?.passed {
            return Ok(env);
        }
    }
    Err(Error::Generation {
        reason: format!(
            "no environment satisfying both conditions found for {} strategic / {} \
             behavioral types over {} states after {MAX_ATTEMPTS} attempts",
            spec.num_strategic, spec.num_behavioral, spec.num_states
        ),
    })
}

fn generate_strategic_dependent(
    spec: &GeneratorSpec,
    rng: &mut SplitMix64,
    d: u64,
) -> Result<Environment, Error> {
    if spec.num_strategic < 3 {
        return Err(Error::Generation {
            reason: "a dependent strategic belief needs at least two other strategic \
                     beliefs to decompose over"
                .into(),
        });
    }
    for _ in 0..MAX_ATTEMPTS {
        let base = sample_distinct_beliefs(rng, spec.num_strategic - 1, spec.num_states, d)?;
        let dependent = sample_mix(rng, &[&base[0], &base[1]], d);
        let mut strategic_beliefs = base;
        strategic_beliefs.push(dependent);
        let behavioral_beliefs =
            sample_distinct_beliefs(rng, spec.num_behavioral, spec.num_states, d)?;
        let mut all = strategic_beliefs.clone();
        all.extend(behavioral_beliefs.iter().cloned());
        if !distinct(&all) {
            continue;
        }
        let strategic = strategic_beliefs
            .into_iter()
            .map(|b| (b, sample_valuation(rng, d, false)))
            .collect();
        let behavioral = behavioral_beliefs
            .into_iter()
            .map(|b| (b, sample_valuation(rng, d, false)))
            .collect();
        return build_env(spec.num_states, strategic, behavioral);
    }
    Err(Error::Generation {
        reason: "could not realize a dependent strategic belief".into(),
    })
}

enum ValueRule {
    Free,
    AtOrAbove,
    Below,
}

fn generate_in_hull(
    spec: &GeneratorSpec,
    rng: &mut SplitMix64,
    d: u64,
    rule: ValueRule,
) -> Result<Environment, Error> {
    if spec.num_behavioral == 0 {
        return Err(Error::Generation {
            reason: "an in-hull regime needs at least one behavioral type".into(),
        });
    }
    if spec.num_strategic < 2 {
        return Err(Error::Generation {
            reason: "an in-hull behavioral belief needs at least two strategic beliefs".into(),
        });
    }
    'attempt: for _ in 0..MAX_ATTEMPTS {
        let strategic_beliefs =
            sample_independent_strategic(rng, spec.num_strategic, spec.num_states, d)?;
        let strategic_views: Vec<&Belief> = strategic_beliefs.iter().collect();
        let in_hull = sample_mix(rng, &strategic_views, d);
        if strategic_beliefs.contains(&in_hull) {
            continue;
        }

        // remaining behavioral types stay outside the hull so the designated
        // one is the only in-hull type
        let mut other_behavioral: Vec<Belief> = Vec::new();
        let mut guard = 0;
        while other_behavioral.len() + 1 < spec.num_behavioral {
            guard += 1;
            if guard > MAX_ATTEMPTS {
                continue 'attempt;
            }
            let candidate = sample_belief(rng, spec.num_states, d);
            if candidate == in_hull
                || strategic_beliefs.contains(&candidate)
                || other_behavioral.contains(&candidate)
            {
                continue;
            }
            if hull_membership(&candidate, &strategic_views)?.is_separated() {
                other_behavioral.push(candidate);
            }
        }

        let strategic: Vec<(Belief, Rational)> = strategic_beliefs
            .iter()
            .map(|b| {
                let positive = matches!(rule, ValueRule::Below);
                (b.clone(), sample_valuation(rng, d, positive))
            })
            .collect();

        let value_refs: Vec<(&Belief, &Rational)> =
            strategic.iter().map(|(b, v)| (b, v)).collect();
        let threshold = max_decomposition_value(&in_hull, &value_refs)?
            .expect("mixed belief lies in the hull");
        let in_hull_valuation = match rule {
            ValueRule::Free => sample_valuation(rng, d, false),
            ValueRule::AtOrAbove => &threshold + &Rational::new(rng.below(2 * d + 1) as i64, d as i64),
            ValueRule::Below => {
                if !threshold.is_positive() {
                    continue;
                }
                &threshold * &Rational::new(rng.below(d) as i64, d as i64)
            }
        };

        let mut behavioral = vec![(in_hull, in_hull_valuation)];
        behavioral.extend(
            other_behavioral
                .into_iter()
                .map(|b| (b, sample_valuation(rng, d, false))),
        );
        return build_env(spec.num_states, strategic, behavioral);
    }
    Err(Error::Generation {
        reason: "could not realize an in-hull behavioral belief".into(),
    })
}

/// Re-verifies the regime's claim on the generated instance.
fn post_check(spec: &GeneratorSpec, env: &Environment) -> Result<(), Error> {
    let report = check_extraction_conditions(env)?;
    let claim_holds = match spec.regime {
        Regime::Feasible => report.passed,
        Regime::StrategicDependent => !report.strategic_passed,
        Regime::BehavioralInHull => report.strategic_passed && !report.behavioral_passed,
        Regime::ValueFeasible | Regime::ValueInfeasible => {
            if !(report.strategic_passed && !report.behavioral_passed) {
                false
            } else {
                // the designated type is b1; compare its valuation to its threshold
                let b1 = env.require("b1")?;
                let strategic = env.strategic();
                let refs: Vec<(&Belief, &Rational)> = strategic
                    .iter()
                    .map(|t| (&t.belief, &t.valuation))
                    .collect();
                match max_decomposition_value(&b1.belief, &refs)? {
                    None => false,
                    Some(threshold) => match spec.regime {
                        Regime::ValueFeasible => b1.valuation >= threshold,
                        _ => b1.valuation < threshold,
                    },
                }
            }
        }
    };
    assert!(
        claim_holds,
        "generated instance does not realize regime {} (seed {})",
        spec.regime, spec.seed
    );
    Ok(())
}
