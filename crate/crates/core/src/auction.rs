//! Correlated-values auction front end.
//!
//! Fixes the efficient allocation (highest valuation wins, ties broken by a
//! strict priority order), recasts the auction from each bidder's viewpoint
//! as a single-agent problem — states are opponent valuation profiles,
//! beliefs are Bayes conditionals of the common prior, valuations are value
//! times win probability — and runs the extraction machinery on the
//! reduction. Winning contracts map back to a transfer rule, and an audit
//! confirms expected revenue equals expected surplus.

use serde::{Deserialize, Serialize};

use crate::extraction::{full_extraction_menu, SolveResult};
use crate::geometry::{check_extraction_conditions, hull_membership, ConditionReport};
use crate::model::{Belief, Environment, TypeKind, TypeRecord};
use crate::rational::Rational;
use crate::Error;

/// Finite correlated-values auction: bidder valuation grids, a common prior
/// over full valuation profiles, per-bidder behavioral valuation sets, and a
/// strict tie-breaking priority over bidders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuctionEnvironment {
    bidders: Vec<String>,
    grids: Vec<Vec<Rational>>,
    /// Dense prior over full profiles, indexed row-major with bidder 0 most
    /// significant.
    prior: Vec<Rational>,
    behavioral: Vec<Vec<bool>>,
    /// `rank[i]` is bidder `i`'s position in the priority order (0 wins ties
    /// against everyone later).
    rank: Vec<usize>,
}

impl AuctionEnvironment {
    /// Validates structure: at least two bidders, distinct non-empty grids,
    /// profiles on-grid and distinct, probabilities nonnegative and summing
    /// to one, every own-valuation marginal positive, behavioral sets
    /// on-grid, and the priority a permutation of the bidders. Conditional
    /// distinctness is deliberately not checked here; it is enforced where a
    /// reduction is taken.
    pub fn new(
        bidders: Vec<String>,
        grids: Vec<Vec<Rational>>,
        prior_entries: Vec<(Vec<Rational>, Rational)>,
        behavioral: Vec<Vec<Rational>>,
        priority: Option<Vec<String>>,
    ) -> Result<Self, Error> {
        if bidders.len() < 2 {
            return Err(Error::TooFewBidders);
        }
        for (i, id) in bidders.iter().enumerate() {
            if bidders[..i].contains(id) {
                return Err(Error::DuplicateBidderId { id: id.clone() });
            }
        }
        if grids.len() != bidders.len() || behavioral.len() != bidders.len() {
            return Err(Error::Dimension {
                context: "per-bidder grids/behavioral sets",
                expected: bidders.len(),
                actual: grids.len().min(behavioral.len()),
            });
        }
        for (i, grid) in grids.iter().enumerate() {
            if grid.is_empty() {
                return Err(Error::EmptyGrid {
                    id: bidders[i].clone(),
                });
            }
            for (k, v) in grid.iter().enumerate() {
                if grid[..k].contains(v) {
                    return Err(Error::DuplicateGridValue {
                        id: bidders[i].clone(),
                        value: v.clone(),
                    });
                }
            }
        }

        let sizes: Vec<usize> = grids.iter().map(Vec::len).collect();
        let num_profiles: usize = sizes.iter().product();
        let mut prior = vec![Rational::zero(); num_profiles];
        let mut seen = vec![false; num_profiles];
        for (profile, prob) in prior_entries {
            if profile.len() != bidders.len() {
                return Err(Error::ProfileLength {
                    expected: bidders.len(),
                    actual: profile.len(),
                });
            }
            let mut flat = 0usize;
            for (i, value) in profile.iter().enumerate() {
                let idx = grids[i].iter().position(|v| v == value).ok_or_else(|| {
                    Error::ProfileValueOffGrid {
                        id: bidders[i].clone(),
                        value: value.clone(),
                    }
                })?;
                flat = flat * sizes[i] + idx;
            }
            if seen[flat] {
                return Err(Error::DuplicateProfile);
            }
            seen[flat] = true;
            if prob.is_negative() {
                return Err(Error::NegativePriorProbability { value: prob });
            }
            prior[flat] = prob;
        }
        let total: Rational = prior.iter().sum();
        if total != Rational::one() {
            return Err(Error::PriorNotNormalized { sum: total });
        }

        let mut behavioral_mask = Vec::with_capacity(bidders.len());
        for (i, set) in behavioral.iter().enumerate() {
            let mut mask = vec![false; grids[i].len()];
            for value in set {
                let idx = grids[i].iter().position(|v| v == value).ok_or_else(|| {
                    Error::BehavioralOffGrid {
                        id: bidders[i].clone(),
                        value: value.clone(),
                    }
                })?;
                mask[idx] = true;
            }
            behavioral_mask.push(mask);
        }

        let priority = priority.unwrap_or_else(|| bidders.clone());
        if priority.len() != bidders.len() {
            return Err(Error::BadPriority);
        }
        let mut rank = vec![usize::MAX; bidders.len()];
        for (pos, id) in priority.iter().enumerate() {
            let i = bidders
                .iter()
                .position(|b| b == id)
                .ok_or(Error::BadPriority)?;
            if rank[i] != usize::MAX {
                return Err(Error::BadPriority);
            }
            rank[i] = pos;
        }

        let auction = AuctionEnvironment {
            bidders,
            grids,
            prior,
            behavioral: behavioral_mask,
            rank,
        };
        for i in 0..auction.bidders.len() {
            for ti in 0..auction.grids[i].len() {
                if !auction.own_marginal(i, ti).is_positive() {
                    return Err(Error::ZeroMarginal {
                        id: auction.bidders[i].clone(),
                        value: auction.grids[i][ti].clone(),
                    });
                }
            }
        }
        Ok(auction)
    }

    pub fn bidders(&self) -> &[String] {
        &self.bidders
    }

    pub fn grid(&self, bidder: usize) -> &[Rational] {
        &self.grids[bidder]
    }

    pub fn is_behavioral(&self, bidder: usize, value_index: usize) -> bool {
        self.behavioral[bidder][value_index]
    }

    pub fn bidder_index(&self, id: &str) -> Result<usize, Error> {
        self.bidders
            .iter()
            .position(|b| b == id)
            .ok_or_else(|| Error::UnknownBidderId { id: id.to_string() })
    }

    pub fn priority(&self) -> Vec<String> {
        let mut order: Vec<(usize, &String)> =
            self.rank.iter().copied().zip(&self.bidders).collect();
        order.sort_by_key(|(r, _)| *r);
        order.into_iter().map(|(_, id)| id.clone()).collect()
    }

    pub fn behavioral_values(&self, bidder: usize) -> Vec<Rational> {
        self.grids[bidder]
            .iter()
            .zip(&self.behavioral[bidder])
            .filter(|(_, &m)| m)
            .map(|(v, _)| v.clone())
            .collect()
    }

    /// Sparse view of the prior: (profile values, probability) for every
    /// positive-probability profile, in lexicographic order.
    pub fn prior_entries(&self) -> Vec<(Vec<Rational>, Rational)> {
        let sizes = self.sizes();
        (0..self.prior.len())
            .filter(|&flat| self.prior[flat].is_positive())
            .map(|flat| {
                let idxs = self.unflatten(flat, &sizes);
                let values = idxs
                    .iter()
                    .enumerate()
                    .map(|(j, &k)| self.grids[j][k].clone())
                    .collect();
                (values, self.prior[flat].clone())
            })
            .collect()
    }

    fn sizes(&self) -> Vec<usize> {
        self.grids.iter().map(Vec::len).collect()
    }

    fn unflatten(&self, mut flat: usize, sizes: &[usize]) -> Vec<usize> {
        let mut idxs = vec![0usize; sizes.len()];
        for j in (0..sizes.len()).rev() {
            idxs[j] = flat % sizes[j];
            flat /= sizes[j];
        }
        idxs
    }

    pub(crate) fn num_opponent_profiles(&self, bidder: usize) -> usize {
        self.sizes()
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != bidder)
            .map(|(_, s)| *s)
            .product()
    }

    /// Opponent grid indices per non-`bidder` player (bidder order), from a
    /// flat opponent-profile index.
    fn opponent_profile(&self, bidder: usize, mut flat: usize) -> Vec<usize> {
        let sizes = self.sizes();
        let mut rev = Vec::new();
        for j in (0..self.bidders.len()).rev() {
            if j == bidder {
                continue;
            }
            rev.push(flat % sizes[j]);
            flat /= sizes[j];
        }
        rev.reverse();
        rev
    }

    /// Flat full-profile index for `bidder` holding `own` against a flat
    /// opponent profile.
    fn full_profile(&self, bidder: usize, own: usize, opp_flat: usize) -> usize {
        let sizes = self.sizes();
        let opp = self.opponent_profile(bidder, opp_flat);
        let mut flat = 0usize;
        let mut opp_iter = opp.into_iter();
        for (j, size) in sizes.iter().enumerate() {
            let idx = if j == bidder {
                own
            } else {
                opp_iter
                    .next()
                    .expect("opponent profile has an entry per other bidder")
            };
            flat = flat * size + idx;
        }
        flat
    }

    fn own_marginal(&self, bidder: usize, own: usize) -> Rational {
        (0..self.num_opponent_profiles(bidder))
            .map(|opp| self.prior[self.full_profile(bidder, own, opp)].clone())
            .sum()
    }

    fn conditional_vector(&self, bidder: usize, own: usize) -> Result<Vec<Rational>, Error> {
        let marginal = self.own_marginal(bidder, own);
        if !marginal.is_positive() {
            return Err(Error::ZeroMarginal {
                id: self.bidders[bidder].clone(),
                value: self.grids[bidder][own].clone(),
            });
        }
        let inv = marginal.recip().expect("marginal is positive");
        Ok((0..self.num_opponent_profiles(bidder))
            .map(|opp| &self.prior[self.full_profile(bidder, own, opp)] * &inv)
            .collect())
    }

    /// Bayes conditional over opponent profiles given the bidder's own
    /// valuation, as a belief over the full opponent grid product in
    /// lexicographic order.
    pub fn conditional_beliefs(&self, bidder: usize, own: usize) -> Result<Belief, Error> {
        Belief::new(self.conditional_vector(bidder, own)?)
    }

    /// True when `bidder` holding `own` wins against the given opponent
    /// profile under the efficient allocation with priority tie-breaking:
    /// higher-priority opponents must be strictly below, lower-priority
    /// opponents weakly below.
    fn beats(&self, bidder: usize, own: usize, opp_flat: usize) -> bool {
        let own_value = &self.grids[bidder][own];
        let opp = self.opponent_profile(bidder, opp_flat);
        let mut opp_iter = opp.into_iter();
        for j in 0..self.bidders.len() {
            if j == bidder {
                continue;
            }
            let theirs = &self.grids[j][opp_iter.next().expect("entry per other bidder")];
            let ok = if self.rank[j] < self.rank[bidder] {
                theirs < own_value
            } else {
                theirs <= own_value
            };
            if !ok {
                return false;
            }
        }
        true
    }

    /// Conditional probability that the bidder wins the item.
    pub fn win_probability(&self, bidder: usize, own: usize) -> Result<Rational, Error> {
        let conditional = self.conditional_vector(bidder, own)?;
        Ok(conditional
            .iter()
            .enumerate()
            .filter(|(opp, _)| self.beats(bidder, own, *opp))
            .map(|(_, p)| p.clone())
            .sum())
    }

    /// Opponent profiles that carry positive prior mass under at least one of
    /// the bidder's own valuations. Profiles outside this support are dropped
    /// from the reduction's state space; transfers there default to zero.
    fn supported_opponent_profiles(&self, bidder: usize) -> Vec<usize> {
        (0..self.num_opponent_profiles(bidder))
            .filter(|&opp| {
                (0..self.grids[bidder].len())
                    .any(|own| self.prior[self.full_profile(bidder, own, opp)].is_positive())
            })
            .collect()
    }

    fn opponent_profile_label(&self, bidder: usize, opp_flat: usize) -> String {
        let opp = self.opponent_profile(bidder, opp_flat);
        let mut parts = Vec::new();
        let mut opp_iter = opp.into_iter();
        for j in 0..self.bidders.len() {
            if j == bidder {
                continue;
            }
            parts
                .push(self.grids[j][opp_iter.next().expect("entry per other bidder")].to_string());
        }
        parts.join(",")
    }

    /// The auction from one bidder's viewpoint: states are supported opponent
    /// profiles, one type per own valuation with its Bayes conditional as
    /// belief and value-times-win-probability as valuation, behavioral
    /// exactly when the valuation is in the bidder's behavioral set.
    pub fn single_bidder_reduction(&self, bidder: usize) -> Result<Environment, Error> {
        let support = self.supported_opponent_profiles(bidder);
        let states: Vec<String> = support
            .iter()
            .map(|&opp| self.opponent_profile_label(bidder, opp))
            .collect();
        let mut types = Vec::with_capacity(self.grids[bidder].len());
        for own in 0..self.grids[bidder].len() {
            let conditional = self.conditional_vector(bidder, own)?;
            let restricted: Vec<Rational> =
                support.iter().map(|&opp| conditional[opp].clone()).collect();
            let win = self.win_probability(bidder, own)?;
            types.push(TypeRecord {
                id: self.grids[bidder][own].to_string(),
                kind: if self.behavioral[bidder][own] {
                    TypeKind::Behavioral
                } else {
                    TypeKind::Strategic
                },
                valuation: &self.grids[bidder][own] * &win,
                belief: Belief::new(restricted)?,
            });
        }
        Environment::new(states, types)
    }

    /// Hull condition checked directly on the conditionals, one verdict per
    /// own valuation: the conditional must lie outside the hull of the other
    /// strategic valuations' conditionals. Vacuous (and passing) when there
    /// are no strategic others.
    pub fn direct_condition(&self, bidder: usize) -> Result<Vec<ValueCondition>, Error> {
        let support = self.supported_opponent_profiles(bidder);
        let restricted = |own: usize| -> Result<Belief, Error> {
            let full = self.conditional_vector(bidder, own)?;
            Belief::new(support.iter().map(|&opp| full[opp].clone()).collect())
        };
        let mut checks = Vec::new();
        for own in 0..self.grids[bidder].len() {
            let p = restricted(own)?;
            let mut refs = Vec::new();
            for other in 0..self.grids[bidder].len() {
                if other != own && !self.behavioral[bidder][other] {
                    refs.push(restricted(other)?);
                }
            }
            let (passed, vacuous) = if refs.is_empty() {
                (true, true)
            } else {
                let ref_views: Vec<&Belief> = refs.iter().collect();
                (hull_membership(&p, &ref_views)?.is_separated(), false)
            };
            checks.push(ValueCondition {
                value: self.grids[bidder][own].clone(),
                passed,
                vacuous,
            });
        }
        Ok(checks)
    }
}

/// Verdict of the direct hull condition for one own valuation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueCondition {
    pub value: Rational,
    pub passed: bool,
    pub vacuous: bool,
}

/// Complete per-bidder transfer schedule over the full grid product;
/// `transfer(bidder, own, opponent_profile)` is what the bidder pays when
/// reporting `own` against that opponent report profile.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferRule {
    per_bidder: Vec<Vec<Vec<Rational>>>,
}

impl TransferRule {
    /// All-zero rule with the auction's shape.
    pub fn zero(auction: &AuctionEnvironment) -> TransferRule {
        TransferRule {
            per_bidder: (0..auction.bidders.len())
                .map(|i| {
                    vec![
                        vec![Rational::zero(); auction.num_opponent_profiles(i)];
                        auction.grids[i].len()
                    ]
                })
                .collect(),
        }
    }

    pub fn transfer(&self, bidder: usize, own: usize, opp_flat: usize) -> &Rational {
        &self.per_bidder[bidder][own][opp_flat]
    }

    fn set(&mut self, bidder: usize, own: usize, opp_flat: usize, value: Rational) {
        self.per_bidder[bidder][own][opp_flat] = value;
    }

    /// Rows (bidder id, own value, opponent values, transfer) in
    /// deterministic order.
    pub fn entries(
        &self,
        auction: &AuctionEnvironment,
    ) -> Vec<(String, Rational, Vec<Rational>, Rational)> {
        let mut rows = Vec::new();
        for (i, own_rows) in self.per_bidder.iter().enumerate() {
            for (own, row) in own_rows.iter().enumerate() {
                for (opp, t) in row.iter().enumerate() {
                    let profile = auction.opponent_profile(i, opp);
                    let mut values = Vec::new();
                    let mut profile_iter = profile.into_iter();
                    for j in 0..auction.bidders.len() {
                        if j == i {
                            continue;
                        }
                        values.push(
                            auction.grids[j]
                                [profile_iter.next().expect("entry per other bidder")]
                            .clone(),
                        );
                    }
                    rows.push((
                        auction.bidders[i].clone(),
                        auction.grids[i][own].clone(),
                        values,
                        t.clone(),
                    ));
                }
            }
        }
        rows
    }
}

/// Exact expected revenue and expected surplus under the efficient
/// allocation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevenueAudit {
    pub expected_revenue: Rational,
    pub expected_surplus: Rational,
}

/// Computes both sides of the audit for any transfer rule.
pub fn revenue_audit(auction: &AuctionEnvironment, rule: &TransferRule) -> RevenueAudit {
    let sizes = auction.sizes();
    let num_profiles: usize = sizes.iter().product();
    let mut revenue = Rational::zero();
    let mut surplus = Rational::zero();
    for flat in 0..num_profiles {
        let prob = &auction.prior[flat];
        if !prob.is_positive() {
            continue;
        }
        let idxs = auction.unflatten(flat, &sizes);
        let best = idxs
            .iter()
            .enumerate()
            .map(|(j, &k)| auction.grids[j][k].clone())
            .max()
            .expect("at least one bidder");
        surplus += &best * prob;

        for i in 0..auction.bidders.len() {
            let mut opp_flat = 0usize;
            for j in 0..sizes.len() {
                if j == i {
                    continue;
                }
                opp_flat = opp_flat * sizes[j] + idxs[j];
            }
            revenue += rule.transfer(i, idxs[i], opp_flat) * prob;
        }
    }
    RevenueAudit {
        expected_revenue: revenue,
        expected_surplus: surplus,
    }
}

/// A strategic valuation that would pay less in expectation by misreporting.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MisreportViolation {
    pub bidder: String,
    pub truthful: Rational,
    pub misreport: Rational,
    pub truthful_cost: Rational,
    pub misreport_cost: Rational,
}

/// Enumerates every (bidder, strategic valuation, misreport) triple and flags
/// those where misreporting is strictly cheaper in expectation. Allocation
/// effects are not modeled: the check compares expected payments only.
pub fn check_misreports(
    auction: &AuctionEnvironment,
    rule: &TransferRule,
) -> Result<Vec<MisreportViolation>, Error> {
    let mut violations = Vec::new();
    for i in 0..auction.bidders().len() {
        for own in 0..auction.grids[i].len() {
            if auction.behavioral[i][own] {
                continue;
            }
            let conditional = auction.conditional_vector(i, own)?;
            let cost = |report: usize| -> Rational {
                conditional
                    .iter()
                    .enumerate()
                    .map(|(opp, p)| p * rule.transfer(i, report, opp))
                    .sum()
            };
            let truthful_cost = cost(own);
            for report in 0..auction.grids[i].len() {
                if report == own {
                    continue;
                }
                let misreport_cost = cost(report);
                if misreport_cost < truthful_cost {
                    violations.push(MisreportViolation {
                        bidder: auction.bidders[i].clone(),
                        truthful: auction.grids[i][own].clone(),
                        misreport: auction.grids[i][report].clone(),
                        truthful_cost: truthful_cost.clone(),
                        misreport_cost,
                    });
                }
            }
        }
    }
    Ok(violations)
}

/// Everything produced for one bidder by [`solve_auction`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BidderReport {
    pub bidder: String,
    /// The hull condition evaluated directly on the conditionals.
    pub direct_condition: Vec<ValueCondition>,
    /// The same condition evaluated through the single-bidder reduction.
    pub reduced_conditions: ConditionReport,
    /// The two evaluations are provably equivalent; this surfaces any
    /// divergence instead of assuming it.
    pub conditions_agree: bool,
    pub outcome: SolveResult,
}

/// Result of solving the whole auction: per-bidder reports, plus the
/// assembled transfer rule and revenue audit when every bidder's reduction
/// admits full extraction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuctionSolution {
    pub reports: Vec<BidderReport>,
    pub transfers: Option<TransferRule>,
    pub audit: Option<RevenueAudit>,
}

impl AuctionSolution {
    pub fn feasible(&self) -> bool {
        self.transfers.is_some()
    }
}

/// Solves each bidder's reduction independently and maps the contracts back:
/// bidder `i` reporting `θ_i` against reported opponents `θ_{−i}` pays
/// `c_{θ_i}(θ_{−i})`. Profiles outside the reduction's support pay zero.
pub fn solve_auction(auction: &AuctionEnvironment) -> Result<AuctionSolution, Error> {
    let mut reports = Vec::with_capacity(auction.bidders.len());
    let mut rule = TransferRule::zero(auction);
    let mut all_feasible = true;

    for i in 0..auction.bidders.len() {
        let reduced = auction.single_bidder_reduction(i)?;
        let reduced_conditions = check_extraction_conditions(&reduced)?;
        let direct_condition = auction.direct_condition(i)?;

        let mut agree = true;
        for (own, check) in direct_condition.iter().enumerate() {
            let id = auction.grids[i][own].to_string();
            let reduced_check = reduced_conditions
                .strategic_independence
                .iter()
                .chain(&reduced_conditions.behavioral_separation)
                .find(|c| c.type_id == id)
                .expect("every valuation appears in the reduced report");
            if reduced_check.passed != check.passed {
                agree = false;
            }
        }

        let outcome = full_extraction_menu(&reduced)?;
        match &outcome {
            SolveResult::Menu { menu, .. } => {
                let support = auction.supported_opponent_profiles(i);
                for own in 0..auction.grids[i].len() {
                    let contract = menu.require(&auction.grids[i][own].to_string())?;
                    for (state, &opp) in support.iter().enumerate() {
                        rule.set(i, own, opp, contract.transfers()[state].clone());
                    }
                }
            }
            SolveResult::Failure(_) => all_feasible = false,
        }
        reports.push(BidderReport {
            bidder: auction.bidders[i].clone(),
            direct_condition,
            reduced_conditions,
            conditions_agree: agree,
            outcome,
        });
    }

    let (transfers, audit) = if all_feasible {
        let audit = revenue_audit(auction, &rule);
        (Some(rule), Some(audit))
    } else {
        (None, None)
    };
    Ok(AuctionSolution {
        reports,
        transfers,
        audit,
    })
}
