//! File formats and report views.
//!
//! Environments, menus and auctions travel as JSON with every rational
//! encoded as an exact string ("p/q" or an integer string) — never a float —
//! so emitted certificates re-verify bit-for-bit when fed back. Unknown
//! fields are rejected. The view types at the bottom give solver outcomes a
//! stable JSON shape shared by the CLI and the C API.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::auction::{AuctionEnvironment, AuctionSolution, RevenueAudit, ValueCondition};
use crate::extraction::{SolveFailure, SolveResult};
use crate::geometry::ConditionReport;
use crate::model::{
    Belief, Contract, ContractDerivation, ContractMenu, Environment, TypeKind, TypeRecord,
};
use crate::rational::Rational;
use crate::Error;

fn parse_error(err: serde_json::Error) -> Error {
    Error::Parse(err.to_string())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnvironmentFile {
    states: Vec<String>,
    types: Vec<TypeFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TypeFile {
    id: String,
    kind: TypeKind,
    valuation: Rational,
    belief: Vec<Rational>,
}

pub fn environment_from_json(json: &str) -> Result<Environment, Error> {
    let file: EnvironmentFile = serde_json::from_str(json).map_err(parse_error)?;
    let types = file
        .types
        .into_iter()
        .map(|t| {
            Ok(TypeRecord {
                id: t.id,
                kind: t.kind,
                valuation: t.valuation,
                belief: Belief::new(t.belief)?,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Environment::new(file.states, types)
}

pub fn environment_to_json(env: &Environment) -> String {
    let file = EnvironmentFile {
        states: env.states().to_vec(),
        types: env
            .types()
            .iter()
            .map(|t| TypeFile {
                id: t.id.clone(),
                kind: t.kind,
                valuation: t.valuation.clone(),
                belief: t.belief.probs().to_vec(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("environment serializes")
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MenuFile {
    contracts: BTreeMap<String, Vec<Rational>>,
}

pub fn menu_from_json(json: &str) -> Result<ContractMenu, Error> {
    let file: MenuFile = serde_json::from_str(json).map_err(parse_error)?;
    let mut menu = ContractMenu::new();
    for (id, transfers) in file.contracts {
        menu.insert(id, Contract::new(transfers));
    }
    Ok(menu)
}

pub fn menu_to_json(menu: &ContractMenu) -> String {
    let file = MenuFile {
        contracts: menu
            .iter()
            .map(|(id, c)| (id.clone(), c.transfers().to_vec()))
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("menu serializes")
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AuctionFile {
    bidders: Vec<String>,
    grids: BTreeMap<String, Vec<Rational>>,
    prior: Vec<PriorEntry>,
    #[serde(default)]
    behavioral: BTreeMap<String, Vec<Rational>>,
    #[serde(default)]
    priority: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PriorEntry {
    profile: Vec<Rational>,
    prob: Rational,
}

pub fn auction_from_json(json: &str) -> Result<AuctionEnvironment, Error> {
    let mut file: AuctionFile = serde_json::from_str(json).map_err(parse_error)?;
    let mut grids = Vec::with_capacity(file.bidders.len());
    let mut behavioral = Vec::with_capacity(file.bidders.len());
    for id in &file.bidders {
        grids.push(
            file.grids
                .remove(id)
                .ok_or_else(|| Error::MissingGrid { id: id.clone() })?,
        );
        behavioral.push(file.behavioral.remove(id).unwrap_or_default());
    }
    if let Some((id, _)) = file.grids.into_iter().next() {
        return Err(Error::UnknownBidderId { id });
    }
    if let Some((id, _)) = file.behavioral.into_iter().next() {
        return Err(Error::UnknownBidderId { id });
    }
    AuctionEnvironment::new(
        file.bidders,
        grids,
        file.prior.into_iter().map(|e| (e.profile, e.prob)).collect(),
        behavioral,
        file.priority,
    )
}

pub fn auction_to_json(auction: &AuctionEnvironment) -> String {
    let bidders = auction.bidders().to_vec();
    let file = AuctionFile {
        grids: bidders
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), auction.grid(i).to_vec()))
            .collect(),
        prior: auction
            .prior_entries()
            .into_iter()
            .map(|(profile, prob)| PriorEntry { profile, prob })
            .collect(),
        behavioral: bidders
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), auction.behavioral_values(i)))
            .collect(),
        priority: Some(auction.priority()),
        bidders,
    };
    serde_json::to_string_pretty(&file).expect("auction serializes")
}

/// JSON view of a menu-construction outcome.
#[derive(Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum SolveView {
    Menu {
        contracts: BTreeMap<String, Vec<Rational>>,
        derivations: Vec<ContractDerivation>,
    },
    Failure {
        failure: SolveFailure,
    },
}

impl From<&SolveResult> for SolveView {
    fn from(result: &SolveResult) -> Self {
        match result {
            SolveResult::Menu { menu, derivations } => SolveView::Menu {
                contracts: menu
                    .iter()
                    .map(|(id, c)| (id.clone(), c.transfers().to_vec()))
                    .collect(),
                derivations: derivations.clone(),
            },
            SolveResult::Failure(failure) => SolveView::Failure {
                failure: failure.clone(),
            },
        }
    }
}

/// JSON view of the whole-menu oracle verdict.
#[derive(Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum OracleView {
    Feasible {
        contracts: BTreeMap<String, Vec<Rational>>,
    },
    Infeasible {
        certificate: Vec<Rational>,
    },
}

/// One transfer-rule row: what `bidder` pays reporting `own` against the
/// reported opponent values.
#[derive(Serialize, Deserialize)]
pub struct TransferEntry {
    pub bidder: String,
    pub own: Rational,
    pub others: Vec<Rational>,
    pub transfer: Rational,
}

/// JSON view of a solved auction.
#[derive(Serialize)]
pub struct AuctionView {
    pub feasible: bool,
    pub bidders: Vec<BidderView>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transfers: Option<Vec<TransferEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit: Option<RevenueAudit>,
}

#[derive(Serialize)]
pub struct BidderView {
    pub bidder: String,
    pub direct_condition: Vec<ValueCondition>,
    pub reduced_conditions: ConditionReport,
    pub conditions_agree: bool,
    #[serde(flatten)]
    pub outcome: SolveView,
}

pub fn auction_view(auction: &AuctionEnvironment, solution: &AuctionSolution) -> AuctionView {
    AuctionView {
        feasible: solution.feasible(),
        bidders: solution
            .reports
            .iter()
            .map(|r| BidderView {
                bidder: r.bidder.clone(),
                direct_condition: r.direct_condition.clone(),
                reduced_conditions: r.reduced_conditions.clone(),
                conditions_agree: r.conditions_agree,
                outcome: SolveView::from(&r.outcome),
            })
            .collect(),
        transfers: solution.transfers.as_ref().map(|rule| {
            rule.entries(auction)
                .into_iter()
                .map(|(bidder, own, others, transfer)| TransferEntry {
                    bidder,
                    own,
                    others,
                    transfer,
                })
                .collect()
        }),
        audit: solution.audit.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    const E2: &str = r#"{
        "states": ["w1", "w2"],
        "types": [
            {"id": "s1", "kind": "strategic", "valuation": "1", "belief": ["3/4", "1/4"]},
            {"id": "s2", "kind": "strategic", "valuation": "2", "belief": ["1/4", "3/4"]},
            {"id": "b", "kind": "behavioral", "valuation": "0", "belief": ["9/10", "1/10"]}
        ]
    }"#;

    #[test]
    fn environment_round_trip_is_value_exact() {
        let env = environment_from_json(E2).unwrap();
        let json = environment_to_json(&env);
        let back = environment_from_json(&json).unwrap();
        assert_eq!(back, env);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let json = E2.replace("\"states\"", "\"extra\": 1, \"states\"");
        let err = environment_from_json(&json).unwrap_err();
        assert!(err.to_string().contains("extra"), "{err}");
    }

    #[test]
    fn missing_fields_are_named() {
        let json = r#"{"states": ["w1"], "types": [{"id": "t", "kind": "strategic", "belief": ["1"]}]}"#;
        let err = environment_from_json(json).unwrap_err();
        assert!(err.to_string().contains("valuation"), "{err}");
    }

    #[test]
    fn float_rationals_are_rejected() {
        let json = E2.replace("\"3/4\"", "\"0.75\"");
        let err = environment_from_json(&json).unwrap_err();
        assert!(err.to_string().contains("0.75"), "{err}");
    }

    #[test]
    fn invalid_beliefs_are_domain_errors() {
        let json = E2.replace("\"9/10\"", "\"8/10\"");
        assert!(matches!(
            environment_from_json(&json),
            Err(Error::BeliefNotNormalized { .. })
        ));
    }

    #[test]
    fn menu_round_trip() {
        let json = r#"{"contracts": {"s1": ["1/2", "5/2"], "b": ["-2/3", "6"]}}"#;
        let menu = menu_from_json(json).unwrap();
        assert_eq!(menu.get("b").unwrap().transfers(), &[q("-2/3"), q("6")]);
        let back = menu_from_json(&menu_to_json(&menu)).unwrap();
        assert_eq!(back, menu);
    }

    const AUCTION: &str = r#"{
        "bidders": ["1", "2"],
        "grids": {"1": ["1", "2"], "2": ["1", "2"]},
        "prior": [
            {"profile": ["1", "1"], "prob": "1/3"},
            {"profile": ["1", "2"], "prob": "1/6"},
            {"profile": ["2", "1"], "prob": "1/6"},
            {"profile": ["2", "2"], "prob": "1/3"}
        ],
        "behavioral": {"1": [], "2": ["1"]},
        "priority": ["1", "2"]
    }"#;

    #[test]
    fn auction_round_trip() {
        let auction = auction_from_json(AUCTION).unwrap();
        assert_eq!(auction.bidders(), &["1".to_string(), "2".to_string()]);
        assert_eq!(auction.behavioral_values(1), vec![q("1")]);
        let back = auction_from_json(&auction_to_json(&auction)).unwrap();
        assert_eq!(back, auction);
    }

    #[test]
    fn auction_defaults_and_unknown_bidders() {
        let json = r#"{
            "bidders": ["a", "b"],
            "grids": {"a": ["1", "2"], "b": ["1", "3"]},
            "prior": [
                {"profile": ["1", "1"], "prob": "1/4"},
                {"profile": ["1", "3"], "prob": "1/4"},
                {"profile": ["2", "1"], "prob": "1/3"},
                {"profile": ["2", "3"], "prob": "1/6"}
            ]
        }"#;
        let auction = auction_from_json(json).unwrap();
        assert_eq!(auction.priority(), vec!["a".to_string(), "b".to_string()]);
        assert!(auction.behavioral_values(0).is_empty());

        let bad = json.replace("\"prior\"", "\"behavioral\": {\"c\": []}, \"prior\"");
        assert!(matches!(
            auction_from_json(&bad),
            Err(Error::UnknownBidderId { .. })
        ));
    }

    #[test]
    fn solve_view_serializes_contracts_as_exact_strings() {
        let env = environment_from_json(E2).unwrap();
        let result = crate::extraction::full_extraction_menu(&env).unwrap();
        let view = SolveView::from(&result);
        let json = serde_json::to_string(&view).unwrap();
        assert!(json.contains(r#"["-2/3","6"]"#), "{json}");
        assert!(json.contains(r#""status":"menu""#));
    }
}
