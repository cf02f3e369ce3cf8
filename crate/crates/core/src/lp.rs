//! Exact linear programming over rationals.
//!
//! A dense two-phase simplex with Bland's (least-index) pivot rule: provably
//! acyclic, fully deterministic, and certificate-producing. Infeasible
//! problems yield a Farkas multiplier vector, unbounded problems an improving
//! ray, and both can be re-verified independently of the solver through
//! [`check_certificate`]. Variables are free unless bounded explicitly.
//!
//! Built for desk-scale instances (up to a few hundred variables); there is
//! deliberately no floating-point path and no sparse machinery.

use serde::{Deserialize, Serialize};

use crate::rational::{dot, Rational};
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Eq,
    Ge,
    Le,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearConstraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl LinearConstraint {
    pub fn new(coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> Self {
        LinearConstraint {
            coeffs,
            relation,
            rhs,
        }
    }

    pub fn satisfied_by(&self, point: &[Rational]) -> bool {
        if point.len() != self.coeffs.len() {
            return false;
        }
        let lhs = dot(&self.coeffs, point);
        match self.relation {
            Relation::Eq => lhs == self.rhs,
            Relation::Ge => lhs >= self.rhs,
            Relation::Le => lhs <= self.rhs,
        }
    }

    /// The constraint in `⟨a,x⟩ ≥ b` orientation: `Le` rows are negated,
    /// `Eq` and `Ge` rows kept as written. Farkas certificates act on this
    /// form.
    fn ge_form(&self) -> (Vec<Rational>, Rational) {
        match self.relation {
            Relation::Le => (
                self.coeffs.iter().map(|c| -c).collect(),
                -&self.rhs,
            ),
            Relation::Ge | Relation::Eq => (self.coeffs.clone(), self.rhs.clone()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

#[derive(Clone, Debug)]
pub struct Objective {
    pub coeffs: Vec<Rational>,
    pub sense: Sense,
}

/// A linear program over `num_vars` free variables with optional per-variable
/// bounds. Bounds are lowered to explicit rows by [`LpProblem::rows`]; the
/// solver and the certificate checker agree on that row order, so Farkas
/// vectors always carry one multiplier per lowered row.
#[derive(Clone, Debug)]
pub struct LpProblem {
    pub num_vars: usize,
    pub constraints: Vec<LinearConstraint>,
    pub objective: Option<Objective>,
    pub lower: Vec<Option<Rational>>,
    pub upper: Vec<Option<Rational>>,
}

impl LpProblem {
    pub fn new(num_vars: usize) -> Self {
        LpProblem {
            num_vars,
            constraints: Vec::new(),
            objective: None,
            lower: vec![None; num_vars],
            upper: vec![None; num_vars],
        }
    }

    pub fn push(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        self.constraints
            .push(LinearConstraint::new(coeffs, relation, rhs));
    }

    pub fn push_eq(&mut self, coeffs: Vec<Rational>, rhs: Rational) {
        self.push(coeffs, Relation::Eq, rhs);
    }

    pub fn push_ge(&mut self, coeffs: Vec<Rational>, rhs: Rational) {
        self.push(coeffs, Relation::Ge, rhs);
    }

    pub fn push_le(&mut self, coeffs: Vec<Rational>, rhs: Rational) {
        self.push(coeffs, Relation::Le, rhs);
    }

    pub fn minimize(&mut self, coeffs: Vec<Rational>) {
        self.objective = Some(Objective {
            coeffs,
            sense: Sense::Min,
        });
    }

    pub fn maximize(&mut self, coeffs: Vec<Rational>) {
        self.objective = Some(Objective {
            coeffs,
            sense: Sense::Max,
        });
    }

    pub fn set_lower(&mut self, var: usize, bound: Rational) {
        self.lower[var] = Some(bound);
    }

    pub fn set_upper(&mut self, var: usize, bound: Rational) {
        self.upper[var] = Some(bound);
    }

    /// All rows of the problem: explicit constraints in input order, then for
    /// each variable its lower bound row (`x ≥ l`) followed by its upper
    /// bound row (`x ≤ u`) where present.
    pub fn rows(&self) -> Vec<LinearConstraint> {
        let mut rows = self.constraints.clone();
        for v in 0..self.num_vars {
            let unit = |_: &Rational| {
                let mut coeffs = vec![Rational::zero(); self.num_vars];
                coeffs[v] = Rational::one();
                coeffs
            };
            if let Some(lo) = &self.lower[v] {
                rows.push(LinearConstraint::new(unit(lo), Relation::Ge, lo.clone()));
            }
            if let Some(hi) = &self.upper[v] {
                rows.push(LinearConstraint::new(unit(hi), Relation::Le, hi.clone()));
            }
        }
        rows
    }

    fn check_shapes(&self) -> Result<(), Error> {
        for c in &self.constraints {
            if c.coeffs.len() != self.num_vars {
                return Err(Error::Dimension {
                    context: "constraint coefficients",
                    expected: self.num_vars,
                    actual: c.coeffs.len(),
                });
            }
        }
        if let Some(obj) = &self.objective {
            if obj.coeffs.len() != self.num_vars {
                return Err(Error::Dimension {
                    context: "objective coefficients",
                    expected: self.num_vars,
                    actual: obj.coeffs.len(),
                });
            }
        }
        if self.lower.len() != self.num_vars || self.upper.len() != self.num_vars {
            return Err(Error::Dimension {
                context: "variable bounds",
                expected: self.num_vars,
                actual: self.lower.len().max(self.upper.len()),
            });
        }
        Ok(())
    }
}

/// Exact outcome of a solve. Every variant carries data verifiable against
/// the problem by direct evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Feasible {
        point: Vec<Rational>,
        /// Optimal objective value when an objective was given.
        objective: Option<Rational>,
    },
    Infeasible {
        /// One multiplier per [`LpProblem::rows`] entry, acting on each row's
        /// `≥`-orientation: nonnegative on inequality rows, free on equality
        /// rows, combining to `0 ≥ 1` after scaling.
        certificate: Vec<Rational>,
    },
    Unbounded {
        /// Feasibility-preserving direction along which the objective
        /// improves without bound.
        ray: Vec<Rational>,
    },
}

/// Solves the program. Deterministic: identical inputs produce identical
/// outcomes.
pub fn solve(problem: &LpProblem) -> Result<LpOutcome, Error> {
    problem.check_shapes()?;
    let rows = problem.rows();
    let mut tableau = Tableau::build(problem.num_vars, &rows);

    if let Some(duals) = tableau.phase_one() {
        let certificate = certificate_from_duals(&rows, &tableau.flipped, &duals);
        debug_assert!(check_certificate(
            problem,
            &LpOutcome::Infeasible {
                certificate: certificate.clone()
            }
        ));
        return Ok(LpOutcome::Infeasible { certificate });
    }

    let outcome = match &problem.objective {
        None => LpOutcome::Feasible {
            point: tableau.point(),
            objective: None,
        },
        Some(obj) => {
            tableau.retire_artificials();
            match tableau.phase_two(obj) {
                PhaseTwo::Optimal(value) => LpOutcome::Feasible {
                    point: tableau.point(),
                    objective: Some(value),
                },
                PhaseTwo::Unbounded(ray) => LpOutcome::Unbounded { ray },
            }
        }
    };
    debug_assert!(check_certificate(problem, &outcome));
    Ok(outcome)
}

/// Independent audit of an outcome by direct exact evaluation. Never errors;
/// any mismatch (including shape mismatches) yields `false`.
pub fn check_certificate(problem: &LpProblem, outcome: &LpOutcome) -> bool {
    if problem.check_shapes().is_err() {
        return false;
    }
    let rows = problem.rows();
    match outcome {
        LpOutcome::Feasible { point, objective } => {
            if point.len() != problem.num_vars {
                return false;
            }
            if !rows.iter().all(|r| r.satisfied_by(point)) {
                return false;
            }
            match (&problem.objective, objective) {
                (Some(obj), Some(v)) => dot(&obj.coeffs, point) == *v,
                (None, Some(_)) => false,
                (_, None) => true,
            }
        }
        LpOutcome::Infeasible { certificate } => {
            if certificate.len() != rows.len() {
                return false;
            }
            // Sign conditions: inequality rows need nonnegative multipliers
            // against their ≥-form; equality rows are free.
            for (row, y) in rows.iter().zip(certificate) {
                if row.relation != Relation::Eq && y.is_negative() {
                    return false;
                }
            }
            let mut combined = vec![Rational::zero(); problem.num_vars];
            let mut rhs = Rational::zero();
            for (row, y) in rows.iter().zip(certificate) {
                if y.is_zero() {
                    continue;
                }
                let (coeffs, b) = row.ge_form();
                for (acc, c) in combined.iter_mut().zip(&coeffs) {
                    *acc += c * y;
                }
                rhs += b * y;
            }
            combined.iter().all(Rational::is_zero) && rhs.is_positive()
        }
        LpOutcome::Unbounded { ray } => {
            let Some(obj) = &problem.objective else {
                return false;
            };
            if ray.len() != problem.num_vars {
                return false;
            }
            for row in &rows {
                let along = dot(&row.coeffs, ray);
                let ok = match row.relation {
                    Relation::Eq => along.is_zero(),
                    Relation::Ge => !along.is_negative(),
                    Relation::Le => !along.is_positive(),
                };
                if !ok {
                    return false;
                }
            }
            let drift = dot(&obj.coeffs, ray);
            match obj.sense {
                Sense::Min => drift.is_negative(),
                Sense::Max => drift.is_positive(),
            }
        }
    }
}

/// Maps phase-one duals on the canonicalized rows back to multipliers on the
/// user rows' ≥-forms, scaled so the combined right-hand side is exactly 1.
fn certificate_from_duals(
    rows: &[LinearConstraint],
    flipped: &[bool],
    duals: &[Rational],
) -> Vec<Rational> {
    let mut cert: Vec<Rational> = rows
        .iter()
        .zip(flipped)
        .zip(duals)
        .map(|((row, &flip), y)| {
            let positive = match row.relation {
                Relation::Ge | Relation::Eq => !flip,
                Relation::Le => flip,
            };
            if positive {
                y.clone()
            } else {
                -y
            }
        })
        .collect();
    let scale: Rational = rows
        .iter()
        .zip(&cert)
        .map(|(row, y)| {
            let (_, b) = row.ge_form();
            b * y
        })
        .sum();
    assert!(
        scale.is_positive(),
        "phase-one duals did not certify infeasibility"
    );
    let inv = scale.recip().expect("scale is positive");
    for y in &mut cert {
        *y = &*y * &inv;
    }
    cert
}

enum PhaseTwo {
    Optimal(Rational),
    Unbounded(Vec<Rational>),
}

/// Dense simplex tableau over the split nonnegative variables
/// `x_j = x_j⁺ − x_j⁻`, with one slack or surplus column per inequality row
/// and one artificial column per `Ge`/`Eq` row. The initial identity columns
/// are kept for the whole run, so the current tableau always exposes the
/// basis inverse and phase-one duals can be read off exactly.
struct Tableau {
    num_user_vars: usize,
    num_struct: usize,
    art_start: usize,
    ncols: usize,
    a: Vec<Vec<Rational>>,
    b: Vec<Rational>,
    basis: Vec<usize>,
    id_col: Vec<usize>,
    flipped: Vec<bool>,
}

impl Tableau {
    fn build(num_user_vars: usize, rows: &[LinearConstraint]) -> Tableau {
        let m = rows.len();
        let num_struct = 2 * num_user_vars;

        let mut flipped = Vec::with_capacity(m);
        let mut relations = Vec::with_capacity(m);
        for row in rows {
            let flip = row.rhs.is_negative();
            flipped.push(flip);
            let rel = match (row.relation, flip) {
                (Relation::Eq, _) => Relation::Eq,
                (rel, false) => rel,
                (Relation::Ge, true) => Relation::Le,
                (Relation::Le, true) => Relation::Ge,
            };
            relations.push(rel);
        }

        let num_slacks = relations
            .iter()
            .filter(|r| !matches!(r, Relation::Eq))
            .count();
        let num_arts = relations
            .iter()
            .filter(|r| !matches!(r, Relation::Le))
            .count();
        let slack_start = num_struct;
        let art_start = num_struct + num_slacks;
        let ncols = art_start + num_arts;

        let mut a = vec![vec![Rational::zero(); ncols]; m];
        let mut b = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut id_col = Vec::with_capacity(m);
        let mut next_slack = slack_start;
        let mut next_art = art_start;

        for (i, row) in rows.iter().enumerate() {
            let sign = if flipped[i] { -Rational::one() } else { Rational::one() };
            for (j, c) in row.coeffs.iter().enumerate() {
                let v = c * &sign;
                a[i][2 * j] = v.clone();
                a[i][2 * j + 1] = -v;
            }
            b.push(&row.rhs * &sign);
            match relations[i] {
                Relation::Le => {
                    a[i][next_slack] = Rational::one();
                    basis.push(next_slack);
                    id_col.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    a[i][next_slack] = -Rational::one();
                    next_slack += 1;
                    a[i][next_art] = Rational::one();
                    basis.push(next_art);
                    id_col.push(next_art);
                    next_art += 1;
                }
                Relation::Eq => {
                    a[i][next_art] = Rational::one();
                    basis.push(next_art);
                    id_col.push(next_art);
                    next_art += 1;
                }
            }
        }

        Tableau {
            num_user_vars,
            num_struct,
            art_start,
            ncols,
            a,
            b,
            basis,
            id_col,
            flipped,
        }
    }

    fn is_artificial(&self, col: usize) -> bool {
        col >= self.art_start
    }

    /// Minimizes the artificial sum. Returns the phase-one duals (one per
    /// row) when the problem is infeasible, `None` when a feasible basis was
    /// reached.
    fn phase_one(&mut self) -> Option<Vec<Rational>> {
        if self.art_start == self.ncols {
            return None; // all-slack start is already feasible
        }
        let costs: Vec<Rational> = (0..self.ncols)
            .map(|j| {
                if self.is_artificial(j) {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            })
            .collect();
        match self.optimize(&costs, false) {
            PhaseTwo::Optimal(value) => {
                if value.is_zero() {
                    None
                } else {
                    let duals = (0..self.b.len())
                        .map(|i| {
                            let col = self.id_col[i];
                            (0..self.b.len())
                                .map(|k| &costs[self.basis[k]] * &self.a[k][col])
                                .sum()
                        })
                        .collect();
                    Some(duals)
                }
            }
            PhaseTwo::Unbounded(_) => unreachable!("artificial sum is bounded below by zero"),
        }
    }

    /// Pivots basic artificials out after a successful phase one; rows that
    /// cannot be pivoted are redundant and get dropped.
    fn retire_artificials(&mut self) {
        let mut i = 0;
        while i < self.b.len() {
            if self.is_artificial(self.basis[i]) {
                debug_assert!(self.b[i].is_zero());
                let col = (0..self.art_start).find(|&j| !self.a[i][j].is_zero());
                match col {
                    Some(j) => self.pivot(i, j, &mut None),
                    None => {
                        self.a.remove(i);
                        self.b.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    fn phase_two(&mut self, obj: &Objective) -> PhaseTwo {
        let mut costs = vec![Rational::zero(); self.ncols];
        for (j, c) in obj.coeffs.iter().enumerate() {
            let c = match obj.sense {
                Sense::Min => c.clone(),
                Sense::Max => -c,
            };
            costs[2 * j] = c.clone();
            costs[2 * j + 1] = -c;
        }
        match self.optimize(&costs, true) {
            PhaseTwo::Optimal(value) => PhaseTwo::Optimal(match obj.sense {
                Sense::Min => value,
                Sense::Max => -value,
            }),
            unbounded => unbounded,
        }
    }

    /// Bland's-rule simplex to optimality for `min costs·x` from the current
    /// basis. `ban_artificials` keeps retired artificial columns out.
    fn optimize(&mut self, costs: &[Rational], ban_artificials: bool) -> PhaseTwo {
        let m = self.b.len();
        // reduced costs r_j = c_j − c_B·(current column j)
        let mut reduced: Option<Vec<Rational>> = Some(
            (0..self.ncols)
                .map(|j| {
                    let carried: Rational =
                        (0..m).map(|k| &costs[self.basis[k]] * &self.a[k][j]).sum();
                    &costs[j] - &carried
                })
                .collect(),
        );

        loop {
            let r = reduced.as_ref().expect("reduced costs present");
            let entering = (0..self.ncols).find(|&j| {
                !(ban_artificials && self.is_artificial(j)) && r[j].is_negative()
            });
            let Some(e) = entering else {
                let value: Rational = (0..m).map(|k| &costs[self.basis[k]] * &self.b[k]).sum();
                return PhaseTwo::Optimal(value);
            };

            let mut leave: Option<(Rational, usize, usize)> = None; // (ratio, basis var, row)
            for i in 0..m {
                if self.a[i][e].is_positive() {
                    let ratio = &self.b[i] / &self.a[i][e];
                    let candidate = (ratio, self.basis[i], i);
                    leave = Some(match leave {
                        None => candidate,
                        Some(best) => {
                            if candidate.0 < best.0
                                || (candidate.0 == best.0 && candidate.1 < best.1)
                            {
                                candidate
                            } else {
                                best
                            }
                        }
                    });
                }
            }
            match leave {
                Some((_, _, row)) => self.pivot(row, e, &mut reduced),
                None => return PhaseTwo::Unbounded(self.ray(e)),
            }
        }
    }

    fn pivot(&mut self, row: usize, col: usize, reduced: &mut Option<Vec<Rational>>) {
        let inv = self.a[row][col].recip().expect("pivot element is nonzero");
        for v in self.a[row].iter_mut() {
            *v = &*v * &inv;
        }
        self.b[row] = &self.b[row] * &inv;

        let pivot_row = self.a[row].clone();
        let pivot_b = self.b[row].clone();
        for k in 0..self.b.len() {
            if k == row || self.a[k][col].is_zero() {
                continue;
            }
            let factor = self.a[k][col].clone();
            for (v, p) in self.a[k].iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= p * &factor;
                }
            }
            self.b[k] -= &pivot_b * &factor;
        }
        if let Some(r) = reduced {
            if !r[col].is_zero() {
                let factor = r[col].clone();
                for (v, p) in r.iter_mut().zip(&pivot_row) {
                    if !p.is_zero() {
                        *v -= p * &factor;
                    }
                }
            }
        }
        self.basis[row] = col;
    }

    /// Current basic solution mapped back to the user variables.
    fn point(&self) -> Vec<Rational> {
        let mut split = vec![Rational::zero(); self.ncols];
        for (i, &col) in self.basis.iter().enumerate() {
            split[col] = self.b[i].clone();
        }
        (0..self.num_user_vars)
            .map(|v| &split[2 * v] - &split[2 * v + 1])
            .collect()
    }

    /// Improving ray through the entering column, mapped to user variables.
    fn ray(&self, entering: usize) -> Vec<Rational> {
        let mut split = vec![Rational::zero(); self.ncols];
        split[entering] = Rational::one();
        for (i, &col) in self.basis.iter().enumerate() {
            if col < self.num_struct {
                split[col] = -&self.a[i][entering];
            }
        }
        (0..self.num_user_vars)
            .map(|v| &split[2 * v] - &split[2 * v + 1])
            .collect()
    }
}
