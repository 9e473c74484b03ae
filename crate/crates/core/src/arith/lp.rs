//! Exact two-phase simplex with Bland's rule.
//!
//! Variables are free (unrestricted in sign); sign constraints are ordinary
//! `>=` rows. Internally each variable is split into a difference of two
//! non-negative columns.

use num::{One, Signed, Zero};

use super::{Rat, RatVec};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    /// `coeffs . x >= rhs`
    Ge,
    /// `coeffs . x == rhs`
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Max,
    Min,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: RatVec,
    pub relation: Relation,
    pub rhs: Rat,
}

impl Constraint {
    pub fn ge(coeffs: RatVec, rhs: Rat) -> Self {
        Constraint {
            coeffs,
            relation: Relation::Ge,
            rhs,
        }
    }

    /// `coeffs . x <= rhs`, stored as `-coeffs . x >= -rhs`.
    pub fn le(coeffs: RatVec, rhs: Rat) -> Self {
        Constraint::ge(coeffs.neg(), -rhs)
    }

    pub fn eq(coeffs: RatVec, rhs: Rat) -> Self {
        Constraint {
            coeffs,
            relation: Relation::Eq,
            rhs,
        }
    }

    pub fn is_satisfied_by(&self, x: &RatVec) -> bool {
        let lhs = self.coeffs.dot(x);
        match self.relation {
            Relation::Ge => lhs >= self.rhs,
            Relation::Eq => lhs == self.rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinProgram {
    pub objective: RatVec,
    pub sense: Sense,
    pub constraints: Vec<Constraint>,
}

impl LinProgram {
    pub fn new(objective: RatVec, sense: Sense) -> Self {
        LinProgram {
            objective,
            sense,
            constraints: Vec::new(),
        }
    }

    pub fn maximize(objective: RatVec) -> Self {
        Self::new(objective, Sense::Max)
    }

    pub fn minimize(objective: RatVec) -> Self {
        Self::new(objective, Sense::Min)
    }

    pub fn with(mut self, constraint: Constraint) -> Self {
        self.constraints.push(constraint);
        self
    }

    pub fn push(&mut self, constraint: Constraint) {
        self.constraints.push(constraint);
    }

    pub fn num_vars(&self) -> usize {
        self.objective.dim()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rat, witness: RatVec },
    Unbounded,
    Infeasible,
}

impl LpOutcome {
    pub fn value(&self) -> Option<&Rat> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }
}

struct Tableau {
    /// `rows[i]` has `ncols + 1` entries; the last is the right-hand side.
    rows: Vec<Vec<Rat>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Rat {
        &self.rows[i][self.ncols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = Rat::one() / &self.rows[r][c];
        for x in self.rows[r].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &factor * p;
                }
            }
        }
        self.basis[r] = c;
    }

    fn reduced_cost(&self, cost: &[Rat], j: usize) -> Rat {
        let mut d = cost[j].clone();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if !cost[b].is_zero() && !row[j].is_zero() {
                d -= &cost[b] * &row[j];
            }
        }
        d
    }

    /// Maximizes `cost . x` over the columns marked `allowed`, starting from
    /// the current feasible basis. Returns `false` when unbounded.
    fn optimize(&mut self, cost: &[Rat], allowed: &[bool]) -> bool {
        loop {
            // Bland: lowest-index improving column enters.
            let entering = (0..self.ncols).find(|&j| {
                allowed[j] && !self.basis.contains(&j) && self.reduced_cost(cost, j).is_positive()
            });
            let Some(c) = entering else {
                return true;
            };
            // Ratio test; ties go to the lowest-index basic variable.
            let mut best: Option<(usize, Rat)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((r, _)) = best else {
                return false;
            };
            self.pivot(r, c);
        }
    }
}

/// Solves a linear program exactly.
pub fn lp_solve(p: &LinProgram) -> Result<LpOutcome> {
    let nvars = p.num_vars();
    for c in &p.constraints {
        if c.coeffs.dim() != nvars {
            return Err(Error::DimensionMismatch {
                expected: nvars,
                found: c.coeffs.dim(),
            });
        }
    }
    let m = p.constraints.len();
    let n_surplus = p
        .constraints
        .iter()
        .filter(|c| c.relation == Relation::Ge)
        .count();
    // Columns: [x+ (nvars) | x- (nvars) | surplus | artificial (m)].
    let surplus_start = 2 * nvars;
    let art_start = surplus_start + n_surplus;
    let ncols = art_start + m;

    let mut rows = Vec::with_capacity(m);
    let mut next_surplus = surplus_start;
    for (i, c) in p.constraints.iter().enumerate() {
        let mut row = vec![Rat::zero(); ncols + 1];
        let flip = c.rhs.is_negative();
        let sign = if flip { -Rat::one() } else { Rat::one() };
        for (j, a) in c.coeffs.iter().enumerate() {
            if !a.is_zero() {
                row[j] = a * &sign;
                row[nvars + j] = -(a * &sign);
            }
        }
        if c.relation == Relation::Ge {
            row[next_surplus] = -sign.clone();
            next_surplus += 1;
        }
        row[art_start + i] = Rat::one();
        row[ncols] = &c.rhs * &sign;
        rows.push(row);
    }
    let mut tab = Tableau {
        rows,
        basis: (art_start..ncols).collect(),
        ncols,
    };

    // Phase 1: drive the artificials to zero.
    let mut cost1 = vec![Rat::zero(); ncols];
    for c in cost1.iter_mut().skip(art_start) {
        *c = -Rat::one();
    }
    let all = vec![true; ncols];
    tab.optimize(&cost1, &all);
    let infeasibility: Rat = (0..tab.rows.len())
        .filter(|&i| tab.basis[i] >= art_start)
        .map(|i| tab.rhs(i).clone())
        .sum();
    if infeasibility.is_positive() {
        return Ok(LpOutcome::Infeasible);
    }

    // Pivot remaining (zero-level) artificials out of the basis, dropping
    // rows that turn out to be redundant.
    let mut i = 0;
    while i < tab.rows.len() {
        if tab.basis[i] >= art_start {
            match (0..art_start).find(|&j| !tab.rows[i][j].is_zero()) {
                Some(j) => {
                    tab.pivot(i, j);
                    i += 1;
                }
                None => {
                    tab.rows.remove(i);
                    tab.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }

    // Phase 2.
    let mut cost2 = vec![Rat::zero(); ncols];
    let sign = match p.sense {
        Sense::Max => Rat::one(),
        Sense::Min => -Rat::one(),
    };
    for (j, c) in p.objective.iter().enumerate() {
        cost2[j] = c * &sign;
        cost2[nvars + j] = -(c * &sign);
    }
    let allowed: Vec<bool> = (0..ncols).map(|j| j < art_start).collect();
    if !tab.optimize(&cost2, &allowed) {
        return Ok(LpOutcome::Unbounded);
    }

    let mut split = vec![Rat::zero(); ncols];
    for (i, &b) in tab.basis.iter().enumerate() {
        split[b] = tab.rhs(i).clone();
    }
    let witness: RatVec = (0..nvars).map(|j| &split[j] - &split[nvars + j]).collect();
    let value = p.objective.dot(&witness);
    debug_assert!(p.constraints.iter().all(|c| c.is_satisfied_by(&witness)));
    Ok(LpOutcome::Optimal { value, witness })
}
