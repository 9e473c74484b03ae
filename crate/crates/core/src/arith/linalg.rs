//! Fraction-free (Bareiss) elimination and the exact linear algebra built on it.

use num::{BigInt, Integer, One, Zero};

use super::{Rat, RatMat, RatVec};
use crate::error::{Error, Result};

/// Exact solution set of `A x = b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinearSolution {
    Unique(RatVec),
    /// `particular + span(nullspace)`; nullspace vectors are integer-primitive
    /// with a positive leading entry.
    Affine {
        particular: RatVec,
        nullspace: Vec<RatVec>,
    },
    Infeasible,
}

struct Echelon {
    rows: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
    swaps: usize,
}

/// Scales a rational row to integers by the lcm of its denominators.
fn integer_row(entries: &[Rat]) -> (Vec<BigInt>, BigInt) {
    let lcm = entries
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let row = entries
        .iter()
        .map(|x| x.numer() * (&lcm / x.denom()))
        .collect();
    (row, lcm)
}

/// Bareiss elimination, pivoting only within the first `pivot_cols` columns.
/// Rows `0..pivots.len()` of the result are in echelon form; the remaining
/// rows are zero on the pivoting columns.
fn bareiss(mut m: Vec<Vec<BigInt>>, pivot_cols: usize) -> Echelon {
    let nrows = m.len();
    let ncols = m.first().map_or(0, Vec::len);
    let mut prev = BigInt::one();
    let mut pivots = Vec::new();
    let mut swaps = 0;
    let mut r = 0;
    for c in 0..pivot_cols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        if p != r {
            m.swap(p, r);
            swaps += 1;
        }
        let (head, tail) = m.split_at_mut(r + 1);
        let pivot_row = &head[r];
        for row in tail.iter_mut() {
            let factor = row[c].clone();
            for j in (c + 1)..ncols {
                let num = &pivot_row[c] * &row[j] - &factor * &pivot_row[j];
                debug_assert!((&num % &prev).is_zero());
                row[j] = num / &prev;
            }
            row[c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    Echelon {
        rows: m,
        pivots,
        swaps,
    }
}

fn integer_matrix(rows: &[RatVec]) -> Vec<Vec<BigInt>> {
    rows.iter().map(|r| integer_row(r.as_slice()).0).collect()
}

pub fn matrix_rank(a: &RatMat) -> usize {
    rank_of(a.rows(), a.ncols())
}

pub(crate) fn rank_of(rows: &[RatVec], cols: usize) -> usize {
    if rows.is_empty() {
        return 0;
    }
    bareiss(integer_matrix(rows), cols).pivots.len()
}

pub(super) fn determinant(a: &RatMat) -> Rat {
    assert_eq!(a.nrows(), a.ncols(), "determinant of a non-square matrix");
    let n = a.nrows();
    if n == 0 {
        return Rat::one();
    }
    let mut scale = BigInt::one();
    let mut rows = Vec::with_capacity(n);
    for r in a.rows() {
        let (row, s) = integer_row(r.as_slice());
        scale *= s;
        rows.push(row);
    }
    let ech = bareiss(rows, n);
    if ech.pivots.len() < n {
        return Rat::zero();
    }
    let mut det = ech.rows[n - 1][n - 1].clone();
    if ech.swaps % 2 == 1 {
        det = -det;
    }
    Rat::new(det, scale)
}

/// Back substitution on an echelon system; `rhs[i]` belongs to row `i`.
fn back_substitute(
    rows: &[Vec<BigInt>],
    pivots: &[usize],
    rhs: &[Rat],
    cols: usize,
    fixed: &[(usize, Rat)],
) -> RatVec {
    let mut x = vec![Rat::zero(); cols];
    for (j, v) in fixed {
        x[*j] = v.clone();
    }
    for (r, &pc) in pivots.iter().enumerate().rev() {
        let mut acc = rhs[r].clone();
        for j in (pc + 1)..cols {
            if !rows[r][j].is_zero() && !x[j].is_zero() {
                acc -= Rat::from_integer(rows[r][j].clone()) * &x[j];
            }
        }
        x[pc] = acc / Rat::from_integer(rows[r][pc].clone());
    }
    RatVec::new(x)
}

pub fn solve_linear(a: &RatMat, b: &RatVec) -> Result<LinearSolution> {
    if b.dim() != a.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.dim(),
        });
    }
    let cols = a.ncols();
    let augmented: Vec<Vec<BigInt>> = a
        .rows()
        .iter()
        .zip(b.iter())
        .map(|(row, rhs)| {
            let mut entries = row.as_slice().to_vec();
            entries.push(rhs.clone());
            integer_row(&entries).0
        })
        .collect();
    let ech = bareiss(augmented, cols);
    let rank = ech.pivots.len();
    if ech.rows[rank..].iter().any(|row| !row[cols].is_zero()) {
        return Ok(LinearSolution::Infeasible);
    }
    let rhs: Vec<Rat> = ech.rows[..rank]
        .iter()
        .map(|row| Rat::from_integer(row[cols].clone()))
        .collect();
    let particular = back_substitute(&ech.rows, &ech.pivots, &rhs, cols, &[]);
    if rank == cols {
        return Ok(LinearSolution::Unique(particular));
    }
    let zeros = vec![Rat::zero(); rank];
    let nullspace = free_columns(&ech.pivots, cols)
        .map(|f| {
            back_substitute(&ech.rows, &ech.pivots, &zeros, cols, &[(f, Rat::one())])
                .canonical_direction()
        })
        .collect();
    Ok(LinearSolution::Affine {
        particular,
        nullspace,
    })
}

fn free_columns(pivots: &[usize], cols: usize) -> impl Iterator<Item = usize> + '_ {
    (0..cols).filter(move |c| !pivots.contains(c))
}

/// Integer-primitive basis of `{x : row . x = 0 for every row}`.
pub fn nullspace(rows: &[RatVec], cols: usize) -> Vec<RatVec> {
    if rows.is_empty() {
        return (0..cols).map(|i| RatVec::unit(cols, i)).collect();
    }
    let ech = bareiss(integer_matrix(rows), cols);
    let rank = ech.pivots.len();
    let zeros = vec![Rat::zero(); rank];
    free_columns(&ech.pivots, cols)
        .map(|f| {
            back_substitute(&ech.rows, &ech.pivots, &zeros, cols, &[(f, Rat::one())])
                .canonical_direction()
        })
        .collect()
}

/// Canonical basis of the row space: the reduced row echelon form with each
/// row scaled to a primitive integer vector (leading entry positive).
pub fn canonical_basis(vectors: &[RatVec], cols: usize) -> Vec<RatVec> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let ech = bareiss(integer_matrix(vectors), cols);
    let rank = ech.pivots.len();
    let mut rows: Vec<Vec<Rat>> = ech.rows[..rank]
        .iter()
        .zip(&ech.pivots)
        .map(|(row, &pc)| {
            let lead = Rat::from_integer(row[pc].clone());
            row.iter()
                .map(|x| Rat::from_integer(x.clone()) / &lead)
                .collect()
        })
        .collect();
    for r in (0..rank).rev() {
        let pc = ech.pivots[r];
        for above in 0..r {
            let factor = rows[above][pc].clone();
            if factor.is_zero() {
                continue;
            }
            for j in pc..cols {
                let delta = &factor * &rows[r][j];
                rows[above][j] -= delta;
            }
        }
    }
    rows.into_iter()
        .map(|r| RatVec::new(r).primitive())
        .collect()
}

/// Canonical basis of the orthogonal complement of `span(vectors)`.
pub fn complement_basis(vectors: &[RatVec], cols: usize) -> Vec<RatVec> {
    canonical_basis(&nullspace(vectors, cols), cols)
}

/// Canonical representative of `v` modulo the span of a basis produced by
/// [`canonical_basis`]: the unique vector in the coset that vanishes on every
/// pivot column.
pub fn reduce_modulo(v: &RatVec, basis: &[RatVec]) -> RatVec {
    let mut v = v.clone();
    for row in basis {
        let p = row.first_nonzero().expect("basis rows are nonzero");
        if v[p].is_zero() {
            continue;
        }
        let factor = -(&v[p] / &row[p]);
        v = v.add_scaled(&factor, row);
    }
    v
}
