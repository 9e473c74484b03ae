//! Exact rational scalars, dense vectors and matrices.
//!
//! Everything here is exact: scalars are arbitrary-precision rationals kept in
//! lowest terms, and no operation ever rounds.

mod linalg;
mod lp;

use std::fmt;
use std::ops::Index;

use num::{BigInt, BigRational, Integer, One, Signed, Zero};

pub use linalg::{
    canonical_basis, complement_basis, matrix_rank, nullspace, reduce_modulo, solve_linear,
    LinearSolution,
};
pub(crate) use linalg::rank_of;
pub use lp::{lp_solve, Constraint, LinProgram, LpOutcome, Relation, Sense};

pub type Int = BigInt;
pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

/// Parses `p`, `-p` or `p/q`.
pub fn parse_rat(text: &str) -> Option<Rat> {
    let text = text.trim();
    match text.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Rat::new(n, d))
            }
        }
        None => text.parse::<BigInt>().ok().map(Rat::from_integer),
    }
}

/// Dense rational vector with an explicit dimension.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RatVec(Vec<Rat>);

impl RatVec {
    pub fn new(entries: Vec<Rat>) -> Self {
        RatVec(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        RatVec(vec![Rat::zero(); dim])
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = Rat::one();
        v
    }

    pub fn from_ints(entries: &[i64]) -> Self {
        RatVec(entries.iter().map(|&x| rat(x)).collect())
    }

    pub fn from_bigints(entries: &[BigInt]) -> Self {
        RatVec(entries.iter().cloned().map(Rat::from_integer).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[Rat] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Rat> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rat> {
        self.0.iter()
    }

    pub fn set(&mut self, i: usize, value: Rat) {
        self.0[i] = value;
    }

    fn check_dim(&self, other: &RatVec) {
        assert_eq!(
            self.dim(),
            other.dim(),
            "vector dimension mismatch ({} vs {})",
            self.dim(),
            other.dim()
        );
    }

    pub fn dot(&self, other: &RatVec) -> Rat {
        self.check_dim(other);
        // Integer products are summed without normalizing.
        let mut whole = BigInt::zero();
        let mut acc = Rat::zero();
        for (a, b) in self.0.iter().zip(&other.0) {
            if a.is_zero() || b.is_zero() {
                continue;
            }
            if a.is_integer() && b.is_integer() {
                whole += a.numer() * b.numer();
            } else {
                acc += a * b;
            }
        }
        acc + Rat::from_integer(whole)
    }

    pub fn add(&self, other: &RatVec) -> RatVec {
        self.check_dim(other);
        RatVec(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &RatVec) -> RatVec {
        self.check_dim(other);
        RatVec(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, factor: &Rat) -> RatVec {
        RatVec(self.0.iter().map(|a| a * factor).collect())
    }

    /// `self + factor * other`
    pub fn add_scaled(&self, factor: &Rat, other: &RatVec) -> RatVec {
        self.check_dim(other);
        RatVec(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + factor * b)
                .collect(),
        )
    }

    pub fn neg(&self) -> RatVec {
        RatVec(self.0.iter().map(|a| -a).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn first_nonzero(&self) -> Option<usize> {
        self.0.iter().position(|a| !a.is_zero())
    }

    pub fn concat(&self, other: &RatVec) -> RatVec {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        RatVec(v)
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> RatVec {
        RatVec(self.0[range].to_vec())
    }

    /// Positive multiple with coprime integer entries.
    pub fn primitive(&self) -> RatVec {
        RatVec::from_bigints(&self.primitive_integers())
    }

    /// Like [`RatVec::primitive`], but additionally flips the sign so that the
    /// first nonzero entry is positive. Used for lines and linear subspaces.
    pub fn canonical_direction(&self) -> RatVec {
        let p = self.primitive();
        match p.first_nonzero() {
            Some(i) if p.0[i].is_negative() => p.neg(),
            _ => p,
        }
    }

    /// Least common multiple of the denominators.
    pub fn common_denominator(&self) -> BigInt {
        self.0.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
    }

    pub fn primitive_integers(&self) -> Vec<BigInt> {
        if self.is_zero() {
            return vec![BigInt::zero(); self.dim()];
        }
        let lcm = self.common_denominator();
        let scaled: Vec<BigInt> = self
            .0
            .iter()
            .map(|x| x.numer() * (&lcm / x.denom()))
            .collect();
        let gcd = scaled
            .iter()
            .fold(BigInt::zero(), |acc, x| acc.gcd(x));
        scaled.into_iter().map(|x| x / &gcd).collect()
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|x| x.is_integer())
    }

    pub fn max_abs(&self) -> Rat {
        self.0
            .iter()
            .map(|x| x.abs())
            .max()
            .unwrap_or_else(Rat::zero)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        use num::ToPrimitive;
        self.0.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect()
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(|x| x.to_string()).collect()
    }
}

impl Index<usize> for RatVec {
    type Output = Rat;

    fn index(&self, i: usize) -> &Rat {
        &self.0[i]
    }
}

impl FromIterator<Rat> for RatVec {
    fn from_iter<I: IntoIterator<Item = Rat>>(iter: I) -> Self {
        RatVec(iter.into_iter().collect())
    }
}

impl fmt::Display for RatVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(")")
    }
}

/// Dense row-major rational matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatMat {
    rows: Vec<RatVec>,
    cols: usize,
}

impl RatMat {
    pub fn from_rows(rows: Vec<RatVec>, cols: usize) -> Self {
        for row in &rows {
            assert_eq!(row.dim(), cols, "matrix row has wrong dimension");
        }
        RatMat { rows, cols }
    }

    pub fn from_ints(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_rows(rows.iter().map(|r| RatVec::from_ints(r)).collect(), cols)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMat {
            rows: vec![RatVec::zeros(cols); rows],
            cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        RatMat {
            rows: (0..n).map(|i| RatVec::unit(n, i)).collect(),
            cols: n,
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[RatVec] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &RatVec {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.rows[i][j]
    }

    pub fn transpose(&self) -> RatMat {
        let rows = (0..self.cols)
            .map(|j| self.rows.iter().map(|r| r[j].clone()).collect())
            .collect();
        RatMat {
            rows,
            cols: self.rows.len(),
        }
    }

    pub fn mul_vec(&self, v: &RatVec) -> RatVec {
        assert_eq!(v.dim(), self.cols, "matrix-vector dimension mismatch");
        self.rows.iter().map(|r| r.dot(v)).collect()
    }

    pub fn rank(&self) -> usize {
        matrix_rank(self)
    }

    pub fn determinant(&self) -> Rat {
        linalg::determinant(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primitive_normalization() {
        let v = RatVec::new(vec![ratio(2, 3), ratio(-4, 3), rat(0)]);
        assert_eq!(v.primitive(), RatVec::from_ints(&[1, -2, 0]));
        assert_eq!(v.neg().canonical_direction(), RatVec::from_ints(&[1, -2, 0]));
        assert_eq!(v.neg().primitive(), RatVec::from_ints(&[-1, 2, 0]));
        assert!(RatVec::zeros(3).primitive().is_zero());
    }

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_rat("3"), Some(rat(3)));
        assert_eq!(parse_rat(" -6/4 "), Some(ratio(-3, 2)));
        assert_eq!(parse_rat("1/0"), None);
        assert_eq!(parse_rat("x"), None);
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn dot_checks_dimensions() {
        RatVec::zeros(2).dot(&RatVec::zeros(3));
    }

    #[test]
    fn display() {
        let v = RatVec::new(vec![rat(1), ratio(1, 2)]);
        assert_eq!(v.to_string(), "(1, 1/2)");
    }
}
