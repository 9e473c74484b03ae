//! Double description: extreme rays and lineality of `{x : a . x >= 0}`.
//!
//! Incremental insertion of inequalities in canonical (sorted primitive)
//! order. All arithmetic is on primitive integer vectors. Adjacency of a
//! positive and a negative ray is decided combinatorially: they are adjacent
//! iff no third ray is tight on every inequality tight on both.

use num::{BigInt, Integer, Signed, Zero};

use super::bitset::BitSet;
use crate::arith::RatVec;

#[derive(Clone, Debug, Default)]
pub(crate) struct Generators {
    pub lineality: Vec<RatVec>,
    pub rays: Vec<RatVec>,
}

struct Ray {
    v: Vec<BigInt>,
    zero: BitSet,
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    let mut acc = BigInt::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

/// `s * u - t * v`
fn combine(s: &BigInt, u: &[BigInt], t: &BigInt, v: &[BigInt]) -> Vec<BigInt> {
    u.iter().zip(v).map(|(a, b)| s * a - t * b).collect()
}

fn make_primitive(v: &mut [BigInt]) {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_zero() && g != BigInt::from(1) {
        for x in v.iter_mut() {
            *x /= &g;
        }
    }
}

pub(crate) fn double_description(ineqs: &[RatVec], dim: usize) -> Generators {
    let mut rows: Vec<Vec<BigInt>> = ineqs
        .iter()
        .filter(|a| !a.is_zero())
        .map(|a| {
            debug_assert_eq!(a.dim(), dim);
            a.primitive_integers()
        })
        .collect();
    rows.sort();
    rows.dedup();

    let mut lineality: Vec<Vec<BigInt>> = (0..dim)
        .map(|i| {
            let mut e = vec![BigInt::zero(); dim];
            e[i] = BigInt::from(1);
            e
        })
        .collect();
    let mut rays: Vec<Ray> = Vec::new();

    for (k, a) in rows.iter().enumerate() {
        if let Some(pos) = lineality.iter().position(|l| !dot(a, l).is_zero()) {
            let mut l0 = lineality.remove(pos);
            let mut al0 = dot(a, &l0);
            if al0.is_negative() {
                l0.iter_mut().for_each(|x| *x = -&*x);
                al0 = -al0;
            }
            for l in lineality.iter_mut() {
                let al = dot(a, l);
                if !al.is_zero() {
                    *l = combine(&al0, l, &al, &l0);
                    make_primitive(l);
                }
            }
            for r in rays.iter_mut() {
                let ar = dot(a, &r.v);
                if !ar.is_zero() {
                    r.v = combine(&al0, &r.v, &ar, &l0);
                    make_primitive(&mut r.v);
                }
                r.zero.insert(k);
            }
            make_primitive(&mut l0);
            let mut zero = BitSet::new(rows.len());
            for j in 0..k {
                zero.insert(j);
            }
            rays.push(Ray { v: l0, zero });
            continue;
        }

        let mut positive = Vec::new();
        let mut negative = Vec::new();
        let mut kept = Vec::new();
        for (idx, r) in rays.iter().enumerate() {
            let s = dot(a, &r.v);
            if s.is_positive() {
                positive.push((idx, s));
            } else if s.is_negative() {
                negative.push((idx, s));
            } else {
                kept.push(idx);
            }
        }
        if negative.is_empty() {
            for &idx in &kept {
                rays[idx].zero.insert(k);
            }
            continue;
        }

        let mut created = Vec::new();
        for (p, sp) in &positive {
            for (n, sn) in &negative {
                let common = rays[*p].zero.intersection(&rays[*n].zero);
                let adjacent = rays.iter().enumerate().all(|(idx, r)| {
                    idx == *p || idx == *n || !common.is_subset(&r.zero)
                });
                if !adjacent {
                    continue;
                }
                // sp * n - sn * p, with sp > 0 and sn < 0
                let mut v = combine(sp, &rays[*n].v, sn, &rays[*p].v);
                make_primitive(&mut v);
                let mut zero = common;
                zero.insert(k);
                created.push(Ray { v, zero });
            }
        }

        let mut next: Vec<Ray> = Vec::with_capacity(positive.len() + kept.len() + created.len());
        let positive_idx: Vec<usize> = positive.iter().map(|(i, _)| *i).collect();
        for (idx, mut r) in std::mem::take(&mut rays).into_iter().enumerate() {
            if positive_idx.contains(&idx) {
                next.push(r);
            } else if kept.contains(&idx) {
                r.zero.insert(k);
                next.push(r);
            }
        }
        next.extend(created);
        rays = next;
    }

    Generators {
        lineality: lineality.iter().map(|l| RatVec::from_bigints(l)).collect(),
        rays: rays.iter().map(|r| RatVec::from_bigints(&r.v)).collect(),
    }
}
