//! Finite fans of rational polyhedral cones: face fans, closure under faces
//! and pairwise intersections, projections along linear maps, and
//! minimal-cone queries.
//!
//! "Fan" here means a finite set of cones closed under taking faces and under
//! pairwise intersection. Cones may overlap in their interiors (the projection
//! of a face fan typically contains both a cone and its subdivision).

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};
use std::fmt;

use num::{Signed, Zero};
use rayon::prelude::*;

use crate::arith::{nullspace, Rat, RatMat, RatVec};
use crate::error::{Error, Result};
use crate::polyhedra::{BitSet, Cone};

/// Exact linear map `Q^domain -> Q^codomain` given by its matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinMap {
    matrix: RatMat,
}

impl LinMap {
    pub fn new(matrix: RatMat) -> Self {
        LinMap { matrix }
    }

    pub fn identity(n: usize) -> Self {
        LinMap::new(RatMat::identity(n))
    }

    /// Coordinate projection keeping `keep` (in order) out of `domain` coordinates.
    pub fn coordinate_projection(domain: usize, keep: std::ops::Range<usize>) -> Self {
        let rows = keep.map(|i| RatVec::unit(domain, i)).collect();
        LinMap::new(RatMat::from_rows(rows, domain))
    }

    pub fn domain_dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn codomain_dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &RatMat {
        &self.matrix
    }

    pub fn apply(&self, x: &RatVec) -> RatVec {
        self.matrix.mul_vec(x)
    }

    pub fn image(&self, cone: &Cone) -> Cone {
        cone.image(&self.matrix)
    }
}

/// Finite set of cones closed under faces and pairwise intersections, kept
/// sorted by `(dim, canonical form)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fan {
    ambient_dim: usize,
    cones: Vec<Cone>,
    /// Distinct facet and equation hyperplanes of all cones, as canonical directions.
    hyperplanes: Vec<RatVec>,
    /// Each cone's constraints as indices into `hyperplanes`.
    patterns: Vec<SignPattern>,
}

/// Facets as `(index, flipped)` and equations as indices.
#[derive(Clone, Debug, PartialEq, Eq)]
struct SignPattern {
    facets: Vec<(usize, bool)>,
    equations: Vec<usize>,
}

impl SignPattern {
    fn admits(&self, signs: &[Ordering]) -> bool {
        self.equations.iter().all(|&i| signs[i] == Ordering::Equal)
            && self.facets.iter().all(|&(i, flipped)| {
                let s = if flipped { signs[i].reverse() } else { signs[i] };
                s != Ordering::Less
            })
    }
}

/// Hyperplane normals (facets and equations of `family`) and the rays of
/// their arrangement that lie in some cone of `family`: each ray is the
/// intersection of `d - 1` hyperplanes.
fn arrangement(family: &[Cone], d: usize) -> (Vec<RatVec>, Vec<RatVec>) {
    let mut normals: Vec<RatVec> = family
        .iter()
        .flat_map(|c| c.facets().iter().chain(c.equations()))
        .map(RatVec::canonical_direction)
        .collect();
    normals.sort();
    normals.dedup();
    let maximal: Vec<&Cone> = family
        .iter()
        .filter(|c| !family.iter().any(|e| e != *c && e.contains_cone(c)))
        .collect();
    let mut found: BTreeSet<RatVec> = BTreeSet::new();
    let mut chosen: Vec<RatVec> = Vec::with_capacity(d);
    let mut visit = |rows: &[RatVec]| {
        let kernel = nullspace(rows, d);
        if kernel.len() == 1 {
            for v in [kernel[0].clone(), kernel[0].neg()] {
                if maximal.iter().any(|c| c.contains(&v)) {
                    found.insert(v.primitive());
                }
            }
        }
    };
    if d > 0 {
        for_each_combination(&normals, d - 1, 0, &mut chosen, &mut visit);
    }
    (normals, found.into_iter().collect())
}

/// Sign pattern of one hyperplane over the arrangement rays.
struct Signs {
    normal: RatVec,
    positive: BitSet,
    negative: BitSet,
}

/// Pointed cone generated by the arrangement rays in `set`.
///
/// Every facet of a member of the closure is one of the hyperplanes, so the
/// valid signed hyperplanes with maximal tight sets are the facets. A ray is
/// extreme iff no other ray is tight on all valid hyperplanes it is tight on.
fn cone_of_set(set: &BitSet, rays: &[RatVec], signs: &[Signs], d: usize) -> Cone {
    let members: Vec<usize> = set.iter().collect();
    if members.is_empty() {
        return Cone::origin(d);
    }
    let mut valid: Vec<(RatVec, BitSet)> = Vec::new();
    for h in signs {
        let pos = !set.intersection(&h.positive).is_empty();
        let neg = !set.intersection(&h.negative).is_empty();
        match (pos, neg) {
            (true, false) => valid.push((h.normal.clone(), set.difference(&h.positive).trimmed())),
            (false, true) => valid.push((h.normal.neg(), set.difference(&h.negative).trimmed())),
            _ => {}
        }
    }
    let facets: Vec<RatVec> = valid
        .iter()
        .filter(|(_, t)| {
            !valid
                .iter()
                .any(|(_, u)| t.is_subset(u) && !u.is_subset(t))
        })
        .map(|(a, _)| a.clone())
        .collect();
    let tight: Vec<BitSet> = members
        .iter()
        .map(|&i| {
            let mut z = BitSet::new(valid.len());
            for (k, (_, t)) in valid.iter().enumerate() {
                if t.contains(i) {
                    z.insert(k);
                }
            }
            z
        })
        .collect();
    let extreme: Vec<RatVec> = (0..members.len())
        .filter(|&a| (0..members.len()).all(|b| b == a || !tight[a].is_subset(&tight[b])))
        .map(|a| rays[members[a]].clone())
        .collect();
    Cone::from_pointed_parts(extreme, facets, d)
}

fn for_each_combination(
    items: &[RatVec],
    k: usize,
    from: usize,
    chosen: &mut Vec<RatVec>,
    visit: &mut impl FnMut(&[RatVec]),
) {
    if chosen.len() == k {
        visit(chosen);
        return;
    }
    for i in from..items.len() {
        if items.len() - i < k - chosen.len() {
            break;
        }
        chosen.push(items[i].clone());
        for_each_combination(items, k, i + 1, chosen, visit);
        chosen.pop();
    }
}

impl Fan {
    /// Sorts `cones` (which must be distinct) and indexes their hyperplanes.
    fn from_cones(ambient_dim: usize, mut cones: Vec<Cone>) -> Fan {
        cones.sort_by(|a, b| (a.dim(), a).cmp(&(b.dim(), b)));
        let mut hyperplanes: Vec<RatVec> = cones
            .iter()
            .flat_map(|c| c.facets().iter().chain(c.equations()))
            .map(RatVec::canonical_direction)
            .collect();
        hyperplanes.sort();
        hyperplanes.dedup();
        let index = |v: &RatVec| -> (usize, bool) {
            let d = v.canonical_direction();
            let i = hyperplanes.binary_search(&d).expect("indexed above");
            (i, d != v.primitive())
        };
        let patterns = cones
            .iter()
            .map(|c| SignPattern {
                facets: c.facets().iter().map(index).collect(),
                equations: c.equations().iter().map(|e| index(e).0).collect(),
            })
            .collect();
        Fan {
            ambient_dim,
            cones,
            hyperplanes,
            patterns,
        }
    }

    /// All faces of `cone`.
    pub fn face_fan(cone: &Cone) -> Fan {
        let cones: Vec<Cone> = cone.faces().into_iter().map(|f| f.geometry).collect();
        Fan::from_cones(cone.ambient_dim(), cones)
    }

    /// Smallest set containing `cones` that is closed under faces and
    /// pairwise intersections.
    ///
    /// The faces of an intersection are intersections of faces, so closing
    /// the face-closed hull under intersections suffices. For pointed cones
    /// every member of the closure is a union of faces of the arrangement of
    /// all facet and equation hyperplanes, hence generated by the arrangement
    /// rays it contains; cones are then handled as bit sets of those rays and
    /// intersection is a bitwise and.
    pub fn close(cones: &[Cone], ambient_dim: usize) -> Result<Fan> {
        for c in cones {
            if c.ambient_dim() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: ambient_dim,
                    found: c.ambient_dim(),
                });
            }
        }
        let mut seen: HashSet<Cone> = HashSet::new();
        let mut family: Vec<Cone> = Vec::new();
        for c in cones {
            for f in c.faces() {
                if seen.insert(f.geometry.clone()) {
                    family.push(f.geometry);
                }
            }
        }
        if family.is_empty() {
            return Ok(Fan::from_cones(ambient_dim, Vec::new()));
        }
        if !family.iter().all(Cone::is_pointed) {
            return Ok(Self::close_pairwise(family, ambient_dim));
        }

        let (normals, rays) = arrangement(&family, ambient_dim);
        let signs: Vec<Signs> = normals
            .into_iter()
            .map(|normal| {
                let mut positive = BitSet::new(rays.len());
                let mut negative = BitSet::new(rays.len());
                for (i, r) in rays.iter().enumerate() {
                    let v = normal.dot(r);
                    if v.is_positive() {
                        positive.insert(i);
                    } else if v.is_negative() {
                        negative.insert(i);
                    }
                }
                Signs {
                    normal,
                    positive,
                    negative,
                }
            })
            .collect();
        // Rays on the nonnegative side of every facet and on every equation.
        let ray_set = |c: &Cone| {
            let sign_of = |a: &RatVec| {
                let n = a.canonical_direction();
                let i = signs.binary_search_by(|h| h.normal.cmp(&n)).expect("normal in arrangement");
                let flipped = a.first_nonzero().is_some_and(|k| a[k].is_negative());
                (&signs[i], flipped)
            };
            let mut s = BitSet::full(rays.len());
            for a in c.facets() {
                let (h, flipped) = sign_of(a);
                s = s.difference(if flipped { &h.positive } else { &h.negative });
            }
            for a in c.equations() {
                let (h, _) = sign_of(a);
                s = s.difference(&h.positive).difference(&h.negative);
            }
            s.trimmed()
        };
        let mut sets: HashSet<BitSet> = HashSet::new();
        let mut generators: Vec<BitSet> = Vec::new();
        for c in &family {
            let s = ray_set(c);
            if sets.insert(s.clone()) {
                generators.push(s);
            }
        }
        // Every finite intersection is a chain of intersections with single
        // generators, so new sets only need to meet the generators. The empty
        // set (the origin) is always present, so only generators sharing a
        // ray with the current set can contribute.
        let mut by_ray: Vec<Vec<usize>> = vec![Vec::new(); rays.len()];
        for (gi, g) in generators.iter().enumerate() {
            for r in g.iter() {
                by_ray[r].push(gi);
            }
        }
        let mut stamp = vec![usize::MAX; generators.len()];
        let mut queue = generators.clone();
        let mut done: Vec<BitSet> = Vec::new();
        while let Some(s) = queue.pop() {
            let round = done.len();
            for r in s.iter() {
                for &gi in &by_ray[r] {
                    if stamp[gi] == round {
                        continue;
                    }
                    stamp[gi] = round;
                    let meet = s.intersection(&generators[gi]).trimmed();
                    if !sets.contains(&meet) {
                        sets.insert(meet.clone());
                        queue.push(meet);
                    }
                }
            }
            done.push(s);
        }
        let all: Vec<Cone> = done
            .par_iter()
            .map(|s| cone_of_set(s, &rays, &signs, ambient_dim))
            .collect();
        Ok(Fan::from_cones(ambient_dim, all))
    }

    /// Direct fixpoint with exact intersections; used when some cone has lineality.
    fn close_pairwise(family: Vec<Cone>, ambient_dim: usize) -> Fan {
        let mut seen: HashSet<Cone> = family.iter().cloned().collect();
        let mut all: Vec<Cone> = Vec::new();
        let mut queue = family;
        while let Some(c) = queue.pop() {
            let mut fresh: Vec<Cone> = c.faces().into_iter().map(|f| f.geometry).collect();
            fresh.extend(all.iter().map(|d| c.intersect(d)));
            all.push(c);
            for f in fresh {
                if seen.insert(f.clone()) {
                    queue.push(f);
                }
            }
        }
        Fan::from_cones(ambient_dim, all)
    }

    /// Closure of the images of all cones under `map`.
    pub fn project(&self, map: &LinMap) -> Result<Fan> {
        if map.domain_dim() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                found: map.domain_dim(),
            });
        }
        let mut images: Vec<Cone> = self.cones.iter().map(|c| map.image(c)).collect();
        images.sort();
        images.dedup();
        Fan::close(&images, map.codomain_dim())
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn cones(&self) -> &[Cone] {
        &self.cones
    }

    pub fn len(&self) -> usize {
        self.cones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cones.is_empty()
    }

    pub fn contains_cone(&self, cone: &Cone) -> bool {
        self.cones.binary_search_by(|c| (c.dim(), c).cmp(&(cone.dim(), cone))).is_ok()
    }

    /// Distinct facet and equation hyperplanes of all cones, each as the
    /// canonical direction of its normal.
    pub fn hyperplanes(&self) -> &[RatVec] {
        &self.hyperplanes
    }

    /// Side of every hyperplane that `x` lies on.
    fn signs(&self, x: &RatVec) -> Vec<Ordering> {
        // Signs are invariant under positive scaling; integers are cheaper.
        let x = x.primitive();
        self.hyperplanes
            .iter()
            .map(|h| h.dot(&x).cmp(&Rat::zero()))
            .collect()
    }

    /// Primitive generators of the one-dimensional pointed cones, sorted.
    pub fn rays(&self) -> Vec<RatVec> {
        let mut out: Vec<RatVec> = self
            .cones
            .iter()
            .filter_map(|c| c.ray_generator().cloned())
            .collect();
        out.sort();
        out
    }

    /// Cones not strictly contained in another cone of the fan.
    pub fn maximal_cones(&self) -> Vec<&Cone> {
        self.cones
            .iter()
            .filter(|c| {
                !self
                    .cones
                    .iter()
                    .any(|d| d != *c && d.contains_cone(c))
            })
            .collect()
    }

    /// Closed under faces and pairwise intersections.
    pub fn is_closed(&self) -> bool {
        let faces_ok = self
            .cones
            .iter()
            .all(|c| c.faces().iter().all(|f| self.contains_cone(&f.geometry)));
        faces_ok
            && self.cones.iter().enumerate().all(|(i, c)| {
                self.cones[i + 1..]
                    .iter()
                    .all(|d| self.contains_cone(&c.intersect(d)))
            })
    }

    /// Intersection of all cones containing `x`. In a closed fan this is a
    /// cone of the fan with `x` in its relative interior.
    pub fn minimal_cone(&self, x: &RatVec) -> Result<Cone> {
        if x.dim() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                found: x.dim(),
            });
        }
        let signs = self.signs(x);
        let containing: Vec<&Cone> = self
            .cones
            .iter()
            .zip(&self.patterns)
            .filter(|(_, p)| p.admits(&signs))
            .map(|(c, _)| c)
            .collect();
        let first = *containing
            .first()
            .ok_or_else(|| Error::NotContained { point: x.clone() })?;
        // The intersection of all cones containing x is itself a member and
        // lies in every other one, so it is the lowest-dimensional candidate
        // contained in the others of that dimension.
        let lowest: Vec<&Cone> = containing
            .iter()
            .copied()
            .take_while(|c| c.dim() == first.dim())
            .collect();
        if lowest.len() == 1 {
            return Ok(first.clone());
        }
        if let Some(m) = lowest
            .iter()
            .find(|m| lowest.iter().all(|c| c.contains_cone(m)))
        {
            return Ok((*m).clone());
        }
        Ok(containing[1..]
            .iter()
            .fold(first.clone(), |acc, c| acc.intersect(c)))
    }
}

impl fmt::Display for Fan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.cones {
            writeln!(f, "dim {}: {}", c.dim(), c)?;
        }
        Ok(())
    }
}
