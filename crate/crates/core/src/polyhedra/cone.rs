use std::fmt;

use num::{Signed, Zero};

use super::bitset::BitSet;
use super::dd::double_description;
use super::face::{enumerate_faces, Face};
use crate::arith::{canonical_basis, rank_of, complement_basis, reduce_modulo, RatMat, RatVec};
use crate::error::{Error, Result};

/// Rational polyhedral cone carrying both representations in canonical form.
///
/// * `lineality`: reduced row echelon basis of the lineality space.
/// * `rays`: extreme rays modulo the lineality space, reduced against it,
///   primitive, sorted.
/// * `equations`: reduced row echelon basis of the orthogonal complement of
///   the linear span; `e . x = 0` on the cone.
/// * `facets`: facet normals `a` with `a . x >= 0`, reduced against the
///   equations, primitive, sorted. Irredundant.
///
/// Two cones are equal as sets iff their canonical forms are equal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cone {
    ambient_dim: usize,
    lineality: Vec<RatVec>,
    rays: Vec<RatVec>,
    equations: Vec<RatVec>,
    facets: Vec<RatVec>,
}

fn check_dims(vectors: &[RatVec], dim: usize) -> Result<()> {
    for v in vectors {
        if v.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.dim(),
            });
        }
    }
    Ok(())
}

fn canonical_set(vectors: impl IntoIterator<Item = RatVec>, basis: &[RatVec]) -> Vec<RatVec> {
    let mut out: Vec<RatVec> = vectors
        .into_iter()
        .map(|v| reduce_modulo(&v, basis).primitive())
        .filter(|v| !v.is_zero())
        .collect();
    out.sort();
    out.dedup();
    out
}

impl Cone {
    /// Cone generated by `rays` (V-representation to H-representation).
    pub fn from_rays(rays: &[RatVec], ambient_dim: usize) -> Result<Cone> {
        check_dims(rays, ambient_dim)?;
        if rays.iter().any(RatVec::is_zero) {
            return Err(Error::ZeroRay);
        }
        Ok(Self::from_rays_unchecked(rays, ambient_dim))
    }

    pub(crate) fn from_rays_unchecked(rays: &[RatVec], d: usize) -> Cone {
        // Facets of the cone are the extreme rays of its dual.
        let dual = double_description(rays, d);
        let equations = canonical_basis(&dual.lineality, d);
        let facets = canonical_set(dual.rays, &equations);
        let mut hrep: Vec<RatVec> = equations.clone();
        hrep.extend(facets.iter().cloned());
        let lineality = complement_basis(&hrep, d);
        let candidates = canonical_set(rays.iter().cloned(), &lineality);
        let face_dim = lineality.len() + 1;
        let rays = candidates
            .into_iter()
            .filter(|r| {
                let mut tight = equations.clone();
                tight.extend(facets.iter().filter(|f| f.dot(r).is_zero()).cloned());
                d - rank_of(&tight, d) == face_dim
            })
            .collect();
        Cone {
            ambient_dim: d,
            lineality,
            rays,
            equations,
            facets,
        }
    }

    /// Pointed cone from extreme rays and facet normals that are already
    /// known up to duplicates and positive scaling.
    pub(crate) fn from_pointed_parts(rays: Vec<RatVec>, facets: Vec<RatVec>, d: usize) -> Cone {
        let rays = canonical_set(rays, &[]);
        let equations = complement_basis(&rays, d);
        let facets = canonical_set(facets, &equations);
        Cone {
            ambient_dim: d,
            lineality: Vec::new(),
            rays,
            equations,
            facets,
        }
    }

    /// Cone `{x : a . x >= 0 for all a}` (H-representation to V-representation).
    pub fn from_ineqs(ineqs: &[RatVec], ambient_dim: usize) -> Result<Cone> {
        check_dims(ineqs, ambient_dim)?;
        Ok(Self::from_ineqs_unchecked(ineqs, ambient_dim))
    }

    pub(crate) fn from_ineqs_unchecked(ineqs: &[RatVec], d: usize) -> Cone {
        let gens = double_description(ineqs, d);
        let lineality = canonical_basis(&gens.lineality, d);
        let rays = canonical_set(gens.rays, &lineality);
        let mut vrep = lineality.clone();
        vrep.extend(rays.iter().cloned());
        let equations = complement_basis(&vrep, d);
        let cone_dim = d - equations.len();
        let candidates = canonical_set(ineqs.iter().cloned(), &equations);
        let facets = candidates
            .into_iter()
            .filter(|a| {
                let mut tight = lineality.clone();
                tight.extend(rays.iter().filter(|r| a.dot(r).is_zero()).cloned());
                rank_of(&tight, d) + 1 == cone_dim
            })
            .collect();
        Cone {
            ambient_dim: d,
            lineality,
            rays,
            equations,
            facets,
        }
    }

    /// Cone generated by `rays` together with the linear span of `lineality`.
    pub fn from_generators(rays: &[RatVec], lineality: &[RatVec], ambient_dim: usize) -> Result<Cone> {
        let mut all: Vec<RatVec> = rays.to_vec();
        for l in lineality {
            all.push(l.clone());
            all.push(l.neg());
        }
        if all.is_empty() {
            return Ok(Cone::origin(ambient_dim));
        }
        Cone::from_rays(&all, ambient_dim)
    }

    /// The cone `{0}`.
    pub fn origin(ambient_dim: usize) -> Cone {
        Cone {
            ambient_dim,
            lineality: Vec::new(),
            rays: Vec::new(),
            equations: (0..ambient_dim).map(|i| RatVec::unit(ambient_dim, i)).collect(),
            facets: Vec::new(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn rays(&self) -> &[RatVec] {
        &self.rays
    }

    pub fn lineality(&self) -> &[RatVec] {
        &self.lineality
    }

    pub fn equations(&self) -> &[RatVec] {
        &self.equations
    }

    pub fn facets(&self) -> &[RatVec] {
        &self.facets
    }

    /// Full inequality list `a . x >= 0`: facets plus both signs of every equation.
    pub fn ineqs(&self) -> Vec<RatVec> {
        let mut out = self.facets.clone();
        for e in &self.equations {
            out.push(e.clone());
            out.push(e.neg());
        }
        out
    }

    /// Dimension of the linear span.
    pub fn dim(&self) -> usize {
        self.ambient_dim - self.equations.len()
    }

    pub fn is_pointed(&self) -> bool {
        self.lineality.is_empty()
    }

    /// Primitive generator of a one-dimensional pointed cone.
    pub fn ray_generator(&self) -> Option<&RatVec> {
        (self.dim() == 1 && self.is_pointed()).then(|| &self.rays[0])
    }

    pub fn is_origin(&self) -> bool {
        self.dim() == 0
    }

    pub fn contains(&self, x: &RatVec) -> bool {
        assert_eq!(x.dim(), self.ambient_dim, "point dimension mismatch");
        self.equations.iter().all(|e| e.dot(x).is_zero())
            && self.facets.iter().all(|a| !a.dot(x).is_negative())
    }

    /// `x` lies in the relative interior.
    pub fn contains_in_relative_interior(&self, x: &RatVec) -> bool {
        self.equations.iter().all(|e| e.dot(x).is_zero())
            && self.facets.iter().all(|a| a.dot(x).is_positive())
    }

    pub fn contains_cone(&self, other: &Cone) -> bool {
        other.rays.iter().all(|r| self.contains(r))
            && other
                .lineality
                .iter()
                .all(|l| self.contains(l) && self.contains(&l.neg()))
    }

    pub fn intersect(&self, other: &Cone) -> Cone {
        assert_eq!(self.ambient_dim, other.ambient_dim, "cone dimension mismatch");
        if self.contains_cone(other) {
            return other.clone();
        }
        if other.contains_cone(self) {
            return self.clone();
        }
        let mut ineqs = self.ineqs();
        ineqs.extend(other.ineqs());
        Cone::from_ineqs_unchecked(&ineqs, self.ambient_dim)
    }

    /// Image under a linear map, computed on generators.
    pub fn image(&self, map: &RatMat) -> Cone {
        assert_eq!(map.ncols(), self.ambient_dim, "map domain mismatch");
        let m = map.nrows();
        let mut gens: Vec<RatVec> = Vec::new();
        for r in &self.rays {
            gens.push(map.mul_vec(r));
        }
        for l in &self.lineality {
            let v = map.mul_vec(l);
            gens.push(v.neg());
            gens.push(v);
        }
        gens.retain(|v| !v.is_zero());
        if gens.is_empty() {
            return Cone::origin(m);
        }
        Cone::from_rays_unchecked(&gens, m)
    }

    fn incidence(&self) -> Vec<BitSet> {
        self.facets
            .iter()
            .map(|a| {
                let mut s = BitSet::new(self.rays.len());
                for (i, r) in self.rays.iter().enumerate() {
                    if a.dot(r).is_zero() {
                        s.insert(i);
                    }
                }
                s
            })
            .collect()
    }

    fn face_from_rays(&self, rays: &BitSet) -> Cone {
        let selected: Vec<RatVec> = rays.iter().map(|i| self.rays[i].clone()).collect();
        Cone::from_generators(&selected, &self.lineality, self.ambient_dim)
            .expect("face generators are nonzero and dimension-consistent")
    }

    /// Every face, from the minimal face (the lineality space) up to the cone
    /// itself. `active_set` indexes [`Cone::facets`].
    pub fn faces(&self) -> Vec<Face<Cone>> {
        let mut faces: Vec<Face<Cone>> = enumerate_faces(&self.incidence(), self.rays.len())
            .into_iter()
            .map(|(active, rays)| Face {
                active_set: active,
                geometry: self.face_from_rays(&rays),
            })
            .collect();
        faces.sort_by(|a, b| {
            (a.geometry.dim(), &a.geometry).cmp(&(b.geometry.dim(), &b.geometry))
        });
        faces
    }

    /// The unique face containing `x` in its relative interior.
    pub fn minimal_face(&self, x: &RatVec) -> Result<Face<Cone>> {
        if x.dim() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                found: x.dim(),
            });
        }
        if !self.contains(x) {
            return Err(Error::NotContained { point: x.clone() });
        }
        let active: Vec<usize> = (0..self.facets.len())
            .filter(|&i| self.facets[i].dot(x).is_zero())
            .collect();
        let mut rays = BitSet::new(self.rays.len());
        for (i, r) in self.rays.iter().enumerate() {
            if active.iter().all(|&a| self.facets[a].dot(r).is_zero()) {
                rays.insert(i);
            }
        }
        Ok(Face {
            active_set: active,
            geometry: self.face_from_rays(&rays),
        })
    }
}

impl fmt::Display for Cone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("cone<")?;
        let mut first = true;
        for r in &self.rays {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{r}")?;
        }
        for l in &self.lineality {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "±{l}")?;
        }
        f.write_str(">")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[i64]) -> RatVec {
        RatVec::from_ints(x)
    }

    #[test]
    fn rays_to_ineqs_small_cone() {
        // coordinates (y, a)
        let c = Cone::from_rays(&[v(&[0, 1]), v(&[1, 1])], 2).unwrap();
        assert_eq!(c.facets(), &[v(&[-1, 1]), v(&[1, 0])]);
        assert!(c.equations().is_empty());
    }

    #[test]
    fn orthant_facets() {
        let c = Cone::from_rays(&[v(&[1, 0]), v(&[0, 1])], 2).unwrap();
        assert_eq!(c.facets(), &[v(&[0, 1]), v(&[1, 0])]);
    }

    #[test]
    fn halfplane_lineality() {
        let c = Cone::from_rays(&[v(&[1, 0]), v(&[-1, 0]), v(&[0, 1])], 2).unwrap();
        assert_eq!(c.lineality(), &[v(&[1, 0])]);
        assert_eq!(c.facets(), &[v(&[0, 1])]);
        assert_eq!(c.rays(), &[v(&[0, 1])]);
        assert!(!c.is_pointed());
    }

    #[test]
    fn zero_ray_rejected() {
        assert_eq!(Cone::from_rays(&[v(&[0, 0])], 2), Err(Error::ZeroRay));
    }

    #[test]
    fn ineqs_to_rays_examples() {
        let c = Cone::from_ineqs(&[v(&[1, 0]), v(&[-1, 1])], 2).unwrap();
        assert_eq!(c.rays(), &[v(&[0, 1]), v(&[1, 1])]);
        let q = Cone::from_ineqs(&[v(&[1, 0]), v(&[0, 1])], 2).unwrap();
        assert_eq!(q.rays(), &[v(&[0, 1]), v(&[1, 0])]);
        let line = Cone::from_ineqs(&[], 1).unwrap();
        assert_eq!(line.lineality(), &[v(&[1])]);
        assert_eq!(line.dim(), 1);
    }

    #[test]
    fn redundant_generators_and_ineqs_are_dropped() {
        let c = Cone::from_rays(&[v(&[1, 0]), v(&[0, 1]), v(&[1, 1]), v(&[2, 0])], 2).unwrap();
        assert_eq!(c.rays(), &[v(&[0, 1]), v(&[1, 0])]);
        let d = Cone::from_ineqs(&[v(&[1, 0]), v(&[0, 1]), v(&[1, 1]), v(&[3, 0])], 2).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn dimensions() {
        assert_eq!(Cone::from_rays(&[v(&[0, 1]), v(&[1, 1])], 2).unwrap().dim(), 2);
        assert_eq!(Cone::from_rays(&[v(&[1, 1, 0])], 3).unwrap().dim(), 1);
        assert_eq!(Cone::origin(3).dim(), 0);
    }

    #[test]
    fn lower_dimensional_cone_equations() {
        let c = Cone::from_rays(&[v(&[1, 0, 0]), v(&[0, 1, 0])], 3).unwrap();
        assert_eq!(c.equations(), &[v(&[0, 0, 1])]);
        assert_eq!(c.facets(), &[v(&[0, 1, 0]), v(&[1, 0, 0])]);
        let same = Cone::from_ineqs(&c.ineqs(), 3).unwrap();
        assert_eq!(c, same);
    }

    #[test]
    fn containment() {
        let c = Cone::from_rays(&[v(&[1, 0]), v(&[0, 1])], 2).unwrap();
        assert!(!c.contains(&v(&[-1, 0])));
        assert!(c.contains(&v(&[0, 0])));
        assert!(c.contains(&v(&[3, 0])));
    }

    #[test]
    fn orthant_faces() {
        let c = Cone::from_rays(&[v(&[1, 0]), v(&[0, 1])], 2).unwrap();
        let faces = c.faces();
        assert_eq!(faces.len(), 4);
        assert!(faces[0].geometry.is_origin());
        assert_eq!(faces[3].geometry, c);
    }

    #[test]
    fn minimal_faces_of_the_orthant() {
        let c = Cone::from_rays(&[v(&[1, 0]), v(&[0, 1])], 2).unwrap();
        let ray = c.minimal_face(&v(&[1, 0])).unwrap();
        assert_eq!(ray.geometry, Cone::from_rays(&[v(&[1, 0])], 2).unwrap());
        assert_eq!(c.minimal_face(&v(&[1, 1])).unwrap().geometry, c);
        assert!(c.minimal_face(&v(&[0, 0])).unwrap().geometry.is_origin());
        assert!(matches!(
            c.minimal_face(&v(&[-1, 0])),
            Err(Error::NotContained { .. })
        ));
    }

    #[test]
    fn image_under_projection() {
        let c = Cone::from_rays(&[v(&[0, 1]), v(&[1, 1])], 2).unwrap();
        let proj = RatMat::from_ints(&[&[0, 1]]);
        assert_eq!(c.image(&proj), Cone::from_rays(&[v(&[1])], 1).unwrap());
    }
}
