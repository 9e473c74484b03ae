use std::collections::HashMap;
use std::fmt;

use num::{One, Signed, Zero};

use super::bitset::BitSet;
use super::cone::Cone;
use super::face::{enumerate_faces, Face};
use crate::arith::{rank_of, Rat, RatMat, RatVec};
use crate::error::{Error, Result};

/// Bounded rational polytope.
///
/// Internally a polytope is the cone over `{(x, 1) : x in P}` (homogenizing
/// coordinate last), so both representations come out of the same canonical
/// cone machinery: vertices sorted lexicographically, facet inequalities
/// `a . x >= b` with `(a, -b)` primitive integer, and an affine-hull basis.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Polytope {
    ambient_dim: usize,
    vertices: Vec<RatVec>,
    facets: Vec<(RatVec, Rat)>,
    equations: Vec<(RatVec, Rat)>,
    homogenized: Cone,
}

fn lift(p: &RatVec) -> RatVec {
    p.concat(&RatVec::from_ints(&[1]))
}

/// `(a, c)` with `a . x + c * t >= 0` becomes `a . x >= -c`.
fn dehomogenize(v: &RatVec, d: usize) -> (RatVec, Rat) {
    (v.slice(0..d), -v[d].clone())
}

impl Polytope {
    /// Convex hull of a finite nonempty point set.
    pub fn from_points(points: &[RatVec], ambient_dim: usize) -> Result<Polytope> {
        if points.is_empty() {
            return Err(Error::EmptyPolytope);
        }
        for p in points {
            if p.dim() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: ambient_dim,
                    found: p.dim(),
                });
            }
        }
        let mut lifted: Vec<RatVec> = points.iter().map(lift).collect();
        lifted.sort();
        lifted.dedup();
        Self::from_homogenized(Cone::from_rays_unchecked(&lifted, ambient_dim + 1), ambient_dim)
    }

    /// `{x : a . x >= b for every (a, b)}`; must be nonempty and bounded.
    pub fn from_ineqs(ineqs: &[(RatVec, Rat)], ambient_dim: usize) -> Result<Polytope> {
        let mut hom = Vec::with_capacity(ineqs.len() + 1);
        for (a, b) in ineqs {
            if a.dim() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: ambient_dim,
                    found: a.dim(),
                });
            }
            hom.push(a.concat(&RatVec::new(vec![-b.clone()])));
        }
        hom.push(RatVec::unit(ambient_dim + 1, ambient_dim));
        Self::from_homogenized(Cone::from_ineqs_unchecked(&hom, ambient_dim + 1), ambient_dim)
    }

    /// Same as [`Polytope::from_ineqs`] with additional equations `a . x = b`.
    pub fn from_constraints(
        ineqs: &[(RatVec, Rat)],
        equations: &[(RatVec, Rat)],
        ambient_dim: usize,
    ) -> Result<Polytope> {
        let mut all = ineqs.to_vec();
        for (a, b) in equations {
            all.push((a.clone(), b.clone()));
            all.push((a.neg(), -b.clone()));
        }
        Self::from_ineqs(&all, ambient_dim)
    }

    fn from_homogenized(cone: Cone, d: usize) -> Result<Polytope> {
        if let Some(l) = cone.lineality().first() {
            return Err(Error::Unbounded {
                direction: l.slice(0..d),
            });
        }
        if let Some(r) = cone.rays().iter().find(|r| r[d].is_zero()) {
            return Err(Error::Unbounded {
                direction: r.slice(0..d),
            });
        }
        if cone.rays().is_empty() {
            return Err(Error::EmptyPolytope);
        }
        let mut vertices: Vec<RatVec> = cone
            .rays()
            .iter()
            .map(|r| r.slice(0..d).scale(&(Rat::one() / &r[d])))
            .collect();
        vertices.sort();
        let facets = cone
            .facets()
            .iter()
            .filter(|f| cone.rays().iter().any(|r| f.dot(r).is_zero()))
            .map(|f| dehomogenize(f, d))
            .collect();
        let equations = cone
            .equations()
            .iter()
            .map(|e| dehomogenize(e, d))
            .collect();
        Ok(Polytope {
            ambient_dim: d,
            vertices,
            facets,
            equations,
            homogenized: cone,
        })
    }

    pub fn point(p: &RatVec) -> Polytope {
        Self::from_points(std::slice::from_ref(p), p.dim()).expect("a single point is a polytope")
    }

    /// Standard simplex `conv{0, e_1, ..., e_n}` scaled by `side`.
    pub fn standard_simplex(n: usize, side: &Rat) -> Result<Polytope> {
        let mut pts = vec![RatVec::zeros(n)];
        pts.extend((0..n).map(|i| RatVec::unit(n, i).scale(side)));
        Self::from_points(&pts, n)
    }

    /// Axis-aligned box `[lo_i, hi_i]`.
    pub fn cuboid(lo: &RatVec, hi: &RatVec) -> Result<Polytope> {
        let n = lo.dim();
        let mut ineqs = Vec::with_capacity(2 * n);
        for i in 0..n {
            ineqs.push((RatVec::unit(n, i), lo[i].clone()));
            ineqs.push((RatVec::unit(n, i).neg(), -hi[i].clone()));
        }
        Self::from_ineqs(&ineqs, n)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn vertices(&self) -> &[RatVec] {
        &self.vertices
    }

    /// Facet inequalities `a . x >= b`.
    pub fn facets(&self) -> &[(RatVec, Rat)] {
        &self.facets
    }

    /// Affine-hull equations `a . x = b`.
    pub fn equations(&self) -> &[(RatVec, Rat)] {
        &self.equations
    }

    /// Every defining inequality, equations included as opposite pairs.
    pub fn ineqs(&self) -> Vec<(RatVec, Rat)> {
        let mut out = self.facets.clone();
        for (a, b) in &self.equations {
            out.push((a.clone(), b.clone()));
            out.push((a.neg(), -b.clone()));
        }
        out
    }

    /// Dimension of the affine hull.
    pub fn dim(&self) -> usize {
        self.homogenized.dim() - 1
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.dim() == self.ambient_dim
    }

    pub fn contains(&self, x: &RatVec) -> bool {
        assert_eq!(x.dim(), self.ambient_dim, "point dimension mismatch");
        self.equations.iter().all(|(a, b)| a.dot(x) == *b)
            && self.facets.iter().all(|(a, b)| a.dot(x) >= *b)
    }

    pub fn contains_polytope(&self, other: &Polytope) -> bool {
        other.vertices.iter().all(|v| self.contains(v))
    }

    pub fn minkowski_sum(&self, other: &Polytope) -> Result<Polytope> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                found: other.ambient_dim,
            });
        }
        if other.vertices.len() == 1 {
            return Ok(self.translate(&other.vertices[0]));
        }
        if self.vertices.len() == 1 {
            return Ok(other.translate(&self.vertices[0]));
        }
        let mut sums = Vec::with_capacity(self.vertices.len() * other.vertices.len());
        for p in &self.vertices {
            for q in &other.vertices {
                sums.push(p.add(q));
            }
        }
        Polytope::from_points(&sums, self.ambient_dim)
    }

    /// `{alpha * x : x in P}`.
    pub fn scale(&self, alpha: &Rat) -> Result<Polytope> {
        if alpha.is_negative() {
            return Err(Error::NegativeScale(alpha.to_string()));
        }
        if alpha.is_zero() {
            return Ok(Polytope::point(&RatVec::zeros(self.ambient_dim)));
        }
        if alpha.is_one() {
            return Ok(self.clone());
        }
        let pts: Vec<RatVec> = self.vertices.iter().map(|v| v.scale(alpha)).collect();
        Polytope::from_points(&pts, self.ambient_dim)
    }

    pub fn translate(&self, t: &RatVec) -> Polytope {
        let pts: Vec<RatVec> = self.vertices.iter().map(|v| v.add(t)).collect();
        Polytope::from_points(&pts, self.ambient_dim).expect("translate preserves validity")
    }

    /// Intersection with the affine subspace `{x : a . x = b}` for each given equation.
    pub fn intersect_affine(&self, equations: &[(RatVec, Rat)]) -> Result<Polytope> {
        Polytope::from_constraints(&self.ineqs(), equations, self.ambient_dim)
    }

    fn incidence(&self) -> Vec<BitSet> {
        // Tightness is tested on integer multiples of (v, 1) and (a, -b).
        let one = RatVec::new(vec![Rat::one()]);
        let points: Vec<RatVec> = self
            .vertices
            .iter()
            .map(|v| v.concat(&one).primitive())
            .collect();
        self.facets
            .iter()
            .map(|(a, b)| {
                let normal = a.concat(&RatVec::new(vec![-b.clone()])).primitive();
                let mut s = BitSet::new(points.len());
                for (i, p) in points.iter().enumerate() {
                    if normal.dot(p).is_zero() {
                        s.insert(i);
                    }
                }
                s
            })
            .collect()
    }

    fn face_from_vertices(&self, set: &BitSet) -> Polytope {
        let pts: Vec<RatVec> = set.iter().map(|i| self.vertices[i].clone()).collect();
        Polytope::from_points(&pts, self.ambient_dim).expect("nonempty vertex subset")
    }

    /// All nonempty faces, including the polytope itself. `active_set`
    /// indexes [`Polytope::facets`].
    pub fn faces(&self) -> Vec<Face<Polytope>> {
        let mut faces: Vec<Face<Polytope>> = enumerate_faces(&self.incidence(), self.vertices.len())
            .into_iter()
            .filter(|(_, set)| !set.is_empty())
            .map(|(active, set)| Face {
                active_set: active,
                geometry: self.face_from_vertices(&set),
            })
            .collect();
        faces.sort_by(|a, b| (a.geometry.dim(), &a.geometry).cmp(&(b.geometry.dim(), &b.geometry)));
        faces
    }

    /// The unique face containing `x` in its relative interior.
    pub fn minimal_face(&self, x: &RatVec) -> Result<Face<Polytope>> {
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
            .filter(|&i| self.facets[i].0.dot(x) == self.facets[i].1)
            .collect();
        let mut set = BitSet::new(self.vertices.len());
        for (i, v) in self.vertices.iter().enumerate() {
            if active.iter().all(|&f| self.facets[f].0.dot(v) == self.facets[f].1) {
                set.insert(i);
            }
        }
        Ok(Face {
            active_set: active,
            geometry: self.face_from_vertices(&set),
        })
    }

    fn affine_dim(&self, set: &BitSet) -> usize {
        let mut it = set.iter();
        let Some(base) = it.next() else {
            return 0;
        };
        let diffs: Vec<RatVec> = it
            .map(|i| self.vertices[i].sub(&self.vertices[base]))
            .collect();
        rank_of(&diffs, self.ambient_dim)
    }

    /// Exact Lebesgue volume in the ambient space; zero unless full-dimensional.
    ///
    /// Computed by a pulling triangulation: each face is split into cones from
    /// its lowest-index vertex over the facets of the face not containing it,
    /// recursively down to points, and simplex volumes are exact determinants.
    pub fn volume(&self) -> Rat {
        let n = self.ambient_dim;
        if !self.is_full_dimensional() {
            return Rat::zero();
        }
        if n == 0 {
            return Rat::one();
        }
        let incidence = self.incidence();
        let mut dims: HashMap<BitSet, usize> = HashMap::new();
        let top = BitSet::full(self.vertices.len()).trimmed();
        let mut simplices = Vec::new();
        self.triangulate(&incidence, &top, n, &mut dims, &mut Vec::new(), &mut simplices);
        let mut total = Rat::zero();
        for simplex in simplices {
            let base = &self.vertices[simplex[0]];
            let rows: Vec<RatVec> = simplex[1..]
                .iter()
                .map(|&i| self.vertices[i].sub(base))
                .collect();
            total += RatMat::from_rows(rows, n).determinant().abs();
        }
        let factorial: Rat = (1..=n as i64).map(|k| Rat::from_integer(k.into())).product();
        total / factorial
    }

    fn triangulate(
        &self,
        incidence: &[BitSet],
        face: &BitSet,
        face_dim: usize,
        dims: &mut HashMap<BitSet, usize>,
        apexes: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let base = face.iter().next().expect("faces are nonempty");
        if face_dim == 0 {
            let mut simplex = apexes.clone();
            simplex.push(base);
            out.push(simplex);
            return;
        }
        let mut subfaces: Vec<BitSet> = Vec::new();
        for facet in incidence {
            let sub = face.intersection(facet).trimmed();
            if sub.contains(base) || sub.is_empty() || subfaces.contains(&sub) {
                continue;
            }
            let dim = *dims
                .entry(sub.clone())
                .or_insert_with(|| self.affine_dim(&sub));
            if dim + 1 == face_dim {
                subfaces.push(sub);
            }
        }
        apexes.push(base);
        for sub in subfaces {
            self.triangulate(incidence, &sub, face_dim - 1, dims, apexes, out);
        }
        apexes.pop();
    }
}

impl fmt::Display for Polytope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("conv{")?;
        for (i, v) in self.vertices.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat, ratio};

    fn v(x: &[i64]) -> RatVec {
        RatVec::from_ints(x)
    }

    fn segment(a: i64, b: i64) -> Polytope {
        Polytope::from_points(&[v(&[a]), v(&[b])], 1).unwrap()
    }

    fn unit_square() -> Polytope {
        Polytope::cuboid(&v(&[0, 0]), &v(&[1, 1])).unwrap()
    }

    #[test]
    fn square_representations() {
        let sq = unit_square();
        assert_eq!(sq.vertices(), &[v(&[0, 0]), v(&[0, 1]), v(&[1, 0]), v(&[1, 1])]);
        assert_eq!(sq.facets().len(), 4);
        assert!(sq.equations().is_empty());
        let hull = Polytope::from_points(
            &[v(&[1, 1]), v(&[0, 0]), v(&[1, 0]), v(&[0, 1]), v(&[1, 1])],
            2,
        )
        .unwrap();
        assert_eq!(hull, sq);
    }

    #[test]
    fn unbounded_and_empty_are_rejected() {
        let half_line = [(v(&[1]), rat(0))];
        assert!(matches!(
            Polytope::from_ineqs(&half_line, 1),
            Err(Error::Unbounded { .. })
        ));
        let empty = [(v(&[1]), rat(1)), (v(&[-1]), rat(0))];
        assert_eq!(Polytope::from_ineqs(&empty, 1), Err(Error::EmptyPolytope));
        assert_eq!(Polytope::from_points(&[], 2), Err(Error::EmptyPolytope));
    }

    #[test]
    fn dimensions() {
        assert_eq!(segment(0, 2).dim(), 1);
        assert_eq!(Polytope::point(&v(&[0, 0])).dim(), 0);
        let seg2 = Polytope::from_points(&[v(&[0, 0]), v(&[1, 0])], 2).unwrap();
        assert_eq!(seg2.dim(), 1);
        assert_eq!(seg2.equations().len(), 1);
    }

    #[test]
    fn face_counts() {
        assert_eq!(unit_square().faces().len(), 9);
        assert_eq!(segment(0, 1).faces().len(), 3);
        assert_eq!(Polytope::point(&v(&[3])).faces().len(), 1);
        let tri = Polytope::standard_simplex(3, &rat(1)).unwrap();
        assert_eq!(tri.faces().len(), 15);
    }

    #[test]
    fn minimal_face_on_square() {
        let sq = unit_square();
        let edge = sq.minimal_face(&v(&[1, 0]).scale(&ratio(1, 2))).unwrap();
        assert_eq!(edge.geometry, Polytope::from_points(&[v(&[0, 0]), v(&[1, 0])], 2).unwrap());
        assert_eq!(edge.active_set.len(), 1);
        let corner = sq.minimal_face(&v(&[1, 1])).unwrap();
        assert_eq!(corner.geometry, Polytope::point(&v(&[1, 1])));
        let body = sq.minimal_face(&RatVec::new(vec![ratio(1, 3), ratio(1, 2)])).unwrap();
        assert_eq!(body.geometry, sq);
        assert!(matches!(
            sq.minimal_face(&v(&[2, 0])),
            Err(Error::NotContained { .. })
        ));
    }

    #[test]
    fn minkowski_examples() {
        assert_eq!(segment(0, 1).minkowski_sum(&segment(0, 2)).unwrap(), segment(0, 3));
        let shifted = unit_square().minkowski_sum(&Polytope::point(&v(&[5, 5]))).unwrap();
        assert_eq!(shifted, Polytope::cuboid(&v(&[5, 5]), &v(&[6, 6])).unwrap());
        let tri = Polytope::standard_simplex(2, &rat(1)).unwrap();
        let seg = Polytope::from_points(&[v(&[0, 0]), v(&[1, 0])], 2).unwrap();
        let sum = tri.minkowski_sum(&seg).unwrap();
        let expected =
            Polytope::from_points(&[v(&[0, 0]), v(&[2, 0]), v(&[1, 1]), v(&[0, 1])], 2).unwrap();
        assert_eq!(sum, expected);
        let wrong = Polytope::point(&v(&[0]));
        assert!(matches!(
            tri.minkowski_sum(&wrong),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn scaling() {
        assert_eq!(segment(0, 2).scale(&ratio(1, 2)).unwrap(), segment(0, 1));
        assert_eq!(unit_square().scale(&rat(1)).unwrap(), unit_square());
        assert_eq!(
            unit_square().scale(&rat(3)).unwrap(),
            Polytope::cuboid(&v(&[0, 0]), &v(&[3, 3])).unwrap()
        );
        assert_eq!(unit_square().scale(&rat(0)).unwrap(), Polytope::point(&v(&[0, 0])));
        assert!(matches!(
            unit_square().scale(&rat(-1)),
            Err(Error::NegativeScale(_))
        ));
    }

    #[test]
    fn volumes() {
        assert_eq!(Polytope::standard_simplex(2, &rat(1)).unwrap().volume(), ratio(1, 2));
        assert_eq!(unit_square().volume(), rat(1));
        let seg = Polytope::from_points(&[v(&[0, 0]), v(&[1, 0])], 2).unwrap();
        assert_eq!(seg.volume(), rat(0));
        assert_eq!(segment(-1, 3).volume(), rat(4));
        let cube = Polytope::cuboid(&v(&[0, 0, 0]), &v(&[1, 2, 3])).unwrap();
        assert_eq!(cube.volume(), rat(6));
        let octahedron = Polytope::from_points(
            &[
                v(&[1, 0, 0]),
                v(&[-1, 0, 0]),
                v(&[0, 1, 0]),
                v(&[0, -1, 0]),
                v(&[0, 0, 1]),
                v(&[0, 0, -1]),
            ],
            3,
        )
        .unwrap();
        assert_eq!(octahedron.volume(), ratio(4, 3));
    }

    #[test]
    fn containment() {
        let sq = unit_square();
        assert!(sq.contains(&RatVec::new(vec![ratio(1, 2), ratio(1, 2)])));
        assert!(!sq.contains(&v(&[2, 0])));
    }
}
