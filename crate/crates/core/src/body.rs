//! Global bodies: pointed full-dimensional cones in `Q^(n + rho)` whose
//! fibers over class vectors are numerical Newton-Okounkov bodies.
//!
//! The first `n` coordinates are valuation coordinates, the last `rho` are
//! class coordinates. Fibers are polytopes in `Q^n`.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num::{One, Signed, Zero};

use crate::arith::{Rat, RatVec};
use crate::error::{Error, Result};
use crate::fans::{Fan, LinMap};
use crate::polyhedra::{Cone, Polytope};

#[derive(Clone, Debug)]
pub struct GlobalBody {
    valuation_dim: usize,
    class_dim: usize,
    cone: Cone,
    class_projection: LinMap,
    image: Cone,
    chambers: OnceLock<Fan>,
    basis: OnceLock<Basis>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisEntry {
    pub ray: RatVec,
    pub body: Polytope,
}

/// Minkowski basis: one entry per one-dimensional cone of the chamber fan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    pub entries: Vec<BasisEntry>,
    pub fan: Fan,
}

impl Basis {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn index_of(&self, ray: &RatVec) -> Option<usize> {
        self.entries.iter().position(|e| &e.ray == ray)
    }

    pub fn rays(&self) -> Vec<RatVec> {
        self.entries.iter().map(|e| e.ray.clone()).collect()
    }
}

/// Nonnegative weights on basis entries, sorted by basis index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub terms: Vec<(usize, Rat)>,
    /// Number of recursion levels used (at most the class dimension).
    pub depth: usize,
}

impl Decomposition {
    /// `sum weight_i * ray_i`.
    pub fn class(&self, basis: &Basis, class_dim: usize) -> RatVec {
        self.terms.iter().fold(RatVec::zeros(class_dim), |acc, (i, w)| {
            acc.add_scaled(w, &basis.entries[*i].ray)
        })
    }

    /// `sum weight_i * body_i` as a Minkowski sum.
    pub fn body(&self, basis: &Basis, valuation_dim: usize) -> Result<Polytope> {
        let mut acc = Polytope::point(&RatVec::zeros(valuation_dim));
        for (i, w) in &self.terms {
            acc = acc.minkowski_sum(&basis.entries[*i].body.scale(w)?)?;
        }
        Ok(acc)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompositionCheck {
    pub ok: bool,
    pub decomposition: Decomposition,
    /// The fiber over the class.
    pub lhs: Polytope,
    /// The weighted Minkowski sum of basis bodies.
    pub rhs: Polytope,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PairCheck {
    /// The two classes do not both lie in the minimal cone of the combination.
    HypothesisNotMet { minimal_cone: Cone },
    Checked {
        ok: bool,
        lhs: Polytope,
        rhs: Polytope,
    },
}

impl PairCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, PairCheck::Checked { ok: true, .. })
    }
}

fn ray_multiple(x: &RatVec, ray: &RatVec) -> Rat {
    let k = ray.first_nonzero().expect("ray generators are nonzero");
    &x[k] / &ray[k]
}

impl GlobalBody {
    /// Validates pointedness, full dimensionality and boundedness of fibers.
    pub fn new(cone: Cone, valuation_dim: usize, class_dim: usize) -> Result<GlobalBody> {
        let d = valuation_dim + class_dim;
        if cone.ambient_dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: cone.ambient_dim(),
            });
        }
        if let Some(line) = cone.lineality().first() {
            return Err(Error::NotPointed { line: line.clone() });
        }
        let mut ineqs = cone.ineqs();
        for j in valuation_dim..d {
            ineqs.push(RatVec::unit(d, j));
            ineqs.push(RatVec::unit(d, j).neg());
        }
        let kernel = Cone::from_ineqs(&ineqs, d)?;
        if let Some(ray) = kernel.rays().first() {
            return Err(Error::UnboundedFiber { ray: ray.clone() });
        }
        if let Some(eq) = cone.equations().first() {
            return Err(Error::NotFullDimensional {
                equation: eq.clone(),
            });
        }
        let class_projection = LinMap::coordinate_projection(d, valuation_dim..d);
        let image = class_projection.image(&cone);
        Ok(GlobalBody {
            valuation_dim,
            class_dim,
            cone,
            class_projection,
            image,
            chambers: OnceLock::new(),
            basis: OnceLock::new(),
        })
    }

    pub fn from_rays(rays: &[RatVec], valuation_dim: usize, class_dim: usize) -> Result<GlobalBody> {
        let cone = Cone::from_rays(rays, valuation_dim + class_dim)?;
        GlobalBody::new(cone, valuation_dim, class_dim)
    }

    pub fn from_ineqs(ineqs: &[RatVec], valuation_dim: usize, class_dim: usize) -> Result<GlobalBody> {
        let cone = Cone::from_ineqs(ineqs, valuation_dim + class_dim)?;
        GlobalBody::new(cone, valuation_dim, class_dim)
    }

    pub fn valuation_dim(&self) -> usize {
        self.valuation_dim
    }

    pub fn class_dim(&self) -> usize {
        self.class_dim
    }

    pub fn cone(&self) -> &Cone {
        &self.cone
    }

    pub fn class_projection(&self) -> &LinMap {
        &self.class_projection
    }

    /// Image of the body under the class projection (the pseudo-effective cone).
    pub fn image_cone(&self) -> &Cone {
        &self.image
    }

    fn check_class(&self, class: &RatVec) -> Result<()> {
        if class.dim() != self.class_dim {
            return Err(Error::DimensionMismatch {
                expected: self.class_dim,
                found: class.dim(),
            });
        }
        if !self.image.contains(class) {
            return Err(Error::NotPseudoEffective {
                class: class.clone(),
            });
        }
        Ok(())
    }

    /// `{y : (y, class) in cone}`.
    pub fn fiber(&self, class: &RatVec) -> Result<Polytope> {
        self.check_class(class)?;
        let n = self.valuation_dim;
        let ineqs: Vec<(RatVec, Rat)> = self
            .cone
            .facets()
            .iter()
            .map(|a| {
                let shift = a.slice(n..n + self.class_dim).dot(class);
                (a.slice(0..n), -shift)
            })
            .collect();
        Polytope::from_ineqs(&ineqs, n)
    }

    /// Projection of the face fan of the body onto the class space. Cached.
    pub fn chambers(&self) -> &Fan {
        self.chambers.get_or_init(|| {
            Fan::face_fan(&self.cone)
                .project(&self.class_projection)
                .expect("projection matches the body's ambient dimension")
        })
    }

    /// Fibers over the ray generators of the chamber fan. Cached.
    pub fn minkowski_basis(&self) -> &Basis {
        self.basis.get_or_init(|| {
            let fan = self.chambers().clone();
            let entries = fan
                .rays()
                .into_iter()
                .map(|ray| {
                    let body = self.fiber(&ray).expect("chamber rays lie in the image cone");
                    BasisEntry { ray, body }
                })
                .collect();
            Basis { entries, fan }
        })
    }

    /// Writes `class` as a nonnegative combination of basis rays by recursing
    /// on the dimension of its minimal cone in `basis.fan`.
    pub fn decompose(&self, basis: &Basis, class: &RatVec) -> Result<Decomposition> {
        self.check_class(class)?;
        let mut weights = BTreeMap::new();
        let depth = self.decompose_into(basis, class, &Rat::one(), usize::MAX, &mut weights)?;
        Ok(Decomposition {
            terms: weights.into_iter().filter(|(_, w)| !w.is_zero()).collect(),
            depth,
        })
    }

    fn decompose_into(
        &self,
        basis: &Basis,
        class: &RatVec,
        scale: &Rat,
        parent_dim: usize,
        weights: &mut BTreeMap<usize, Rat>,
    ) -> Result<usize> {
        if class.is_zero() {
            return Ok(0);
        }
        let cone = basis
            .fan
            .minimal_cone(class)
            .map_err(|_| Error::NotPseudoEffective {
                class: class.clone(),
            })?;
        if cone.dim() >= parent_dim {
            return Err(Error::Internal(format!(
                "minimal cone of {class} did not shrink (dim {})",
                cone.dim()
            )));
        }
        if let Some(ray) = cone.ray_generator() {
            let idx = basis
                .index_of(ray)
                .ok_or_else(|| Error::MissingBasisRay { ray: ray.clone() })?;
            *weights.entry(idx).or_insert_with(Rat::zero) += scale * ray_multiple(class, ray);
            return Ok(1);
        }
        let rays = cone.rays();
        for i in 0..rays.len() {
            for j in 0..rays.len() {
                if i == j {
                    continue;
                }
                let dir = rays[i].sub(&rays[j]);
                let (Some(up), Some(down)) = (
                    exit_time(&cone, class, &dir),
                    exit_time(&cone, class, &dir.neg()),
                ) else {
                    continue;
                };
                let total = &up + &down;
                let exit_up = class.add_scaled(&up, &dir);
                let exit_down = class.add_scaled(&-down.clone(), &dir);
                let d1 = self.decompose_into(
                    basis,
                    &exit_up,
                    &(scale * &down / &total),
                    cone.dim(),
                    weights,
                )?;
                let d2 = self.decompose_into(
                    basis,
                    &exit_down,
                    &(scale * &up / &total),
                    cone.dim(),
                    weights,
                )?;
                return Ok(1 + d1.max(d2));
            }
        }
        Err(Error::Internal(format!("no exiting direction for {class} in {cone}")))
    }

    pub fn verify_decomposition(&self, basis: &Basis, class: &RatVec) -> Result<DecompositionCheck> {
        let decomposition = self.decompose(basis, class)?;
        let lhs = self.fiber(class)?;
        let rhs = decomposition.body(basis, self.valuation_dim)?;
        Ok(DecompositionCheck {
            ok: lhs == rhs && decomposition.class(basis, self.class_dim) == *class,
            decomposition,
            lhs,
            rhs,
        })
    }

    /// Compares `fiber(a D1 + b D2)` with `a fiber(D1) + b fiber(D2)` when both
    /// classes lie in the minimal chamber of the combination.
    pub fn check_pair_additivity(
        &self,
        d1: &RatVec,
        d2: &RatVec,
        a: &Rat,
        b: &Rat,
    ) -> Result<PairCheck> {
        for w in [a, b] {
            if w.is_negative() {
                return Err(Error::NegativeScale(w.to_string()));
            }
        }
        self.check_class(d1)?;
        self.check_class(d2)?;
        let target = d1.scale(a).add(&d2.scale(b));
        let minimal_cone = self.chambers().minimal_cone(&target)?;
        if !(minimal_cone.contains(d1) && minimal_cone.contains(d2)) {
            return Ok(PairCheck::HypothesisNotMet { minimal_cone });
        }
        let lhs = self.fiber(&target)?;
        let rhs = self.fiber(d1)?.scale(a)?.minkowski_sum(&self.fiber(d2)?.scale(b)?)?;
        Ok(PairCheck::Checked {
            ok: lhs == rhs,
            lhs,
            rhs,
        })
    }
}

/// `max {t >= 0 : x + t dir in cone}`, or `None` if unbounded. The cone's
/// equations hold along `dir` whenever `dir` lies in its span.
pub(crate) fn exit_time(cone: &Cone, x: &RatVec, dir: &RatVec) -> Option<Rat> {
    cone.facets()
        .iter()
        .filter_map(|a| {
            let rate = a.dot(dir);
            rate.is_negative().then(|| a.dot(x) / -rate)
        })
        .min()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{lp_solve, rat, Constraint, LinProgram, LpOutcome};

    fn v(x: &[i64]) -> RatVec {
        RatVec::from_ints(x)
    }

    fn body(rays: &[&[i64]], n: usize, rho: usize) -> GlobalBody {
        let rays: Vec<RatVec> = rays.iter().map(|r| v(r)).collect();
        GlobalBody::from_rays(&rays, n, rho).unwrap()
    }

    fn interval() -> GlobalBody {
        body(&[&[0, 1], &[1, 1]], 1, 1)
    }

    fn two_chamber() -> GlobalBody {
        body(&[&[0, 1, 0], &[1, 1, 0], &[0, 0, 1], &[2, 1, 1]], 1, 2)
    }

    fn segment(a: i64, b: i64) -> Polytope {
        Polytope::from_points(&[v(&[a]), v(&[b])], 1).unwrap()
    }

    /// Min and max of the valuation coordinate over the slice, via the
    /// global cone's inequalities and the LP solver.
    fn lp_slice(b: &GlobalBody, class: &RatVec) -> (Rat, Rat) {
        let d = b.valuation_dim() + b.class_dim();
        let mut program = LinProgram::maximize(v(&[1]).concat(&RatVec::zeros(b.class_dim())));
        for a in b.cone().ineqs() {
            program.push(Constraint::ge(a, rat(0)));
        }
        for j in 0..b.class_dim() {
            program.push(Constraint::eq(RatVec::unit(d, 1 + j), class[j].clone()));
        }
        let hi = lp_solve(&program).unwrap().value().unwrap().clone();
        program.objective = program.objective.neg();
        let lo = -lp_solve(&program).unwrap().value().unwrap().clone();
        (lo, hi)
    }

    #[test]
    fn validation() {
        assert!(matches!(
            GlobalBody::from_rays(&[v(&[1, 0]), v(&[0, 1])], 1, 1),
            Err(Error::UnboundedFiber { .. })
        ));
        assert!(matches!(
            GlobalBody::from_rays(&[v(&[0, 1]), v(&[1, 1]), v(&[-1, -1])], 1, 1),
            Err(Error::NotPointed { .. })
        ));
        assert!(matches!(
            GlobalBody::from_rays(&[v(&[0, 1])], 1, 1),
            Err(Error::NotFullDimensional { .. })
        ));
    }

    #[test]
    fn fibers() {
        assert_eq!(interval().fiber(&v(&[2])).unwrap(), segment(0, 2));
        let b = two_chamber();
        assert_eq!(b.fiber(&v(&[1, 1])).unwrap(), segment(0, 2));
        assert_eq!(b.fiber(&v(&[0, 1])).unwrap(), Polytope::point(&v(&[0])));
        assert!(matches!(
            b.fiber(&v(&[-1, 1])),
            Err(Error::NotPseudoEffective { .. })
        ));
    }

    #[test]
    fn fibers_agree_with_lp_slices() {
        let b = two_chamber();
        for a in 0..5 {
            for c in 0..5 {
                let class = v(&[a, c]);
                let (lo, hi) = lp_slice(&b, &class);
                assert_eq!(lo, rat(0));
                assert_eq!(hi, rat((a + c).min(2 * a)));
                let expected = Polytope::from_points(&[RatVec::new(vec![lo]), RatVec::new(vec![hi])], 1).unwrap();
                assert_eq!(b.fiber(&class).unwrap(), expected);
            }
        }
    }

    #[test]
    fn chamber_fans() {
        assert_eq!(interval().chambers().len(), 2);
        let quadrant = body(&[&[0, 1, 0], &[1, 1, 0], &[0, 0, 1]], 1, 2);
        assert_eq!(quadrant.chambers().len(), 4);
        assert_eq!(two_chamber().chambers().rays(), vec![v(&[0, 1]), v(&[1, 0]), v(&[1, 1])]);
    }

    #[test]
    fn bases() {
        let basis = interval().minkowski_basis().clone();
        assert_eq!(basis.rays(), vec![v(&[1])]);
        assert_eq!(basis.entries[0].body, segment(0, 1));

        let basis = two_chamber().minkowski_basis().clone();
        let pairs: Vec<(RatVec, Polytope)> = basis
            .entries
            .iter()
            .map(|e| (e.ray.clone(), e.body.clone()))
            .collect();
        assert_eq!(
            pairs,
            vec![
                (v(&[0, 1]), Polytope::point(&v(&[0]))),
                (v(&[1, 0]), segment(0, 1)),
                (v(&[1, 1]), segment(0, 2)),
            ]
        );

        let quadrant = body(&[&[0, 1, 0], &[1, 1, 0], &[0, 0, 1]], 1, 2);
        assert_eq!(quadrant.minkowski_basis().rays(), vec![v(&[0, 1]), v(&[1, 0])]);
    }

    fn weights(b: &GlobalBody, class: &[i64]) -> Vec<(RatVec, Rat)> {
        let basis = b.minkowski_basis();
        b.decompose(basis, &v(class))
            .unwrap()
            .terms
            .into_iter()
            .map(|(i, w)| (basis.entries[i].ray.clone(), w))
            .collect()
    }

    #[test]
    fn decompositions() {
        let b = two_chamber();
        assert_eq!(weights(&b, &[2, 1]), vec![(v(&[1, 0]), rat(1)), (v(&[1, 1]), rat(1))]);
        assert_eq!(weights(&b, &[1, 2]), vec![(v(&[0, 1]), rat(1)), (v(&[1, 1]), rat(1))]);
        assert_eq!(weights(&b, &[3, 0]), vec![(v(&[1, 0]), rat(3))]);
        assert!(weights(&b, &[0, 0]).is_empty());
        let basis = b.minkowski_basis();
        assert!(b.decompose(basis, &v(&[3, 1])).unwrap().depth <= 2);
    }

    #[test]
    fn verified_decompositions() {
        let b = two_chamber();
        let basis = b.minkowski_basis();
        for (class, fiber) in [
            (v(&[2, 1]), segment(0, 3)),
            (v(&[1, 1]), segment(0, 2)),
            (v(&[0, 1]), Polytope::point(&v(&[0]))),
        ] {
            let check = b.verify_decomposition(basis, &class).unwrap();
            assert!(check.ok, "{class}");
            assert_eq!(check.lhs, fiber);
        }
    }

    #[test]
    fn corrupted_basis_is_detected() {
        let b = two_chamber();
        let wall = v(&[1, 1]);
        let good = b.minkowski_basis();
        let cones: Vec<Cone> = good
            .fan
            .cones()
            .iter()
            .filter(|c| !c.rays().contains(&wall))
            .cloned()
            .collect();
        let corrupted = Basis {
            entries: good.entries.iter().filter(|e| e.ray != wall).cloned().collect(),
            fan: Fan::close(&cones, 2).unwrap(),
        };
        let check = b.verify_decomposition(&corrupted, &v(&[2, 1])).unwrap();
        assert!(!check.ok);
        assert_eq!(check.lhs, segment(0, 3));
        assert_eq!(check.rhs, segment(0, 2));
    }

    #[test]
    fn pair_additivity() {
        let b = two_chamber();
        let one = rat(1);
        assert!(b
            .check_pair_additivity(&v(&[1, 0]), &v(&[1, 1]), &one, &one)
            .unwrap()
            .is_ok());
        assert!(matches!(
            b.check_pair_additivity(&v(&[1, 0]), &v(&[0, 1]), &one, &one).unwrap(),
            PairCheck::HypothesisNotMet { .. }
        ));
        // Without the hypothesis the identity really fails.
        let direct = b.fiber(&v(&[1, 1])).unwrap();
        let summed = b
            .fiber(&v(&[1, 0]))
            .unwrap()
            .minkowski_sum(&b.fiber(&v(&[0, 1])).unwrap())
            .unwrap();
        assert_ne!(direct, summed);
        assert!(b
            .check_pair_additivity(&v(&[2, 1]), &v(&[2, 1]), &rat(2), &rat(3))
            .unwrap()
            .is_ok());
    }

    #[test]
    fn exit_times_match_lp() {
        let cone = Cone::from_rays(&[v(&[1, 0]), v(&[1, 1])], 2).unwrap();
        let x = v(&[3, 1]);
        let dir = v(&[0, 1]);
        let t = exit_time(&cone, &x, &dir).unwrap();
        let mut program = LinProgram::maximize(v(&[1]));
        for a in cone.ineqs() {
            // a . (x + t dir) >= 0
            program.push(Constraint::ge(RatVec::new(vec![a.dot(&dir)]), -a.dot(&x)));
        }
        match lp_solve(&program).unwrap() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, t),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(t, rat(2));
        assert!(exit_time(&cone, &x, &v(&[1, 0])).is_none());
    }
}
