//! Numerical Kodaira dimension of a class from fiber geometry.
//!
//! Two sides are computed independently: the dimension of the fiber over `D`,
//! and the order of vanishing at `t = 0` of `t -> vol(fiber(D + tA))` for an
//! interior class `A`. On a segment where the minimal chamber of `D + tA` is
//! constant the fibers are Minkowski combinations with weights affine in `t`,
//! so the volume is a polynomial of degree at most `n` in `t`. It is recovered
//! by exact interpolation and checked at a held-out sample.
//!
//! Volumes are Euclidean volumes of fibers. Algebraic volumes differ by a
//! fixed positive factor, which does not change any order of vanishing.
//! Distances are L-infinity distances, each one an exact LP.

use std::fmt;

use num::{Integer, One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::arith::{
    complement_basis, lp_solve, rat, solve_linear, Constraint, LinProgram, LinearSolution,
    LpOutcome, Rat, RatMat, RatVec,
};
use crate::body::GlobalBody;
use crate::error::{Error, Result};
use crate::polyhedra::Polytope;

/// Exact polynomial in `t`, valid on `(0, t0]`. `coefficients[k]` multiplies `t^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VolPoly {
    pub coefficients: Vec<Rat>,
    pub t0: Rat,
}

impl VolPoly {
    pub fn eval(&self, t: &Rat) -> Rat {
        self.coefficients
            .iter()
            .rev()
            .fold(Rat::zero(), |acc, c| acc * t + c)
    }

    /// Index of the lowest nonzero coefficient.
    pub fn order_of_vanishing(&self) -> Option<usize> {
        self.coefficients.iter().position(|c| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.order_of_vanishing().is_none()
    }
}

impl fmt::Display for VolPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => c.to_string(),
                1 => format!("{c}*t"),
                _ => format!("{c}*t^{k}"),
            })
            .collect();
        if terms.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&terms.join(" + "))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InscribedSimplex {
    /// Side length of the largest standard simplex that fits.
    pub size: Rat,
    /// Position of its origin vertex.
    pub translation: RatVec,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SandwichSample {
    pub t: Rat,
    pub inner: bool,
    /// Largest L-infinity distance from a vertex of `fiber(D + tA)` to `fiber(D)`.
    pub distance: Rat,
    pub ratio: Rat,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SandwichReport {
    pub t0: Rat,
    pub epsilon: Rat,
    pub translation: RatVec,
    pub samples: Vec<SandwichSample>,
    /// Largest observed distance ratio.
    pub outer_constant: Rat,
    pub inner_ok: bool,
    pub outer_ok: bool,
}

impl SandwichReport {
    pub fn passed(&self) -> bool {
        self.inner_ok && self.outer_ok
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RhoEstimate {
    pub max_ratio: Rat,
    /// Accepted samples.
    pub samples: usize,
    /// Draws rejected because they project into the ray through the class.
    pub rejected: usize,
    /// Samples where the ratio at `2x` differed from the ratio at `x`.
    pub scale_violations: usize,
}

pub fn num_dim_fiber(body: &GlobalBody, class: &RatVec) -> Result<usize> {
    Ok(body.fiber(class)?.dim())
}

/// Sum of the primitive generators of the image cone's extreme rays.
pub fn pick_ample(body: &GlobalBody) -> Result<RatVec> {
    let image = body.image_cone();
    if image.is_origin() {
        return Err(Error::DegenerateImage);
    }
    Ok(image
        .rays()
        .iter()
        .fold(RatVec::zeros(body.class_dim()), |acc, r| acc.add(r)))
}

fn check_interior(body: &GlobalBody, ample: &RatVec) -> Result<()> {
    if ample.dim() != body.class_dim() {
        return Err(Error::DimensionMismatch {
            expected: body.class_dim(),
            found: ample.dim(),
        });
    }
    if !body.image_cone().contains_in_relative_interior(ample) {
        return Err(Error::NotInterior {
            class: ample.clone(),
        });
    }
    Ok(())
}

/// Largest `delta = 2^-k` such that no hyperplane of the chamber fan changes
/// side along `{D + tA : 0 < t <= delta}`. Every chamber is cut out by these
/// hyperplanes, so the set of chambers containing `D + tA`, hence its minimal
/// chamber, is constant there.
pub fn chamber_stable_t0(body: &GlobalBody, class: &RatVec, ample: &RatVec) -> Result<Rat> {
    body.fiber(class)?;
    check_interior(body, ample)?;
    let fan = body.chambers();
    // Scaling both vectors by one positive factor leaves every root unchanged.
    let factor = Rat::from_integer(class.common_denominator().lcm(&ample.common_denominator()));
    let (x, dir) = (class.scale(&factor), ample.scale(&factor));
    let first_crossing = fan
        .hyperplanes()
        .iter()
        .filter_map(|h| {
            let slope = h.dot(&dir);
            if slope.is_zero() {
                return None;
            }
            let root = -h.dot(&x) / slope;
            root.is_positive().then_some(root)
        })
        .min();
    let mut delta = Rat::one();
    for _ in 0..256 {
        if first_crossing.as_ref().is_none_or(|r| *r > delta) {
            return Ok(delta);
        }
        delta /= rat(2);
    }
    Err(Error::ChamberSegmentTooShort(format!(
        "no stable segment found for {class} + t {ample}"
    )))
}

/// Computed on an integer multiple of the class, using `vol(fiber(sD)) = s^n vol(fiber(D))`.
fn fiber_volume(body: &GlobalBody, class: &RatVec, ample: &RatVec, t: &Rat) -> Result<Rat> {
    let point = class.add_scaled(t, ample);
    let factor = Rat::from_integer(point.common_denominator());
    let volume = body.fiber(&point.scale(&factor))?.volume();
    Ok(volume / factor.pow(body.valuation_dim() as i32))
}

/// Exact `vol(fiber(D + tA))` on the chamber-stable segment.
pub fn volume_polynomial(body: &GlobalBody, class: &RatVec, ample: &RatVec) -> Result<VolPoly> {
    let t0 = chamber_stable_t0(body, class, ample)?;
    let n = body.valuation_dim();
    let two = rat(2);
    let mut t = t0.clone();
    let mut rows = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        let powers: RatVec = (0..=n)
            .scan(Rat::one(), |p, _| {
                let current = p.clone();
                *p *= &t;
                Some(current)
            })
            .collect();
        rows.push(powers);
        values.push(fiber_volume(body, class, ample, &t)?);
        t /= &two;
    }
    let coefficients = match solve_linear(&RatMat::from_rows(rows, n + 1), &RatVec::new(values))? {
        LinearSolution::Unique(c) => c.into_inner(),
        other => {
            return Err(Error::Internal(format!(
                "interpolation system is singular: {other:?}"
            )))
        }
    };
    let poly = VolPoly { coefficients, t0 };
    let expected = fiber_volume(body, class, ample, &t)?;
    let predicted = poly.eval(&t);
    if predicted != expected {
        return Err(Error::ChamberSegmentTooShort(format!(
            "at t = {t} the interpolant {poly} gives {predicted} but the fiber volume is {expected}"
        )));
    }
    Ok(poly)
}

/// `n` minus the order of vanishing of the volume polynomial at `t = 0`.
pub fn numerical_kodaira(body: &GlobalBody, class: &RatVec, ample: &RatVec) -> Result<usize> {
    let poly = volume_polynomial(body, class, ample)?;
    let order = poly
        .order_of_vanishing()
        .ok_or_else(|| Error::ZeroVolumePolynomial {
            class: class.clone(),
        })?;
    Ok(body.valuation_dim() - order)
}

/// Largest standard simplex (up to translation) inside `fiber(A)`, by one LP
/// over the translation and the side length.
pub fn inscribed_simplex(body: &GlobalBody, ample: &RatVec) -> Result<InscribedSimplex> {
    let fiber = body.fiber(ample)?;
    let n = body.valuation_dim();
    // variables: translation u (n entries), then the side length
    let mut program = LinProgram::maximize(RatVec::unit(n + 1, n));
    program.push(Constraint::ge(RatVec::unit(n + 1, n), Rat::zero()));
    let corners: Vec<RatVec> = std::iter::once(RatVec::zeros(n))
        .chain((0..n).map(|i| RatVec::unit(n, i)))
        .collect();
    for (a, b) in fiber.ineqs() {
        for corner in &corners {
            let coeffs = a.concat(&RatVec::new(vec![a.dot(corner)]));
            program.push(Constraint::ge(coeffs, b.clone()));
        }
    }
    match lp_solve(&program)? {
        LpOutcome::Optimal { value, witness } => Ok(InscribedSimplex {
            size: value,
            translation: witness.slice(0..n),
        }),
        other => Err(Error::Internal(format!(
            "inscribed simplex LP for {ample} returned {other:?}"
        ))),
    }
}

pub fn inscribed_simplex_size(body: &GlobalBody, ample: &RatVec) -> Result<Rat> {
    Ok(inscribed_simplex(body, ample)?.size)
}

/// L-infinity distance from `x` to `{y : a . y >= b}` (nonempty).
fn linf_distance(x: &RatVec, ineqs: &[(RatVec, Rat)]) -> Result<Rat> {
    let m = x.dim();
    // variables: y (m entries), then the distance bound s
    let mut program = LinProgram::minimize(RatVec::unit(m + 1, m));
    for i in 0..m {
        let y = RatVec::unit(m + 1, i);
        let s = RatVec::unit(m + 1, m);
        program.push(Constraint::ge(y.add(&s), x[i].clone()));
        program.push(Constraint::ge(s.sub(&y), -x[i].clone()));
    }
    for (a, b) in ineqs {
        program.push(Constraint::ge(a.concat(&RatVec::zeros(1)), b.clone()));
    }
    match lp_solve(&program)? {
        LpOutcome::Optimal { value, .. } => Ok(value),
        other => Err(Error::Internal(format!(
            "distance LP from {x} returned {other:?}"
        ))),
    }
}

fn homogeneous(ineqs: Vec<RatVec>) -> Vec<(RatVec, Rat)> {
    ineqs.into_iter().map(|a| (a, Rat::zero())).collect()
}

/// Checks `fiber(D) + t (u + eps * simplex) ⊆ fiber(D + tA)` and the growth of
/// `fiber(D + tA)` away from `fiber(D)` at `t = t0 / 2^k`, `k = 1..=k_max`.
pub fn sandwich_check(
    body: &GlobalBody,
    class: &RatVec,
    ample: &RatVec,
    k_max: usize,
) -> Result<SandwichReport> {
    let t0 = chamber_stable_t0(body, class, ample)?;
    let n = body.valuation_dim();
    let simplex = inscribed_simplex(body, ample)?;
    let base = body.fiber(class)?;
    let base_ineqs = base.ineqs();
    let unit = Polytope::standard_simplex(n, &simplex.size)?.translate(&simplex.translation);
    let two = rat(2);
    let mut t = t0.clone();
    let mut samples = Vec::with_capacity(k_max);
    for _ in 0..k_max {
        t /= &two;
        let grown = body.fiber(&class.add_scaled(&t, ample))?;
        let inner = grown.contains_polytope(&base.minkowski_sum(&unit.scale(&t)?)?);
        let mut distance = Rat::zero();
        for vertex in grown.vertices() {
            distance = distance.max(linf_distance(vertex, &base_ineqs)?);
        }
        let ratio = &distance / &t;
        samples.push(SandwichSample {
            t: t.clone(),
            inner,
            distance,
            ratio,
        });
    }
    let inner_ok = samples.iter().all(|s| s.inner);
    let outer_ok = match samples.first() {
        Some(first) => {
            let bound = &first.ratio * &two;
            samples.iter().all(|s| s.ratio <= bound)
        }
        None => true,
    };
    let outer_constant = samples
        .iter()
        .map(|s| s.ratio.clone())
        .max()
        .unwrap_or_else(Rat::zero);
    Ok(SandwichReport {
        t0,
        epsilon: simplex.size,
        translation: simplex.translation,
        samples,
        outer_constant,
        inner_ok,
        outer_ok,
    })
}

/// Cone over the ray `R` through `class`, pulled back to the body:
/// `body ∩ (Q^n × R)` as inequalities, and `R` itself.
fn ray_targets(body: &GlobalBody, class: &RatVec) -> (Vec<(RatVec, Rat)>, Vec<(RatVec, Rat)>) {
    let n = body.valuation_dim();
    let rho = body.class_dim();
    let mut ray_ineqs = vec![class.clone()];
    for w in complement_basis(std::slice::from_ref(class), rho) {
        ray_ineqs.push(w.neg());
        ray_ineqs.push(w);
    }
    let mut pulled = body.cone().ineqs();
    pulled.extend(ray_ineqs.iter().map(|a| RatVec::zeros(n).concat(a)));
    (homogeneous(pulled), homogeneous(ray_ineqs))
}

/// `d(x, body ∩ pr⁻¹(R)) / d(pr(x), R)` in the L-infinity norm, or `None`
/// when `pr(x)` lies on `R`.
pub fn rho_ratio(body: &GlobalBody, class: &RatVec, x: &RatVec) -> Result<Option<Rat>> {
    if class.is_zero() {
        return Err(Error::ZeroClass);
    }
    let (pulled, ray) = ray_targets(body, class);
    rho_ratio_with(body, &pulled, &ray, x)
}

fn rho_ratio_with(
    body: &GlobalBody,
    pulled: &[(RatVec, Rat)],
    ray: &[(RatVec, Rat)],
    x: &RatVec,
) -> Result<Option<Rat>> {
    let below = linf_distance(&body.class_projection().apply(x), ray)?;
    if below.is_zero() {
        return Ok(None);
    }
    Ok(Some(linf_distance(x, pulled)? / below))
}

/// Maximum of [`rho_ratio`] over seeded random points of the body. Sample
/// points are nonnegative combinations of the body's rays with coefficients
/// `p / q`, `0 <= p <= 64`, `1 <= q <= 64`, drawn from ChaCha8 seeded with
/// `seed`. At most `10 * sample_count` points are drawn.
pub fn rho_bound_estimate(
    body: &GlobalBody,
    class: &RatVec,
    sample_count: usize,
    seed: u64,
) -> Result<RhoEstimate> {
    if sample_count == 0 {
        return Err(Error::NoSamples);
    }
    body.fiber(class)?;
    if class.is_zero() {
        return Err(Error::ZeroClass);
    }
    let (pulled, ray) = ray_targets(body, class);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = body.valuation_dim() + body.class_dim();
    let draws: Vec<RatVec> = (0..10 * sample_count)
        .map(|_| {
            body.cone().rays().iter().fold(RatVec::zeros(dim), |acc, r| {
                let p: i64 = rng.gen_range(0..=64);
                let q: i64 = rng.gen_range(1..=64);
                acc.add_scaled(&Rat::new(p.into(), q.into()), r)
            })
        })
        .filter(|x| !x.is_zero())
        .collect();

    let mut accepted = 0;
    let mut rejected = 0;
    let mut scale_violations = 0;
    let mut max_ratio = Rat::zero();
    // Evaluate in parallel chunks; accepting in draw order keeps the result
    // independent of scheduling.
    for chunk in draws.chunks(sample_count.max(16)) {
        let ratios: Vec<Result<Option<(Rat, Rat)>>> = chunk
            .par_iter()
            .map(|x| {
                let Some(r) = rho_ratio_with(body, &pulled, &ray, x)? else {
                    return Ok(None);
                };
                let doubled = rho_ratio_with(body, &pulled, &ray, &x.scale(&rat(2)))?
                    .ok_or_else(|| Error::Internal(format!("2x left the domain at {x}")))?;
                Ok(Some((r, doubled)))
            })
            .collect();
        for ratio in ratios {
            if accepted == sample_count {
                break;
            }
            match ratio? {
                None => rejected += 1,
                Some((r, doubled)) => {
                    accepted += 1;
                    if r != doubled {
                        scale_violations += 1;
                    }
                    max_ratio = max_ratio.max(r);
                }
            }
        }
        if accepted == sample_count {
            break;
        }
    }
    Ok(RhoEstimate {
        max_ratio,
        samples: accepted,
        rejected,
        scale_violations,
    })
}
