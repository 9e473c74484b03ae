//! Instance files, instance families, and the batch verification suite.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{Rat, RatVec};
use crate::body::{Basis, GlobalBody, PairCheck};
use crate::error::{Error, Result};
use crate::fans::Fan;
use crate::numdim::{num_dim_fiber, numerical_kodaira, pick_ample};
use crate::polyhedra::{Cone, Polytope};

/// JSON instance: integer rays or integer inequalities `a . x >= 0` in
/// `Q^(valuation_dim + class_dim)`, valuation coordinates first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(default)]
    pub name: String,
    pub valuation_dim: usize,
    pub class_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rays: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inequalities: Option<Vec<Vec<i64>>>,
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<InstanceFile> {
        serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance files serialize")
    }

    pub fn to_body(&self) -> Result<GlobalBody> {
        if self.valuation_dim == 0 || self.class_dim == 0 {
            return Err(Error::Malformed(
                "valuation_dim and class_dim must be at least 1".into(),
            ));
        }
        let d = self.valuation_dim + self.class_dim;
        let (rows, what) = match (&self.rays, &self.inequalities) {
            (Some(r), None) => (r, "ray"),
            (None, Some(i)) => (i, "inequality"),
            _ => {
                return Err(Error::Malformed(
                    "exactly one of `rays` or `inequalities` is required".into(),
                ))
            }
        };
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Malformed(format!(
                    "{what} {i} has {} entries, expected {d}",
                    row.len()
                )));
            }
        }
        let vectors: Vec<RatVec> = rows.iter().map(|r| RatVec::from_ints(r)).collect();
        if what == "ray" {
            if let Some(i) = vectors.iter().position(RatVec::is_zero) {
                return Err(Error::Malformed(format!("ray {i} is zero")));
            }
            GlobalBody::from_rays(&vectors, self.valuation_dim, self.class_dim)
        } else {
            GlobalBody::from_ineqs(&vectors, self.valuation_dim, self.class_dim)
        }
    }
}

/// Parses and validates an instance.
pub fn parse_instance(text: &str) -> Result<GlobalBody> {
    InstanceFile::parse(text)?.to_body()
}

/// Parameters of the generated families; unused fields are ignored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyParams {
    pub valuation_dim: usize,
    pub class_dim: usize,
    pub scale: i64,
    pub ray_count: usize,
    pub max_coeff: i64,
}

impl Default for FamilyParams {
    fn default() -> Self {
        FamilyParams {
            valuation_dim: 2,
            class_dim: 2,
            scale: 1,
            ray_count: 6,
            max_coeff: 4,
        }
    }
}

fn rays_instance(name: String, n: usize, rho: usize, rays: Vec<Vec<i64>>) -> InstanceFile {
    InstanceFile {
        name,
        valuation_dim: n,
        class_dim: rho,
        rays: Some(rays),
        inequalities: None,
    }
}

pub fn interval() -> InstanceFile {
    rays_instance("interval".into(), 1, 1, vec![vec![0, 1], vec![1, 1]])
}

pub fn two_chamber() -> InstanceFile {
    rays_instance(
        "twochamber".into(),
        1,
        2,
        vec![vec![0, 1, 0], vec![1, 1, 0], vec![0, 0, 1], vec![2, 1, 1]],
    )
}

/// Fiber over class `a` is `a * s` times the standard simplex in `Q^n`.
pub fn simplex_product(n: usize, s: i64) -> InstanceFile {
    let mut rays = vec![{
        let mut r = vec![0; n + 1];
        r[n] = 1;
        r
    }];
    for i in 0..n {
        let mut r = vec![0; n + 1];
        r[i] = s;
        r[n] = 1;
        rays.push(r);
    }
    rays_instance(format!("simplex_product_n{n}_s{s}"), n, 1, rays)
}

/// Random integer rays in `[0, M]^(n + rho)` with nonzero class part; the
/// seed is incremented until the body validates.
pub fn random_instance(params: &FamilyParams, seed: u64) -> Result<InstanceFile> {
    let FamilyParams {
        valuation_dim: n,
        class_dim: rho,
        ray_count: k,
        max_coeff: m,
        ..
    } = *params;
    if n == 0 || rho == 0 || k > 12 || !(1..=8).contains(&m) || k < n + rho {
        return Err(Error::Malformed(format!(
            "random family needs n, rho >= 1, n + rho <= rays <= 12 and 1 <= max_coeff <= 8 \
             (got n={n}, rho={rho}, rays={k}, max_coeff={m})"
        )));
    }
    for attempt in 0..10_000u64 {
        let used = seed.wrapping_add(attempt);
        let mut rng = ChaCha8Rng::seed_from_u64(used);
        let rays: Vec<Vec<i64>> = (0..k)
            .map(|_| loop {
                let r: Vec<i64> = (0..n + rho).map(|_| rng.gen_range(0..=m)).collect();
                if r[n..].iter().any(|&x| x != 0) {
                    break r;
                }
            })
            .collect();
        let inst = rays_instance(format!("random_n{n}_r{rho}_k{k}_m{m}_seed{used}"), n, rho, rays);
        if inst.to_body().is_ok() {
            return Ok(inst);
        }
    }
    Err(Error::Internal(format!(
        "no valid random instance found from seed {seed}"
    )))
}

pub fn generate_instance(family: &str, params: &FamilyParams, seed: u64) -> Result<InstanceFile> {
    match family {
        "interval" => Ok(interval()),
        "twochamber" => Ok(two_chamber()),
        "simplex_product" => {
            if params.valuation_dim == 0 || params.scale <= 0 {
                return Err(Error::Malformed(
                    "simplex_product needs n >= 1 and scale >= 1".into(),
                ));
            }
            Ok(simplex_product(params.valuation_dim, params.scale))
        }
        "random" => random_instance(params, seed),
        other => Err(Error::UnknownFamily(other.to_string())),
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub name: String,
    pub body: GlobalBody,
}

impl Instance {
    pub fn from_file(file: &InstanceFile) -> Result<Instance> {
        Ok(Instance {
            name: file.name.clone(),
            body: file.to_body()?,
        })
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    /// Sampled classes per instance (all basis rays and the origin are always included).
    pub samples: usize,
    /// Pair-additivity tuples per instance that meet the hypothesis.
    pub pairs: usize,
    pub seed: u64,
    pub jobs: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            samples: 100,
            pairs: 50,
            seed: 42,
            jobs: 1,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub passed: usize,
    pub failed: usize,
}

impl Counts {
    fn record(&mut self, ok: bool) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PairCounts {
    pub passed: usize,
    pub failed: usize,
    pub hypothesis_not_met: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FailureRecord {
    pub instance: String,
    pub check: String,
    pub class: Vec<String>,
    pub lhs: Option<Vec<Vec<String>>>,
    pub rhs: Option<Vec<Vec<String>>>,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceReport {
    pub name: String,
    pub basis_size: usize,
    pub chamber_count: usize,
    pub sampled_classes: usize,
    pub decomposition: Counts,
    pub pair_additivity: PairCounts,
    pub dimension_inequality: Counts,
    pub dimension_equality: Counts,
    pub failures: Vec<FailureRecord>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl InstanceReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub samples_per_instance: usize,
    pub instances: Vec<InstanceReport>,
    pub verdict: bool,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<32} {:>6} {:>8} {:>8} {:>12} {:>14} {:>12} {:>10}\n",
            "instance", "basis", "chambers", "classes", "decompose", "pairs", "dims", "time"
        );
        for r in &self.instances {
            out.push_str(&format!(
                "{:<32} {:>6} {:>8} {:>8} {:>12} {:>14} {:>12} {:>9.2}s\n",
                r.name,
                r.basis_size,
                r.chamber_count,
                r.sampled_classes,
                format!("{}/{}", r.decomposition.passed, r.decomposition.passed + r.decomposition.failed),
                format!(
                    "{}/{} ({} skip)",
                    r.pair_additivity.passed,
                    r.pair_additivity.passed + r.pair_additivity.failed,
                    r.pair_additivity.hypothesis_not_met
                ),
                format!("{}/{}", r.dimension_equality.passed, r.dimension_equality.passed + r.dimension_equality.failed),
                r.elapsed.as_secs_f64()
            ));
            for f in &r.failures {
                out.push_str(&format!(
                    "  FAIL {} at ({}): {}\n",
                    f.check,
                    f.class.join(", "),
                    f.message
                ));
            }
        }
        out.push_str(if self.verdict { "verdict: pass\n" } else { "verdict: FAIL\n" });
        out
    }
}

pub fn polytope_strings(p: &Polytope) -> Vec<Vec<String>> {
    p.vertices().iter().map(RatVec::to_strings).collect()
}

fn small_positive(rng: &mut ChaCha8Rng) -> Rat {
    let p: i64 = rng.gen_range(1..=6);
    let q: i64 = rng.gen_range(1..=3);
    Rat::new(p.into(), q.into())
}

/// Random point in the relative interior of a pointed cone.
fn relint_point(cone: &Cone, rng: &mut ChaCha8Rng) -> RatVec {
    cone.rays()
        .iter()
        .fold(RatVec::zeros(cone.ambient_dim()), |acc, r| {
            acc.add_scaled(&small_positive(rng), r)
        })
}

/// Random point of a pointed cone, possibly on its boundary.
fn cone_point(cone: &Cone, rng: &mut ChaCha8Rng) -> RatVec {
    cone.rays()
        .iter()
        .fold(RatVec::zeros(cone.ambient_dim()), |acc, r| {
            if rng.gen_bool(0.3) {
                acc
            } else {
                acc.add_scaled(&small_positive(rng), r)
            }
        })
}

/// The origin, every basis ray, then classes cycling through three strata:
/// interiors of full-dimensional chambers, relative interiors of lower
/// dimensional chambers of dimension at least two (walls), and relative
/// interiors of proper faces of the image cone (boundary), until `count`.
pub fn sample_classes(body: &GlobalBody, fan: &Fan, count: usize, rng: &mut ChaCha8Rng) -> Vec<RatVec> {
    let rho = body.class_dim();
    let mut out = vec![RatVec::zeros(rho)];
    out.extend(fan.rays());
    let interior: Vec<&Cone> = fan.cones().iter().filter(|c| c.dim() == rho).collect();
    let walls: Vec<&Cone> = fan
        .cones()
        .iter()
        .filter(|c| c.dim() >= 2 && c.dim() < rho)
        .collect();
    let boundary: Vec<Cone> = body
        .image_cone()
        .faces()
        .into_iter()
        .map(|f| f.geometry)
        .filter(|c| c.dim() >= 1 && c.dim() < rho)
        .collect();
    let boundary: Vec<&Cone> = boundary.iter().collect();
    let strata = [interior, walls, boundary];
    let mut i = 0;
    while out.len() < count {
        let stratum = &strata[i % 3];
        let pool = if stratum.is_empty() { &strata[0] } else { stratum };
        let cone = pool.choose(rng).expect("a full-dimensional body has full-dimensional chambers");
        out.push(relint_point(cone, rng));
        i += 1;
    }
    out
}

fn class_failure(instance: &str, check: &str, class: &RatVec, message: String) -> FailureRecord {
    FailureRecord {
        instance: instance.to_string(),
        check: check.to_string(),
        class: class.to_strings(),
        lhs: None,
        rhs: None,
        message,
    }
}

enum ClassOutcome {
    Decomposition(std::result::Result<(), FailureRecord>),
    Dimension {
        inequality: bool,
        equality: bool,
        failure: Option<FailureRecord>,
    },
}

fn check_class(name: &str, body: &GlobalBody, basis: &Basis, ample: &Option<RatVec>, class: &RatVec) -> Vec<ClassOutcome> {
    let decomposition = match body.verify_decomposition(basis, class) {
        Ok(check) if check.ok => Ok(()),
        Ok(check) => Err(FailureRecord {
            instance: name.to_string(),
            check: "decomposition".into(),
            class: class.to_strings(),
            lhs: Some(polytope_strings(&check.lhs)),
            rhs: Some(polytope_strings(&check.rhs)),
            message: "fiber differs from the weighted Minkowski sum of basis bodies".into(),
        }),
        Err(e) => Err(class_failure(name, "decomposition", class, e.to_string())),
    };
    let dimension_equality = match ample {
        None => ClassOutcome::Dimension {
            inequality: false,
            equality: false,
            failure: Some(class_failure(name, "dimension_equality", class, Error::DegenerateImage.to_string())),
        },
        Some(a) => match (num_dim_fiber(body, class), numerical_kodaira(body, class, a)) {
            (Ok(dim), Ok(nu)) => ClassOutcome::Dimension {
                inequality: dim <= nu,
                equality: dim == nu,
                failure: (dim != nu).then(|| FailureRecord {
                    instance: name.to_string(),
                    check: "dimension_equality".into(),
                    class: class.to_strings(),
                    lhs: body.fiber(class).ok().map(|f| polytope_strings(&f)),
                    rhs: None,
                    message: format!("fiber dimension {dim} but numerical dimension {nu}"),
                }),
            },
            (Err(e), _) | (_, Err(e)) => ClassOutcome::Dimension {
                inequality: false,
                equality: false,
                failure: Some(class_failure(name, "dimension_equality", class, e.to_string())),
            },
        },
    };
    vec![ClassOutcome::Decomposition(decomposition), dimension_equality]
}

struct PairTuple {
    d1: RatVec,
    d2: RatVec,
    a: Rat,
    b: Rat,
}

/// `d1` is a relative interior point of a random cone and `d2` a point of the
/// minimal cone of `d1`, which contains `d1` in its relative interior.
fn pair_tuples(fan: &Fan, count: usize, rng: &mut ChaCha8Rng) -> Vec<PairTuple> {
    let pool: Vec<&Cone> = fan.cones().iter().filter(|c| c.dim() >= 1).collect();
    if pool.is_empty() {
        return Vec::new();
    }
    (0..count)
        .map(|_| {
            let d1 = relint_point(pool.choose(rng).expect("nonempty"), rng);
            let cell = fan.minimal_cone(&d1).expect("fan cones lie in the support");
            PairTuple {
                d2: cone_point(&cell, rng),
                d1,
                a: small_positive(rng),
                b: small_positive(rng),
            }
        })
        .collect()
}

/// Runs every check on one instance against the given basis.
pub fn check_instance(name: &str, body: &GlobalBody, basis: &Basis, config: &SuiteConfig) -> InstanceReport {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let classes = sample_classes(body, &basis.fan, config.samples, &mut rng);
    let tuples = pair_tuples(body.chambers(), config.pairs, &mut rng);
    let ample = pick_ample(body).ok();

    let outcomes: Vec<Vec<ClassOutcome>> = classes
        .par_iter()
        .map(|class| check_class(name, body, basis, &ample, class))
        .collect();
    let pair_results: Vec<std::result::Result<PairCheck, FailureRecord>> = tuples
        .par_iter()
        .map(|t| {
            body.check_pair_additivity(&t.d1, &t.d2, &t.a, &t.b)
                .map_err(|e| class_failure(name, "pair_additivity", &t.d1, e.to_string()))
        })
        .collect();

    let mut report = InstanceReport {
        name: name.to_string(),
        basis_size: basis.len(),
        chamber_count: basis.fan.len(),
        sampled_classes: classes.len(),
        decomposition: Counts::default(),
        pair_additivity: PairCounts::default(),
        dimension_inequality: Counts::default(),
        dimension_equality: Counts::default(),
        failures: Vec::new(),
        elapsed: Duration::ZERO,
    };
    for outcome in outcomes.into_iter().flatten() {
        match outcome {
            ClassOutcome::Decomposition(r) => {
                report.decomposition.record(r.is_ok());
                if let Err(f) = r {
                    report.failures.push(f);
                }
            }
            ClassOutcome::Dimension {
                inequality,
                equality,
                failure,
            } => {
                report.dimension_inequality.record(inequality);
                report.dimension_equality.record(equality);
                report.failures.extend(failure);
            }
        }
    }
    for (t, r) in tuples.iter().zip(pair_results) {
        match r {
            Ok(PairCheck::HypothesisNotMet { .. }) => report.pair_additivity.hypothesis_not_met += 1,
            Ok(PairCheck::Checked { ok: true, .. }) => report.pair_additivity.passed += 1,
            Ok(PairCheck::Checked { ok: false, lhs, rhs }) => {
                report.pair_additivity.failed += 1;
                report.failures.push(FailureRecord {
                    instance: name.to_string(),
                    check: "pair_additivity".into(),
                    class: t.d1.scale(&t.a).add(&t.d2.scale(&t.b)).to_strings(),
                    lhs: Some(polytope_strings(&lhs)),
                    rhs: Some(polytope_strings(&rhs)),
                    message: format!(
                        "{} * fiber({}) + {} * fiber({}) differs from the fiber of the combination",
                        t.a, t.d1, t.b, t.d2
                    ),
                });
            }
            Err(f) => {
                report.pair_additivity.failed += 1;
                report.failures.push(f);
            }
        }
    }
    report.elapsed = start.elapsed();
    report
}

/// Runs the suite on a thread pool of `config.jobs` threads. The report does
/// not depend on the number of jobs.
pub fn run_suite(instances: &[Instance], config: &SuiteConfig) -> Result<SuiteReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.max(1))
        .build()
        .map_err(|e| Error::Internal(e.to_string()))?;
    let reports: Vec<InstanceReport> = pool.install(|| {
        instances
            .par_iter()
            .map(|inst| check_instance(&inst.name, &inst.body, inst.body.minkowski_basis(), config))
            .collect()
    });
    let verdict = reports.iter().all(InstanceReport::passed);
    Ok(SuiteReport {
        seed: config.seed,
        samples_per_instance: config.samples,
        instances: reports,
        verdict,
    })
}
