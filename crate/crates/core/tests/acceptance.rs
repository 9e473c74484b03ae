//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Runs without the libtest harness so the lines are always printed.

use std::process::{Command, ExitCode};
use std::time::Instant;

use num::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use okounkov::arith::{lp_solve, rat, ratio, Constraint, LinProgram, Rat, RatVec};
use okounkov::body::{GlobalBody, PairCheck};
use okounkov::fans::Fan;
use okounkov::harness::{
    generate_instance, run_suite, sample_classes, FamilyParams, Instance, InstanceFile, SuiteConfig, SuiteReport,
};
use okounkov::numdim::{inscribed_simplex_size, pick_ample, rho_bound_estimate, rho_ratio, sandwich_check};
use okounkov::polyhedra::{Cone, Polytope};

const SEED: u64 = 42;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome {
            passed,
            detail: detail.into(),
        }
    }
}

fn fixed_instances() -> Vec<InstanceFile> {
    let params = FamilyParams {
        valuation_dim: 2,
        scale: 1,
        ..FamilyParams::default()
    };
    ["interval", "twochamber", "simplex_product"]
        .iter()
        .map(|f| generate_instance(f, &params, 0).unwrap())
        .collect()
}

/// Grid over n, rho in 1..=3 and ray counts n + rho, n + rho + 2, n + rho + 4.
fn random_instances() -> Vec<InstanceFile> {
    let mut out = Vec::new();
    for n in 1..=3 {
        for rho in 1..=3 {
            for extra in [0, 2, 4] {
                let params = FamilyParams {
                    valuation_dim: n,
                    class_dim: rho,
                    scale: 1,
                    ray_count: n + rho + extra,
                    max_coeff: 8,
                };
                out.push(generate_instance("random", &params, out.len() as u64).unwrap());
            }
        }
    }
    out
}

fn to_instances(files: &[InstanceFile]) -> Vec<Instance> {
    files.iter().map(|f| Instance::from_file(f).unwrap()).collect()
}

fn v(x: &[i64]) -> RatVec {
    RatVec::from_ints(x)
}

fn interval(lo: i64, hi: i64) -> Polytope {
    Polytope::from_points(&[v(&[lo]), v(&[hi])], 1).unwrap()
}

fn decomposition(report: &SuiteReport) -> Outcome {
    let classes: usize = report.instances.iter().map(|r| r.decomposition.passed + r.decomposition.failed).sum();
    let failed: usize = report.instances.iter().map(|r| r.decomposition.failed).sum();
    let enough = report.instances.iter().all(|r| r.sampled_classes >= 100);
    Outcome::new(
        failed == 0 && enough && report.instances.len() >= 23,
        format!("{} instances, {classes} classes, {failed} failures", report.instances.len()),
    )
}

/// Fiber of the two-chamber body over `(a, b)` as an LP over ray weights,
/// independent of any cone conversion.
fn slice_oracle(rays: &[RatVec], a: i64, b: i64) -> (Rat, Rat) {
    let k = rays.len();
    let solve = |maximize: bool| {
        let objective = RatVec::new(rays.iter().map(|r| r[0].clone()).collect());
        let mut lp = if maximize {
            LinProgram::maximize(objective)
        } else {
            LinProgram::minimize(objective)
        };
        for (j, target) in [(1, a), (2, b)] {
            lp.push(Constraint::eq(RatVec::new(rays.iter().map(|r| r[j].clone()).collect()), rat(target)));
        }
        for i in 0..k {
            lp.push(Constraint::ge(RatVec::unit(k, i), Rat::zero()));
        }
        lp_solve(&lp).unwrap().value().unwrap().clone()
    };
    (solve(false), solve(true))
}

fn golden_values() -> Outcome {
    let body = generate_instance("twochamber", &FamilyParams::default(), 0)
        .unwrap()
        .to_body()
        .unwrap();
    let expected = vec![
        (v(&[0, 1]), Polytope::point(&v(&[0]))),
        (v(&[1, 0]), interval(0, 1)),
        (v(&[1, 1]), interval(0, 2)),
    ];
    let mut got: Vec<(RatVec, Polytope)> = body
        .minkowski_basis()
        .entries
        .iter()
        .map(|e| (e.ray.clone(), e.body.clone()))
        .collect();
    got.sort_by(|x, y| x.0.cmp(&y.0));
    let basis_ok = got == expected;

    let rays = body.cone().rays().to_vec();
    let classes = [
        (0, 0), (1, 0), (0, 1), (1, 1), (2, 1), (1, 2), (3, 1), (1, 3), (2, 2), (5, 2),
        (2, 5), (4, 4), (7, 3), (3, 7), (6, 1), (1, 6), (10, 9), (9, 10), (0, 5), (8, 0),
    ];
    let mut mismatches = 0;
    for &(a, b) in &classes {
        let fiber = body.fiber(&v(&[a, b])).unwrap();
        let (lo, hi) = slice_oracle(&rays, a, b);
        let formula = interval(0, (a + b).min(2 * a));
        let oracle = Polytope::from_points(&[RatVec::new(vec![lo]), RatVec::new(vec![hi])], 1).unwrap();
        if fiber != oracle || fiber != formula {
            mismatches += 1;
        }
    }
    Outcome::new(
        basis_ok && mismatches == 0,
        format!("basis {}, {mismatches}/{} fiber mismatches", if basis_ok { "exact" } else { "WRONG" }, classes.len()),
    )
}

fn integral(v: &RatVec) -> bool {
    v.iter().all(|x| x.is_integer())
}

fn fan_structure(bodies: &[&GlobalBody]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut problems = Vec::new();
    let mut total = 0;
    for (i, body) in bodies.iter().enumerate() {
        let fan = body.chambers();
        total += fan.len();
        // Re-closing a fan is quadratic in its size; the largest fans rely on
        // the face and sampled intersection checks below.
        if fan.len() <= 2000 && Fan::close(fan.cones(), fan.ambient_dim()).unwrap() != *fan {
            problems.push(format!("instance {i}: re-closure changed the fan"));
        }
        let cones = fan.cones();
        for c in cones {
            let structural = c.rays().iter().chain(c.facets()).chain(c.equations()).all(integral)
                && c.rays().iter().all(|r| c.contains(r))
                && Cone::from_generators(c.rays(), c.lineality(), c.ambient_dim()).unwrap() == *c
                && c.faces().iter().all(|f| fan.contains_cone(&f.geometry));
            if !structural {
                problems.push(format!("instance {i}: cone {c} fails the structural check"));
            }
        }
        let pairs: Vec<(usize, usize)> = if cones.len() <= 150 {
            (0..cones.len()).flat_map(|a| (a + 1..cones.len()).map(move |b| (a, b))).collect()
        } else {
            (0..2000).map(|_| (rng.gen_range(0..cones.len()), rng.gen_range(0..cones.len()))).collect()
        };
        if let Some((a, b)) = pairs.iter().find(|(a, b)| !fan.contains_cone(&cones[*a].intersect(&cones[*b]))) {
            problems.push(format!("instance {i}: {} ∩ {} missing", cones[*a], cones[*b]));
        }
    }
    Outcome::new(
        problems.is_empty(),
        match problems.first() {
            None => format!("{} fans, {total} cones", bodies.len()),
            Some(p) => format!("{} problems, first: {p}", problems.len()),
        },
    )
}

fn pair_additivity(report: &SuiteReport) -> Outcome {
    let checked: usize = report.instances.iter().map(|r| r.pair_additivity.passed).sum();
    let failed: usize = report.instances.iter().map(|r| r.pair_additivity.failed).sum();
    let enough = report.instances.iter().all(|r| r.pair_additivity.passed >= 50);

    let body = generate_instance("twochamber", &FamilyParams::default(), 0)
        .unwrap()
        .to_body()
        .unwrap();
    let (d1, d2) = (v(&[1, 0]), v(&[0, 1]));
    let fixture = body.check_pair_additivity(&d1, &d2, &Rat::one(), &Rat::one()).unwrap();
    let combined = body.fiber(&d1.add(&d2)).unwrap();
    let summed = body.fiber(&d1).unwrap().minkowski_sum(&body.fiber(&d2).unwrap()).unwrap();
    let fixture_ok = matches!(fixture, PairCheck::HypothesisNotMet { .. })
        && combined == interval(0, 2)
        && summed == interval(0, 1);
    Outcome::new(
        failed == 0 && enough && fixture_ok,
        format!(
            "{checked} tuples additive, {failed} failures; off-chamber fixture {} vs {}",
            combined, summed
        ),
    )
}

fn dimension_equality(report: &SuiteReport, instances: &[Instance]) -> Outcome {
    let inequality_failed: usize = report.instances.iter().map(|r| r.dimension_inequality.failed).sum();
    let equality_failed: usize = report.instances.iter().map(|r| r.dimension_equality.failed).sum();
    let checked: usize = report.instances.iter().map(|r| r.dimension_equality.passed).sum();
    // The sampled classes always include every ray of the chamber fan, which
    // covers the extreme rays of the image cone and all wall generators.
    let covered = instances.iter().all(|inst| {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let fan = inst.body.chambers();
        let classes = sample_classes(&inst.body, fan, 100, &mut rng);
        fan.rays().iter().all(|r| classes.contains(r))
            && inst.body.image_cone().rays().iter().all(|r| classes.contains(r))
    });
    Outcome::new(
        inequality_failed == 0 && equality_failed == 0 && covered,
        format!(
            "inequality failures {inequality_failed}, equality {checked} passed / {equality_failed} failed, rays covered {covered}"
        ),
    )
}

fn sandwich(fixed: &[Instance]) -> Outcome {
    let mut checked = 0;
    let mut failures = Vec::new();
    for inst in fixed {
        let body = &inst.body;
        let ample = pick_ample(body).unwrap();
        let epsilon = inscribed_simplex_size(body, &ample).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        for class in sample_classes(body, body.chambers(), 20, &mut rng) {
            let report = sandwich_check(body, &class, &ample, 4).unwrap();
            checked += 1;
            if !report.passed() || report.epsilon != epsilon || report.samples.len() != 4 {
                failures.push(format!("{} at {class}", inst.name));
            }
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!("{checked} classes, {} failures {:?}", failures.len(), failures.first()),
    )
}

fn distance_ratio(fixed: &[Instance]) -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for inst in fixed {
        let body = &inst.body;
        let class = pick_ample(body).unwrap();
        let est = rho_bound_estimate(body, &class, 1000, SEED).unwrap();
        // With a single class dimension every draw lies on the ray through
        // the class, so there is nothing to sample.
        let expected = if body.class_dim() == 1 { 0 } else { 1000 };
        ok &= est.samples == expected && est.scale_violations == 0;
        lines.push(format!("{} max {} over {}", inst.name, est.max_ratio, est.samples));
    }
    let two_chamber = &fixed[1].body;
    let boundary = v(&[0, 1]);
    let est = rho_bound_estimate(two_chamber, &boundary, 1000, SEED).unwrap();
    ok &= est.samples == 1000 && est.scale_violations == 0;
    let mut fixture_ok = true;
    for t in [ratio(1, 3), rat(1), rat(5)] {
        let x = RatVec::new(vec![&t * rat(2), t.clone(), Rat::one()]);
        fixture_ok &= rho_ratio(two_chamber, &boundary, &x).unwrap() == Some(rat(2));
    }
    Outcome::new(
        ok && fixture_ok,
        format!("{}; boundary ray max {}; fixture ratio 2 {}", lines.join(", "), est.max_ratio, fixture_ok),
    )
}

fn random_int_vec(rng: &mut ChaCha8Rng, dim: usize, lo: i64, hi: i64) -> RatVec {
    RatVec::new((0..dim).map(|_| rat(rng.gen_range(lo..=hi))).collect())
}

fn double_description_round_trips() -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut failures = 0;
    for _ in 0..1000 {
        let d = rng.gen_range(1..=5);
        let count = rng.gen_range(1..=8);
        let rays: Vec<RatVec> = (0..count)
            .map(|_| random_int_vec(&mut rng, d, -3, 3))
            .filter(|r| !r.is_zero())
            .collect();
        if rays.is_empty() {
            continue;
        }
        let cone = Cone::from_rays(&rays, d).unwrap();
        let back = Cone::from_ineqs(&cone.ineqs(), d).unwrap();
        let again = Cone::from_generators(back.rays(), back.lineality(), d).unwrap();
        let valid = rays.iter().all(|r| cone.ineqs().iter().all(|a| !a.dot(r).is_negative()));
        if back != cone || again != cone || !valid {
            failures += 1;
        }
    }
    (1000, failures)
}

/// Largest relative error of a fixed-seed Monte Carlo volume estimate.
fn monte_carlo_volumes() -> (usize, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < 20 {
        let d = 1 + done % 4;
        let points: Vec<RatVec> = (0..2 * d + 4).map(|_| random_int_vec(&mut rng, d, 0, 10)).collect();
        let p = Polytope::from_points(&points, d).unwrap();
        if !p.is_full_dimensional() {
            continue;
        }
        let coords: Vec<Vec<f64>> = p.vertices().iter().map(RatVec::to_f64).collect();
        let lo: Vec<f64> = (0..d).map(|i| coords.iter().map(|c| c[i]).fold(f64::INFINITY, f64::min)).collect();
        let hi: Vec<f64> = (0..d).map(|i| coords.iter().map(|c| c[i]).fold(f64::NEG_INFINITY, f64::max)).collect();
        let facets: Vec<(Vec<f64>, f64)> = p
            .facets()
            .iter()
            .map(|(a, b)| (a.to_f64(), b.to_f64().unwrap()))
            .collect();
        let samples = 100_000;
        let mut inside = 0usize;
        let mut x = vec![0.0; d];
        for _ in 0..samples {
            for i in 0..d {
                x[i] = rng.gen_range(lo[i]..hi[i]);
            }
            if facets
                .iter()
                .all(|(a, b)| a.iter().zip(&x).map(|(ai, xi)| ai * xi).sum::<f64>() >= *b)
            {
                inside += 1;
            }
        }
        let box_volume: f64 = lo.iter().zip(&hi).map(|(l, h)| h - l).product();
        let estimate = box_volume * inside as f64 / samples as f64;
        let exact = p.volume().to_f64().unwrap();
        worst = worst.max((estimate - exact).abs() / exact);
        done += 1;
    }
    (done, worst)
}

fn geometry_kernel() -> Outcome {
    let (cones, dd_failures) = double_description_round_trips();
    let (polytopes, worst) = monte_carlo_volumes();
    Outcome::new(
        dd_failures == 0 && worst <= 0.05,
        format!(
            "{dd_failures}/{cones} round-trip failures; worst Monte Carlo volume error {:.2}% over {polytopes} polytopes",
            100.0 * worst
        ),
    )
}

fn determinism(files: &[InstanceFile]) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    for (i, f) in files.iter().enumerate() {
        std::fs::write(dir.path().join(format!("{i:02}_{}.json", f.name)), f.to_json()).unwrap();
    }
    let run = |jobs: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_okounkov"))
            .args(["verify", dir.path().to_str().unwrap(), "--seed", "42", "--format", "json", "--jobs", jobs])
            .output()
            .unwrap();
        (out.status.code(), out.stdout)
    };
    let (code1, first) = run("1");
    let (code8, second) = run("8");
    let (code1b, third) = run("1");
    let identical = first == second && first == third;
    Outcome::new(
        identical && code1 == Some(0) && code8 == Some(0) && code1b == Some(0) && !first.is_empty(),
        format!("{} instances, {} bytes, identical {identical}", files.len(), first.len()),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let fixed_files = fixed_instances();
    let random_files = random_instances();
    let all_files: Vec<InstanceFile> = fixed_files.iter().chain(&random_files).cloned().collect();
    let fixed = to_instances(&fixed_files);
    let all = to_instances(&all_files);

    let config = SuiteConfig {
        samples: 100,
        pairs: 50,
        seed: SEED,
        jobs: 1,
    };
    let report = run_suite(&all, &config).unwrap();
    let bodies: Vec<&GlobalBody> = all.iter().map(|i| &i.body).collect();
    // The determinism runs use the fixed instances and the ρ <= 2 random ones.
    let determinism_files: Vec<InstanceFile> = fixed_files
        .iter()
        .chain(random_files.iter().filter(|f| f.class_dim <= 2))
        .cloned()
        .collect();

    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("Minkowski decomposition of sampled fibers", Box::new(|| decomposition(&report))),
        ("two-chamber basis and fiber golden values", Box::new(golden_values)),
        ("chamber fans closed and rational polyhedral", Box::new(|| fan_structure(&bodies))),
        ("pair additivity inside a chamber", Box::new(|| pair_additivity(&report))),
        ("numerical dimension equals fiber dimension", Box::new(|| dimension_equality(&report, &all))),
        ("sandwich inclusions on fixed instances", Box::new(|| sandwich(&fixed))),
        ("bounded distance ratio", Box::new(|| distance_ratio(&fixed))),
        ("geometry kernel round trip and volumes", Box::new(geometry_kernel)),
        ("deterministic verify reports", Box::new(|| determinism(&determinism_files))),
    ];

    let mut all_passed = true;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = check();
        all_passed &= outcome.passed;
        println!(
            "criterion {} {:<46} {} ({:.1}s) {}",
            i + 1,
            name,
            if outcome.passed { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            outcome.detail
        );
    }
    println!("suite run {:.1}s, total {:.1}s", report_time(&report), start.elapsed().as_secs_f64());
    if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn report_time(report: &SuiteReport) -> f64 {
    report.instances.iter().map(|r| r.elapsed.as_secs_f64()).sum()
}
