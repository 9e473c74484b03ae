use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use okounkov::arith::{parse_rat, RatVec};
use okounkov::body::GlobalBody;
use okounkov::harness::{
    generate_instance, polytope_strings, run_suite, FamilyParams, Instance, InstanceFile,
    SuiteConfig,
};
use okounkov::numdim::{
    num_dim_fiber, numerical_kodaira, pick_ample, sandwich_check, volume_polynomial,
};
use okounkov::polyhedra::{Cone, Polytope};
use okounkov::Error;

#[derive(Parser)]
#[command(name = "okounkov", version, about = "Exact fibers, chambers and Minkowski bases of polyhedral global bodies")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Print the Minkowski basis: chamber rays and their fibers.
    Basis { file: PathBuf },
    /// Print the projected fan of chambers.
    Chambers { file: PathBuf },
    /// Print the fiber over a class.
    Fiber {
        file: PathBuf,
        #[arg(long = "class", value_name = "A,B,...", allow_hyphen_values = true)]
        class: String,
    },
    /// Decompose a class over the basis and verify the Minkowski identity.
    Decompose {
        file: PathBuf,
        #[arg(long = "class", value_name = "A,B,...", allow_hyphen_values = true)]
        class: String,
    },
    /// Fiber dimension, numerical dimension, volume polynomial and sandwich report.
    Numdim {
        file: PathBuf,
        #[arg(long = "class", value_name = "A,B,...", allow_hyphen_values = true)]
        class: String,
        /// Interior class used as the ample direction (default: sum of image rays).
        #[arg(long, value_name = "A,B,...", allow_hyphen_values = true)]
        ample: Option<String>,
        /// Number of halvings checked by the sandwich report.
        #[arg(long, default_value_t = 4)]
        k_max: usize,
    },
    /// Run the verification suite on a file or on every .json file in a directory.
    Verify {
        path: PathBuf,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Pair-additivity tuples per instance.
        #[arg(long, default_value_t = 50)]
        pairs: usize,
    },
    /// Write a generated instance.
    Gen {
        #[arg(long)]
        family: String,
        /// Valuation dimension.
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Class dimension (random family).
        #[arg(long, default_value_t = 2)]
        rho: usize,
        /// Simplex scale (simplex_product family).
        #[arg(long, default_value_t = 1)]
        scale: i64,
        /// Number of rays (random family).
        #[arg(long, default_value_t = 6)]
        rays: usize,
        /// Largest coefficient (random family).
        #[arg(long, default_value_t = 4)]
        max_coeff: i64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
}

/// Error paired with the process exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotPseudoEffective { .. } => 3,
            Error::Internal(_) | Error::ChamberSegmentTooShort(_) | Error::ZeroVolumePolynomial { .. } => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn input_error(message: String) -> Failure {
    Failure { code: 2, message }
}

fn load(path: &Path) -> Result<(String, GlobalBody), Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    let file = InstanceFile::parse(&text)
        .map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    let body = file
        .to_body()
        .map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    let name = if file.name.is_empty() {
        path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned())
    } else {
        file.name
    };
    Ok((name, body))
}

fn parse_class(text: &str, dim: usize) -> Result<RatVec, Failure> {
    let entries: Option<Vec<_>> = text.split(',').map(parse_rat).collect();
    let entries = entries.ok_or_else(|| input_error(format!("cannot parse class `{text}`")))?;
    if entries.len() != dim {
        return Err(input_error(format!(
            "class `{text}` has {} entries, expected {dim}",
            entries.len()
        )));
    }
    Ok(RatVec::new(entries))
}

fn cone_json(c: &Cone) -> Value {
    json!({
        "dim": c.dim(),
        "rays": c.rays().iter().map(RatVec::to_strings).collect::<Vec<_>>(),
    })
}

fn polytope_json(p: &Polytope) -> Value {
    json!({ "dim": p.dim(), "vertices": polytope_strings(p) })
}

fn emit(format: Format, value: &Value, table: String) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(value).expect("json values serialize")),
        Format::Table => print!("{table}"),
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let format = cli.format;
    match cli.command {
        Command::Basis { file } => {
            let (_, body) = load(&file)?;
            let basis = body.minkowski_basis();
            let entries: Vec<Value> = basis
                .entries
                .iter()
                .map(|e| json!({ "ray": e.ray.to_strings(), "body": polytope_json(&e.body) }))
                .collect();
            let mut table = String::new();
            for e in &basis.entries {
                table.push_str(&format!("{} -> {}\n", e.ray, e.body));
            }
            emit(format, &json!({ "basis": entries }), table);
            Ok(0)
        }
        Command::Chambers { file } => {
            let (_, body) = load(&file)?;
            let fan = body.chambers();
            let cones: Vec<Value> = fan.cones().iter().map(cone_json).collect();
            emit(format, &json!({ "cones": cones }), fan.to_string());
            Ok(0)
        }
        Command::Fiber { file, class } => {
            let (_, body) = load(&file)?;
            let class = parse_class(&class, body.class_dim())?;
            let fiber = body.fiber(&class)?;
            let table = format!("dim {}\n{}\n", fiber.dim(), fiber);
            emit(format, &json!({ "class": class.to_strings(), "fiber": polytope_json(&fiber) }), table);
            Ok(0)
        }
        Command::Decompose { file, class } => {
            let (_, body) = load(&file)?;
            let class = parse_class(&class, body.class_dim())?;
            let basis = body.minkowski_basis();
            let check = body.verify_decomposition(basis, &class)?;
            let terms: Vec<Value> = check
                .decomposition
                .terms
                .iter()
                .map(|(i, w)| json!({ "ray": basis.entries[*i].ray.to_strings(), "weight": w.to_string() }))
                .collect();
            let mut table = String::new();
            for (i, w) in &check.decomposition.terms {
                table.push_str(&format!("{w} * {}\n", basis.entries[*i].ray));
            }
            table.push_str(&format!(
                "fiber {} {} sum {}\n",
                check.lhs,
                if check.ok { "==" } else { "!=" },
                check.rhs
            ));
            let value = json!({
                "class": class.to_strings(),
                "terms": terms,
                "depth": check.decomposition.depth,
                "fiber": polytope_json(&check.lhs),
                "minkowski_sum": polytope_json(&check.rhs),
                "ok": check.ok,
            });
            emit(format, &value, table);
            Ok(if check.ok { 0 } else { 1 })
        }
        Command::Numdim {
            file,
            class,
            ample,
            k_max,
        } => {
            let (_, body) = load(&file)?;
            let class = parse_class(&class, body.class_dim())?;
            let ample = match ample {
                Some(a) => parse_class(&a, body.class_dim())?,
                None => pick_ample(&body)?,
            };
            let dim = num_dim_fiber(&body, &class)?;
            let poly = volume_polynomial(&body, &class, &ample)?;
            let nu = numerical_kodaira(&body, &class, &ample)?;
            let sandwich = sandwich_check(&body, &class, &ample, k_max)?;
            let samples: Vec<Value> = sandwich
                .samples
                .iter()
                .map(|s| {
                    json!({
                        "t": s.t.to_string(),
                        "inner": s.inner,
                        "distance": s.distance.to_string(),
                        "ratio": s.ratio.to_string(),
                    })
                })
                .collect();
            let ok = dim == nu && sandwich.passed();
            let value = json!({
                "class": class.to_strings(),
                "ample": ample.to_strings(),
                "fiber_dim": dim,
                "numerical_dim": nu,
                "volume_polynomial": poly.coefficients.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "t0": poly.t0.to_string(),
                "sandwich": {
                    "epsilon": sandwich.epsilon.to_string(),
                    "translation": sandwich.translation.to_strings(),
                    "outer_constant": sandwich.outer_constant.to_string(),
                    "inner_ok": sandwich.inner_ok,
                    "outer_ok": sandwich.outer_ok,
                    "samples": samples,
                },
                "ok": ok,
            });
            let mut table = format!(
                "fiber dim {dim}\nnumerical dim {nu}\nvolume {} on (0, {}]\nsandwich epsilon {} translation {}\n",
                poly, poly.t0, sandwich.epsilon, sandwich.translation
            );
            for s in &sandwich.samples {
                table.push_str(&format!(
                    "  t {:<10} inner {:<5} distance {:<8} ratio {}\n",
                    s.t.to_string(),
                    s.inner,
                    s.distance.to_string(),
                    s.ratio
                ));
            }
            table.push_str(&format!(
                "inner {} outer {}\n",
                if sandwich.inner_ok { "ok" } else { "FAIL" },
                if sandwich.outer_ok { "ok" } else { "FAIL" }
            ));
            emit(format, &value, table);
            Ok(if ok { 0 } else { 1 })
        }
        Command::Verify {
            path,
            samples,
            seed,
            jobs,
            pairs,
        } => {
            let files: Vec<PathBuf> = if path.is_dir() {
                let mut files: Vec<PathBuf> = fs::read_dir(&path)
                    .map_err(|e| input_error(format!("{}: {e}", path.display())))?
                    .filter_map(|entry| entry.ok().map(|e| e.path()))
                    .filter(|p| p.extension().is_some_and(|e| e == "json"))
                    .collect();
                files.sort();
                files
            } else {
                vec![path]
            };
            let mut instances = Vec::with_capacity(files.len());
            for f in &files {
                let (name, body) = load(f)?;
                instances.push(Instance { name, body });
            }
            let config = SuiteConfig {
                samples,
                pairs,
                seed,
                jobs,
            };
            let report = run_suite(&instances, &config)?;
            match format {
                Format::Json => println!("{}", report.to_json()),
                Format::Table => print!("{}", report.to_table()),
            }
            Ok(if report.verdict { 0 } else { 1 })
        }
        Command::Gen {
            family,
            n,
            rho,
            scale,
            rays,
            max_coeff,
            seed,
            output,
        } => {
            let params = FamilyParams {
                valuation_dim: n,
                class_dim: rho,
                scale,
                ray_count: rays,
                max_coeff,
            };
            let inst = generate_instance(&family, &params, seed)?;
            let text = inst.to_json();
            match output {
                Some(path) => fs::write(&path, format!("{text}\n"))
                    .map_err(|e| input_error(format!("{}: {e}", path.display())))?,
                None => println!("{text}"),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
