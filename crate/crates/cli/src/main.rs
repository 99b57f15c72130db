//! Command-line front end: load or generate polytopes, compute volume
//! functions, inradius, absolute rank, equiangular reports, roofs, and run
//! the oracle verification.
//!
//! Every command writes a single JSON document to stdout (CSV only when
//! requested); diagnostics go to stderr as machine-readable error JSON.
//! Exit codes: 0 success, 1 verification failure, 2 invalid input,
//! 3 numerical failure.

use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use innervol::engine::{inner_volume_function, InnerVolumeFunction};
use innervol::equiangular::{equiangular_volume_polynomial, EquiangularPolynomial};
use innervol::error::Error;
use innervol::oracle::{verify_volume_function, VerifyConfig};
use innervol::shapes::{self, ShapeSpec};
use innervol::{
    absolute_rank, inradius, polytope_from_json, polytope_to_json, Polytope, Tolerances,
};

#[derive(Parser)]
#[command(
    name = "innervol",
    about = "Inner-neighborhood volume functions of convex polytopes",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a generated polytope as JSON.
    Gen {
        /// Shape kind and parameters, e.g. `rect 1 2 3`, `cube 1 1 1`,
        /// `simplex 3`, `regular-simplex 3`, `regular-polygon 6 1`,
        /// `cut-dodecahedron`, `multiphase-pentagon`,
        /// `roof-of 1 rect 1 2`, `rank-class-witness 2 2 3`.
        #[arg(required = true, num_args = 1.., allow_negative_numbers = true)]
        spec: Vec<String>,
    },
    /// Compute V and W as piecewise polynomials.
    #[command(name = "volume-fn")]
    VolumeFn {
        #[command(flatten)]
        input: InputArgs,
        /// Window extension beyond the inradius, as a fraction of it.
        #[arg(long, default_value_t = 0.1)]
        window_margin: f64,
        /// Write sampled r,V,W rows to this path.
        #[arg(long)]
        emit_csv: Option<PathBuf>,
        /// Number of sample rows for --emit-csv.
        #[arg(long, default_value_t = 256)]
        samples: usize,
    },
    /// Inradius and an incenter.
    Inradius {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Absolute rank of the facet normal family.
    Rank {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Dimension-wise equiangular check and closed-form polynomial.
    Equiangular {
        #[command(flatten)]
        input: InputArgs,
        /// Dihedral angle comparison tolerance in radians.
        #[arg(long, default_value_t = 1e-8)]
        angle_tol: f64,
    },
    /// Emit the roof of the input polytope as JSON.
    Roof {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Check the engine output against the stochastic and grid oracles.
    Verify {
        #[command(flatten)]
        input: InputArgs,
        /// Monte-Carlo samples per probed radius.
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        /// Seed for the counter-based sampler.
        #[arg(long, default_value_t = 0x5EED)]
        seed: u64,
        /// Grid resolution (cells per axis; capped in high dimensions).
        #[arg(long, default_value_t = 48)]
        resolution: usize,
        /// Stratified radii across the phases of V.
        #[arg(long, default_value_t = 20)]
        r_values: usize,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Polytope JSON file, or '-' for stdin.
    input: Option<String>,
    /// Generate a fixture instead of reading input (same grammar as `gen`).
    #[arg(long, num_args = 1.., allow_negative_numbers = true, conflicts_with = "input")]
    gen: Option<Vec<String>>,
    /// JSON file overriding tolerance fields.
    #[arg(long)]
    tolerances: Option<PathBuf>,
}

fn parse_floats(words: &[String]) -> Result<Vec<f64>, Error> {
    words
        .iter()
        .map(|w| {
            w.parse::<f64>()
                .map_err(|_| Error::InvalidShapeSpec(format!("not a number: {w}")))
        })
        .collect()
}

fn parse_usize(word: &str) -> Result<usize, Error> {
    word.parse::<usize>()
        .map_err(|_| Error::InvalidShapeSpec(format!("not an integer: {word}")))
}

fn parse_shape(words: &[String]) -> Result<ShapeSpec, Error> {
    let (kind, rest) = words
        .split_first()
        .ok_or_else(|| Error::InvalidShapeSpec("missing shape kind".into()))?;
    match kind.as_str() {
        "rect" | "rectangle" => Ok(ShapeSpec::Rectangle {
            half_sides: parse_floats(rest)?,
        }),
        "cube" | "square" => Ok(ShapeSpec::Cube {
            half_sides: parse_floats(rest)?,
        }),
        "segment" => {
            let a = parse_floats(rest)?;
            if a.len() != 1 {
                return Err(Error::InvalidShapeSpec("segment takes one half-side".into()));
            }
            Ok(ShapeSpec::Rectangle { half_sides: a })
        }
        "simplex" => Ok(ShapeSpec::Simplex {
            dim: parse_usize(rest.first().map(String::as_str).unwrap_or("3"))?,
        }),
        "regular-simplex" => Ok(ShapeSpec::RegularSimplex {
            dim: parse_usize(rest.first().map(String::as_str).unwrap_or("3"))?,
        }),
        "regular-polygon" | "ngon" => {
            let sides = parse_usize(
                rest.first()
                    .map(String::as_str)
                    .ok_or_else(|| Error::InvalidShapeSpec("polygon needs a side count".into()))?,
            )?;
            let apothem = match rest.get(1) {
                Some(w) => parse_floats(std::slice::from_ref(w))?[0],
                None => 1.0,
            };
            Ok(ShapeSpec::RegularPolygon { sides, apothem })
        }
        "cut-dodecahedron" => Ok(ShapeSpec::CutDodecahedron),
        "multiphase-pentagon" | "pentagon" => Ok(ShapeSpec::MultiphasePentagon),
        "roof-of" => {
            let (depth, inner) = rest
                .split_first()
                .ok_or_else(|| Error::InvalidShapeSpec("roof-of needs depth and shape".into()))?;
            Ok(ShapeSpec::RoofOf {
                inner: Box::new(parse_shape(inner)?),
                depth: parse_usize(depth)?,
            })
        }
        other => Err(Error::InvalidShapeSpec(format!("unknown shape: {other}"))),
    }
}

fn generate_from_words(words: &[String], tol: &Tolerances) -> Result<Polytope, Error> {
    if words.first().map(String::as_str) == Some("rank-class-witness") {
        let nums: Vec<usize> = words[1..]
            .iter()
            .map(|w| parse_usize(w))
            .collect::<Result<_, _>>()?;
        if nums.len() != 3 {
            return Err(Error::InvalidShapeSpec("rank-class-witness takes k s d".into()));
        }
        return shapes::make_rank_class_witness(nums[0], nums[1], nums[2], tol);
    }
    shapes::generate(&parse_shape(words)?, tol)
}

fn load_tolerances(args: &InputArgs) -> Result<Tolerances, Error> {
    match &args.tolerances {
        None => Ok(Tolerances::default()),
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::InvalidInput(format!("cannot read {path:?}: {e}")))?;
            serde_json::from_str(&text).map_err(|e| Error::InvalidInput(e.to_string()))
        }
    }
}

fn load_polytope(args: &InputArgs, tol: &Tolerances) -> Result<Polytope, Error> {
    if let Some(words) = &args.gen {
        return generate_from_words(words, tol);
    }
    let source = args
        .input
        .as_deref()
        .ok_or_else(|| Error::InvalidInput("provide an input file, '-', or --gen".into()))?;
    let text = if source == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        buf
    } else {
        fs::read_to_string(source)
            .map_err(|e| Error::InvalidInput(format!("cannot read {source}: {e}")))?
    };
    polytope_from_json(&text, tol)
}

fn write_csv(path: &PathBuf, f: &InnerVolumeFunction, samples: usize) -> Result<(), Error> {
    let n = samples.max(2);
    let mut out = String::from("r,V,W\n");
    for i in 0..n {
        let r = f.g * i as f64 / (n - 1) as f64;
        let v = f.v.evaluate(r)?;
        let w = f.w.evaluate(r)?;
        out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", r, v, w));
    }
    fs::write(path, out).map_err(|e| Error::InvalidInput(format!("cannot write CSV: {e}")))
}

fn equiangular_report(out: &EquiangularPolynomial) -> serde_json::Value {
    serde_json::json!({
        "equiangular": true,
        "alphas": out.profile.alphas,
        "gammas": out.profile.gammas,
        "omegas": out.profile.omegas,
        "mus": out.profile.mus,
        "poly": out.poly.coeffs(),
        "valid_on": [out.valid_on.0, out.valid_on.1],
    })
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Gen { spec } => {
            let tol = Tolerances::default();
            let p = generate_from_words(&spec, &tol)?;
            println!("{}", polytope_to_json(&p));
        }
        Command::VolumeFn {
            input,
            window_margin,
            emit_csv,
            samples,
        } => {
            let tol = load_tolerances(&input)?;
            let p = load_polytope(&input, &tol)?;
            let f = inner_volume_function(&p, window_margin, &tol)?;
            if let Some(path) = emit_csv {
                write_csv(&path, &f, samples)?;
            }
            println!("{}", f.report_json(&tol));
        }
        Command::Inradius { input } => {
            let tol = load_tolerances(&input)?;
            let p = load_polytope(&input, &tol)?;
            let (g, center) = inradius(&p, &tol)?;
            let center: Vec<f64> = center.iter().cloned().collect();
            println!("{}", serde_json::json!({ "g": g, "center": center }));
        }
        Command::Rank { input } => {
            let tol = load_tolerances(&input)?;
            let p = load_polytope(&input, &tol)?;
            let rank = absolute_rank(&p.normals(), &tol);
            println!(
                "{}",
                serde_json::json!({
                    "absolute_rank": rank.rank,
                    "saturated": rank.saturated,
                })
            );
        }
        Command::Equiangular { input, angle_tol } => {
            let tol = load_tolerances(&input)?;
            let p = load_polytope(&input, &tol)?;
            match equiangular_volume_polynomial(&p, angle_tol, &tol) {
                Ok(out) => println!("{}", equiangular_report(&out)),
                Err(Error::NotEquiangular(witness)) => {
                    println!(
                        "{}",
                        serde_json::json!({ "equiangular": false, "witness": witness })
                    );
                }
                Err(e) => return Err(e),
            }
        }
        Command::Roof { input } => {
            let tol = load_tolerances(&input)?;
            let p = load_polytope(&input, &tol)?;
            let roof = shapes::make_roof(&p, &tol)?;
            println!("{}", polytope_to_json(&roof));
        }
        Command::Verify {
            input,
            samples,
            seed,
            resolution,
            r_values,
        } => {
            let tol = load_tolerances(&input)?;
            let p = load_polytope(&input, &tol)?;
            let f = inner_volume_function(&p, 0.1, &tol)?;
            let cfg = VerifyConfig {
                mc_samples: samples,
                grid_resolution: resolution,
                seed,
                r_values,
            };
            let report = verify_volume_function(&p, &f.v, &cfg, &tol)?;
            println!(
                "{}",
                serde_json::to_value(&report).expect("report serializes")
            );
            if !report.passed {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::json!({ "error": e.code(), "message": e.to_string() })
            );
            if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
