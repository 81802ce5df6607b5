mod model;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use semistab::census::{hasse_probe, DEFAULT_LIFT_DEPTH, DEFAULT_SECTION_BUDGET};
use semistab::fiber::ClassifyOptions;
use semistab::gf::{Fe, Field};
use semistab::linalg;
use semistab::poly::FieldForm;
use semistab::reduce::{
    check_generic_fiber, describe, improve_cubic_fiber, improve_quadric_pencil_fiber, reduce_to_semistable, ModelKind,
    ReduceOptions, DEFAULT_REDUCE_BUDGET,
};
use semistab::scheme::{self, SchemeHandle};
use semistab::witness::{self, ProjPoint};

use model::{Kind, ModelFile};

const DEFAULT_SEED: u64 = 0;

#[derive(Parser)]
#[command(name = "semistab", version, about = "Semistable models and central fibers over F_q[[t]]")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true, value_name = "OUT")]
    json: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the central fiber.
    Classify {
        path: PathBuf,
        /// Largest extension degree K used by point counts.
        #[arg(long = "extension-depth", default_value_t = ClassifyOptions::default().kmax)]
        extension_depth: u32,
        /// Lines examined per count.
        #[arg(long, default_value_t = ClassifyOptions::default().budget)]
        budget: u64,
    },
    /// Reduce to a semistable model and print the trace.
    Reduce {
        path: PathBuf,
        /// Destabilizing iterations allowed.
        #[arg(long, default_value_t = DEFAULT_REDUCE_BUDGET)]
        budget: usize,
        /// Truncate every coefficient to this t-adic precision first.
        #[arg(long)]
        precision: Option<usize>,
        /// Continue with the fiber-improvement moves.
        #[arg(long = "improve-fiber")]
        improve_fiber: bool,
        #[arg(long = "extension-depth", default_value_t = ClassifyOptions::default().kmax)]
        extension_depth: u32,
    },
    /// Build a certified witness on the central fiber (coefficients at t = 0).
    Witness {
        path: PathBuf,
        subtask: Subtask,
        /// A rational point, comma-separated integers.
        #[arg(long)]
        point: Option<String>,
        /// Second point for the connecting curves.
        #[arg(long)]
        to: Option<String>,
    },
    /// Local solubility at small places and section enumeration for a bundle over P^1.
    Census {
        path: PathBuf,
        #[arg(long = "degree-bound", default_value_t = 2)]
        degree_bound: usize,
        #[arg(long = "place-bound", default_value_t = 2)]
        place_bound: usize,
        #[arg(long, default_value_t = DEFAULT_LIFT_DEPTH)]
        depth: usize,
        /// Cap on q^((D+1)(n+1)) candidate tuples.
        #[arg(long, default_value_t = DEFAULT_SECTION_BUDGET)]
        budget: u64,
    },
    /// Print the canonical form of a model file.
    Fmt {
        path: PathBuf,
        /// Exit with status 3 if the file is not canonical.
        #[arg(long)]
        check: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Subtask {
    LinesThroughPoint,
    TangentCone,
    TangentSection,
    SmoothPoint,
    RconnectCubic,
    RconnectCi22,
}

enum Failure {
    Parse(String),
    Compute(semistab::Error),
    Io(String),
}

impl From<semistab::Error> for Failure {
    fn from(e: semistab::Error) -> Self {
        Failure::Compute(e)
    }
}

fn load(path: &PathBuf) -> Result<(String, ModelFile), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let m = model::parse(&text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    Ok((text, m))
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn residues(m: &ModelFile) -> Vec<FieldForm> {
    m.equations.iter().map(|e| e.residue()).collect()
}

fn parse_point(field: &Arc<Field>, s: &str) -> Result<ProjPoint, Failure> {
    let coords: Vec<i64> = s
        .split(',')
        .map(|x| x.trim().parse().map_err(|_| Failure::Parse(format!("invalid point coordinate `{}`", x.trim()))))
        .collect::<Result<_, _>>()?;
    Ok(ProjPoint::from_ints(field, &coords)?)
}

/// A rational point where the Jacobian has full rank, drawn with the seed.
fn random_smooth_point(eqs: &[FieldForm], field: &Arc<Field>, rng: &mut ChaCha8Rng, avoid: Option<&ProjPoint>) -> Result<ProjPoint, Failure> {
    let f = &**field;
    let n = eqs[0].nvars();
    let (_, pts) = scheme::points(&SchemeHandle::new(field, n, eqs.to_vec()), 1, scheme::DEFAULT_COUNT_BUDGET)?;
    let smooth: Vec<&Vec<Fe>> = pts
        .iter()
        .filter(|p| {
            let jac: Vec<Vec<Fe>> = eqs.iter().map(|g| (0..n).map(|i| g.derivative(i, f).eval_point(p, f)).collect()).collect();
            linalg::rank(&jac, f) == eqs.len() && avoid.is_none_or(|a| &a.coords != *p)
        })
        .collect();
    let p = smooth.choose(rng).ok_or_else(|| semistab::Error::NoPoint("no smooth rational point on the central fiber".into()))?;
    Ok(ProjPoint::new(field, p.to_vec())?)
}

fn run(cli: &Cli) -> Result<Value, Failure> {
    match &cli.command {
        Command::Classify { path, extension_depth, budget } => {
            let (_, m) = load(path)?;
            let opts = ClassifyOptions { kmax: *extension_depth, budget: *budget };
            let report = m.state()?.classify(&opts)?;
            Ok(json!({
                "command": "classify",
                "bounds": { "extension_depth": extension_depth, "budget": budget },
                "summary": describe(&report),
                "result": to_value(&report),
            }))
        }
        Command::Reduce { path, budget, precision, improve_fiber, extension_depth } => {
            let (_, mut m) = load(path)?;
            if let Some(n) = precision {
                m.equations = m.equations.iter().map(|e| e.map(|c| c.truncate(*n))).collect();
            }
            let classify_options = ClassifyOptions { kmax: *extension_depth, ..ClassifyOptions::default() };
            let opts = ReduceOptions { budget: *budget, classify_options, ..ReduceOptions::default() };
            let start = m.state()?;
            let generic = check_generic_fiber(&start)?;
            let (mut end, trace) = reduce_to_semistable(&start, &opts)?;
            if *improve_fiber {
                end = match end.kind {
                    ModelKind::Pencil { .. } => improve_quadric_pencil_fiber(&end, &classify_options)?,
                    ModelKind::SingleForm { degree: 3, .. } => improve_cubic_fiber(&end, &classify_options)?,
                    _ => end,
                };
            }
            let fiber = end.classify(&classify_options).ok();
            let last = model::write(&ModelFile::from_state(&m, &end));
            Ok(json!({
                "command": "reduce",
                "bounds": { "budget": budget, "precision": precision, "extension_depth": extension_depth, "improve_fiber": improve_fiber },
                "generic_fiber": to_value(&generic),
                "trace": to_value(&trace),
                "ramification": end.ramification,
                "invariant_valuation": end.invariant().map(|v| v.to_string()),
                "ledger": to_value(&end.ledger.records(&end.field)),
                "replay_matches": end.replay_matches()?,
                "fiber": fiber.as_ref().map(describe),
                "fiber_report": fiber.as_ref().map(to_value),
                "final_model": last,
            }))
        }
        Command::Witness { path, subtask, point, to } => {
            let (_, m) = load(path)?;
            let field = m.field.clone();
            let eqs = residues(&m);
            let seed = cli.seed.or(m.seed).unwrap_or(DEFAULT_SEED);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pick = |given: &Option<String>, avoid: Option<&ProjPoint>, rng: &mut ChaCha8Rng| match given {
                Some(s) => parse_point(&field, s),
                None => random_smooth_point(&eqs, &field, rng, avoid),
            };
            let result = match subtask {
                Subtask::LinesThroughPoint => {
                    let x = pick(point, None, &mut rng)?;
                    json!({ "point": to_value(&x), "scheme": to_value(&witness::lines_through_point(&eqs, &field, &x)?) })
                }
                Subtask::TangentCone => {
                    let x = pick(point, None, &mut rng)?;
                    json!({ "point": to_value(&x), "cone": to_value(&witness::tangent_cone(&eqs, &field, &x)?) })
                }
                Subtask::TangentSection => {
                    let x = pick(point, None, &mut rng)?;
                    json!({ "point": to_value(&x), "section": to_value(&witness::tangent_section(&eqs[0], &field, &x)?) })
                }
                Subtask::SmoothPoint => match (m.kind, m.degree) {
                    (Kind::Form, 3) => match witness::smooth_point_on_cubic(&eqs[0], &field)? {
                        witness::CubicPoint::Point(w) => to_value(&w),
                        witness::CubicPoint::Tag(t) => json!({ "normal_form": to_value(&t) }),
                    },
                    (Kind::Form, 2) => to_value(&witness::quadric_point(&eqs[0], &field, true)?),
                    _ => return Err(semistab::Error::UnsupportedCase("smooth-point needs a quadric or a cubic".into()).into()),
                },
                Subtask::RconnectCubic | Subtask::RconnectCi22 => {
                    let x = pick(point, None, &mut rng)?;
                    let y = pick(to, Some(&x), &mut rng)?;
                    let curve = match subtask {
                        Subtask::RconnectCubic if m.kind == Kind::Form && m.degree == 3 => witness::r_connect_cubic(&eqs[0], &field, &x, &y)?,
                        Subtask::RconnectCi22 if m.kind == Kind::Pencil => witness::r_connect_ci22(&eqs[0], &eqs[1], &field, &x, &y)?,
                        _ => return Err(semistab::Error::UnsupportedCase("subtask does not match the model kind".into()).into()),
                    };
                    to_value(&curve)
                }
            };
            Ok(json!({
                "command": "witness",
                "subtask": format!("{subtask:?}"),
                "seed": seed,
                "result": result,
            }))
        }
        Command::Census { path, degree_bound, place_bound, depth, budget } => {
            let (_, m) = load(path)?;
            let bundle = m.bundle_model()?;
            let verdict = hasse_probe(&bundle, *degree_bound, *place_bound, *depth, *budget)?;
            Ok(json!({ "command": "census", "result": to_value(&verdict) }))
        }
        Command::Fmt { .. } => unreachable!("handled in main"),
    }
}

fn emit(cli: &Cli, out: &str) -> ExitCode {
    match &cli.json {
        Some(p) => {
            if let Err(e) = std::fs::write(p, out) {
                eprintln!("error: {}: {e}", p.display());
                return ExitCode::from(4);
            }
        }
        None => print!("{out}"),
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::Fmt { path, check } = &cli.command {
        return match load(path) {
            Ok((text, m)) => {
                let canon = model::write(&m);
                if *check && canon != text {
                    eprintln!("{}: not in canonical form", path.display());
                    return ExitCode::from(3);
                }
                print!("{canon}");
                ExitCode::SUCCESS
            }
            Err(Failure::Parse(e) | Failure::Io(e)) => {
                eprintln!("parse error: {e}");
                ExitCode::from(3)
            }
            Err(Failure::Compute(e)) => {
                eprintln!("error: {e}");
                ExitCode::from(4)
            }
        };
    }
    match run(&cli) {
        Ok(v) => {
            let mut out = serde_json::to_string_pretty(&v).expect("json");
            out.push('\n');
            emit(&cli, &out)
        }
        Err(Failure::Parse(e) | Failure::Io(e)) => {
            eprintln!("parse error: {e}");
            ExitCode::from(3)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(4)
        }
    }
}
