//! Command-line front end: `verify`, `compute`, `random` and `validate`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::effects;
use crate::instruments::{self, induced_observable, luders_instrument};
use crate::io::{self, Object};
use crate::label::Label;
use crate::models::{dilate_instrument, model_instrument, Fimm, Interaction};
use crate::observables::{self, Observable};
use crate::random::{self, check_range, seeded};
use crate::verify::{self, Status};
use crate::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INVALID: u8 = 3;

/// Environment variable that scales closeness tolerances of `verify`.
pub const TOLERANCE_ENV: &str = "QINSTR_TOL";

#[derive(Debug, Parser)]
#[command(name = "qinstr", version, about = "Finite-dimensional quantum measurement calculus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run verification suites (all of them when no --suite is given).
    Verify {
        #[arg(long = "suite", value_name = "ID")]
        suites: Vec<String>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Random trials per suite, overriding each suite's default.
        #[arg(long)]
        trials: Option<usize>,
        /// List suite ids and exit.
        #[arg(long)]
        list: bool,
    },
    /// Combine documents and write the result.
    Compute {
        expr: Expr,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
        /// Mixture weights for `convex`, comma separated.
        #[arg(long, value_delimiter = ',')]
        weights: Vec<f64>,
        /// First outcome set for `joint-prob`, comma separated.
        #[arg(long = "x", value_delimiter = ',')]
        first: Vec<String>,
        /// Second outcome set for `joint-prob`, comma separated.
        #[arg(long = "y", value_delimiter = ',')]
        second: Vec<String>,
    },
    /// Write a seeded random object.
    Random {
        kind: Kind,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 2)]
        outcomes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Load a document and check its invariants.
    Validate { file: PathBuf },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Expr {
    SeqProduct,
    Conditioned,
    Convex,
    PostProcess,
    ProductInstr,
    JMap,
    KMap,
    Dilate,
    ModelInstr,
    JointProb,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Effect,
    State,
    Observable,
    Instrument,
    Fimm,
    Stochastic,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

fn load_failure(path: &Path, e: Error) -> Failure {
    let code = match e {
        Error::Io(_) => EXIT_USAGE,
        _ => EXIT_INVALID,
    };
    Failure {
        code,
        message: format!("{}: {e}", path.display()),
    }
}

/// Parses arguments, runs the command and returns its exit code.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("qinstr: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Verify {
            suites,
            seed,
            trials,
            list,
        } => {
            if list {
                for s in verify::suites() {
                    println!("{:<18} {}", s.id, s.description);
                }
                return Ok(EXIT_OK);
            }
            cmd_verify(&suites, seed, trials)
        }
        Command::Compute {
            expr,
            inputs,
            output,
            weights,
            first,
            second,
        } => {
            let objects = inputs
                .iter()
                .map(|p| io::load(p).map_err(|e| load_failure(p, e)))
                .collect::<Result<Vec<_>, _>>()?;
            let result = compute(expr, &objects, &weights, &first, &second)?;
            if let Object::Probability(p) = result {
                println!("{p:.16e}");
            }
            io::save(&result, &output).map_err(|e| Failure::usage(e.to_string()))?;
            Ok(EXIT_OK)
        }
        Command::Random {
            kind,
            dim,
            outcomes,
            seed,
            output,
        } => {
            let obj = random_object(kind, dim, outcomes, seed).map_err(|e| Failure::usage(e.to_string()))?;
            io::save(&obj, &output).map_err(|e| Failure::usage(e.to_string()))?;
            Ok(EXIT_OK)
        }
        Command::Validate { file } => {
            let obj = io::load(&file).map_err(|e| load_failure(&file, e))?;
            println!("valid {}", describe(&obj));
            Ok(EXIT_OK)
        }
    }
}

fn tolerance_scale() -> Result<f64, Failure> {
    match std::env::var(TOLERANCE_ENV) {
        Err(_) => Ok(1.0),
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(x) if x.is_finite() && x > 0.0 => Ok(x),
            _ => Err(Failure::usage(format!("{TOLERANCE_ENV} must be a positive number, got `{s}`"))),
        },
    }
}

fn cmd_verify(ids: &[String], seed: u64, trials: Option<usize>) -> Result<u8, Failure> {
    let cfg = verify::Config {
        seed,
        trials,
        tol_scale: tolerance_scale()?,
    };
    let reports = verify::run(ids, &cfg).map_err(|id| {
        let known: Vec<&str> = verify::suite_ids().collect();
        Failure::usage(format!("unknown suite `{id}`; known suites: {}", known.join(", ")))
    })?;
    let mut failed = 0;
    for r in &reports {
        println!("{r}");
        if r.status == Status::Fail {
            failed += 1;
        }
    }
    let unknown = reports.iter().filter(|r| r.status == Status::Unknown).count();
    println!(
        "{} suites: {} passed, {} failed, {} unknown",
        reports.len(),
        reports.len() - failed - unknown,
        failed,
        unknown
    );
    Ok(if failed == 0 { EXIT_OK } else { EXIT_FAIL })
}

fn describe(obj: &Object) -> String {
    match obj {
        Object::Effect(e) => format!("effect on dimension {}", e.dim()),
        Object::State(s) => format!("state on dimension {}", s.dim()),
        Object::Observable(a) => format!("observable on dimension {} with {} outcomes", a.dim(), a.len()),
        Object::Instrument(i) => format!("instrument on dimension {} with {} outcomes", i.dim(), i.len()),
        Object::Fimm(m) => format!(
            "measurement model on dimension {} with probe dimension {} and {} outcomes",
            m.dim_h(),
            m.dim_k(),
            m.pointer().len()
        ),
        Object::Stochastic(nu) => format!(
            "stochastic matrix with {} sources and {} targets",
            nu.sources().len(),
            nu.targets().len()
        ),
        Object::Probability(p) => format!("probability {p}"),
    }
}

fn arity(expr: Expr, objects: &[Object], n: usize) -> Result<(), Failure> {
    if objects.len() != n {
        return Err(Failure::usage(format!(
            "{} takes {n} input(s), got {}",
            expr_name(expr),
            objects.len()
        )));
    }
    Ok(())
}

fn expr_name(expr: Expr) -> String {
    expr.to_possible_value().map(|v| v.get_name().to_owned()).unwrap_or_default()
}

fn mismatch(expr: Expr, objects: &[Object]) -> Failure {
    let kinds: Vec<&str> = objects.iter().map(Object::kind).collect();
    Failure::usage(format!("{} does not apply to ({})", expr_name(expr), kinds.join(", ")))
}

fn compute(expr: Expr, objects: &[Object], weights: &[f64], first: &[String], second: &[String]) -> Result<Object, Failure> {
    let math = |e: Error| Failure::usage(format!("{}: {e}", expr_name(expr)));
    let out = match expr {
        Expr::SeqProduct => {
            arity(expr, objects, 2)?;
            match (&objects[0], &objects[1]) {
                (Object::Effect(a), Object::Effect(b)) => Object::Effect(effects::seq_product(a, b).map_err(math)?),
                (Object::Observable(a), Object::Observable(b)) => {
                    Object::Observable(observables::seq_product(a, b).map_err(math)?)
                }
                _ => return Err(mismatch(expr, objects)),
            }
        }
        Expr::Conditioned => {
            arity(expr, objects, 2)?;
            match (&objects[0], &objects[1]) {
                (Object::Observable(a), Object::Observable(b)) => {
                    Object::Observable(observables::conditioned(a, b).map_err(math)?)
                }
                (Object::Instrument(i), Object::Instrument(j)) => {
                    Object::Instrument(instruments::conditioned(i, j).map_err(math)?)
                }
                _ => return Err(mismatch(expr, objects)),
            }
        }
        Expr::Convex => {
            if weights.len() != objects.len() || objects.is_empty() {
                return Err(Failure::usage(format!(
                    "convex needs one weight per input: {} weights for {} inputs",
                    weights.len(),
                    objects.len()
                )));
            }
            if let Some(obs) = all_of(objects, |o| match o {
                Object::Observable(a) => Some(a.clone()),
                _ => None,
            }) {
                Object::Observable(observables::convex_combination(weights, &obs).map_err(math)?)
            } else if let Some(ins) = all_of(objects, |o| match o {
                Object::Instrument(i) => Some(i.clone()),
                _ => None,
            }) {
                Object::Instrument(instruments::convex_combination(weights, &ins).map_err(math)?)
            } else {
                return Err(mismatch(expr, objects));
            }
        }
        Expr::PostProcess => {
            arity(expr, objects, 2)?;
            match (&objects[0], &objects[1]) {
                (Object::Stochastic(nu), Object::Observable(b)) => {
                    Object::Observable(observables::post_process(nu, b).map_err(math)?)
                }
                (Object::Stochastic(nu), Object::Instrument(i)) => {
                    Object::Instrument(instruments::post_process(nu, i).map_err(math)?)
                }
                _ => return Err(mismatch(expr, objects)),
            }
        }
        Expr::ProductInstr => {
            arity(expr, objects, 2)?;
            match (&objects[0], &objects[1]) {
                (Object::Instrument(i), Object::Instrument(j)) => {
                    Object::Instrument(instruments::product(i, j).map_err(math)?)
                }
                _ => return Err(mismatch(expr, objects)),
            }
        }
        Expr::JMap => {
            arity(expr, objects, 1)?;
            match &objects[0] {
                Object::Instrument(i) => Object::Observable(induced_observable(i)),
                _ => return Err(mismatch(expr, objects)),
            }
        }
        Expr::KMap => {
            arity(expr, objects, 1)?;
            match &objects[0] {
                Object::Observable(a) => Object::Instrument(luders_instrument(a)),
                _ => return Err(mismatch(expr, objects)),
            }
        }
        Expr::Dilate => {
            arity(expr, objects, 1)?;
            match &objects[0] {
                Object::Instrument(i) => Object::Fimm(dilate_instrument(i).map_err(math)?),
                _ => return Err(mismatch(expr, objects)),
            }
        }
        Expr::ModelInstr => {
            arity(expr, objects, 1)?;
            match &objects[0] {
                Object::Fimm(m) => Object::Instrument(model_instrument(m).map_err(math)?),
                _ => return Err(mismatch(expr, objects)),
            }
        }
        Expr::JointProb => {
            arity(expr, objects, 3)?;
            if first.is_empty() || second.is_empty() {
                return Err(Failure::usage("joint-prob needs --x and --y outcome sets"));
            }
            let x: Vec<Label> = first.iter().map(|s| Label::parse(s)).collect();
            let y: Vec<Label> = second.iter().map(|s| Label::parse(s)).collect();
            let p = match (&objects[0], &objects[1], &objects[2]) {
                (Object::State(rho), Object::Observable(a), Object::Observable(b)) => {
                    observables::joint_probability_then(rho, a, &x, b, &y).map_err(math)?
                }
                (Object::State(rho), Object::Instrument(i), Object::Instrument(j)) => {
                    instruments::joint_probability(rho, i, &x, j, &y).map_err(math)?
                }
                _ => return Err(mismatch(expr, objects)),
            };
            Object::Probability(p)
        }
    };
    Ok(out)
}

fn all_of<T>(objects: &[Object], f: impl Fn(&Object) -> Option<T>) -> Option<Vec<T>> {
    objects.iter().map(f).collect()
}

/// Random object of the given kind. For `stochastic`, `dim` is the number of
/// source outcomes; for `fimm` the probe has the same dimension as the system
/// and the interaction is a Haar-random unitary.
fn random_object(kind: Kind, dim: usize, outcomes: usize, seed: u64) -> crate::Result<Object> {
    check_range("dim", dim, 2, 8)?;
    check_range("outcomes", outcomes, 1, 8)?;
    let mut rng = seeded(seed);
    let obj = match kind {
        Kind::Effect => Object::Effect(random::random_effect(&mut rng, dim)),
        Kind::State => Object::State(random::random_state(&mut rng, dim)),
        Kind::Observable => Object::Observable(random::random_observable(&mut rng, dim, outcomes)),
        Kind::Instrument => Object::Instrument(random::random_instrument(&mut rng, dim, outcomes)),
        Kind::Fimm => {
            let u = random::random_unitary(&mut rng, dim * dim);
            let eta = random::random_state(&mut rng, dim);
            let pointer: Observable = random::random_observable(&mut rng, dim, outcomes);
            Object::Fimm(Fimm::new(dim, eta, Interaction::unitary(u)?, pointer)?)
        }
        Kind::Stochastic => Object::Stochastic(random::random_stochastic(&mut rng, Label::range(dim), outcomes)),
    };
    Ok(obj)
}
