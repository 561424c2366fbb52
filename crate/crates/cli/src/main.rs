//! `awmc`: check formulas, transform and validate awareness models.
//!
//! Exit codes: 0 true / ok, 1 false / violations found, 2 undefined,
//! 3 unreadable input or formula, 4 invalid model or wrong model kind,
//! 5 unknown world or state.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use awmc::logic::{
    axiom_sweep, derived_theorem_sweep, generate_models, sweep_schemas, AxiomSchema,
};
use awmc::transforms::{
    check_cells_against, check_equivalence_h, check_equivalence_l, h_transform, l_transform_capped,
    TransformError,
};
use awmc::{
    fixtures, load_model, model_to_string, parse, LoadError, Model, ThreeVal, DEFAULT_MAX_ATOMS,
};
use clap::{Parser, Subcommand, ValueEnum};

const EXIT_FALSE: u8 = 1;
const EXIT_UNDEFINED: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_INVALID: u8 = 4;
const EXIT_UNKNOWN_WORLD: u8 = 5;

#[derive(Parser)]
#[command(name = "awmc", version, about = "Model checker for awareness models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a formula at a world (`w@{atoms}`) or state.
    Check {
        model: PathBuf,
        world: String,
        formula: String,
    },
    /// Convert an unawareness model to a Kripke lattice model (`l`) or back (`h`).
    Transform {
        direction: Direction,
        input: PathBuf,
        output: PathBuf,
    },
    /// Report the structural properties of a model.
    Validate { model: PathBuf },
    /// Compare verdicts across the transformation for every formula up to a depth.
    Equiv {
        model: PathBuf,
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// Sweep the axiom schemas over a seeded random corpus.
    Axioms {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        depth: usize,
    },
    /// Print the normalized form of a formula.
    Parse { formula: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    L,
    H,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl ToString) -> Self {
        Failure {
            code,
            message: message.to_string(),
        }
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        let code = if e.is_syntax() {
            EXIT_PARSE
        } else {
            EXIT_INVALID
        };
        Failure::new(code, e)
    }
}

impl From<TransformError> for Failure {
    fn from(e: TransformError) -> Self {
        Failure::new(EXIT_INVALID, e)
    }
}

fn max_atoms() -> Result<usize, Failure> {
    match std::env::var("AWMC_MAX_ATOMS") {
        Ok(v) => v.trim().parse().map_err(|_| {
            Failure::new(
                EXIT_PARSE,
                format!("AWMC_MAX_ATOMS must be a number, got {v:?}"),
            )
        }),
        Err(_) => Ok(DEFAULT_MAX_ATOMS),
    }
}

fn load(path: &Path) -> Result<Model, Failure> {
    Ok(load_model(path, max_atoms()?)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Check {
            model,
            world,
            formula,
        } => check(&model, &world, &formula),
        Command::Transform {
            direction,
            input,
            output,
        } => transform(direction, &input, &output),
        Command::Validate { model } => validate(&model),
        Command::Equiv { model, depth } => equiv(&model, depth),
        Command::Axioms {
            seed,
            samples,
            depth,
        } => axioms(seed, samples, depth),
        Command::Parse { formula } => {
            let phi = parse(&formula).map_err(|e| Failure::new(EXIT_PARSE, e))?;
            println!("{phi}");
            Ok(0)
        }
    }
}

fn check(path: &Path, world: &str, formula: &str) -> Result<u8, Failure> {
    let model = load(path)?;
    let phi = parse(formula).map_err(|e| Failure::new(EXIT_PARSE, e))?;
    let verdict = match &model {
        Model::KripkeLattice(m) => {
            let w = m
                .lattice()
                .base()
                .parse_world_ref(world)
                .map_err(|e| Failure::new(EXIT_UNKNOWN_WORLD, e))?;
            m.satisfies(w, &phi)
                .map_err(|e| Failure::new(EXIT_PARSE, e))?
        }
        Model::Hms(m) => {
            let s = m
                .state_index(world)
                .map_err(|e| Failure::new(EXIT_UNKNOWN_WORLD, e))?;
            m.satisfies(s, &phi)
                .map_err(|e| Failure::new(EXIT_PARSE, e))?
        }
    };
    println!("{verdict}");
    Ok(match verdict {
        ThreeVal::True => 0,
        ThreeVal::False => EXIT_FALSE,
        ThreeVal::Undefined => EXIT_UNDEFINED,
    })
}

fn transform(direction: Direction, input: &Path, output: &Path) -> Result<u8, Failure> {
    let model = load(input)?;
    match (direction, model) {
        (Direction::L, Model::Hms(m)) => {
            let (klm, corr) = l_transform_capped(&m, max_atoms()?)?;
            let table = serde_json::to_string_pretty(&corr.to_table(&m, &klm))
                .expect("string map serializes");
            write_all(&[
                (
                    output.to_path_buf(),
                    model_to_string(&Model::KripkeLattice(klm)),
                ),
                (sidecar(output), table + "\n"),
            ])?;
        }
        (Direction::H, Model::KripkeLattice(klm)) => {
            let hms = h_transform(&klm)?;
            write_all(&[(output.to_path_buf(), model_to_string(&Model::Hms(hms)))])?;
        }
        (d, m) => {
            let want = match d {
                Direction::L => "hms",
                Direction::H => "kripke_lattice",
            };
            return Err(Failure::new(
                EXIT_INVALID,
                format!("transform expects a {want} model, got {}", m.kind()),
            ));
        }
    }
    Ok(0)
}

/// `<out>.corr.json`
fn sidecar(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".corr.json");
    PathBuf::from(name)
}

/// Writes every file via a temporary sibling and renames only once all
/// temporaries are written, so an error leaves no partial output.
fn write_all(files: &[(PathBuf, String)]) -> Result<(), Failure> {
    let io = |path: &Path, e: std::io::Error| {
        Failure::new(EXIT_PARSE, format!("cannot write {}: {e}", path.display()))
    };
    let mut staged = Vec::new();
    for (path, text) in files {
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(format!(".tmp{}", std::process::id()));
        let tmp = PathBuf::from(tmp);
        if let Err(e) = fs::write(&tmp, text) {
            for (t, _) in &staged {
                let _ = fs::remove_file(t);
            }
            return Err(io(path, e));
        }
        staged.push((tmp, path));
    }
    for (tmp, path) in &staged {
        fs::rename(tmp, path).map_err(|e| io(path, e))?;
    }
    Ok(())
}

fn validate(path: &Path) -> Result<u8, Failure> {
    match load(path)? {
        Model::Hms(m) => {
            let report = m.frame().validate();
            for v in &report.violations {
                println!("VIOLATION {}", m.frame().describe(v));
            }
            println!("{}", report.summary());
            let (klm, _) = l_transform_capped(&m, max_atoms()?)?;
            let cells = match check_cells_against(&m, &klm) {
                Ok(n) => format!("cells agree with possibility sets on {n} worlds"),
                Err(cex) => {
                    println!("VIOLATION {cex:?}");
                    return Ok(EXIT_FALSE);
                }
            };
            println!("{cells}");
            let base = klm.lattice().base();
            let non_eq: Vec<_> = base
                .agents()
                .iter()
                .filter(|a| !base.is_equivalence(a).expect("own agent"))
                .map(ToString::to_string)
                .collect();
            if non_eq.is_empty() {
                println!("L-transform relations are equivalence relations");
            } else {
                println!(
                    "VIOLATION L-transform relation is not an equivalence for: {}",
                    non_eq.join(", ")
                );
            }
            Ok(if report.is_ok() && non_eq.is_empty() {
                0
            } else {
                EXIT_FALSE
            })
        }
        Model::KripkeLattice(m) => {
            let base = m.lattice().base();
            println!(
                "awareness maps satisfy D, II, NS for {} agent(s)",
                base.agents().len()
            );
            let non_eq: Vec<_> = base
                .agents()
                .iter()
                .filter(|a| !base.is_equivalence(a).expect("own agent"))
                .map(ToString::to_string)
                .collect();
            if non_eq.is_empty() {
                println!("all accessibility relations are equivalence relations");
                let hms = h_transform(&m)?;
                println!("transformed frame: {}", hms.frame().validate().summary());
            } else {
                println!("not equivalence relations: {}", non_eq.join(", "));
            }
            Ok(0)
        }
    }
}

fn equiv(path: &Path, depth: usize) -> Result<u8, Failure> {
    let report = match load(path)? {
        Model::Hms(m) => check_equivalence_l(&m, depth)?,
        Model::KripkeLattice(m) => check_equivalence_h(&m, depth)?,
    };
    if let Some(c) = &report.first {
        println!("CEX {c}");
    }
    println!("{}", report.summary());
    Ok(if report.is_ok() { 0 } else { EXIT_FALSE })
}

fn axioms(seed: u64, samples: usize, depth: usize) -> Result<u8, Failure> {
    let corpus = generate_models(seed, 3, 4, 2, samples);
    let pool = |m: &awmc::KripkeLatticeModel| {
        (
            m.lattice().base().atoms().to_vec(),
            m.lattice().base().agents().to_vec(),
        )
    };
    let (atoms, agents) = corpus.first().map(pool).unwrap_or_default();
    let report = axiom_sweep(&corpus, &atoms, &agents, depth);
    let derived = derived_theorem_sweep(&corpus, depth);
    let trade = [fixtures::trade_klm()];
    let (t_atoms, t_agents) = pool(&trade[0]);
    let mut five = sweep_schemas(&[AxiomSchema::Five], &trade, &t_atoms, &t_agents, depth);
    five.counterexamples.extend(
        sweep_schemas(&[AxiomSchema::Five], &corpus, &atoms, &agents, depth).counterexamples,
    );
    for line in report.lines().into_iter().chain(derived.lines()) {
        println!("{line}");
    }
    let n5 = five.counterexamples.len();
    let ok = report.is_valid() && derived.is_valid();
    println!(
        "{}; schema5 counterexamples: {n5}",
        if ok {
            "all schemas valid"
        } else {
            "schema violations found"
        }
    );
    Ok(if ok { 0 } else { EXIT_FALSE })
}
