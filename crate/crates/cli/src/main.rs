//! `nilclose`: closures of orbits and polynomial images in nilmanifolds.
//!
//! Exit codes: 0 success, 2 malformed input, 3 verification failed,
//! 4 mathematical precondition failed, 1 i/o trouble.

mod bundled;
mod commands;
mod problem;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::OnceLock;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use commands::Output;
use problem::{CliError, CliResult, Session};

#[derive(Parser)]
#[command(name = "nilclose", version, about = "Exact closures of orbits and polynomial images in nilmanifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Problem file (JSON).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Directory for side files (CSV samples, Weyl tables).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Seed for the random sampling strategy.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Quadrature tolerance (equi) or containment tolerance (verify).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Orbit sample count (verify).
    #[arg(long, global = true)]
    samples: Option<usize>,
}

#[derive(Subcommand, Clone, PartialEq, Eq)]
enum Command {
    /// Closure of the orbit of exp(h) for a subalgebra h.
    ClosureOrbit,
    /// Closure of the image of a polynomial map.
    ClosurePolymap,
    /// Rational closure of a subalgebra.
    Rationalize,
    /// Weak Malcev basis through a subalgebra.
    Malcev,
    /// Equidistribution of a curve on the torus.
    Equi,
    /// Sample an orbit and compare it with the computed closure.
    Verify,
    /// Print a bundled problem file, or list them.
    Examples {
        name: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("NILCLOSE_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // Only fails if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("nilclose: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: &Cli) -> CliResult<i32> {
    if let Command::Examples { name } = &cli.command {
        return examples(name.as_deref(), cli.out_dir.as_deref());
    }
    let path = cli.input.as_ref().ok_or_else(|| CliError::Input("--input FILE is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut session = Session::new(&text)?;
    let opts = &mut session.problem.options;
    opts.seed = cli.seed.or(opts.seed);
    opts.tol = cli.tol.or(opts.tol);
    opts.samples = cli.samples.or(opts.samples);

    let out = match &cli.command {
        Command::ClosureOrbit => commands::closure_orbit(&session)?,
        Command::ClosurePolymap => commands::closure_polymap(&session)?,
        Command::Rationalize => commands::rationalize(&session)?,
        Command::Malcev => commands::malcev(&session)?,
        Command::Equi => commands::equi(&session)?,
        Command::Verify => commands::verify(&session)?,
        Command::Examples { .. } => unreachable!(),
    };
    emit(&out, cli.out_dir.as_deref())?;
    Ok(out.code)
}

const OUTPUT_SCHEMA: &str = include_str!("../schema/output.schema.json");

fn check_output(v: &Value) -> CliResult<()> {
    static VALIDATOR: OnceLock<jsonschema::Validator> = OnceLock::new();
    let validator = VALIDATOR.get_or_init(|| {
        let schema: Value = serde_json::from_str(OUTPUT_SCHEMA).expect("output schema is valid json");
        jsonschema::validator_for(&schema).expect("output schema compiles")
    });
    validator.validate(v).map_err(|e| CliError::Io(format!("output does not match its schema: {e}")))
}

fn emit(out: &Output, dir: Option<&Path>) -> CliResult<()> {
    check_output(&out.json)?;
    let text = serde_json::to_string_pretty(&out.json).map_err(|e| CliError::Io(e.to_string()))?;
    println!("{text}");
    if let Some(dir) = dir {
        write_files(dir, &out.files)?;
    }
    Ok(())
}

fn write_files(dir: &Path, files: &[(String, String)]) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    for (name, body) in files {
        let p = dir.join(name);
        fs::write(&p, body).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn examples(name: Option<&str>, dir: Option<&Path>) -> CliResult<i32> {
    match name {
        None => {
            let list: Vec<_> = bundled::EXAMPLES.iter().map(|e| json!({ "name": e.name, "command": e.command })).collect();
            let out = json!({ "format": 1, "examples": list });
            check_output(&out)?;
            println!("{}", serde_json::to_string_pretty(&out).expect("static json"));
        }
        Some(n) => {
            let ex = bundled::find(n).ok_or_else(|| {
                let names: Vec<&str> = bundled::EXAMPLES.iter().map(|e| e.name).collect();
                CliError::Input(format!("unknown example {n:?}; available: {}", names.join(", ")))
            })?;
            print!("{}", ex.text);
            if let Some(dir) = dir {
                write_files(dir, &[(format!("{n}.json"), ex.text.to_string())])?;
            }
        }
    }
    Ok(0)
}
