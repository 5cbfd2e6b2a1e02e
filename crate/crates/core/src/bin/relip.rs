use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use relip_core::geometry::rational::parse_rat;
use relip_core::geometry::{set_dimension_cap, Rat};
use relip_core::io::commands::{exit_code, run_command, Command, RunOptions};
use relip_core::io::problem::parse_problem;
use relip_core::{Error, Result};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    /// Tangent and regular normal cones of a set at a point
    Cone,
    /// Limiting coderivative graphs and their norms
    Coderivative,
    /// Every Lipschitz-like modulus estimate side by side
    Lipschitz,
    /// Metric regularity relative to the constraint set
    Regularity,
    /// Chain rule inclusion and its qualification condition
    VerifyChain,
    /// Sum rule inclusion and its qualification condition
    VerifySum,
    /// Extremality of a set system and a separating witness
    Extremal,
    /// Fuzzy intersection rule witness
    Fuzzy,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Command {
        match c {
            Cmd::Cone => Command::Cone,
            Cmd::Coderivative => Command::Coderivative,
            Cmd::Lipschitz => Command::Lipschitz,
            Cmd::Regularity => Command::Regularity,
            Cmd::VerifyChain => Command::VerifyChain,
            Cmd::VerifySum => Command::VerifySum,
            Cmd::Extremal => Command::Extremal,
            Cmd::Fuzzy => Command::Fuzzy,
        }
    }
}

fn rational(s: &str) -> std::result::Result<Rat, String> {
    parse_rat(s).map_err(|e| e.to_string())
}

/// Exact verification of relative Lipschitz-like stability and coderivative calculus
/// on piecewise-polyhedral problems.
///
/// Exit status: 0 when verdicts were computed, 1 when hypotheses are unmet, 2 on error.
#[derive(Parser, Debug)]
#[command(name = "relip", version)]
struct Cli {
    #[arg(value_enum)]
    command: Cmd,

    /// Problem file (JSON)
    problem: PathBuf,

    /// Tolerance ε as "p/q"
    #[arg(long, env = "RELIP_EPS", value_parser = rational)]
    eps: Option<Rat>,

    /// Neighborhood radius δ for the criteria
    #[arg(long, env = "RELIP_DELTA", value_parser = rational)]
    delta: Option<Rat>,

    /// Oracle grid step
    #[arg(long, env = "RELIP_GRID", value_parser = rational)]
    grid: Option<Rat>,

    /// Oracle neighborhood radius
    #[arg(long, env = "RELIP_RADIUS", value_parser = rational)]
    radius: Option<Rat>,

    /// Approximation radius ν for the fuzzy rule
    #[arg(long, env = "RELIP_NU", value_parser = rational)]
    nu: Option<Rat>,

    /// Largest ambient dimension for generator enumeration
    #[arg(long, env = "RELIP_DIM_CAP")]
    dim_cap: Option<usize>,

    /// Net size or search budget
    #[arg(long, env = "RELIP_BUDGET")]
    budget: Option<usize>,

    /// Print the JSON report instead of the table
    #[arg(long, env = "RELIP_JSON")]
    json: bool,

    /// Also write the JSON report to this file
    #[arg(long, short)]
    output: Option<PathBuf>,

    /// Include wall-clock time in the report
    #[arg(long, env = "RELIP_TIMING")]
    timing: bool,
}

fn run(cli: &Cli) -> Result<relip_core::io::report::AnalysisReport> {
    let text = std::fs::read_to_string(&cli.problem).map_err(|e| Error::Io(format!("{}: {e}", cli.problem.display())))?;
    let problem = parse_problem(&text)?;
    if let Some(cap) = cli.dim_cap.or(problem.spec.params.dim_cap) {
        set_dimension_cap(cap);
    }
    let opts = RunOptions {
        eps: cli.eps.clone(),
        delta: cli.delta.clone(),
        grid: cli.grid.clone(),
        radius: cli.radius.clone(),
        nu: cli.nu.clone(),
        budget: cli.budget,
        timing: cli.timing,
    };
    run_command(cli.command.into(), &problem, &opts)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli);
    match &outcome {
        Ok(report) => {
            if cli.json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.to_table());
            }
            if let Some(path) = &cli.output {
                if let Err(e) = std::fs::write(path, report.to_json()) {
                    eprintln!("relip: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
        }
        Err(e) => eprintln!("relip: {e}"),
    }
    ExitCode::from(exit_code(&outcome) as u8)
}
