//! Command-line front end. Exit codes: 0 success / positive verdict,
//! 1 verified negative (script rejected, formula unsatisfiable), 2 usage or
//! parse error, 3 resource budget exceeded. Reports carry no timestamps, so
//! identical invocations print identical bytes.

use std::io::Read;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use polyprov::bounded::{parse_bounded, translate_formula};
use polyprov::corpus::{load_corpus, run_corpus};
use polyprov::kernel::{check_script, parse_script, CheckStatus};
use polyprov::sat::{dpll, to_cnf, Cnf, PropFormula, SatError, SatOutcome};
use polyprov::tm::{compile, parse_machine, select, separate, Budget, TmError};

#[derive(Parser)]
#[command(name = "polyprov", disable_help_subcommand = true)]
struct Cli {
    /// cap on propositional atoms per compiled formula
    #[arg(long, global = true, default_value_t = 500_000)]
    budget_atoms: u64,
    /// cap on SAT branching decisions
    #[arg(long, global = true, default_value_t = 20_000_000)]
    budget_steps: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Text,
    Tsv,
}

#[derive(Subcommand)]
enum Verb {
    /// Check one proof script and print its hypothesis ledger
    Check {
        file: String,
        /// shift all index witnesses by a constant before checking
        #[arg(long, default_value_t = 0)]
        shift: u64,
    },
    /// Check every bundled corpus script
    Corpus,
    /// Translate a closed bounded formula at input length n
    Translate {
        file: String,
        #[arg(long)]
        n: u64,
    },
    /// Compile a machine spec to DIMACS clauses on stdout
    CompileTm {
        file: String,
        #[arg(long)]
        n: u64,
    },
    /// Solve DIMACS clauses from stdin
    Sat,
    /// Tabulate the separating set of a disjoint machine pair
    PairSeparate {
        file_a: String,
        file_b: String,
        /// inclusive range, e.g. 0..16
        #[arg(long)]
        n_range: String,
    },
    /// Pick which machine of a covering pair accepts n
    PairSelect {
        file_a: String,
        file_b: String,
        #[arg(long)]
        n: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let budget = Budget {
        max_atoms: cli.budget_atoms,
        sat_steps: cli.budget_steps,
    };
    match run(&cli, &budget) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

enum CliError {
    Usage(String),
    Budget(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Budget(m) => write!(f, "{m}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Budget(_) => 3,
        }
    }
}

impl From<SatError> for CliError {
    fn from(e: SatError) -> Self {
        match e {
            SatError::ResourceBudgetExceeded { .. } => CliError::Budget(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<TmError> for CliError {
    fn from(e: TmError) -> Self {
        match e {
            TmError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            TmError::Sat(s) => s.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

fn read_file(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{path}: {e}")))
}

fn run(cli: &Cli, budget: &Budget) -> Result<ExitCode, CliError> {
    match &cli.verb {
        Verb::Check { file, shift } => {
            let text = read_file(file)?;
            let script = parse_script(&text).map_err(|e| CliError::Usage(e.to_string()))?;
            let script = if *shift > 0 { script.shifted(*shift) } else { script };
            let report = check_script(&script);
            match &report.status {
                CheckStatus::Ok => {
                    println!("ok: {} steps", report.steps_checked);
                    for h in &report.hypotheses {
                        println!("hypothesis {h}");
                    }
                    Ok(ExitCode::SUCCESS)
                }
                CheckStatus::Failed { step, reason } => {
                    println!("rejected at step {step}: {reason}");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Verb::Corpus => {
            let summary = run_corpus(&load_corpus());
            for r in &summary.results {
                let verdict = if r.ok { "ok" } else { "fail" };
                let name = format!("{}{}", r.id, r.label);
                match cli.format {
                    Format::Tsv => println!("{}\t{}\t{}", name, verdict, r.detail),
                    Format::Text => println!("{:4} {}: {}", verdict, name, r.detail),
                }
            }
            Ok(if summary.all_ok() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Verb::Translate { file, n } => {
            let text = read_file(file)?;
            let phi = parse_bounded(&text).map_err(|e| CliError::Usage(e.to_string()))?;
            let prop =
                translate_formula(&phi, *n).map_err(|e| CliError::Usage(e.to_string()))?;
            let valid = match prop {
                PropFormula::True => true,
                PropFormula::False => false,
                other => polyprov::sat::is_tautology(&other, budget.sat_steps)?,
            };
            println!("{}", if valid { "valid" } else { "not-valid" });
            Ok(if valid { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Verb::CompileTm { file, n } => {
            let spec = parse_machine(&read_file(file)?).map_err(|e| CliError::Usage(e.to_string()))?;
            let compiled = compile(&spec, *n, "", budget)?;
            let (cnf, _) = to_cnf(&compiled.formula);
            print!("{}", cnf.to_dimacs());
            Ok(ExitCode::SUCCESS)
        }
        Verb::Sat => {
            let mut text = String::new();
            std::io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let cnf = Cnf::from_dimacs(&text).map_err(CliError::Usage)?;
            match dpll(&cnf, budget.sat_steps)? {
                SatOutcome::Sat(values) => {
                    println!("s SATISFIABLE");
                    let lits: Vec<String> = values
                        .iter()
                        .enumerate()
                        .map(|(i, v)| format!("{}{}", if *v { "" } else { "-" }, i + 1))
                        .collect();
                    println!("v {} 0", lits.join(" "));
                    Ok(ExitCode::SUCCESS)
                }
                SatOutcome::Unsat => {
                    println!("s UNSATISFIABLE");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Verb::PairSeparate {
            file_a,
            file_b,
            n_range,
        } => {
            let (lo, hi) = parse_range(n_range)?;
            let a = parse_machine(&read_file(file_a)?).map_err(|e| CliError::Usage(e.to_string()))?;
            let b = parse_machine(&read_file(file_b)?).map_err(|e| CliError::Usage(e.to_string()))?;
            let rows = separate(&a, &b, lo, hi, budget)?;
            if cli.format == Format::Tsv {
                println!("n\tsatA\tsatB\tverdict");
            }
            for r in rows {
                let verdict = if r.in_c { "C" } else { "-" };
                match cli.format {
                    Format::Tsv => {
                        println!("{}\t{}\t{}\t{}", r.n, r.sat_a as u8, r.sat_b as u8, verdict)
                    }
                    Format::Text => println!(
                        "n={:<3} A:{} B:{} {}",
                        r.n,
                        if r.sat_a { "sat  " } else { "unsat" },
                        if r.sat_b { "sat  " } else { "unsat" },
                        verdict
                    ),
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Verb::PairSelect { file_a, file_b, n } => {
            let a = parse_machine(&read_file(file_a)?).map_err(|e| CliError::Usage(e.to_string()))?;
            let b = parse_machine(&read_file(file_b)?).map_err(|e| CliError::Usage(e.to_string()))?;
            let ix = select(&a, &b, *n, budget)?;
            println!("{ix}");
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn parse_range(s: &str) -> Result<(u64, u64), CliError> {
    let bad = || CliError::Usage(format!("bad range `{s}`, expected a..b"));
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let lo = lo.trim().parse::<u64>().map_err(|_| bad())?;
    let hi = hi.trim().parse::<u64>().map_err(|_| bad())?;
    if hi < lo {
        return Err(bad());
    }
    Ok((lo, hi))
}
