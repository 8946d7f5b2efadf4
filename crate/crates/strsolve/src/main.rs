//! Command-line driver: `solve` for one script, `bench` for a directory.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};

use strsolve::engine::{SolverConfig, Verdict};
use strsolve::{bench, smtlib, Alphabet};

#[derive(Parser)]
#[command(
    name = "strsolve",
    about = "Path-feasibility solver for straight-line string programs with integer data",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one SMT-LIB file; prints sat/unsat/unknown on the first line.
    Solve {
        file: PathBuf,
        /// Wall-clock limit in seconds (fractions allowed).
        #[arg(long)]
        timeout: Option<f64>,
        /// Print a model after a sat verdict.
        #[arg(long)]
        model: bool,
        /// `ascii` (printable ASCII, the default) or `file PATH` with one
        /// character or `X-Y` range per line.
        #[arg(long, num_args = 1..=2)]
        alphabet: Option<Vec<String>>,
        /// Pipe the final integer queries to an external SMT-LIB process.
        #[arg(long = "external-smt")]
        external_smt: Option<String>,
        /// SMT-LIB-strict indexOf: negative start positions give -1.
        #[arg(long = "smtlib-strict")]
        smtlib_strict: bool,
        /// Abort to unknown beyond this many product states.
        #[arg(long = "max-product-states")]
        max_product_states: Option<usize>,
    },
    /// Solve every .smt2 file in a directory and emit a CSV report.
    Bench {
        dir: PathBuf,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Per-file wall-clock limit in seconds.
        #[arg(long)]
        timeout: Option<f64>,
        /// Worker threads.
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn parse_alphabet(spec: Option<Vec<String>>) -> Result<Alphabet, String> {
    let Some(parts) = spec else {
        return Ok(Alphabet::ascii_printable());
    };
    match parts.first().map(String::as_str) {
        Some("ascii") => Ok(Alphabet::ascii_printable()),
        Some("file") => {
            let path = parts
                .get(1)
                .ok_or_else(|| "--alphabet file needs a path".to_string())?;
            let text =
                std::fs::read_to_string(path).map_err(|e| format!("alphabet file: {e}"))?;
            let mut letters = Vec::new();
            for line in text.lines() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let chars: Vec<char> = line.chars().collect();
                match chars.as_slice() {
                    [c] => letters.push(*c),
                    [lo, '-', hi] => {
                        if (*lo as u32) > (*hi as u32) {
                            return Err(format!("empty range {lo}-{hi} in alphabet file"));
                        }
                        for cp in (*lo as u32)..=(*hi as u32) {
                            if let Some(c) = char::from_u32(cp) {
                                letters.push(c);
                            }
                        }
                    }
                    _ => return Err(format!("bad alphabet line {line:?}")),
                }
            }
            Alphabet::explicit(letters).map_err(|e| e.to_string())
        }
        _ => Err("--alphabet expects `ascii` or `file PATH`".to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.cmd {
        Cmd::Solve {
            file,
            timeout,
            model,
            alphabet,
            external_smt,
            smtlib_strict,
            max_product_states,
        } => {
            let mut cfg = SolverConfig {
                alphabet: parse_alphabet(alphabet)?,
                timeout: timeout.map(Duration::from_secs_f64),
                smtlib_strict,
                external_smt,
                ..SolverConfig::default()
            };
            if let Some(n) = max_product_states {
                cfg.max_product_states = n;
            }
            let text = std::fs::read_to_string(&file)
                .map_err(|e| format!("{}: {e}", file.display()))?;
            let (result, script, program) =
                smtlib::solve_script(&text, &cfg).map_err(|e| e.to_string())?;
            println!("{}", result.verdict);
            match result.verdict {
                Verdict::Sat => {
                    if model {
                        let assignment = result.model.as_ref().expect("sat carries a model");
                        let rendered =
                            smtlib::print_model(&script, &program, assignment, smtlib_strict)
                                .map_err(|e| e.to_string())?;
                        println!("{rendered}");
                    }
                    Ok(ExitCode::from(0))
                }
                Verdict::Unsat => Ok(ExitCode::from(0)),
                Verdict::Unknown => {
                    for d in &result.diagnostics {
                        eprintln!("unknown: {d}");
                    }
                    Ok(ExitCode::from(2))
                }
            }
        }
        Cmd::Bench {
            dir,
            csv,
            timeout,
            jobs,
        } => {
            let cfg = SolverConfig {
                timeout: timeout.map(Duration::from_secs_f64),
                ..SolverConfig::default()
            };
            let (rows, summary) = bench::bench_run(&dir, &cfg, jobs.unwrap_or(1))
                .map_err(|e| e.to_string())?;
            match csv {
                Some(path) => {
                    let out = std::fs::File::create(&path)
                        .map_err(|e| format!("{}: {e}", path.display()))?;
                    bench::write_csv(&rows, &summary, out).map_err(|e| e.to_string())?;
                }
                None => {
                    bench::write_csv(&rows, &summary, std::io::stdout().lock())
                        .map_err(|e| e.to_string())?;
                }
            }
            Ok(ExitCode::from(0))
        }
    }
}
