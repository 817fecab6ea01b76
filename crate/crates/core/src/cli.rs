//! The `qw` command-line front end.
//!
//! ```text
//! qw gen      --family F --n N [--size S] [--seed N]
//! qw evaluate -i FILE
//! qw septree  -i FILE [--depth D --size S]
//! qw compress -i FILE [--stage gprime|conductor|merged]
//! qw solve    -i FILE --method compress|depth|direct [--witness] [--cap N]
//! qw arith    -i FILE [--cap N] [--circuit]
//! qw bench    --family F --sizes 4,8,16 [--size S] [--reps R] [--seed N]
//! ```
//!
//! Every subcommand writes one JSON document to `-o FILE` or standard
//! output; `bench` prints an aligned table first.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::arithmetize::{audit_weak_compression, brute_force_max, build_p_omega, extract_from_optimum};
use crate::compress::{add_conductor, expand_to_gprime, merge};
use crate::instances::{bench_table, generate, run_bench, BenchConfig, Family};
use crate::oracle::{SatOracle, ThresholdBackend};
use crate::querygraph::{evaluate, parse_dag, topological_order, QueryDag};
use crate::separator::{build_depth_bounded_tree, build_separator_tree, verify_separator_tree};
use crate::solver::{solve, Method, SolveOptions};
use crate::weighting::{check_admissible, omega_weights, NP_ADMISSIBILITY};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "qw", about = "Decide NP query graphs with few oracle queries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Io {
    /// Instance document.
    #[arg(short = 'i', long = "input")]
    input: PathBuf,
    /// Output file; standard output when absent.
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a seeded random instance.
    Gen {
        #[arg(long, default_value = "random-sep")]
        family: Family,
        #[arg(long)]
        n: u32,
        /// Separator size bound for `random-sep`.
        #[arg(long = "size", default_value_t = 2)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Evaluate node by node in topological order.
    Evaluate {
        #[command(flatten)]
        io: Io,
    },
    /// Build a balanced or depth-bounded separator tree.
    Septree {
        #[command(flatten)]
        io: Io,
        #[arg(long, requires = "size")]
        depth: Option<usize>,
        #[arg(long, requires = "depth")]
        size: Option<usize>,
    },
    /// Dump a compressed graph and its weights.
    Compress {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value = "merged", value_parser = ["gprime", "conductor", "merged"])]
        stage: String,
    },
    /// Decide an instance.
    Solve {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value = "compress")]
        method: Method,
        /// Also recover the full query string.
        #[arg(long)]
        witness: bool,
        /// Use the enumerating threshold backend with this many free nodes at most.
        #[arg(long)]
        cap: Option<usize>,
        /// Include the threshold-query transcript.
        #[arg(long)]
        transcript: bool,
    },
    /// Build the objective polynomial, maximize it and audit the query count.
    Arith {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = crate::arithmetize::DEFAULT_BRUTE_FORCE_CAP)]
        cap: usize,
        /// Include the gate list.
        #[arg(long)]
        circuit: bool,
    },
    /// Sweep an instance family.
    Bench {
        #[arg(long)]
        family: Family,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<u32>,
        #[arg(long = "size", default_value_t = 2)]
        size: usize,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        reps: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
}

/// Runs the command line and returns the process exit code: 0 on success,
/// 2 on a usage error, 1 on any other failure.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn read_dag(path: &PathBuf) -> Result<QueryDag> {
    Ok(parse_dag(&fs::read_to_string(path)?)?)
}

fn emit(output: Option<&PathBuf>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, format!("{text}\n"))?,
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}")?;
        }
    }
    Ok(())
}

fn emit_json<T: Serialize>(output: Option<&PathBuf>, value: &T) -> Result<()> {
    emit(output, &serde_json::to_string_pretty(value)?)
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Gen { family, n, size, seed, output } => {
            if n == 0 {
                return Err(Error::Validation("instances need at least one node".into()));
            }
            emit(output.as_ref(), &generate(family, n, size, seed).to_document())
        }
        Command::Evaluate { io } => {
            let g = read_dag(&io.input)?;
            let trace = evaluate(&g, &mut SatOracle::new())?;
            emit_json(
                io.output.as_ref(),
                &json!({ "order": trace.order, "bits": trace.bits, "answer": trace.answer }),
            )
        }
        Command::Septree { io, depth, size } => {
            let g = read_dag(&io.input)?;
            let tree = match (depth, size) {
                (Some(d), Some(s)) => {
                    if d == 0 || s == 0 {
                        return Err(Error::Validation("depth and size must be positive".into()));
                    }
                    build_depth_bounded_tree(&g, d, s)
                        .ok_or_else(|| Error::Validation(format!("no separator tree of depth {d} with separators of size {s}")))?
                }
                _ => build_separator_tree(&g),
            };
            debug_assert!(verify_separator_tree(&g, &tree));
            emit(io.output.as_ref(), &tree.to_document())
        }
        Command::Compress { io, stage } => {
            let g = read_dag(&io.input)?;
            let tree = build_separator_tree(&g);
            let gp = expand_to_gprime(&g, &tree)?;
            let dump = match stage.as_str() {
                "gprime" => json!({ "graph": gp.dump() }),
                "conductor" => {
                    let g2 = add_conductor(gp);
                    let w = omega_weights(&g2, NP_ADMISSIBILITY);
                    json!({ "graph": g2.dump(), "weights": w.report(&g2), "W": w.total().to_string() })
                }
                _ => {
                    let g2 = add_conductor(gp);
                    let omega_total = omega_weights(&g2, NP_ADMISSIBILITY).total();
                    let (gs, f) = merge(&g2)?;
                    json!({
                        "graph": gs.dump(),
                        "weights": f.report(&gs),
                        "W": f.total().to_string(),
                        "W_omega_conductor": omega_total.to_string(),
                        "admissible": check_admissible(&gs, &f).is_ok(),
                        "conductor_nodes": g2.nodes().len(),
                    })
                }
            };
            emit_json(io.output.as_ref(), &dump)
        }
        Command::Solve { io, method, witness, cap, transcript } => {
            let g = read_dag(&io.input)?;
            let backend = cap.map_or(ThresholdBackend::BranchAndBound, |cap| ThresholdBackend::BruteForce { cap });
            let mut report = solve(&g, method, SolveOptions { backend, witness })?;
            if !transcript {
                report.transcript.clear();
            }
            emit_json(io.output.as_ref(), &report)
        }
        Command::Arith { io, cap, circuit } => {
            let g = read_dag(&io.input)?;
            let a = build_p_omega(&g);
            let (max, vertex) = brute_force_max(&a.circuit, a.var_count(), cap)?;
            let x = extract_from_optimum(&g, &a.cnf, &vertex)?;
            let audit = audit_weak_compression(&g)?;
            let mut doc = json!({
                "variables": a.var_count(),
                "x_block": topological_order(&g),
                "N": a.cnf.n_pad,
                "M": a.cnf.m_pad,
                "gates": a.circuit.len(),
                "max": format!("{}/{}", max.numer(), max.denom()),
                "witness": vertex.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>(),
                "query_string": x,
                "audit": audit,
            });
            if circuit {
                doc["circuit"] = serde_json::to_value(a.circuit.to_doc())?;
            }
            emit_json(io.output.as_ref(), &doc)
        }
        Command::Bench { family, sizes, size, reps, seed, output } => {
            let rows = run_bench(&BenchConfig {
                family,
                sizes,
                sep_bound: size,
                repetitions: reps,
                seed,
            })?;
            print!("{}", bench_table(&rows));
            let lines: Vec<String> = rows.iter().map(serde_json::to_string).collect::<std::result::Result<_, _>>()?;
            emit(output.as_ref(), &lines.join("\n"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::querygraph::fixtures::CHAIN2;

    fn temp(name: &str, content: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("qw-cli-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join(name);
        fs::write(&path, content).unwrap();
        path
    }

    fn run_to_file(args: &[&str], out: &PathBuf) -> (i32, String) {
        let mut argv = vec!["qw"];
        argv.extend_from_slice(args);
        argv.extend_from_slice(&["-o", out.to_str().unwrap()]);
        let code = run(argv);
        (code, fs::read_to_string(out).unwrap_or_default())
    }

    #[test]
    fn solve_chain2() {
        let input = temp("chain2.json", CHAIN2);
        let out = input.with_file_name("solve.json");
        let (code, text) = run_to_file(&["solve", "--method", "compress", "-i", input.to_str().unwrap()], &out);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["answer"], true);
        assert_eq!(v["threshold_queries_used"], 7);
    }

    #[test]
    fn cyclic_input_fails() {
        let cyclic = r#"{"nodes":[{"id":1,"kind":"verifier","inputs":[2],"proof_vars":0,"clauses":[]},{"id":2,"kind":"verifier","inputs":[1],"proof_vars":0,"clauses":[]}],"output":2}"#;
        let input = temp("cyclic.json", cyclic);
        assert_eq!(run(["qw", "solve", "--method", "compress", "-i", input.to_str().unwrap()]), 1);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run(["qw", "frobnicate"]), 2);
        assert_eq!(run(["qw", "solve", "--method", "magic", "-i", "x.json"]), 2);
        assert_eq!(run(["qw", "bench", "--family", "star"]), 2);
    }

    #[test]
    fn gen_is_deterministic() {
        let out = temp("gen.json", "");
        let (code, a) = run_to_file(&["gen", "--family", "chain", "--n", "2", "--seed", "9"], &out);
        assert_eq!(code, 0);
        let (_, b) = run_to_file(&["gen", "--family", "chain", "--n", "2", "--seed", "9"], &out);
        assert_eq!(a, b);
        assert_eq!(parse_dag(a.trim()).unwrap().to_document(), a.trim());
    }
}
