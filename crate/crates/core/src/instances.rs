//! Seeded instance families and the benchmark sweep.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::querygraph::{Literal, NodeId, QueryDag, QueryNode};
use crate::separator::{build_separator_tree, build_separator_tree_bounded};
use crate::solver::{decide_compress_with_tree, decide_depth, SolveOptions};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Chain,
    Star,
    Layered,
    RandomSep,
}

impl std::str::FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "chain" => Ok(Family::Chain),
            "star" => Ok(Family::Star),
            "layered" => Ok(Family::Layered),
            "random-sep" => Ok(Family::RandomSep),
            other => Err(format!("unknown family {other:?}")),
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Chain => "chain",
            Family::Star => "star",
            Family::Layered => "layered",
            Family::RandomSep => "random-sep",
        })
    }
}

/// Ids `1..=n`, listed in a topological order; the last one is the output.
fn shape(family: Family, n: u32, rng: &mut ChaCha8Rng, attempt: u32) -> Vec<Vec<u32>> {
    let mut inputs: Vec<Vec<u32>> = vec![Vec::new(); n as usize + 1];
    match family {
        Family::Chain => {
            for i in 2..=n {
                inputs[i as usize] = vec![i - 1];
            }
        }
        Family::Star => {
            if n > 1 {
                inputs[n as usize] = (1..n).collect();
            }
        }
        Family::Layered => {
            // source 1, layers of width two over 2..n-1, sink n; consecutive
            // layers are completely linked
            let layer = |id: u32| if id == 1 { 0 } else { id / 2 };
            let last = if n > 1 { layer(n - 1) + 1 } else { 0 };
            let layer_of = |id: u32| if id == n { last } else { layer(id) };
            for id in 2..=n {
                inputs[id as usize] = (1..id).filter(|&p| layer_of(p) + 1 == layer_of(id)).collect();
            }
        }
        Family::RandomSep => {
            // sparser graphs on every retry
            let p = 0.35 / f64::from(1 + attempt / 8);
            for i in 2..=n {
                inputs[i as usize] = (1..i).filter(|_| rng.gen_bool(p)).collect();
            }
            let mut has_child = vec![false; n as usize + 1];
            for i in 1..=n {
                for &p in &inputs[i as usize] {
                    has_child[p as usize] = true;
                }
            }
            for i in 1..n {
                if !has_child[i as usize] {
                    inputs[n as usize].push(i);
                }
            }
            inputs[n as usize].sort_unstable();
        }
    }
    inputs.remove(0);
    inputs
}

fn random_clauses(rng: &mut ChaCha8Rng, vars: u32) -> Vec<Vec<Literal>> {
    let count = rng.gen_range(1..=3);
    (0..count)
        .map(|_| {
            let width = rng.gen_range(1..=3);
            (0..width)
                .map(|_| {
                    let v = rng.gen_range(1..=vars) as Literal;
                    if rng.gen_bool(0.5) {
                        v
                    } else {
                        -v
                    }
                })
                .collect()
        })
        .collect()
}

fn fill(inputs: Vec<Vec<u32>>, rng: &mut ChaCha8Rng) -> QueryDag {
    let n = inputs.len() as u32;
    let nodes = inputs
        .into_iter()
        .enumerate()
        .map(|(k, ins)| {
            let proof = if ins.is_empty() { rng.gen_range(1..=2) } else { rng.gen_range(0..=2) };
            let clauses = random_clauses(rng, ins.len() as u32 + proof);
            QueryNode::verifier(k as u32 + 1, &ins, proof, clauses)
        })
        .collect();
    QueryDag::new(nodes, NodeId(n)).expect("generated shapes are valid")
}

/// A random instance of the family with `n` nodes. For `random-sep`,
/// graphs are resampled until the balanced separator tree has separators of
/// size at most `sep_bound`.
pub fn generate(family: Family, n: u32, sep_bound: usize, seed: u64) -> QueryDag {
    assert!(n >= 1, "instances have at least one node");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut attempt = 0;
    loop {
        let inputs = shape(family, n, &mut rng, attempt);
        let g = fill(inputs, &mut rng);
        if family != Family::RandomSep || build_separator_tree_bounded(&g, sep_bound).is_some() {
            return g;
        }
        attempt += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchConfig {
    pub family: Family,
    pub sizes: Vec<u32>,
    pub sep_bound: usize,
    pub repetitions: u32,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub family: Family,
    pub n: u32,
    pub seed: u64,
    pub s: usize,
    #[serde(rename = "D")]
    pub depth: usize,
    pub gstar_nodes: usize,
    #[serde(rename = "W")]
    pub total_weight: String,
    pub queries: u64,
    pub budget: u64,
    /// `4 (s D + log2 n) + 8`.
    pub bound: f64,
    pub depth_queries: u64,
    pub answer: bool,
}

pub fn run_bench(config: &BenchConfig) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &n in &config.sizes {
        for rep in 0..config.repetitions {
            let seed = config.seed.wrapping_add(u64::from(rep)).wrapping_add(u64::from(n) << 32);
            let g = generate(config.family, n, config.sep_bound, seed);
            let tree = build_separator_tree(&g);
            let (s, depth) = (tree.uniform_size, tree.depth());
            let compressed = decide_compress_with_tree(&g, &tree, SolveOptions::default())?;
            let by_depth = decide_depth(&g, SolveOptions::default())?;
            rows.push(BenchRow {
                family: config.family,
                n,
                seed,
                s,
                depth,
                gstar_nodes: compressed.graph_nodes.unwrap_or(0),
                total_weight: compressed.total_weight.to_string(),
                queries: compressed.threshold_queries_used,
                budget: compressed.budget,
                bound: 4.0 * ((s * depth) as f64 + f64::from(n).log2()) + 8.0,
                depth_queries: by_depth.threshold_queries_used,
                answer: compressed.answer,
            });
        }
    }
    Ok(rows)
}

/// Aligned human-readable table of benchmark rows.
pub fn bench_table(rows: &[BenchRow]) -> String {
    let header = ["n", "s", "D", "|V*|", "W", "queries", "budget", "bound", "depth-q"];
    let body: Vec<[String; 9]> = rows
        .iter()
        .map(|r| {
            [
                r.n.to_string(),
                r.s.to_string(),
                r.depth.to_string(),
                r.gstar_nodes.to_string(),
                r.total_weight.clone(),
                r.queries.to_string(),
                r.budget.to_string(),
                format!("{:.1}", r.bound),
                r.depth_queries.to_string(),
            ]
        })
        .collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|c| body.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    let mut out = line(header.to_vec());
    out.push('\n');
    for r in &body {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}
