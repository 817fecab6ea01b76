//! Parse a two-node chain and evaluate it one proof query per node.

use qw::oracle::SatOracle;
use qw::querygraph::{evaluate, is_correct_query_string, parse_dag, topological_order};

const CHAIN: &str = r#"{
  "nodes": [
    {"id": 1, "kind": "verifier", "inputs": [], "proof_vars": 1, "clauses": [[1]]},
    {"id": 2, "kind": "verifier", "inputs": [1], "proof_vars": 1, "clauses": [[1], [2]]}
  ],
  "output": 2
}"#;

fn main() -> qw::Result<()> {
    let g = parse_dag(CHAIN)?;
    println!("order: {:?}", topological_order(&g));

    let mut oracle = SatOracle::new();
    let trace = evaluate(&g, &mut oracle)?;
    for (id, bit) in &trace.bits {
        println!("  {id} -> {}", u8::from(*bit));
    }
    println!("answer {} after {} proof queries", u8::from(trace.answer), oracle.stats().proof_queries);

    let mut flipped = trace.bits.clone();
    flipped.insert(qw::NodeId(1), false);
    println!(
        "evaluated string correct: {}, with v1 flipped: {}",
        is_correct_query_string(&g, &trace.bits, &mut oracle)?,
        is_correct_query_string(&g, &flipped, &mut oracle)?
    );
    Ok(())
}
