//! Expand, add the conductor, merge, and check that the compressed graph
//! computes the same answer as the original.

use qw::compress::{compress, describe, lift_query_string};
use qw::oracle::SatOracle;
use qw::querygraph::{evaluate, evaluate_bits, is_correct_query_string, parse_dag, to_query_string, QueryInstance};
use qw::separator::build_separator_tree;
use qw::weighting::{check_admissible, omega_weights, NP_ADMISSIBILITY};

const CHAIN: &str = r#"{"nodes":[
  {"id":1,"kind":"verifier","inputs":[],"proof_vars":1,"clauses":[[1]]},
  {"id":2,"kind":"verifier","inputs":[1],"proof_vars":1,"clauses":[[1],[2]]}],"output":2}"#;

fn main() -> qw::Result<()> {
    let g = parse_dag(CHAIN)?;
    let tree = build_separator_tree(&g);
    let c = compress(&g, &tree)?;
    println!("G': {} nodes, {} edges", c.gprime_nodes, c.gprime_edges);
    println!("G'': {} nodes, omega total {}", c.g2.len(), c.omega_total);
    println!("G*:\n{}", describe(&c.gstar));

    let f = c.gstar.weights().expect("merge assigns weights");
    assert!(check_admissible(&c.gstar, f).is_ok());
    assert_eq!(f.total(), omega_weights(&c.g2, NP_ADMISSIBILITY).total());

    let mut oracle = SatOracle::new();
    let xstar = evaluate_bits(&c.gstar, &mut oracle)?;
    let conductor = c.gstar.result_index();
    let direct = evaluate(&g, &mut oracle)?;
    println!("conductor says {}, direct evaluation says {}", u8::from(xstar[conductor]), u8::from(direct.answer));

    let lifted = lift_query_string(&c.gstar, &to_query_string(&c.gstar, &xstar))?;
    println!("lifted string {lifted:?}, correct: {}", is_correct_query_string(&g, &lifted, &mut oracle)?);
    Ok(())
}
