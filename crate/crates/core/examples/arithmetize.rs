//! Turn a query graph into a weighted polynomial, maximize it over the cube
//! and read the answer back off the optimum.

use num_bigint::BigInt;
use num_rational::BigRational;
use qw::arithmetize::{
    arithmetize_clause, audit_weak_compression, brute_force_max, build_p_omega, extract_from_optimum, multilinear_eval,
    DEFAULT_BRUTE_FORCE_CAP, DEFAULT_MULTILINEAR_CAP,
};
use qw::querygraph::parse_dag;

const CHAIN: &str = r#"{"nodes":[
  {"id":1,"kind":"verifier","inputs":[],"proof_vars":1,"clauses":[[1]]},
  {"id":2,"kind":"verifier","inputs":[1],"proof_vars":1,"clauses":[[1],[2]]}],"output":2}"#;

fn main() -> qw::Result<()> {
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let clause = arithmetize_clause([1, 2, 3]);
    println!("(x1 or x2 or x3) at (1/2,1/2,1/2) = {}", clause.eval(&[half.clone(), half.clone(), half.clone()]));

    let g = parse_dag(CHAIN)?;
    let a = build_p_omega(&g);
    println!("{} variables, {} gates, N={} M={}", a.var_count(), a.circuit.len(), a.cnf.n_pad, a.cnf.m_pad);

    let (max, vertex) = brute_force_max(&a.circuit, a.var_count(), DEFAULT_BRUTE_FORCE_CAP)?;
    let bits: String = vertex.iter().map(|&b| if b { '1' } else { '0' }).collect();
    println!("max p = {max} at {bits}");
    println!("query string {:?}", extract_from_optimum(&g, &a.cnf, &vertex)?);

    let centre = vec![half; a.var_count()];
    println!("multilinear value at the centre: {}", multilinear_eval(&a.circuit, &centre, DEFAULT_MULTILINEAR_CAP)?);

    let audit = audit_weak_compression(&g)?;
    println!("2T = {}, B = {}, queries {} <= {}", audit.t_scaled, audit.b, audit.queries_used, audit.h_target);
    Ok(())
}
