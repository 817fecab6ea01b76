//! Decide one generated instance with each method and compare query counts.

use qw::instances::{generate, Family};
use qw::oracle::ThresholdBackend;
use qw::solver::{solve, Method, SolveOptions};

fn main() -> qw::Result<()> {
    let g = generate(Family::RandomSep, 6, 2, 11);
    println!("{}", g.to_document());
    for method in [Method::Direct, Method::Depth, Method::Compress] {
        let r = solve(&g, method, SolveOptions { witness: true, ..SolveOptions::default() })?;
        println!(
            "{method:?}: answer {} W={} 2T={} threshold queries {}/{} proof queries {}",
            u8::from(r.answer),
            r.total_weight,
            r.t_scaled,
            r.threshold_queries_used,
            r.budget,
            r.proof_queries
        );
        if let Some(x) = &r.query_string {
            let bits: String = x.values().map(|&b| if b { '1' } else { '0' }).collect();
            println!("  query string {bits}");
        }
    }

    // the enumerating backend gives the same answer on small graphs
    let opts = SolveOptions {
        backend: ThresholdBackend::BruteForce { cap: 20 },
        witness: false,
    };
    let r = solve(&g, Method::Depth, opts)?;
    println!("depth with brute force: answer {}", u8::from(r.answer));
    Ok(())
}
