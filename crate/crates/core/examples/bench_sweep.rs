//! Query counts across family sizes against `4 (s D + log2 n) + 8`.

use qw::instances::{bench_table, run_bench, BenchConfig, Family};

fn main() -> qw::Result<()> {
    for family in [Family::Star, Family::Chain, Family::Layered, Family::RandomSep] {
        let rows = run_bench(&BenchConfig {
            family,
            sizes: vec![4, 8, 16],
            sep_bound: 2,
            repetitions: 1,
            seed: 5,
        })?;
        println!("{family}");
        print!("{}", bench_table(&rows));
        let within = rows.iter().filter(|r| r.queries as f64 <= r.bound).count();
        println!("{within}/{} within the bound\n", rows.len());
    }
    Ok(())
}
