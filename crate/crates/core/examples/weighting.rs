//! Admissible weight functions: descendant-based and level-based.

use qw::instances::{generate, Family};
use qw::weighting::{check_admissible, descendant_counts, levels, omega_weights, rho_weights, WeightAssignment, NP_ADMISSIBILITY};
use qw::QueryDag;

fn show(g: &QueryDag, label: &str, w: &WeightAssignment) {
    let ws: Vec<String> = w.weights.iter().map(ToString::to_string).collect();
    println!("  {label}: [{}], W = {}, admissible: {}", ws.join(", "), w.total(), check_admissible(g, w).is_ok());
}

fn main() {
    for family in [Family::Chain, Family::Star, Family::Layered] {
        let g = generate(family, 5, 1, 0);
        println!("{family}: |Desc| {:?}, levels {:?}", descendant_counts(&g), levels(&g));
        show(&g, "omega", &omega_weights(&g, NP_ADMISSIBILITY));
        show(&g, "rho", &rho_weights(&g, NP_ADMISSIBILITY));
    }

    // lowering a leaf weight of the star breaks admissibility at the center
    let g = generate(Family::Star, 4, 1, 0);
    let mut w = omega_weights(&g, NP_ADMISSIBILITY);
    w.weights[0] = 1u32.into();
    match check_admissible(&g, &w) {
        Ok(()) => println!("still admissible"),
        Err(v) => println!("violation at {}: weight {} needs at least {}", v.node, v.weight, v.required),
    }
}
