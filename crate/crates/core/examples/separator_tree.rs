//! Balanced and depth-bounded separator trees for a few small shapes.

use qw::instances::{generate, Family};
use qw::separator::{build_depth_bounded_tree, build_separator_tree, find_balanced_separator, verify_separator_tree, UndirectedGraph};

fn main() {
    // path a - b - c
    let path = UndirectedGraph::new(3, [(0, 1), (1, 2)]);
    let sep = find_balanced_separator(&path, &[0, 1, 2], 1).expect("the middle vertex");
    println!("path: separator {:?}, components {:?}", sep.members, sep.components);

    for (family, n) in [(Family::Star, 5), (Family::Chain, 7), (Family::Layered, 9), (Family::RandomSep, 8)] {
        let g = generate(family, n, 2, 3);
        let tree = build_separator_tree(&g);
        assert!(verify_separator_tree(&g, &tree));
        println!("{family} n={n}: s={} D={} supervertices={}", tree.uniform_size, tree.depth(), tree.supervertices.len());
    }

    let chain = generate(Family::Chain, 7, 1, 0);
    for depth in 1..=4 {
        match build_depth_bounded_tree(&chain, depth, 1) {
            Some(t) => println!("chain of 7, s=1: depth {depth} works ({} supervertices)", t.supervertices.len()),
            None => println!("chain of 7, s=1: no tree of depth {depth}"),
        }
    }

    let tree = build_separator_tree(&generate(Family::Star, 4, 1, 0));
    println!("{}", tree.to_document());
}
