//! A ten-node graph whose balanced separator tree has depth 3 and
//! separators of size 2. The sources deepest in the tree are conditioned on
//! all three separators on their branch, so each gets `2^(2*3) = 64` copies.

use qw::compress::{add_conductor, expand_to_gprime, merge};
use qw::querygraph::QueryInstance;
use qw::separator::{build_depth_bounded_tree, check_separator_tree};
use qw::{NodeId, QueryDag, QueryNode};

const NAMES: [&str; 10] = ["v1", "v2", "u1", "u2", "w1", "w2", "x1", "x2", "y1", "y2"];

fn name(id: NodeId) -> &'static str {
    NAMES.get(id.0 as usize - 1).copied().unwrap_or("dummy")
}

fn main() -> qw::Result<()> {
    // u1 u2 -> v1 v2 -> y1 y2 <- w1 w2 <- x1 x2, output y2
    let (v1, v2, u1, u2, w1, w2, x1, x2, y1, y2) = (1, 2, 3, 4, 5, 6, 7, 8, 9, 10);
    let node = |id, inputs: &[u32]| QueryNode::verifier(id, inputs, 1, vec![vec![-1 - inputs.len() as i32]]);
    let g = QueryDag::new(
        vec![
            node(u1, &[]),
            node(u2, &[]),
            node(x1, &[]),
            node(x2, &[]),
            node(v1, &[u1]),
            node(v2, &[u1, u2]),
            node(w1, &[x1]),
            node(w2, &[x1, x2]),
            node(y1, &[v1, w1]),
            node(y2, &[y1, v2, w2]),
        ],
        NodeId(y2),
    )
    .expect("valid graph");

    let tree = build_depth_bounded_tree(&g, 3, 2).expect("depth 3 suffices");
    check_separator_tree(&g, &tree)?;
    println!("depth {} with separators of size {}", tree.depth(), tree.uniform_size);
    let layout = tree.layout();
    for sv in &tree.supervertices {
        let members: Vec<&str> = sv.members.iter().map(|&m| name(m)).collect();
        println!("  S{} depth {} {:?}", sv.id, layout.depth_of(sv.id), members);
    }

    let gp = expand_to_gprime(&g, &tree)?;
    let copies = |g: &qw::compress::CompressedDag, id: u32| (0..g.len()).filter(|&v| g.origin_of(v) == NodeId(id)).count();
    println!("G': {} nodes, {} edges", gp.len(), gp.edge_count());
    for id in 1..=10 {
        println!("  {:>2}: {} copies", name(NodeId(id)), copies(&gp, id));
    }
    assert_eq!(copies(&gp, x1), 64);

    let g2 = add_conductor(gp);
    let (gstar, f) = merge(&g2)?;
    println!("G'': {} nodes; G*: {} nodes, W = {}", g2.len(), gstar.len(), f.total());
    for id in [u1, x1, y2] {
        println!("  {:>2} keeps {} copies after merging", name(NodeId(id)), copies(&gstar, id));
    }
    Ok(())
}
