//! Reference computations that share no code with the library: plain
//! enumeration over proofs, query strings and reachability.

#![allow(dead_code)]

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use qw::arithmetize::ThreeCnf;
use qw::instances::{generate, Family};
use qw::querygraph::QueryInstance;
use qw::{QueryDag, QueryNode};

pub const SUITE_SIZE: u64 = 1000;

/// The seeded suite: random-sep instances with 1 to 8 nodes and
/// separators of size at most 2.
pub fn suite() -> impl Iterator<Item = (u64, QueryDag)> {
    (0..SUITE_SIZE).map(|seed| (seed, generate(Family::RandomSep, 1 + (seed % 8) as u32, 2, seed)))
}

/// Satisfiability by trying every proof assignment.
pub fn sat(node: &QueryNode, inputs: &[bool]) -> bool {
    let k = node.inputs.len();
    let p = node.proof_var_count as usize;
    (0u64..1 << p).any(|proof| {
        let value = |v: usize| if v <= k { inputs[v - 1] } else { proof >> (v - k - 1) & 1 == 1 };
        node.clauses
            .iter()
            .all(|c| c.iter().any(|&lit| value(lit.unsigned_abs() as usize) == (lit > 0)))
    })
}

fn input_bits(g: &QueryDag, i: usize, x: &[bool]) -> Vec<bool> {
    g.nodes()[i]
        .inputs
        .iter()
        .map(|id| x[g.nodes().iter().position(|n| n.id == *id).unwrap()])
        .collect()
}

/// Whether node `i` accepts its inputs as read from `x`.
pub fn accepts(g: &QueryDag, i: usize, x: &[bool]) -> bool {
    sat(&g.nodes()[i], &input_bits(g, i, x))
}

/// The unique correct query string, by repeated sweeps until nothing changes.
pub fn correct_string(g: &QueryDag) -> Vec<bool> {
    let n = g.len();
    let mut done = vec![false; n];
    let mut x = vec![false; n];
    while done.iter().any(|d| !d) {
        for i in 0..n {
            if done[i] {
                continue;
            }
            let ready = g.nodes()[i]
                .inputs
                .iter()
                .all(|id| done[g.nodes().iter().position(|m| m.id == *id).unwrap()]);
            if ready {
                x[i] = accepts(g, i, &x);
                done[i] = true;
            }
        }
    }
    x
}

pub fn is_correct(g: &QueryDag, x: &[bool]) -> bool {
    (0..g.len()).all(|i| x[i] == accepts(g, i, x))
}

/// `2 t(x)` with each accepting set bit worth `2 w`, each clear bit `w`.
pub fn two_t(g: &QueryDag, w: &[BigUint], x: &[bool]) -> BigUint {
    (0..g.len())
        .map(|i| match (x[i], accepts(g, i, x)) {
            (true, true) => &w[i] * 2u32,
            (true, false) => BigUint::zero(),
            (false, _) => w[i].clone(),
        })
        .sum()
}

pub fn all_strings(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u64..1 << n).map(move |m| (0..n).map(|i| m >> i & 1 == 1).collect())
}

pub fn max_two_t(g: &QueryDag, w: &[BigUint]) -> BigUint {
    all_strings(g.len()).map(|x| two_t(g, w, &x)).max().unwrap()
}

/// Descendant sets by depth-first search from every node.
pub fn descendants<I: QueryInstance + ?Sized>(g: &I) -> Vec<BTreeSet<usize>> {
    (0..g.len())
        .map(|v| {
            let mut seen = BTreeSet::new();
            let mut stack: Vec<usize> = g.children(v).to_vec();
            while let Some(u) = stack.pop() {
                if seen.insert(u) {
                    stack.extend_from_slice(g.children(u));
                }
            }
            seen
        })
        .collect()
}

pub fn omega<I: QueryInstance + ?Sized>(g: &I) -> Vec<BigUint> {
    descendants(g).iter().map(|d| BigUint::from(3u32).pow(d.len() as u32)).collect()
}

pub fn admissible<I: QueryInstance + ?Sized>(g: &I, w: &[BigUint]) -> bool {
    (0..g.len()).all(|v| {
        let below: BigUint = g.children(v).iter().map(|&c| &w[c]).sum();
        w[v] >= BigUint::one() + below * 2u32
    })
}

pub fn bitlen(v: &BigUint) -> u64 {
    let mut k = 0;
    while BigUint::one() << k <= *v {
        k += 1;
    }
    k
}

/// `p` at a Boolean point, read straight off the clause lists.
pub fn p_at_vertex(cnf: &ThreeCnf, w: &[BigUint], point: &[bool]) -> BigRational {
    let mut total = BigRational::zero();
    for i in 0..cnf.x_of.len() {
        let wi = BigRational::from_integer(w[i].clone().into());
        if point[cnf.x_of[i]] {
            let q = cnf.clauses[i].iter().all(|c| c.iter().any(|&(v, pos)| point[v] == pos));
            if q {
                total += wi;
            }
        } else {
            total += wi / BigRational::from_integer(2.into());
        }
    }
    total
}

pub fn verifier(id: u32, inputs: &[u32], proof: u32, clauses: Vec<Vec<i32>>) -> QueryNode {
    QueryNode::verifier(id, inputs, proof, clauses)
}
