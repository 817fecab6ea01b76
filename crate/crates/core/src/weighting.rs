//! `c`-admissible weighting functions.
//!
//! A weighting `f` is `c`-admissible on a DAG when every node satisfies
//! `f(v) >= 1 + c * sum(f(w) for w in children(v))`. Weights are exact big
//! integers; the binary search in [`crate::solver`] needs exact thresholds.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::querygraph::{NodeId, QueryInstance};

/// The constant used throughout for NP: the inverse of the correctness gap 1/2.
pub const NP_ADMISSIBILITY: u32 = 2;

/// Weights indexed like the instance they were computed for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightAssignment {
    pub weights: Vec<BigUint>,
    pub c: u32,
}

impl WeightAssignment {
    pub fn total(&self) -> BigUint {
        self.weights.iter().sum()
    }

    /// Node id to decimal string.
    pub fn report<I: QueryInstance + ?Sized>(&self, g: &I) -> BTreeMap<NodeId, String> {
        self.weights
            .iter()
            .enumerate()
            .map(|(i, w)| (g.node_id(i), w.to_string()))
            .collect()
    }
}

pub fn total_weight(w: &WeightAssignment) -> BigUint {
    w.total()
}

/// Size of every node's descendant set (the node itself excluded).
pub fn descendant_counts<I: QueryInstance + ?Sized>(g: &I) -> Vec<usize> {
    let n = g.len();
    let mut stamp = vec![usize::MAX; n];
    let mut stack = Vec::new();
    (0..n)
        .map(|v| {
            let mut count = 0;
            stack.clear();
            stack.push(v);
            stamp[v] = v;
            while let Some(u) = stack.pop() {
                for &c in g.children(u) {
                    if stamp[c] != v {
                        stamp[c] = v;
                        count += 1;
                        stack.push(c);
                    }
                }
            }
            count
        })
        .collect()
}

/// `omega(v) = (c + 1)^|Desc(v)|`.
pub fn omega_weights<I: QueryInstance + ?Sized>(g: &I, c: u32) -> WeightAssignment {
    let base = BigUint::from(c + 1);
    let weights = descendant_counts(g)
        .into_iter()
        .map(|d| num_traits::pow(base.clone(), d))
        .collect();
    WeightAssignment { weights, c }
}

/// Level 0 for nodes without incoming edges, otherwise one more than the
/// deepest parent.
pub fn levels<I: QueryInstance + ?Sized>(g: &I) -> Vec<usize> {
    let mut level = vec![0; g.len()];
    for &i in g.topo() {
        level[i] = g.parents(i).iter().map(|&p| level[p] + 1).max().unwrap_or(0);
    }
    level
}

/// `rho(v) = (c * |V|)^(depth - level(v))` with `depth` the largest level.
pub fn rho_weights<I: QueryInstance + ?Sized>(g: &I, c: u32) -> WeightAssignment {
    let level = levels(g);
    let depth = level.iter().copied().max().unwrap_or(0);
    let base = BigUint::from(c) * BigUint::from(g.len());
    let weights = level.iter().map(|&l| num_traits::pow(base.clone(), depth - l)).collect();
    WeightAssignment { weights, c }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub node: NodeId,
    pub weight: String,
    pub required: String,
}

/// `Ok(())` iff every node meets the admissibility inequality; otherwise the
/// violating node with the smallest id.
pub fn check_admissible<I: QueryInstance + ?Sized>(g: &I, w: &WeightAssignment) -> Result<(), Violation> {
    assert_eq!(w.weights.len(), g.len(), "weights must cover every node");
    let c = BigUint::from(w.c);
    let mut first: Option<Violation> = None;
    for i in 0..g.len() {
        let below: BigUint = g.children(i).iter().map(|&ch| &w.weights[ch]).sum();
        let required = BigUint::one() + &c * below;
        if w.weights[i] < required && first.as_ref().is_none_or(|f| g.node_id(i) < f.node) {
            first = Some(Violation {
                node: g.node_id(i),
                weight: w.weights[i].to_string(),
                required: required.to_string(),
            });
        }
    }
    first.map_or(Ok(()), Err)
}

/// Whether every weight divides `bound`, used by the weight-shape tests.
pub fn all_divide(w: &WeightAssignment, bound: &BigUint) -> bool {
    w.weights.iter().all(|x| !x.is_zero() && (bound % x).is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::querygraph::fixtures::*;
    use crate::querygraph::{QueryDag, QueryNode};

    fn chain(n: u32) -> QueryDag {
        let nodes = (1..=n)
            .map(|i| {
                if i == 1 {
                    QueryNode::verifier(i, &[], 0, vec![])
                } else {
                    QueryNode::verifier(i, &[i - 1], 0, vec![])
                }
            })
            .collect();
        QueryDag::new(nodes, NodeId(n)).unwrap()
    }

    fn ints(w: &WeightAssignment) -> Vec<u64> {
        w.weights.iter().map(|x| u64::try_from(x).unwrap()).collect()
    }

    #[test]
    fn omega_examples() {
        let w = omega_weights(&chain2(), 2);
        assert_eq!(ints(&w), vec![3, 1]);
        assert_eq!(total_weight(&w), BigUint::from(4u32));
        assert_eq!(ints(&omega_weights(&chain(3), 2)), vec![9, 3, 1]);
        assert_eq!(total_weight(&omega_weights(&single(vec![], 0), 2)), BigUint::one());
    }

    #[test]
    fn rho_examples() {
        assert_eq!(ints(&rho_weights(&star(3), 2)), vec![8, 8, 8, 1]);
        assert_eq!(ints(&rho_weights(&chain2(), 2)), vec![4, 1]);
    }

    #[test]
    fn admissibility() {
        let g = chain2();
        assert!(check_admissible(&g, &omega_weights(&g, 2)).is_ok());
        let ones = WeightAssignment { weights: vec![BigUint::one(); 2], c: 2 };
        let v = check_admissible(&g, &ones).unwrap_err();
        assert_eq!(v.node, NodeId(1));
        assert_eq!(v.required, "3");
    }

    #[test]
    fn weights_divide_their_bounds() {
        for c in [2, 3, 6] {
            let g = star(5);
            let n = g.len();
            let omega = omega_weights(&g, c);
            assert!(all_divide(&omega, &num_traits::pow(BigUint::from(c + 1), n - 1)));
            let rho = rho_weights(&g, c);
            assert!(all_divide(&rho, &(BigUint::from(c) * BigUint::from(n))));
            assert!(check_admissible(&g, &omega).is_ok());
            assert!(check_admissible(&g, &rho).is_ok());
        }
    }
}
