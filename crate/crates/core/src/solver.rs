//! Deciding a query graph by binary search on its total solution weight.
//!
//! For a weighting `w` and a candidate string `x`, the scaled objective is
//!
//! ```text
//! 2 t(x) = sum_i w_i * (x_i * 2 * [node i accepts given x] + (1 - x_i))
//! ```
//!
//! With 2-admissible weights every maximizer of `t` is a correct query string,
//! so the maximum `2T` pins down the answer. `2T` is found bit by bit with
//! threshold queries, and one more query pinned on the result node reads off
//! the answer.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::Serialize;

use crate::compress::{self, CompressedDag};
use crate::oracle::{ProofOracle, SatOracle, ThresholdBackend, TranscriptEntry};
use crate::querygraph::{evaluate, to_query_string, QueryDag, QueryInstance, QueryString};
use crate::separator::{build_separator_tree, SeparatorTree};
use crate::weighting::{self, WeightAssignment, NP_ADMISSIBILITY};
use crate::{Error, Result};

/// "Is there an `x` respecting `pins` with `2 t(x) >= threshold`?"
pub struct ThresholdInstance<'a> {
    pub graph: &'a dyn QueryInstance,
    pub weights: &'a WeightAssignment,
    pub threshold: BigUint,
    /// Instance index to forced bit.
    pub pins: BTreeMap<usize, bool>,
}

impl<'a> ThresholdInstance<'a> {
    pub fn new(graph: &'a dyn QueryInstance, weights: &'a WeightAssignment) -> Self {
        assert_eq!(weights.weights.len(), graph.len(), "weights must cover every node");
        ThresholdInstance {
            graph,
            weights,
            threshold: BigUint::zero(),
            pins: BTreeMap::new(),
        }
    }

    pub fn at(&self, threshold: BigUint) -> Self {
        ThresholdInstance {
            graph: self.graph,
            weights: self.weights,
            threshold,
            pins: self.pins.clone(),
        }
    }

    pub fn pinned(mut self, node: usize, bit: bool) -> Self {
        self.pins.insert(node, bit);
        self
    }

    /// The forced bit of node `i`, if any. Fixed nodes are forced to 1.
    fn forced(&self, i: usize) -> Option<bool> {
        if self.graph.is_fixed(i) {
            Some(true)
        } else {
            self.pins.get(&i).copied()
        }
    }
}

fn contribution(w: &BigUint, bit: bool, accepts: bool) -> BigUint {
    match (bit, accepts) {
        (true, true) => w * 2u32,
        (true, false) => BigUint::zero(),
        (false, _) => w.clone(),
    }
}

/// `2 t(x)` maximized over proofs, which is a per-node acceptance check.
pub fn max_t_for_assignment(inst: &ThresholdInstance<'_>, x: &[bool], oracle: &mut dyn ProofOracle) -> Result<BigUint> {
    let g = inst.graph;
    assert_eq!(x.len(), g.len());
    let xs: Vec<Option<bool>> = x.iter().copied().map(Some).collect();
    let mut total = BigUint::zero();
    for i in 0..g.len() {
        let accepts = g.decide(i, &xs, oracle)?;
        total += contribution(&inst.weights.weights[i], x[i], accepts);
    }
    Ok(total)
}

/// Maximum of `2 t` over all `x` respecting the pins, by enumeration.
pub fn max_scaled_t_brute_force(inst: &ThresholdInstance<'_>, oracle: &mut dyn ProofOracle, cap: usize) -> Result<BigUint> {
    Ok(argmax_brute_force(inst, oracle, cap)?.0)
}

/// Maximum of `2 t` and the first maximizer in counting order.
pub fn argmax_brute_force(
    inst: &ThresholdInstance<'_>,
    oracle: &mut dyn ProofOracle,
    cap: usize,
) -> Result<(BigUint, Vec<bool>)> {
    let n = inst.graph.len();
    let free: Vec<usize> = (0..n).filter(|&i| inst.forced(i).is_none()).collect();
    if free.len() > cap || free.len() >= 64 {
        return Err(Error::Capacity {
            what: "free nodes for brute-force threshold",
            size: free.len(),
            cap,
        });
    }
    let mut x: Vec<bool> = (0..n).map(|i| inst.forced(i).unwrap_or(false)).collect();
    let mut best: Option<(BigUint, Vec<bool>)> = None;
    for mask in 0u64..1 << free.len() {
        for (b, &i) in free.iter().enumerate() {
            x[i] = mask >> b & 1 == 1;
        }
        let value = max_t_for_assignment(inst, &x, oracle)?;
        if best.as_ref().is_none_or(|(v, _)| value > *v) {
            best = Some((value, x.clone()));
        }
    }
    Ok(best.expect("at least one assignment"))
}

/// Exact maximum of `2 t` by depth-first search in topological order.
///
/// A node's bit only changes its own term and the acceptance of its
/// children. Choosing the locally better bit gains at least `w_i` and can
/// cost at most `2 * sum(w_c)` over the children, so when `w_i` exceeds that
/// only the locally better bit is explored. With admissible weights this
/// holds everywhere and the search is a single pass.
pub fn max_scaled_t_search(inst: &ThresholdInstance<'_>, oracle: &mut dyn ProofOracle) -> Result<BigUint> {
    Ok(argmax_search(inst, oracle)?.0)
}

pub fn argmax_search(inst: &ThresholdInstance<'_>, oracle: &mut dyn ProofOracle) -> Result<(BigUint, Vec<bool>)> {
    struct Frame {
        node: usize,
        options: Vec<(bool, BigUint)>,
    }

    let g = inst.graph;
    let w = &inst.weights.weights;
    let order = g.topo();
    let n = order.len();
    let dominant: Vec<bool> = (0..n)
        .map(|i| {
            let below: BigUint = g.children(i).iter().map(|&c| &w[c]).sum();
            w[i] > below * 2u32
        })
        .collect();
    // optimistic bound for the suffix of the order starting at each position
    let mut suffix = vec![BigUint::zero(); n + 1];
    for k in (0..n).rev() {
        suffix[k] = &suffix[k + 1] + &w[order[k]] * 2u32;
    }

    let mut x: Vec<Option<bool>> = vec![None; n];
    let mut acc: Vec<BigUint> = vec![BigUint::zero(); n + 1];
    let mut frames: Vec<Frame> = Vec::with_capacity(n);
    let mut best: Option<(BigUint, Vec<bool>)> = None;

    loop {
        let depth = frames.len();
        if depth < n {
            let i = order[depth];
            let accepts = g.decide(i, &x, oracle)?;
            let mut options: Vec<(bool, BigUint)> = match inst.forced(i) {
                Some(b) => vec![(b, contribution(&w[i], b, accepts))],
                None => {
                    let good = (accepts, contribution(&w[i], accepts, accepts));
                    let bad = (!accepts, contribution(&w[i], !accepts, accepts));
                    if dominant[i] {
                        vec![good]
                    } else {
                        vec![good, bad]
                    }
                }
            };
            options.reverse();
            frames.push(Frame { node: i, options });
        } else if depth == n && best.as_ref().is_none_or(|(b, _)| acc[n] > *b) {
            best = Some((acc[n].clone(), x.iter().map(|b| b.expect("complete")).collect()));
        }

        // advance the deepest frame that still has an option worth trying
        loop {
            let Some(k) = frames.len().checked_sub(1) else {
                return Ok(best.expect("search visits at least one leaf"));
            };
            let frame = &mut frames[k];
            x[frame.node] = None;
            match frame.options.pop() {
                Some((bit, value)) => {
                    let total = &acc[k] + value;
                    if best.as_ref().is_none_or(|(b, _)| &total + &suffix[k + 1] > *b) {
                        x[frame.node] = Some(bit);
                        acc[k + 1] = total;
                        break;
                    }
                }
                None => {
                    frames.pop();
                }
            }
        }
    }
}

/// Largest `theta` with a yes answer, found one bit at a time from the top.
/// Always asks exactly `bitlen(2W)` threshold queries.
pub fn binary_search_t(template: &ThresholdInstance<'_>, oracle: &mut SatOracle) -> Result<(BigUint, u64)> {
    let two_w = template.weights.total() * 2u32;
    let bits = two_w.bits();
    let before = oracle.threshold_queries();
    let mut theta = BigUint::zero();
    for b in (0..bits).rev() {
        let mut candidate = theta.clone();
        candidate.set_bit(b, true);
        if oracle.threshold_query(&template.at(candidate.clone()))? {
            theta = candidate;
        }
    }
    Ok((theta, oracle.threshold_queries() - before))
}

/// `ceil(log2(2W + 1)) + 1`: the search plus the final pinned query.
pub fn decision_budget(total_weight: &BigUint) -> u64 {
    (total_weight * 2u32).bits() + 1
}

/// Reads off a maximizer one bit at a time in topological order, pinning
/// each decided bit. `theta` must be the exact maximum.
pub fn extract_query_string(template: &ThresholdInstance<'_>, theta: &BigUint, oracle: &mut SatOracle) -> Result<Vec<bool>> {
    let g = template.graph;
    let mut inst = template.at(theta.clone());
    for &i in g.topo() {
        if g.is_fixed(i) || inst.pins.contains_key(&i) {
            continue;
        }
        let trial = inst.at(theta.clone()).pinned(i, true);
        let bit = oracle.threshold_query(&trial)?;
        inst.pins.insert(i, bit);
    }
    Ok((0..g.len()).map(|i| inst.forced(i).expect("every node pinned")).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Compress,
    Depth,
    Direct,
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "compress" => Ok(Method::Compress),
            "depth" => Ok(Method::Depth),
            "direct" => Ok(Method::Direct),
            other => Err(format!("unknown method {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    pub backend: ThresholdBackend,
    /// Also recover the full query string with one pinned query per node.
    pub witness: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            backend: ThresholdBackend::BranchAndBound,
            witness: false,
        }
    }
}

fn decimal<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub method: Method,
    pub answer: bool,
    /// `2T`; zero for the direct method.
    #[serde(rename = "T_scaled", serialize_with = "decimal")]
    pub t_scaled: BigUint,
    #[serde(rename = "W", serialize_with = "decimal")]
    pub total_weight: BigUint,
    /// Threshold queries spent on the decision, witness extraction excluded.
    pub threshold_queries_used: u64,
    pub budget: u64,
    /// Proof queries spent inside the oracle.
    pub proof_queries: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub query_string: Option<QueryString>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph_nodes: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub transcript: Vec<TranscriptEntry>,
}

/// Binary search plus the pinned final query on one weighted instance.
struct Decision {
    theta: BigUint,
    answer: bool,
    queries: u64,
    witness: Option<Vec<bool>>,
}

fn decide_weighted(graph: &dyn QueryInstance, weights: &WeightAssignment, oracle: &mut SatOracle, witness: bool) -> Result<Decision> {
    let template = ThresholdInstance::new(graph, weights);
    let (theta, _) = binary_search_t(&template, oracle)?;
    let answer = oracle.threshold_query(&template.at(theta.clone()).pinned(graph.result_index(), true))?;
    let queries = oracle.threshold_queries();
    let witness = if witness {
        Some(extract_query_string(&template, &theta, oracle)?)
    } else {
        None
    };
    Ok(Decision {
        theta,
        answer,
        queries,
        witness,
    })
}

/// Builds the balanced separator tree, compresses, and decides `G*`.
pub fn decide_compress(g: &QueryDag, opts: SolveOptions) -> Result<SolveReport> {
    decide_compress_with_tree(g, &build_separator_tree(g), opts)
}

pub fn decide_compress_with_tree(g: &QueryDag, tree: &SeparatorTree, opts: SolveOptions) -> Result<SolveReport> {
    let c = compress::compress(g, tree)?;
    let gstar: &CompressedDag = &c.gstar;
    let weights = gstar.weights().expect("merged graphs carry f*");
    let mut oracle = SatOracle::with_backend(opts.backend);
    let d = decide_weighted(gstar, weights, &mut oracle, opts.witness)?;
    let query_string = match &d.witness {
        Some(xstar) => {
            let lifted = gstar.lift_bits(xstar)?;
            Some(to_query_string(g, &lifted))
        }
        None => None,
    };
    let total_weight = weights.total();
    let stats = oracle.into_stats();
    Ok(SolveReport {
        method: Method::Compress,
        answer: d.answer,
        t_scaled: d.theta,
        budget: decision_budget(&total_weight),
        total_weight,
        threshold_queries_used: d.queries,
        proof_queries: stats.proof_queries,
        query_string,
        graph_nodes: Some(gstar.len()),
        transcript: stats.transcript,
    })
}

/// Decides `G` directly under `rho` weights, without any transformation.
pub fn decide_depth(g: &QueryDag, opts: SolveOptions) -> Result<SolveReport> {
    let weights = weighting::rho_weights(g, NP_ADMISSIBILITY);
    decide_weighted_report(g, &weights, Method::Depth, opts)
}

/// Same protocol as [`decide_depth`] but with `omega` weights on `G`.
pub fn decide_omega(g: &QueryDag, opts: SolveOptions) -> Result<SolveReport> {
    let weights = weighting::omega_weights(g, NP_ADMISSIBILITY);
    decide_weighted_report(g, &weights, Method::Depth, opts)
}

fn decide_weighted_report(g: &QueryDag, weights: &WeightAssignment, method: Method, opts: SolveOptions) -> Result<SolveReport> {
    let mut oracle = SatOracle::with_backend(opts.backend);
    let d = decide_weighted(g, weights, &mut oracle, opts.witness)?;
    let total_weight = weights.total();
    let stats = oracle.into_stats();
    Ok(SolveReport {
        method,
        answer: d.answer,
        t_scaled: d.theta,
        budget: decision_budget(&total_weight),
        total_weight,
        threshold_queries_used: d.queries,
        proof_queries: stats.proof_queries,
        query_string: d.witness.map(|x| to_query_string(g, &x)),
        graph_nodes: Some(g.len()),
        transcript: stats.transcript,
    })
}

/// Plain topological evaluation: one proof query per node, no threshold queries.
pub fn decide_direct(g: &QueryDag) -> Result<SolveReport> {
    let mut oracle = SatOracle::new();
    let trace = evaluate(g, &mut oracle)?;
    Ok(SolveReport {
        method: Method::Direct,
        answer: trace.answer,
        t_scaled: BigUint::zero(),
        total_weight: BigUint::zero(),
        threshold_queries_used: 0,
        budget: 0,
        proof_queries: oracle.stats().proof_queries,
        query_string: Some(trace.bits),
        graph_nodes: Some(g.len()),
        transcript: Vec::new(),
    })
}

pub fn solve(g: &QueryDag, method: Method, opts: SolveOptions) -> Result<SolveReport> {
    match method {
        Method::Compress => decide_compress(g, opts),
        Method::Depth => decide_depth(g, opts),
        Method::Direct => decide_direct(g),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::DEFAULT_BRUTE_FORCE_CAP;
    use crate::querygraph::fixtures::*;
    use crate::querygraph::{is_correct_bits, NodeId, QueryNode};

    fn omega(g: &QueryDag) -> WeightAssignment {
        weighting::omega_weights(g, 2)
    }

    fn big(v: u32) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn objective_examples() {
        let g = chain2();
        let w = omega(&g);
        let inst = ThresholdInstance::new(&g, &w);
        let mut o = SatOracle::new();
        assert_eq!(max_t_for_assignment(&inst, &[true, true], &mut o).unwrap(), big(8));
        assert_eq!(max_t_for_assignment(&inst, &[false, false], &mut o).unwrap(), big(4));
        assert_eq!(max_t_for_assignment(&inst, &[true, false], &mut o).unwrap(), big(7));
    }

    #[test]
    fn threshold_examples() {
        let g = chain2();
        let w = omega(&g);
        let inst = ThresholdInstance::new(&g, &w);
        for backend in [ThresholdBackend::BranchAndBound, ThresholdBackend::BruteForce { cap: 8 }] {
            let mut o = SatOracle::with_backend(backend);
            assert!(o.threshold_query(&inst.at(big(8))).unwrap());
            assert!(!o.threshold_query(&inst.at(big(9))).unwrap());
            assert!(o.threshold_query(&inst.at(big(0))).unwrap());
            assert_eq!(o.threshold_queries(), 3);
        }
    }

    #[test]
    fn brute_force_backend_respects_cap() {
        let g = star(3);
        let w = omega(&g);
        let inst = ThresholdInstance::new(&g, &w);
        let mut o = SatOracle::with_backend(ThresholdBackend::BruteForce { cap: 2 });
        assert!(matches!(o.threshold_query(&inst), Err(Error::Capacity { .. })));
    }

    #[test]
    fn search_matches_brute_force_without_dominance() {
        // all-ones weights are not admissible, so every branch is explored
        let g = star(4);
        let w = WeightAssignment { weights: vec![BigUint::from(1u32); g.len()], c: 2 };
        let mut o = SatOracle::new();
        for pins in [vec![], vec![(4, false)], vec![(0, false), (4, true)]] {
            let mut inst = ThresholdInstance::new(&g, &w);
            inst.pins.extend(pins);
            let a = max_scaled_t_search(&inst, &mut o).unwrap();
            let b = max_scaled_t_brute_force(&inst, &mut o, DEFAULT_BRUTE_FORCE_CAP).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn binary_search_examples() {
        let g = chain2();
        let w = omega(&g);
        let mut o = SatOracle::new();
        assert_eq!(binary_search_t(&ThresholdInstance::new(&g, &w), &mut o).unwrap(), (big(8), 4));

        let g = single(vec![], 0);
        let w = omega(&g);
        let mut o = SatOracle::new();
        assert_eq!(binary_search_t(&ThresholdInstance::new(&g, &w), &mut o).unwrap(), (big(2), 2));
    }

    #[test]
    fn compress_examples() {
        let r = decide_compress(&chain2(), SolveOptions::default()).unwrap();
        assert!(r.answer);
        assert_eq!(r.total_weight, big(19));
        assert_eq!(r.threshold_queries_used, 7);
        assert_eq!(r.budget, 7);

        let unsat_v2 = QueryDag::new(
            vec![
                QueryNode::verifier(1, &[], 1, vec![vec![1]]),
                QueryNode::verifier(2, &[1], 1, vec![vec![1], vec![2], vec![-2]]),
            ],
            NodeId(2),
        )
        .unwrap();
        assert!(!decide_compress(&unsat_v2, SolveOptions::default()).unwrap().answer);

        // two copies of weight 3 merge into one of weight 6, plus t: W = 7
        let r = decide_compress(&single(vec![], 0), SolveOptions::default()).unwrap();
        assert!(r.answer);
        assert_eq!(r.total_weight, BigUint::from(7u32));
        assert_eq!(r.threshold_queries_used, 5);
    }

    #[test]
    fn depth_examples() {
        let g = star(3);
        let r = decide_depth(&g, SolveOptions::default()).unwrap();
        assert!(r.answer);
        assert_eq!(r.total_weight, big(25));
        assert_eq!(r.threshold_queries_used, 7);

        let r = decide_depth(&chain2(), SolveOptions::default()).unwrap();
        assert_eq!(r.total_weight, big(5));
        assert_eq!(r.threshold_queries_used, 5);

        assert_eq!(decide_depth(&single(vec![], 0), SolveOptions::default()).unwrap().threshold_queries_used, 3);
    }

    fn witness(g: &QueryDag) -> Vec<bool> {
        let w = omega(g);
        let template = ThresholdInstance::new(g, &w);
        let mut o = SatOracle::new();
        let (theta, _) = binary_search_t(&template, &mut o).unwrap();
        let before = o.threshold_queries();
        let x = extract_query_string(&template, &theta, &mut o).unwrap();
        assert_eq!(o.threshold_queries() - before, g.len() as u64);
        assert!(is_correct_bits(g, &x, &mut o).unwrap());
        x
    }

    #[test]
    fn extraction_examples() {
        assert_eq!(witness(&chain2()), vec![true, true]);
        let unsat_v1 = QueryDag::new(
            vec![
                QueryNode::verifier(1, &[], 1, vec![vec![1], vec![-1]]),
                QueryNode::verifier(2, &[1], 1, vec![vec![1], vec![2]]),
            ],
            NodeId(2),
        )
        .unwrap();
        assert_eq!(witness(&unsat_v1), vec![false, false]);
        assert_eq!(witness(&single(vec![], 0)), vec![true]);
    }

    #[test]
    fn witness_mode_lifts_to_a_correct_string() {
        let g = star(3);
        let opts = SolveOptions { witness: true, ..Default::default() };
        let r = decide_compress(&g, opts).unwrap();
        let x = r.query_string.unwrap();
        assert!(crate::querygraph::is_correct_query_string(&g, &x, &mut SatOracle::new()).unwrap());
        assert_eq!(r.threshold_queries_used, r.budget);
    }

    #[test]
    fn direct_counts_one_proof_query_per_node() {
        let r = decide_direct(&star(3)).unwrap();
        assert!(r.answer);
        assert_eq!(r.proof_queries, 4);
        assert_eq!(r.threshold_queries_used, 0);
    }
}
