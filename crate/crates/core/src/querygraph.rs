//! Query graphs: data model, instance documents and direct evaluation.
//!
//! Every node is an NP query given as a CNF. Variables `1..=indeg` are the
//! node's input wires, in the order of `inputs`; the remaining
//! `proof_vars` variables are existentially quantified. A node answers 1 iff
//! some proof assignment satisfies every clause once the inputs are fixed.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};
use std::cmp::Reverse;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::oracle::ProofOracle;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Verifier,
    Conductor,
}

/// A signed literal in node-local numbering: `+j` is variable `j`, `-j` its negation.
pub type Literal = i32;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryNode {
    pub id: NodeId,
    pub kind: NodeKind,
    pub inputs: Vec<NodeId>,
    #[serde(rename = "proof_vars")]
    pub proof_var_count: u32,
    pub clauses: Vec<Vec<Literal>>,
}

impl QueryNode {
    pub fn verifier(id: u32, inputs: &[u32], proof_vars: u32, clauses: Vec<Vec<Literal>>) -> Self {
        QueryNode {
            id: NodeId(id),
            kind: NodeKind::Verifier,
            inputs: inputs.iter().map(|&i| NodeId(i)).collect(),
            proof_var_count: proof_vars,
            clauses,
        }
    }

    /// Number of node-local variables: input wires followed by proof variables.
    pub fn var_count(&self) -> usize {
        self.inputs.len() + self.proof_var_count as usize
    }
}

/// One answer bit per node.
pub type QueryString = BTreeMap<NodeId, bool>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("{}", match .node { Some(n) => format!("node {n}: {kind}"), None => kind.to_string() })]
    Semantic {
        node: Option<NodeId>,
        kind: SemanticError,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SemanticError {
    #[error("cycle")]
    Cycle,
    #[error("empty graph")]
    Empty,
    #[error("duplicate node id")]
    DuplicateId,
    #[error("input {0} is not a node")]
    DanglingInput(NodeId),
    #[error("input {0} listed twice")]
    DuplicateInput(NodeId),
    #[error("literal {0} out of range")]
    LiteralOutOfRange(Literal),
    #[error("output node does not exist")]
    MissingOutput,
    #[error("node has no outgoing edge but is not the output")]
    ExtraSink,
    #[error("output node has outgoing edges")]
    OutputNotSink,
    #[error("conductor nodes carry no proof variables or clauses")]
    ConductorWithClauses,
}

fn semantic(node: Option<NodeId>, kind: SemanticError) -> ParseError {
    ParseError::Semantic { node, kind }
}

#[derive(Serialize, Deserialize)]
struct InstanceDoc {
    nodes: Vec<QueryNode>,
    output: NodeId,
}

/// A validated query graph. Nodes are stored sorted by id; internal indices
/// refer to that order.
#[derive(Debug, Clone)]
pub struct QueryDag {
    nodes: Vec<QueryNode>,
    output: usize,
    index: HashMap<NodeId, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    topo: Vec<usize>,
}

impl QueryDag {
    pub fn new(mut nodes: Vec<QueryNode>, output: NodeId) -> std::result::Result<Self, ParseError> {
        if nodes.is_empty() {
            return Err(semantic(None, SemanticError::Empty));
        }
        nodes.sort_by_key(|n| n.id);
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.id, i).is_some() {
                return Err(semantic(Some(n.id), SemanticError::DuplicateId));
            }
        }
        let mut parents = vec![Vec::new(); nodes.len()];
        let mut children = vec![Vec::new(); nodes.len()];
        for (i, n) in nodes.iter().enumerate() {
            let mut seen = BTreeSet::new();
            for &p in &n.inputs {
                let Some(&pi) = index.get(&p) else {
                    return Err(semantic(Some(n.id), SemanticError::DanglingInput(p)));
                };
                if !seen.insert(p) {
                    return Err(semantic(Some(n.id), SemanticError::DuplicateInput(p)));
                }
                parents[i].push(pi);
                children[pi].push(i);
            }
            if n.kind == NodeKind::Conductor && (n.proof_var_count > 0 || !n.clauses.is_empty()) {
                return Err(semantic(Some(n.id), SemanticError::ConductorWithClauses));
            }
            let vars = n.var_count() as i64;
            for clause in &n.clauses {
                for &lit in clause {
                    if lit == 0 || i64::from(lit).abs() > vars {
                        return Err(semantic(Some(n.id), SemanticError::LiteralOutOfRange(lit)));
                    }
                }
            }
        }
        for c in &mut children {
            c.sort_unstable();
        }
        let topo = kahn(&parents, &children).map_err(|i| semantic(Some(nodes[i].id), SemanticError::Cycle))?;

        let Some(&out) = index.get(&output) else {
            return Err(semantic(Some(output), SemanticError::MissingOutput));
        };
        if !children[out].is_empty() {
            return Err(semantic(Some(output), SemanticError::OutputNotSink));
        }
        if let Some(extra) = (0..nodes.len()).find(|&i| i != out && children[i].is_empty()) {
            return Err(semantic(Some(nodes[extra].id), SemanticError::ExtraSink));
        }
        Ok(QueryDag {
            nodes,
            output: out,
            index,
            parents,
            children,
            topo,
        })
    }

    pub fn nodes(&self) -> &[QueryNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn output(&self) -> NodeId {
        self.nodes[self.output].id
    }

    pub fn output_index(&self) -> usize {
        self.output
    }

    pub fn index_of(&self, id: NodeId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn node(&self, id: NodeId) -> Option<&QueryNode> {
        self.index_of(id).map(|i| &self.nodes[i])
    }

    pub fn parents(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    /// Largest node id, used to allocate fresh ids for padding nodes.
    pub fn max_id(&self) -> NodeId {
        self.nodes.last().map(|n| n.id).unwrap_or(NodeId(0))
    }

    /// Topological order over indices, ties broken by ascending id.
    pub fn topo_indices(&self) -> &[usize] {
        &self.topo
    }

    pub fn to_document(&self) -> String {
        let doc = InstanceDoc {
            nodes: self.nodes.clone(),
            output: self.output(),
        };
        serde_json::to_string(&doc).expect("instance documents always serialize")
    }

    /// Descendant sets over indices (excluding the node itself).
    pub fn descendants(&self) -> Vec<BTreeSet<usize>> {
        let mut desc = vec![BTreeSet::new(); self.len()];
        for &i in self.topo.iter().rev() {
            let mut acc = BTreeSet::new();
            for &c in &self.children[i] {
                acc.insert(c);
                acc.extend(desc[c].iter().copied());
            }
            desc[i] = acc;
        }
        desc
    }

    /// Ancestor sets over indices (excluding the node itself).
    pub fn ancestors(&self) -> Vec<BTreeSet<usize>> {
        let mut anc = vec![BTreeSet::new(); self.len()];
        for &i in &self.topo {
            let mut acc = BTreeSet::new();
            for &p in &self.parents[i] {
                acc.insert(p);
                acc.extend(anc[p].iter().copied());
            }
            anc[i] = acc;
        }
        anc
    }
}

/// Kahn's algorithm with a min-heap; returns a node on a cycle on failure.
pub(crate) fn kahn(parents: &[Vec<usize>], children: &[Vec<usize>]) -> std::result::Result<Vec<usize>, usize> {
    let n = parents.len();
    let mut indeg: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut heap: BinaryHeap<Reverse<usize>> = (0..n).filter(|&i| indeg[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(i)) = heap.pop() {
        order.push(i);
        for &c in &children[i] {
            indeg[c] -= 1;
            if indeg[c] == 0 {
                heap.push(Reverse(c));
            }
        }
    }
    if order.len() < n {
        let stuck = (0..n).find(|&i| indeg[i] > 0).unwrap_or(0);
        return Err(stuck);
    }
    Ok(order)
}

pub fn parse_dag(text: &str) -> std::result::Result<QueryDag, ParseError> {
    let doc: InstanceDoc = serde_json::from_str(text).map_err(|e| ParseError::Syntax(e.to_string()))?;
    QueryDag::new(doc.nodes, doc.output)
}

pub fn topological_order(g: &QueryDag) -> Vec<NodeId> {
    g.topo.iter().map(|&i| g.nodes[i].id).collect()
}

/// Anything that can be evaluated node by node in topological order: plain
/// query graphs and compressed graphs.
///
/// `decide` may only read the bits of the node's parents; every threshold
/// and flip argument in [`crate::solver`] relies on that locality.
pub trait QueryInstance {
    fn len(&self) -> usize;
    fn parents(&self, i: usize) -> &[usize];
    fn children(&self, i: usize) -> &[usize];
    fn topo(&self) -> &[usize];
    fn result_index(&self) -> usize;
    fn node_id(&self, i: usize) -> NodeId;

    /// Padding nodes whose bit is fixed to 1 in every threshold instance.
    fn is_fixed(&self, _i: usize) -> bool {
        false
    }

    /// Whether node `i` accepts given the bits of its parents.
    fn decide(&self, i: usize, x: &[Option<bool>], oracle: &mut dyn ProofOracle) -> Result<bool>;
}

impl QueryInstance for QueryDag {
    fn len(&self) -> usize {
        self.nodes.len()
    }
    fn parents(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }
    fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }
    fn topo(&self) -> &[usize] {
        &self.topo
    }
    fn result_index(&self) -> usize {
        self.output
    }
    fn node_id(&self, i: usize) -> NodeId {
        self.nodes[i].id
    }

    fn decide(&self, i: usize, x: &[Option<bool>], oracle: &mut dyn ProofOracle) -> Result<bool> {
        let node = &self.nodes[i];
        if node.kind == NodeKind::Conductor {
            return Err(Error::ConductorWithoutContext(node.id));
        }
        let inputs = self.parents[i]
            .iter()
            .map(|&p| x[p].ok_or_else(|| Error::MissingWire { node: self.nodes[p].id.to_string() }))
            .collect::<Result<Vec<_>>>()?;
        oracle.exists_proof(node, &inputs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalTrace {
    pub order: Vec<NodeId>,
    pub bits: QueryString,
    pub answer: bool,
}

/// Canonical evaluation over instance indices: every node in topological
/// order, its bit set to the oracle's answer on its parents' bits.
pub fn evaluate_bits<I: QueryInstance + ?Sized>(g: &I, oracle: &mut dyn ProofOracle) -> Result<Vec<bool>> {
    let mut x = vec![None; g.len()];
    for &i in g.topo() {
        x[i] = Some(g.decide(i, &x, oracle)?);
    }
    Ok(x.into_iter().map(|b| b.expect("every node visited")).collect())
}

pub fn evaluate(g: &QueryDag, oracle: &mut dyn ProofOracle) -> Result<EvalTrace> {
    let bits = evaluate_bits(g, oracle)?;
    Ok(EvalTrace {
        order: topological_order(g),
        bits: g.nodes.iter().zip(&bits).map(|(n, &b)| (n.id, b)).collect(),
        answer: bits[g.output],
    })
}

/// Checks a full assignment on instance indices against every node's query.
pub fn is_correct_bits<I: QueryInstance + ?Sized>(g: &I, x: &[bool], oracle: &mut dyn ProofOracle) -> Result<bool> {
    let xs: Vec<Option<bool>> = x.iter().copied().map(Some).collect();
    for i in 0..g.len() {
        if g.decide(i, &xs, oracle)? != x[i] {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn is_correct_query_string(g: &QueryDag, x: &QueryString, oracle: &mut dyn ProofOracle) -> Result<bool> {
    if x.len() != g.len() || g.nodes.iter().any(|n| !x.contains_key(&n.id)) {
        return Err(Error::Validation("query string does not cover exactly the graph's nodes".into()));
    }
    let bits: Vec<bool> = g.nodes.iter().map(|n| x[&n.id]).collect();
    is_correct_bits(g, &bits, oracle)
}

/// Converts instance-indexed bits to a query string keyed by node id.
pub fn to_query_string<I: QueryInstance + ?Sized>(g: &I, bits: &[bool]) -> QueryString {
    bits.iter().enumerate().map(|(i, &b)| (g.node_id(i), b)).collect()
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub const CHAIN2: &str = r#"{"nodes":[{"id":1,"kind":"verifier","inputs":[],"proof_vars":1,"clauses":[[1]]},{"id":2,"kind":"verifier","inputs":[1],"proof_vars":1,"clauses":[[1],[2]]}],"output":2}"#;

    pub fn chain2() -> QueryDag {
        parse_dag(CHAIN2).unwrap()
    }

    pub fn single(clauses: Vec<Vec<Literal>>, proof_vars: u32) -> QueryDag {
        QueryDag::new(vec![QueryNode::verifier(1, &[], proof_vars, clauses)], NodeId(1)).unwrap()
    }

    /// Leaves 1..=k feed center k+1.
    pub fn star(k: u32) -> QueryDag {
        let mut nodes: Vec<QueryNode> = (1..=k).map(|i| QueryNode::verifier(i, &[], 1, vec![vec![1]])).collect();
        let inputs: Vec<u32> = (1..=k).collect();
        nodes.push(QueryNode::verifier(k + 1, &inputs, 0, vec![inputs.iter().map(|&j| j as i32).collect()]));
        QueryDag::new(nodes, NodeId(k + 1)).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::oracle::SatOracle;

    #[test]
    fn parses_chain2() {
        let g = chain2();
        assert_eq!(g.len(), 2);
        assert_eq!(g.output(), NodeId(2));
        assert_eq!(g.to_document(), CHAIN2);
    }

    #[test]
    fn parses_single_vacuous_node() {
        let g = parse_dag(r#"{"nodes":[{"id":1,"kind":"verifier","inputs":[],"proof_vars":0,"clauses":[]}],"output":1}"#).unwrap();
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn self_loop_is_a_cycle() {
        let doc = r#"{"nodes":[{"id":1,"kind":"verifier","inputs":[],"proof_vars":1,"clauses":[[1]]},{"id":2,"kind":"verifier","inputs":[2],"proof_vars":0,"clauses":[]}],"output":2}"#;
        let err = parse_dag(doc).unwrap_err();
        assert!(err.to_string().contains("cycle"), "{err}");
        assert!(err.to_string().contains("node 2"), "{err}");
    }

    #[test]
    fn semantic_errors_name_the_node() {
        let dangling = r#"{"nodes":[{"id":1,"kind":"verifier","inputs":[7],"proof_vars":0,"clauses":[]}],"output":1}"#;
        assert!(matches!(
            parse_dag(dangling),
            Err(ParseError::Semantic { node: Some(NodeId(1)), kind: SemanticError::DanglingInput(NodeId(7)) })
        ));
        let lit = r#"{"nodes":[{"id":1,"kind":"verifier","inputs":[],"proof_vars":1,"clauses":[[2]]}],"output":1}"#;
        assert!(matches!(
            parse_dag(lit),
            Err(ParseError::Semantic { kind: SemanticError::LiteralOutOfRange(2), .. })
        ));
        let missing = r#"{"nodes":[{"id":1,"kind":"verifier","inputs":[],"proof_vars":0,"clauses":[]}],"output":3}"#;
        assert!(matches!(parse_dag(missing), Err(ParseError::Semantic { kind: SemanticError::MissingOutput, .. })));
        let two_sinks = r#"{"nodes":[{"id":1,"kind":"verifier","inputs":[],"proof_vars":0,"clauses":[]},{"id":2,"kind":"verifier","inputs":[],"proof_vars":0,"clauses":[]}],"output":2}"#;
        assert!(matches!(
            parse_dag(two_sinks),
            Err(ParseError::Semantic { node: Some(NodeId(1)), kind: SemanticError::ExtraSink })
        ));
        assert!(matches!(parse_dag("{\"nodes\":"), Err(ParseError::Syntax(_))));
    }

    #[test]
    fn topological_orders() {
        assert_eq!(topological_order(&chain2()), vec![NodeId(1), NodeId(2)]);
        assert_eq!(topological_order(&star(3)), vec![NodeId(1), NodeId(2), NodeId(3), NodeId(4)]);
        assert_eq!(topological_order(&single(vec![], 0)), vec![NodeId(1)]);
    }

    #[test]
    fn evaluates_examples() {
        let mut o = SatOracle::new();
        let t = evaluate(&chain2(), &mut o).unwrap();
        assert_eq!(t.bits, QueryString::from([(NodeId(1), true), (NodeId(2), true)]));
        assert!(t.answer);
        assert!(!evaluate(&single(vec![vec![1], vec![-1]], 1), &mut o).unwrap().answer);
        assert!(evaluate(&single(vec![], 0), &mut o).unwrap().answer);
    }

    #[test]
    fn correct_query_strings() {
        let mut o = SatOracle::new();
        let g = chain2();
        let x11 = QueryString::from([(NodeId(1), true), (NodeId(2), true)]);
        let x01 = QueryString::from([(NodeId(1), false), (NodeId(2), true)]);
        assert!(is_correct_query_string(&g, &x11, &mut o).unwrap());
        assert!(!is_correct_query_string(&g, &x01, &mut o).unwrap());
        let single = single(vec![], 0);
        assert!(is_correct_query_string(&single, &QueryString::from([(NodeId(1), true)]), &mut o).unwrap());
    }

    #[test]
    fn conductor_needs_context() {
        let g = QueryDag::new(
            vec![QueryNode {
                id: NodeId(1),
                kind: NodeKind::Conductor,
                inputs: vec![],
                proof_var_count: 0,
                clauses: vec![],
            }],
            NodeId(1),
        )
        .unwrap();
        assert!(matches!(evaluate(&g, &mut SatOracle::new()), Err(Error::ConductorWithoutContext(_))));
    }
}
