use crate::querygraph::{Literal, QueryDag, QueryNode};

/// A node's formula with exactly three literals per clause, in node-local
/// numbering: inputs, then proof variables, then `aux_count` auxiliaries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeThreeCnf {
    pub input_count: usize,
    pub proof_count: usize,
    pub aux_count: usize,
    pub clauses: Vec<[Literal; 3]>,
}

impl NodeThreeCnf {
    pub fn var_count(&self) -> usize {
        self.input_count + self.proof_count + self.aux_count
    }
}

/// Splits long clauses with fresh auxiliaries and pads short ones by
/// repeating a literal. An empty clause becomes `(a a a)(-a -a -a)` over a
/// fresh `a`. Input variables are left unconstrained, so for every fixing of
/// the inputs the result is satisfiable iff the node's formula is.
pub fn to_three_cnf(node: &QueryNode) -> NodeThreeCnf {
    let base = node.var_count() as Literal;
    let mut aux = 0;
    let mut fresh = || {
        aux += 1;
        base + aux
    };
    let mut clauses = Vec::new();
    for clause in &node.clauses {
        match clause.len() {
            0 => {
                let a = fresh();
                clauses.push([a, a, a]);
                clauses.push([-a, -a, -a]);
            }
            1 => clauses.push([clause[0]; 3]),
            2 => clauses.push([clause[0], clause[1], clause[1]]),
            3 => clauses.push([clause[0], clause[1], clause[2]]),
            k => {
                let mut link = fresh();
                clauses.push([clause[0], clause[1], link]);
                for &lit in &clause[2..k - 2] {
                    let next = fresh();
                    clauses.push([-link, lit, next]);
                    link = next;
                }
                clauses.push([-link, clause[k - 2], clause[k - 1]]);
            }
        }
    }
    NodeThreeCnf {
        input_count: node.inputs.len(),
        proof_count: node.proof_var_count as usize,
        aux_count: aux as usize,
        clauses,
    }
}

/// Index of a variable in the global point vector.
pub type GlobalVar = usize;

/// `(variable, positive)`.
pub type GlobalLiteral = (GlobalVar, bool);

/// All node formulas over one shared variable vector.
///
/// The first `m` coordinates are the answer bits `x`, one per node in
/// topological order. Then each node, again in topological order, owns a
/// block of `n_pad` coordinates: its proof variables, its auxiliaries, and
/// unused padding. Input wires refer to the parents' `x` coordinates. Every
/// node has exactly `m_pad` clauses; padding clauses are `(v, -v, v)` on
/// the node's own `x` coordinate, which hold at every Boolean point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreeCnf {
    pub m: usize,
    pub n_pad: usize,
    pub m_pad: usize,
    /// Node index for each `x` coordinate.
    pub x_nodes: Vec<usize>,
    /// Per node index: its `x` coordinate.
    pub x_of: Vec<GlobalVar>,
    /// Per node index: clauses over global variables.
    pub clauses: Vec<Vec<[GlobalLiteral; 3]>>,
}

impl ThreeCnf {
    pub fn var_count(&self) -> usize {
        self.m + self.m * self.n_pad
    }

    pub fn block_start(&self, node: usize) -> GlobalVar {
        let rank = self.x_of[node];
        self.m + rank * self.n_pad
    }
}

pub fn build_three_cnf(g: &QueryDag) -> ThreeCnf {
    let m = g.len();
    let order = g.topo_indices();
    let mut x_of = vec![0; m];
    for (rank, &i) in order.iter().enumerate() {
        x_of[i] = rank;
    }
    let local: Vec<NodeThreeCnf> = g.nodes().iter().map(to_three_cnf).collect();
    let n_pad = local.iter().map(|c| c.proof_count + c.aux_count).max().unwrap_or(0);
    let m_pad = local.iter().map(|c| c.clauses.len()).max().unwrap_or(0);

    let clauses = (0..m)
        .map(|i| {
            let cnf = &local[i];
            let start = m + x_of[i] * n_pad;
            let parents = g.parents(i);
            let map = |lit: Literal| -> GlobalLiteral {
                let v = lit.unsigned_abs() as usize;
                let global = if v <= cnf.input_count {
                    x_of[parents[v - 1]]
                } else {
                    start + v - cnf.input_count - 1
                };
                (global, lit > 0)
            };
            let mut out: Vec<[GlobalLiteral; 3]> = cnf.clauses.iter().map(|c| c.map(map)).collect();
            let own = x_of[i];
            out.resize(m_pad, [(own, true), (own, false), (own, true)]);
            out
        })
        .collect();
    ThreeCnf {
        m,
        n_pad,
        m_pad,
        x_nodes: order.to_vec(),
        x_of,
        clauses,
    }
}
