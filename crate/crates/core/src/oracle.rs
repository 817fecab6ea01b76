//! The NP oracle.
//!
//! Two kinds of questions are asked: proof existence for a single node with
//! fixed inputs (answered by a small DPLL search), and threshold questions
//! "is there an `x` with `2 t(x) >= theta`" over a whole weighted instance.
//! Only threshold questions are counted against query budgets; proof queries
//! are the oracle's own internal work.

use std::collections::HashMap;

use num_bigint::BigUint;
use serde::Serialize;

use crate::querygraph::{Literal, NodeId, QueryNode};
use crate::solver::{self, ThresholdInstance};
use crate::Result;

/// Decides whether a node accepts some proof for the given input bits.
pub trait ProofOracle {
    fn exists_proof(&mut self, node: &QueryNode, inputs: &[bool]) -> Result<bool>;
}

/// Complete DPLL search with unit propagation. `fixed[j]` assigns variable `j + 1`.
pub fn satisfiable(num_vars: usize, clauses: &[Vec<Literal>], fixed: &[bool]) -> bool {
    let mut assign: Vec<Option<bool>> = vec![None; num_vars + 1];
    for (j, &b) in fixed.iter().enumerate() {
        assign[j + 1] = Some(b);
    }
    dpll(clauses, &mut assign)
}

fn lit_value(assign: &[Option<bool>], lit: Literal) -> Option<bool> {
    assign[lit.unsigned_abs() as usize].map(|v| v == (lit > 0))
}

fn dpll(clauses: &[Vec<Literal>], assign: &mut [Option<bool>]) -> bool {
    // unit propagation to fixpoint
    loop {
        let mut changed = false;
        for clause in clauses {
            let mut open = None;
            let mut open_count = 0;
            let mut satisfied = false;
            for &lit in clause {
                match lit_value(assign, lit) {
                    Some(true) => {
                        satisfied = true;
                        break;
                    }
                    Some(false) => {}
                    None => {
                        open_count += 1;
                        open = Some(lit);
                    }
                }
            }
            if satisfied {
                continue;
            }
            match (open_count, open) {
                (0, _) => return false,
                (1, Some(lit)) => {
                    assign[lit.unsigned_abs() as usize] = Some(lit > 0);
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            break;
        }
    }
    let branch = clauses
        .iter()
        .filter(|c| !c.iter().any(|&l| lit_value(assign, l) == Some(true)))
        .flat_map(|c| c.iter())
        .find(|&&l| lit_value(assign, l).is_none());
    let Some(&lit) = branch else {
        return true;
    };
    let var = lit.unsigned_abs() as usize;
    for value in [lit > 0, lit <= 0] {
        let mut trial = assign.to_vec();
        trial[var] = Some(value);
        if dpll(clauses, &mut trial) {
            return true;
        }
    }
    false
}

/// True iff some assignment of the proof variables satisfies the node's CNF
/// with the input wires fixed to `input_bits`.
pub fn sat_exists_proof(node: &QueryNode, input_bits: &[bool]) -> bool {
    assert_eq!(input_bits.len(), node.inputs.len(), "input arity mismatch at node {}", node.id);
    satisfiable(node.var_count(), &node.clauses, input_bits)
}

/// Exhaustive check used as a test oracle for the DPLL search.
pub fn sat_exists_proof_exhaustive(node: &QueryNode, input_bits: &[bool]) -> bool {
    let k = node.proof_var_count as usize;
    (0u64..1 << k).any(|mask| {
        let value = |lit: Literal| {
            let v = lit.unsigned_abs() as usize;
            let b = if v <= input_bits.len() {
                input_bits[v - 1]
            } else {
                mask >> (v - input_bits.len() - 1) & 1 == 1
            };
            b == (lit > 0)
        };
        node.clauses.iter().all(|c| c.iter().any(|&l| value(l)))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryKind {
    Proof,
    Threshold,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TranscriptEntry {
    pub kind: QueryKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node: Option<NodeId>,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "ser_opt_decimal")]
    pub threshold: Option<BigUint>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub pinned: Vec<(NodeId, bool)>,
    pub answer: bool,
}

fn ser_opt_decimal<S: serde::Serializer>(v: &Option<BigUint>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_str(&v.to_string()),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct OracleStats {
    pub proof_queries: u64,
    pub threshold_queries: u64,
    /// Threshold queries are always recorded; proof queries only when the
    /// oracle was built with [`SatOracle::with_full_transcript`].
    pub transcript: Vec<TranscriptEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdBackend {
    /// Enumerates every free assignment; refuses instances with more than
    /// `cap` free nodes.
    BruteForce { cap: usize },
    /// Depth-first search in topological order with a flip-dominance rule
    /// checked numerically per node; exact for any weights.
    BranchAndBound,
}

pub const DEFAULT_BRUTE_FORCE_CAP: usize = 20;

/// Proof decisions for one node, valid only while its formula is unchanged.
#[derive(Debug)]
struct CachedNode {
    proof_var_count: u32,
    clauses: Vec<Vec<Literal>>,
    answers: HashMap<Vec<bool>, bool>,
}

/// SAT oracle with query accounting and a per-run cache of proof decisions.
#[derive(Debug)]
pub struct SatOracle {
    stats: OracleStats,
    cache: HashMap<NodeId, CachedNode>,
    backend: ThresholdBackend,
    full_transcript: bool,
}

impl Default for SatOracle {
    fn default() -> Self {
        Self::new()
    }
}

impl SatOracle {
    pub fn new() -> Self {
        SatOracle {
            stats: OracleStats::default(),
            cache: HashMap::new(),
            backend: ThresholdBackend::BranchAndBound,
            full_transcript: false,
        }
    }

    pub fn with_backend(backend: ThresholdBackend) -> Self {
        SatOracle {
            backend,
            ..Self::new()
        }
    }

    pub fn with_full_transcript(mut self) -> Self {
        self.full_transcript = true;
        self
    }

    pub fn backend(&self) -> ThresholdBackend {
        self.backend
    }

    pub fn stats(&self) -> &OracleStats {
        &self.stats
    }

    pub fn threshold_queries(&self) -> u64 {
        self.stats.threshold_queries
    }

    pub fn into_stats(self) -> OracleStats {
        self.stats
    }

    /// Decides `exists x (respecting pins) with 2 t(x) >= threshold`.
    pub fn threshold_query(&mut self, inst: &ThresholdInstance<'_>) -> Result<bool> {
        let best = match self.backend {
            ThresholdBackend::BruteForce { cap } => solver::max_scaled_t_brute_force(inst, self, cap)?,
            ThresholdBackend::BranchAndBound => solver::max_scaled_t_search(inst, self)?,
        };
        let answer = best >= inst.threshold;
        self.stats.threshold_queries += 1;
        self.stats.transcript.push(TranscriptEntry {
            kind: QueryKind::Threshold,
            node: None,
            threshold: Some(inst.threshold.clone()),
            pinned: inst.pins.iter().map(|(&i, &b)| (inst.graph.node_id(i), b)).collect(),
            answer,
        });
        Ok(answer)
    }
}

impl ProofOracle for SatOracle {
    fn exists_proof(&mut self, node: &QueryNode, inputs: &[bool]) -> Result<bool> {
        self.stats.proof_queries += 1;
        let entry = self.cache.entry(node.id).or_insert_with(|| CachedNode {
            proof_var_count: node.proof_var_count,
            clauses: node.clauses.clone(),
            answers: HashMap::new(),
        });
        // the same oracle may serve several graphs that reuse ids
        if entry.proof_var_count != node.proof_var_count || entry.clauses != node.clauses {
            entry.proof_var_count = node.proof_var_count;
            entry.clauses = node.clauses.clone();
            entry.answers.clear();
        }
        let answer = match entry.answers.get(inputs) {
            Some(&a) => a,
            None => {
                let a = sat_exists_proof(node, inputs);
                entry.answers.insert(inputs.to_vec(), a);
                a
            }
        };
        if self.full_transcript {
            self.stats.transcript.push(TranscriptEntry {
                kind: QueryKind::Proof,
                node: Some(node.id),
                threshold: None,
                pinned: Vec::new(),
                answer,
            });
        }
        Ok(answer)
    }
}
