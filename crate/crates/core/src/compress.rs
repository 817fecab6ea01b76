//! Separator-tree compression of a query graph.
//!
//! The pipeline has three stages:
//!
//! 1. [`expand_to_gprime`]: every node `u` in supervertex `S` at depth `d` is
//!    copied once per conditioning string `z_1..z_d`, one `s`-bit guess for
//!    the answers of each supervertex on the path from the root to `S`.
//!    A copy feeds the copies of its descendants in supervertices above it
//!    whose conditioning is a prefix of its own.
//! 2. [`add_conductor`]: a sink `t` reads every copy and stitches the real
//!    answer of the result node together with [`CompressedDag::compute_output`].
//! 3. [`merge`]: copies whose conditioning agrees on every coordinate that
//!    belongs to an ancestor of their origin are merged, and their weights
//!    are added.
//!
//! Conditioning strings are packed into a `u64`: coordinate `j * s + k`
//! holds the guess for member `k` of the `j`-th supervertex on the path.
//! A compressed copy resolves each input wire of its origin by running
//! `compute_output` on its own conditioning. Only coordinates that belong to
//! ancestors of the origin are ever read; the others stay 0. This keeps every
//! read on an incoming edge and makes a copy's answer depend only on the
//! coordinates that survive merging.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_bigint::BigUint;
use serde::Serialize;

use crate::oracle::ProofOracle;
use crate::querygraph::{kahn, NodeId, QueryDag, QueryInstance, QueryString};
use crate::separator::SeparatorTree;
use crate::weighting::{self, WeightAssignment, NP_ADMISSIBILITY};
use crate::{Error, Result};

/// Largest `s * D` supported by the packed conditioning representation.
pub const MAX_CONDITIONING_BITS: usize = 62;

/// Default cap on `|V'|`.
pub const DEFAULT_COPY_CAP: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CompressedKind {
    Copy,
    Conductor,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressedNode {
    pub kind: CompressedKind,
    /// Index into the origin table; the result node's origin for the conductor.
    origin: usize,
    /// Packed conditioning, merged coordinates read as 0.
    bits: u64,
    /// Packed set of coordinates still carried by this node.
    kept: u64,
}

#[derive(Debug, Clone)]
struct Origin {
    id: NodeId,
    dag_index: Option<usize>,
    supervertex: usize,
    position: usize,
    depth: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Expanded,
    WithConductor,
    Merged,
}

/// One of the graphs `G'`, `G''` or `G*`.
#[derive(Debug, Clone)]
pub struct CompressedDag {
    source: QueryDag,
    tree: SeparatorTree,
    s: usize,
    stage: Stage,
    origins: Vec<Origin>,
    origin_index: HashMap<NodeId, usize>,
    members: Vec<Vec<usize>>,
    paths: Vec<Vec<usize>>,
    /// `anc[o][p]`: origin `p` is a strict ancestor of origin `o` in `G`.
    anc: Vec<Vec<bool>>,
    /// Coordinates used to look up copies of each origin.
    mask: Vec<u64>,
    nodes: Vec<CompressedNode>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    topo: Vec<usize>,
    lookup: HashMap<(usize, u64), usize>,
    conductor: Option<usize>,
    weights: Option<WeightAssignment>,
}

/// Creates all copies and upward edges. The tree must be a verified
/// separator tree of `g`.
pub fn expand_to_gprime(g: &QueryDag, t: &SeparatorTree) -> Result<CompressedDag> {
    expand_with_cap(g, t, DEFAULT_COPY_CAP)
}

pub fn expand_with_cap(g: &QueryDag, t: &SeparatorTree, cap: usize) -> Result<CompressedDag> {
    let s = t.uniform_size;
    let layout = t.layout();
    let depth = layout.max_depth();
    if s * depth > MAX_CONDITIONING_BITS {
        return Err(Error::Capacity {
            what: "conditioning bits s*D",
            size: s * depth,
            cap: MAX_CONDITIONING_BITS,
        });
    }
    let copies = gprime_size(t);
    if copies > cap as u128 {
        return Err(Error::Capacity {
            what: "copies in G'",
            size: usize::try_from(copies).unwrap_or(usize::MAX),
            cap,
        });
    }

    let mut origins: Vec<Origin> = g
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, node)| {
            let slot = layout.slots[&node.id];
            Origin {
                id: node.id,
                dag_index: Some(i),
                supervertex: slot.supervertex,
                position: slot.position,
                depth: layout.depth_of(slot.supervertex),
            }
        })
        .collect();
    for &d in &t.dummies {
        let slot = layout.slots[&d];
        origins.push(Origin {
            id: d,
            dag_index: None,
            supervertex: slot.supervertex,
            position: slot.position,
            depth: layout.depth_of(slot.supervertex),
        });
    }
    let origin_index: HashMap<NodeId, usize> = origins.iter().enumerate().map(|(i, o)| (o.id, i)).collect();
    let members: Vec<Vec<usize>> = t
        .supervertices
        .iter()
        .map(|sv| sv.members.iter().map(|m| origin_index[m]).collect())
        .collect();

    let total = origins.len();
    let mut anc = vec![vec![false; total]; total];
    let mut desc = vec![vec![false; total]; total];
    for (i, set) in g.ancestors().iter().enumerate() {
        for &p in set {
            anc[i][p] = true;
            desc[p][i] = true;
        }
    }

    let mut dag = CompressedDag {
        source: g.clone(),
        tree: t.clone(),
        s,
        stage: Stage::Expanded,
        mask: origins.iter().map(|o| low_bits(s * o.depth)).collect(),
        origins,
        origin_index,
        members,
        paths: layout.paths,
        anc,
        nodes: Vec::new(),
        parents: Vec::new(),
        children: Vec::new(),
        topo: Vec::new(),
        lookup: HashMap::new(),
        conductor: None,
        weights: None,
    };

    // copies in supervertex preorder, then member position, then conditioning
    for sv in 0..dag.members.len() {
        let width = s * dag.paths[sv].len();
        for &o in &dag.members[sv] {
            for bits in 0..1u64 << width {
                dag.lookup.insert((o, bits), dag.nodes.len());
                dag.nodes.push(CompressedNode {
                    kind: CompressedKind::Copy,
                    origin: o,
                    bits,
                    kept: low_bits(width),
                });
            }
        }
    }
    let mut edges = Vec::new();
    for (v, node) in dag.nodes.iter().enumerate() {
        let path = &dag.paths[dag.origins[node.origin].supervertex];
        for (level, &upper) in path.iter().enumerate().take(path.len() - 1) {
            for &target in &dag.members[upper] {
                if desc[node.origin][target] {
                    let prefix = node.bits & low_bits(s * (level + 1));
                    edges.push((v, dag.lookup[&(target, prefix)]));
                }
            }
        }
    }
    dag.set_edges(edges);
    Ok(dag)
}

/// Adds the conductor `t` with an edge from every node.
pub fn add_conductor(mut gp: CompressedDag) -> CompressedDag {
    assert_eq!(gp.stage, Stage::Expanded, "conductor already present");
    let t = gp.nodes.len();
    let out = gp.origin_index[&gp.source.output()];
    gp.nodes.push(CompressedNode {
        kind: CompressedKind::Conductor,
        origin: out,
        bits: 0,
        kept: 0,
    });
    let mut edges = gp.edge_list();
    edges.extend((0..t).map(|v| (v, t)));
    gp.set_edges(edges);
    gp.conductor = Some(t);
    gp.stage = Stage::WithConductor;
    gp
}

/// Merges copies with equal origin and equal conditioning on the origin's
/// ancestor coordinates, starting from `omega` weights on `G''`.
///
/// Pairs are folded deepest origin first, then by origin id, then by
/// signature; the merged node keeps the lower index.
pub fn merge(g2: &CompressedDag) -> Result<(CompressedDag, WeightAssignment)> {
    if g2.stage != Stage::WithConductor {
        return Err(Error::Validation("merge needs a graph with a conductor".into()));
    }
    let omega = weighting::omega_weights(g2, NP_ADMISSIBILITY);
    let s = g2.s;

    let merged_mask: Vec<u64> = (0..g2.origins.len())
        .map(|o| {
            let path = &g2.paths[g2.origins[o].supervertex];
            let mut m = 0u64;
            for (level, &sv) in path.iter().enumerate() {
                for (k, &p) in g2.members[sv].iter().enumerate() {
                    if g2.anc[o][p] {
                        m |= 1 << (level * s + k);
                    }
                }
            }
            m
        })
        .collect();

    let mut groups: BTreeMap<(std::cmp::Reverse<usize>, NodeId, u64), Vec<usize>> = BTreeMap::new();
    for (v, node) in g2.nodes.iter().enumerate() {
        if node.kind == CompressedKind::Copy {
            let o = &g2.origins[node.origin];
            let signature = node.bits & merged_mask[node.origin];
            groups
                .entry((std::cmp::Reverse(o.depth), o.id, signature))
                .or_default()
                .push(v);
        }
    }

    let mut rep: Vec<usize> = (0..g2.nodes.len()).collect();
    let mut f = omega.weights.clone();
    for members in groups.values() {
        let mut star = members[0];
        for &other in &members[1..] {
            let (keep, gone) = (star.min(other), star.max(other));
            f[keep] = &f[keep] + &f[gone];
            f[gone] = BigUint::default();
            rep[gone] = keep;
            star = keep;
        }
    }
    let resolve = |mut v: usize| {
        while rep[v] != v {
            v = rep[v];
        }
        v
    };

    let survivors: Vec<usize> = (0..g2.nodes.len()).filter(|&v| rep[v] == v).collect();
    let mut renumber = vec![usize::MAX; g2.nodes.len()];
    for (new, &old) in survivors.iter().enumerate() {
        renumber[old] = new;
    }
    let nodes: Vec<CompressedNode> = survivors
        .iter()
        .map(|&old| {
            let n = &g2.nodes[old];
            match n.kind {
                CompressedKind::Copy => CompressedNode {
                    kind: n.kind,
                    origin: n.origin,
                    bits: n.bits & merged_mask[n.origin],
                    kept: merged_mask[n.origin],
                },
                CompressedKind::Conductor => n.clone(),
            }
        })
        .collect();
    let mut edges: Vec<(usize, usize)> = g2
        .edge_list()
        .into_iter()
        .map(|(a, b)| (renumber[resolve(a)], renumber[resolve(b)]))
        .collect();
    edges.sort_unstable();
    edges.dedup();

    let weights = WeightAssignment {
        weights: survivors.iter().map(|&old| f[old].clone()).collect(),
        c: NP_ADMISSIBILITY,
    };
    let mut gs = CompressedDag {
        source: g2.source.clone(),
        tree: g2.tree.clone(),
        s,
        stage: Stage::Merged,
        origins: g2.origins.clone(),
        origin_index: g2.origin_index.clone(),
        members: g2.members.clone(),
        paths: g2.paths.clone(),
        anc: g2.anc.clone(),
        mask: merged_mask,
        lookup: HashMap::new(),
        conductor: g2.conductor.map(|t| renumber[t]),
        nodes,
        parents: Vec::new(),
        children: Vec::new(),
        topo: Vec::new(),
        weights: Some(weights.clone()),
    };
    for (v, node) in gs.nodes.iter().enumerate() {
        if node.kind == CompressedKind::Copy {
            gs.lookup.insert((node.origin, node.bits), v);
        }
    }
    gs.set_edges(edges);
    Ok((gs, weights))
}

/// `|V'| = sum over supervertices S of s * 2^(s * d_S)`.
pub fn gprime_size(t: &SeparatorTree) -> u128 {
    let s = t.uniform_size as u32;
    let layout = t.layout();
    (0..t.supervertices.len())
        .map(|sv| u128::from(s) << (s as usize * layout.depth_of(sv)).min(127))
        .sum()
}

fn low_bits(width: usize) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

impl CompressedDag {
    fn set_edges(&mut self, mut edges: Vec<(usize, usize)>) {
        edges.sort_unstable();
        edges.dedup();
        let n = self.nodes.len();
        self.parents = vec![Vec::new(); n];
        self.children = vec![Vec::new(); n];
        for (a, b) in edges {
            self.children[a].push(b);
            self.parents[b].push(a);
        }
        for p in &mut self.parents {
            p.sort_unstable();
        }
        self.topo = kahn(&self.parents, &self.children).expect("compressed graphs are acyclic");
    }

    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        self.children
            .iter()
            .enumerate()
            .flat_map(|(a, cs)| cs.iter().map(move |&b| (a, b)))
            .collect()
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn source(&self) -> &QueryDag {
        &self.source
    }

    pub fn tree(&self) -> &SeparatorTree {
        &self.tree
    }

    pub fn uniform_size(&self) -> usize {
        self.s
    }

    pub fn nodes(&self) -> &[CompressedNode] {
        &self.nodes
    }

    pub fn conductor(&self) -> Option<usize> {
        self.conductor
    }

    /// `f*` after merging.
    pub fn weights(&self) -> Option<&WeightAssignment> {
        self.weights.as_ref()
    }

    pub fn edge_count(&self) -> usize {
        self.children.iter().map(Vec::len).sum()
    }

    pub fn origin_of(&self, v: usize) -> NodeId {
        self.origins[self.nodes[v].origin].id
    }

    pub fn is_dummy_copy(&self, v: usize) -> bool {
        let n = &self.nodes[v];
        n.kind == CompressedKind::Copy && self.origins[n.origin].dag_index.is_none()
    }

    /// Conditioning strings `z_1..z_d`; merged coordinates are `None`.
    pub fn conditioning(&self, v: usize) -> Vec<Vec<Option<bool>>> {
        let n = &self.nodes[v];
        if n.kind == CompressedKind::Conductor {
            return Vec::new();
        }
        let d = self.origins[n.origin].depth;
        (0..d)
            .map(|level| {
                (0..self.s)
                    .map(|k| {
                        let c = level * self.s + k;
                        (n.kept >> c & 1 == 1).then_some(n.bits >> c & 1 == 1)
                    })
                    .collect()
            })
            .collect()
    }

    /// Surviving coordinates keyed by the node they condition on.
    pub fn merged_signature(&self, v: usize) -> BTreeMap<NodeId, bool> {
        let n = &self.nodes[v];
        let mut out = BTreeMap::new();
        if n.kind == CompressedKind::Conductor {
            return out;
        }
        let path = &self.paths[self.origins[n.origin].supervertex];
        for (level, &sv) in path.iter().enumerate() {
            for (k, &p) in self.members[sv].iter().enumerate() {
                let c = level * self.s + k;
                if n.kept >> c & 1 == 1 {
                    out.insert(self.origins[p].id, n.bits >> c & 1 == 1);
                }
            }
        }
        out
    }

    /// Human-readable name such as `v2^{1,*}`, or `t` for the conductor.
    pub fn label(&self, v: usize) -> String {
        let n = &self.nodes[v];
        if n.kind == CompressedKind::Conductor {
            return "t".into();
        }
        let mut out = format!("v{}^{{", self.origins[n.origin].id);
        for (j, z) in self.conditioning(v).iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            for b in z {
                out.push(match b {
                    Some(true) => '1',
                    Some(false) => '0',
                    None => '*',
                });
            }
        }
        out.push('}');
        out
    }

    /// Index of the copy of `origin` with the given packed conditioning.
    pub fn copy_index(&self, origin: NodeId, bits: u64) -> Option<usize> {
        let o = *self.origin_index.get(&origin)?;
        self.lookup.get(&(o, bits & self.mask[o])).copied()
    }

    /// Index of the copy of `origin` conditioned on `z_1..z_d`.
    pub fn copy_with(&self, origin: NodeId, conditioning: &[Vec<bool>]) -> Option<usize> {
        self.copy_index(origin, self.pack(conditioning))
    }

    fn pack(&self, conditioning: &[Vec<bool>]) -> u64 {
        let mut bits = 0;
        for (level, z) in conditioning.iter().enumerate() {
            assert_eq!(z.len(), self.s, "conditioning strings have s bits");
            for (k, &b) in z.iter().enumerate() {
                if b {
                    bits |= 1 << (level * self.s + k);
                }
            }
        }
        bits
    }

    /// Recursive answer stitching. `z` holds the guesses for the first `m`
    /// supervertices on the path of `u`; higher coordinates must be 0.
    /// Coordinates whose node fails `relevant` are skipped and stay 0.
    fn resolve(
        &self,
        u: usize,
        mut z: u64,
        m: usize,
        relevant: Option<&[bool]>,
        read: &mut dyn FnMut(usize, u64) -> Result<bool>,
    ) -> Result<bool> {
        let origin = &self.origins[u];
        let path = &self.paths[origin.supervertex];
        for (level, &sv) in path.iter().enumerate().skip(m) {
            for (k, &o) in self.members[sv].iter().enumerate() {
                if relevant.is_none_or(|r| r[o]) && read(o, z)? {
                    z |= 1 << (level * self.s + k);
                }
            }
        }
        Ok(z >> ((origin.depth - 1) * self.s + origin.position) & 1 == 1)
    }

    /// Answer of `u` given guesses `z_1..z_m`, reading compressed answers from
    /// `wires` (indexed by node). A wire that is needed but absent is an error.
    pub fn compute_output(&self, u: NodeId, conditioning: &[Vec<bool>], wires: &BTreeMap<usize, bool>) -> Result<bool> {
        let o = *self
            .origin_index
            .get(&u)
            .ok_or_else(|| Error::Validation(format!("node {u} is not in the separator tree")))?;
        let z = self.pack(conditioning);
        self.resolve(o, z, conditioning.len(), None, &mut |p, bits| self.read_wire(p, bits, |v| wires.get(&v).copied()))
    }

    fn read_wire(&self, origin: usize, bits: u64, get: impl Fn(usize) -> Option<bool>) -> Result<bool> {
        let key = (origin, bits & self.mask[origin]);
        let Some(&v) = self.lookup.get(&key) else {
            return Err(Error::MissingWire {
                node: format!("v{} with conditioning {:#b}", self.origins[origin].id, key.1),
            });
        };
        get(v).ok_or_else(|| Error::MissingWire { node: self.label(v) })
    }

    /// Reads an answer for the node `v` is deciding; only incoming edges may be read.
    fn read_parent(&self, v: usize, origin: usize, bits: u64, x: &[Option<bool>]) -> Result<bool> {
        self.read_wire(origin, bits, |w| {
            if self.parents[v].binary_search(&w).is_ok() {
                x[w]
            } else {
                None
            }
        })
    }

    /// The original graph's query string recovered from a correct query
    /// string of this graph.
    pub fn lift_bits(&self, xstar: &[bool]) -> Result<Vec<bool>> {
        assert_eq!(xstar.len(), self.nodes.len());
        (0..self.source.len())
            .map(|u| self.resolve(u, 0, 0, None, &mut |p, bits| self.read_wire(p, bits, |w| Some(xstar[w]))))
            .collect()
    }

    pub fn size_report(&self) -> CompressionSizes {
        CompressionSizes {
            nodes: self.nodes.len(),
            edges: self.edge_count(),
            max_descendants: weighting::descendant_counts(self).into_iter().max().unwrap_or(0),
        }
    }

    pub fn dump(&self) -> CompressedDump {
        let weights = self.weights.as_ref();
        CompressedDump {
            stage: match self.stage {
                Stage::Expanded => "expanded",
                Stage::WithConductor => "conductor",
                Stage::Merged => "merged",
            },
            uniform_size: self.s,
            nodes: (0..self.nodes.len())
                .map(|v| DumpNode {
                    index: v,
                    label: self.label(v),
                    kind: self.nodes[v].kind,
                    origin: (self.nodes[v].kind == CompressedKind::Copy).then(|| self.origin_of(v)),
                    conditioning: self
                        .conditioning(v)
                        .iter()
                        .map(|z| {
                            z.iter()
                                .map(|b| match b {
                                    Some(true) => '1',
                                    Some(false) => '0',
                                    None => '*',
                                })
                                .collect()
                        })
                        .collect(),
                    merged_signature: self.merged_signature(v),
                    weight: weights.map(|w| w.weights[v].to_string()),
                })
                .collect(),
            edges: self.edge_list(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CompressionSizes {
    pub nodes: usize,
    pub edges: usize,
    pub max_descendants: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct DumpNode {
    pub index: usize,
    pub label: String,
    pub kind: CompressedKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub origin: Option<NodeId>,
    pub conditioning: Vec<String>,
    pub merged_signature: BTreeMap<NodeId, bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompressedDump {
    pub stage: &'static str,
    pub uniform_size: usize,
    pub nodes: Vec<DumpNode>,
    pub edges: Vec<(usize, usize)>,
}

impl QueryInstance for CompressedDag {
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
        self.conductor.expect("only graphs with a conductor have a result node")
    }
    fn node_id(&self, i: usize) -> NodeId {
        NodeId(i as u32)
    }
    fn is_fixed(&self, i: usize) -> bool {
        self.is_dummy_copy(i)
    }

    fn decide(&self, v: usize, x: &[Option<bool>], oracle: &mut dyn ProofOracle) -> Result<bool> {
        let node = &self.nodes[v];
        match node.kind {
            CompressedKind::Conductor => {
                self.resolve(node.origin, 0, 0, None, &mut |p, bits| self.read_parent(v, p, bits, x))
            }
            CompressedKind::Copy => {
                let origin = &self.origins[node.origin];
                let Some(i) = origin.dag_index else {
                    return Ok(true);
                };
                let relevant = &self.anc[node.origin];
                let inputs = self
                    .source
                    .parents(i)
                    .iter()
                    .map(|&p| {
                        self.resolve(p, node.bits, origin.depth, Some(relevant), &mut |o, bits| {
                            self.read_parent(v, o, bits, x)
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                oracle.exists_proof(&self.source.nodes()[i], &inputs)
            }
        }
    }
}

/// All stages of the compression for one graph and tree.
#[derive(Debug, Clone)]
pub struct Compression {
    pub gprime_nodes: usize,
    pub gprime_edges: usize,
    pub g2: CompressedDag,
    pub gstar: CompressedDag,
    pub omega_total: BigUint,
}

pub fn compress(g: &QueryDag, t: &SeparatorTree) -> Result<Compression> {
    let gp = expand_to_gprime(g, t)?;
    let (gprime_nodes, gprime_edges) = (gp.nodes.len(), gp.edge_count());
    let g2 = add_conductor(gp);
    let omega_total = weighting::omega_weights(&g2, NP_ADMISSIBILITY).total();
    let (gstar, _) = merge(&g2)?;
    Ok(Compression {
        gprime_nodes,
        gprime_edges,
        g2,
        gstar,
        omega_total,
    })
}

/// Lifts a correct query string of `G*` (keyed by compressed index) to `G`.
pub fn lift_query_string(gstar: &CompressedDag, xstar: &QueryString) -> Result<QueryString> {
    let bits: Vec<bool> = (0..gstar.len())
        .map(|v| {
            xstar
                .get(&NodeId(v as u32))
                .copied()
                .ok_or_else(|| Error::MissingWire { node: gstar.label(v) })
        })
        .collect::<Result<_>>()?;
    let lifted = gstar.lift_bits(&bits)?;
    Ok(gstar
        .source
        .nodes()
        .iter()
        .zip(lifted)
        .map(|(n, b)| (n.id, b))
        .collect())
}

/// Renders a labelled list of the graph's nodes and edges.
pub fn describe(g: &CompressedDag) -> String {
    let mut out = String::new();
    for v in 0..g.len() {
        let _ = write!(out, "{}", g.label(v));
        if let Some(w) = g.weights() {
            let _ = write!(out, " f={}", w.weights[v]);
        }
        let ps: Vec<String> = g.parents[v].iter().map(|&p| g.label(p)).collect();
        if !ps.is_empty() && g.nodes[v].kind == CompressedKind::Copy {
            let _ = write!(out, " <- {}", ps.join(" "));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::SatOracle;
    use crate::querygraph::fixtures::*;
    use crate::querygraph::{evaluate_bits, is_correct_bits};
    use crate::separator::build_separator_tree;

    fn chain2_stages() -> (QueryDag, CompressedDag, CompressedDag) {
        let g = chain2();
        let t = build_separator_tree(&g);
        let gp = expand_to_gprime(&g, &t).unwrap();
        let g2 = add_conductor(gp);
        let (gs, _) = merge(&g2).unwrap();
        (g, g2, gs)
    }

    #[test]
    fn chain2_expansion() {
        let g = chain2();
        let t = build_separator_tree(&g);
        let gp = expand_to_gprime(&g, &t).unwrap();
        assert_eq!(gp.len(), 6);
        assert_eq!(gp.edge_count(), 0);
        assert_eq!(gprime_size(&t), 6);
        let labels: Vec<String> = (0..gp.len()).map(|v| gp.label(v)).collect();
        assert_eq!(labels, ["v1^{0}", "v1^{1}", "v2^{0,0}", "v2^{1,0}", "v2^{0,1}", "v2^{1,1}"]);
        let g2 = add_conductor(gp);
        assert_eq!(g2.len(), 7);
        assert_eq!(g2.edge_count(), 6);
    }

    #[test]
    fn single_node_expansion() {
        let g = single(vec![], 0);
        let t = build_separator_tree(&g);
        let g2 = add_conductor(expand_to_gprime(&g, &t).unwrap());
        assert_eq!(g2.len(), 3);
        assert_eq!(g2.edge_count(), 2);
    }

    #[test]
    fn chain2_merge() {
        let (_, g2, gs) = chain2_stages();
        let labels: Vec<String> = (0..gs.len()).map(|v| gs.label(v)).collect();
        assert_eq!(labels, ["v1^{*}", "v2^{0,*}", "v2^{1,*}", "t"]);
        let w = gs.weights().unwrap();
        let ints: Vec<u32> = w.weights.iter().map(|x| u32::try_from(x).unwrap()).collect();
        assert_eq!(ints, [6, 6, 6, 1]);
        assert_eq!(w.total(), BigUint::from(19u32));
        assert_eq!(weighting::omega_weights(&g2, 2).total(), BigUint::from(19u32));
        assert!(weighting::check_admissible(&gs, w).is_ok());
        assert_eq!(gs.merged_signature(2), BTreeMap::from([(NodeId(1), true)]));
    }

    #[test]
    fn compute_output_trace() {
        let (_, g2, _) = chain2_stages();
        let idx = |label: &str| (0..g2.len()).find(|&v| g2.label(v) == label).unwrap();
        let mut wires = BTreeMap::new();
        wires.insert(idx("v1^{0}"), true);
        wires.insert(idx("v2^{1,0}"), true);
        assert!(g2.compute_output(NodeId(2), &[], &wires).unwrap());

        // root node with its guess already fixed: no wire is read
        assert!(g2.compute_output(NodeId(1), &[vec![true]], &BTreeMap::new()).unwrap());

        wires.remove(&idx("v2^{1,0}"));
        let err = g2.compute_output(NodeId(2), &[], &wires).unwrap_err();
        assert!(err.to_string().contains("v2^{1,0}"), "{err}");
    }

    #[test]
    fn lifts_chain2_string() {
        let (g, _, gs) = chain2_stages();
        let xstar: QueryString = [(0, true), (1, false), (2, true), (3, true)]
            .into_iter()
            .map(|(v, b)| (NodeId(v), b))
            .collect();
        let x = lift_query_string(&gs, &xstar).unwrap();
        assert_eq!(x, QueryString::from([(NodeId(1), true), (NodeId(2), true)]));
        assert!(crate::querygraph::is_correct_query_string(&g, &x, &mut SatOracle::new()).unwrap());
    }

    #[test]
    fn compressed_evaluation_matches_direct() {
        let mut o = SatOracle::new();
        for g in [chain2(), star(3), single(vec![vec![1], vec![-1]], 1)] {
            let direct = evaluate_bits(&g, &mut o).unwrap()[g.output_index()];
            let t = build_separator_tree(&g);
            let c = compress(&g, &t).unwrap();
            for h in [&c.g2, &c.gstar] {
                let bits = evaluate_bits(h, &mut o).unwrap();
                assert_eq!(bits[h.result_index()], direct);
                assert!(is_correct_bits(h, &bits, &mut o).unwrap());
                let lifted = h.lift_bits(&bits).unwrap();
                assert!(is_correct_bits(&g, &lifted, &mut o).unwrap());
            }
        }
    }

    #[test]
    fn merge_preserves_weight_on_star() {
        let g = star(3);
        let t = build_separator_tree(&g);
        let c = compress(&g, &t).unwrap();
        assert_eq!(c.gstar.weights().unwrap().total(), c.omega_total);
        assert!(weighting::check_admissible(&c.gstar, c.gstar.weights().unwrap()).is_ok());
    }
}
