//! Balanced separators and separator trees on the undirected skeleton of a
//! query graph.
//!
//! A vertex set `S` of a graph on `V` is a balanced separator when every
//! connected component left after deleting `S` has at most
//! `ceil((|V| - |S|) / 2)` vertices. A separator tree places a balanced
//! separator of the whole graph at the root and recursively decomposes each
//! remaining component below it, one child per component.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::querygraph::{NodeId, QueryDag};
use crate::{Error, Result};

/// Adjacency lists over vertex indices, sorted and duplicate free.
#[derive(Debug, Clone)]
pub struct UndirectedGraph {
    adj: Vec<Vec<usize>>,
}

impl UndirectedGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (a, b) in edges {
            if a != b {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        UndirectedGraph { adj }
    }

    /// Skeleton of a query graph, over its node indices.
    pub fn skeleton(g: &QueryDag) -> Self {
        let edges = (0..g.len()).flat_map(|i| g.parents(i).iter().map(move |&p| (p, i)));
        Self::new(g.len(), edges)
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    /// Connected components of the subgraph induced by `active`, each sorted,
    /// ordered by smallest vertex.
    pub fn components(&self, active: &[bool]) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for start in 0..self.len() {
            if !active[start] || seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut next = 0;
            while next < comp.len() {
                let u = comp[next];
                next += 1;
                for &w in &self.adj[u] {
                    if active[w] && !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Separator {
    pub members: Vec<usize>,
    pub components: Vec<Vec<usize>>,
}

/// Components left after removing `members` from `vertices`, if all of them
/// respect the balance bound.
fn balanced_split(graph: &UndirectedGraph, vertices: &[usize], members: &[usize]) -> Option<Vec<Vec<usize>>> {
    let mut active = vec![false; graph.len()];
    for &v in vertices {
        active[v] = true;
    }
    for &m in members {
        active[m] = false;
    }
    let rest = vertices.len() - members.len();
    let bound = rest.div_ceil(2);
    let comps = graph.components(&active);
    comps.iter().all(|c| c.len() <= bound).then_some(comps)
}

/// Calls `f` on every `k`-subset of `items` in lexicographic order until it
/// returns `Some`.
fn first_subset<T>(items: &[usize], k: usize, mut f: impl FnMut(&[usize]) -> Option<T>) -> Option<T> {
    let n = items.len();
    if k > n {
        return None;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut chosen = vec![0; k];
    loop {
        for (slot, &i) in chosen.iter_mut().zip(&idx) {
            *slot = items[i];
        }
        if let Some(t) = f(&chosen) {
            return Some(t);
        }
        // advance to the next combination
        let pos = (0..k).rev().find(|&p| idx[p] != p + n - k)?;
        idx[pos] += 1;
        for p in pos + 1..k {
            idx[p] = idx[p - 1] + 1;
        }
    }
}

/// First balanced separator of size at most `max_size`: sizes ascending,
/// then lexicographic over sorted vertex indices. `vertices` must be sorted.
pub fn find_balanced_separator(graph: &UndirectedGraph, vertices: &[usize], max_size: usize) -> Option<Separator> {
    (1..=max_size.min(vertices.len())).find_map(|k| {
        first_subset(vertices, k, |members| {
            balanced_split(graph, vertices, members).map(|components| Separator {
                members: members.to_vec(),
                components,
            })
        })
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Supervertex {
    pub id: usize,
    pub members: Vec<NodeId>,
    pub parent: Option<usize>,
}

/// Supervertex ids are assigned in preorder, root 0, children ordered by
/// their smallest vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparatorTree {
    pub uniform_size: usize,
    pub supervertices: Vec<Supervertex>,
    pub dummies: Vec<NodeId>,
}

/// Where a node sits in a separator tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub supervertex: usize,
    pub position: usize,
}

/// Derived navigation data for a separator tree.
#[derive(Debug, Clone)]
pub struct TreeLayout {
    /// Supervertex ids from the root down to each supervertex, inclusive.
    pub paths: Vec<Vec<usize>>,
    pub children: Vec<Vec<usize>>,
    pub slots: HashMap<NodeId, Slot>,
}

impl TreeLayout {
    pub fn depth_of(&self, sv: usize) -> usize {
        self.paths[sv].len()
    }

    pub fn max_depth(&self) -> usize {
        self.paths.iter().map(Vec::len).max().unwrap_or(0)
    }
}

impl SeparatorTree {
    pub fn root(&self) -> Option<usize> {
        self.supervertices.iter().find(|s| s.parent.is_none()).map(|s| s.id)
    }

    /// Depth counting the root as 1.
    pub fn depth(&self) -> usize {
        self.layout().max_depth()
    }

    pub fn is_dummy(&self, id: NodeId) -> bool {
        self.dummies.binary_search(&id).is_ok()
    }

    /// Requires supervertex ids `0..k` with parents listed before children,
    /// which both builders guarantee.
    pub fn layout(&self) -> TreeLayout {
        let k = self.supervertices.len();
        let mut paths: Vec<Vec<usize>> = vec![Vec::new(); k];
        let mut children = vec![Vec::new(); k];
        let mut slots = HashMap::new();
        for sv in &self.supervertices {
            let mut path = match sv.parent {
                Some(p) => {
                    children[p].push(sv.id);
                    paths[p].clone()
                }
                None => Vec::new(),
            };
            path.push(sv.id);
            paths[sv.id] = path;
            for (position, &m) in sv.members.iter().enumerate() {
                slots.insert(m, Slot { supervertex: sv.id, position });
            }
        }
        TreeLayout { paths, children, slots }
    }

    pub fn to_document(&self) -> String {
        serde_json::to_string(self).expect("trees always serialize")
    }

    pub fn from_document(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Unpadded tree over vertex indices, in preorder.
struct RawTree {
    nodes: Vec<(Vec<usize>, Option<usize>)>,
}

impl RawTree {
    fn append(&mut self, sub: RawTree, parent: usize) {
        let offset = self.nodes.len();
        for (members, p) in sub.nodes {
            self.nodes.push((members, Some(p.map_or(parent, |p| p + offset))));
        }
    }

    fn into_tree(self, g: &QueryDag, pad_to: usize) -> SeparatorTree {
        let mut topo_pos = vec![0; g.len()];
        for (pos, &i) in g.topo_indices().iter().enumerate() {
            topo_pos[i] = pos;
        }
        let uniform_size = self.nodes.iter().map(|(m, _)| m.len()).max().unwrap_or(0).max(pad_to);
        let mut next_dummy = g.max_id().0 + 1;
        let mut dummies = Vec::new();
        let supervertices = self
            .nodes
            .into_iter()
            .enumerate()
            .map(|(id, (mut members, parent))| {
                members.sort_by_key(|&i| topo_pos[i]);
                let mut ids: Vec<NodeId> = members.iter().map(|&i| g.nodes()[i].id).collect();
                while ids.len() < uniform_size {
                    ids.push(NodeId(next_dummy));
                    dummies.push(NodeId(next_dummy));
                    next_dummy += 1;
                }
                Supervertex { id, members: ids, parent }
            })
            .collect();
        SeparatorTree {
            uniform_size,
            supervertices,
            dummies,
        }
    }
}

fn build_raw(graph: &UndirectedGraph, vertices: &[usize], max_size: usize) -> Option<RawTree> {
    let sep = find_balanced_separator(graph, vertices, max_size)?;
    let mut tree = RawTree {
        nodes: vec![(sep.members, None)],
    };
    for comp in &sep.components {
        let sub = build_raw(graph, comp, max_size)?;
        tree.append(sub, 0);
    }
    Some(tree)
}

/// Balanced separator tree using the smallest balanced separator at every
/// step, padded to the largest separator size found.
pub fn build_separator_tree(g: &QueryDag) -> SeparatorTree {
    build_separator_tree_bounded(g, g.len()).expect("the whole vertex set always separates")
}

/// As [`build_separator_tree`], but gives up when some subgraph has no
/// balanced separator of size at most `max_size`.
pub fn build_separator_tree_bounded(g: &QueryDag, max_size: usize) -> Option<SeparatorTree> {
    let graph = UndirectedGraph::skeleton(g);
    let all: Vec<usize> = (0..g.len()).collect();
    build_raw(&graph, &all, max_size).map(|raw| raw.into_tree(g, 0))
}

struct DepthSearch<'a> {
    graph: &'a UndirectedGraph,
    size_bound: usize,
    failed: HashSet<(Vec<usize>, usize)>,
}

impl DepthSearch<'_> {
    fn solve(&mut self, vertices: &[usize], depth_left: usize) -> Option<RawTree> {
        if depth_left == 0 || self.failed.contains(&(vertices.to_vec(), depth_left)) {
            return None;
        }
        let mut found = None;
        'sizes: for k in 1..=self.size_bound.min(vertices.len()) {
            let candidates: Vec<Separator> = {
                let mut all = Vec::new();
                first_subset(vertices, k, |members| {
                    if let Some(components) = balanced_split(self.graph, vertices, members) {
                        all.push(Separator {
                            members: members.to_vec(),
                            components,
                        });
                    }
                    None::<()>
                });
                all
            };
            for sep in candidates {
                if !sep.components.is_empty() && depth_left == 1 {
                    continue;
                }
                let mut tree = RawTree {
                    nodes: vec![(sep.members.clone(), None)],
                };
                let mut ok = true;
                for comp in &sep.components {
                    match self.solve(comp, depth_left - 1) {
                        Some(sub) => tree.append(sub, 0),
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    found = Some(tree);
                    break 'sizes;
                }
            }
        }
        if found.is_none() {
            self.failed.insert((vertices.to_vec(), depth_left));
        }
        found
    }
}

/// Backtracking search for a separator tree of depth at most `depth_bound`
/// whose supervertices hold at most `size_bound` real nodes, padded to
/// exactly `size_bound`. Every separator is balanced.
pub fn build_depth_bounded_tree(g: &QueryDag, depth_bound: usize, size_bound: usize) -> Option<SeparatorTree> {
    assert!(depth_bound >= 1 && size_bound >= 1);
    let graph = UndirectedGraph::skeleton(g);
    let all: Vec<usize> = (0..g.len()).collect();
    let mut search = DepthSearch {
        graph: &graph,
        size_bound,
        failed: HashSet::new(),
    };
    search.solve(&all, depth_bound).map(|raw| raw.into_tree(g, size_bound))
}

pub fn verify_separator_tree(g: &QueryDag, t: &SeparatorTree) -> bool {
    check_separator_tree(g, t).is_ok()
}

/// Checks every separator-tree invariant, reporting the first failure.
pub fn check_separator_tree(g: &QueryDag, t: &SeparatorTree) -> Result<()> {
    let fail = |msg: String| Err(Error::InvalidTree(msg));
    let k = t.supervertices.len();
    if k == 0 {
        return fail("no supervertices".into());
    }
    for (i, sv) in t.supervertices.iter().enumerate() {
        if sv.id != i {
            return fail(format!("supervertex at position {i} has id {}", sv.id));
        }
        if let Some(p) = sv.parent {
            if p >= i {
                return fail(format!("supervertex {i} lists parent {p} that does not precede it"));
            }
        }
        if sv.members.len() != t.uniform_size {
            return fail(format!("supervertex {i} has {} members, expected {}", sv.members.len(), t.uniform_size));
        }
    }
    if t.supervertices.iter().filter(|s| s.parent.is_none()).count() != 1 {
        return fail("expected exactly one root".into());
    }

    let mut dummies = t.dummies.clone();
    dummies.sort_unstable();
    if dummies.windows(2).any(|w| w[0] == w[1]) {
        return fail("duplicate dummy id".into());
    }
    if let Some(d) = dummies.iter().find(|d| g.index_of(**d).is_some()) {
        return fail(format!("dummy {d} collides with a real node"));
    }
    let mut owner: BTreeMap<NodeId, usize> = BTreeMap::new();
    for sv in &t.supervertices {
        for &m in &sv.members {
            if g.index_of(m).is_none() && dummies.binary_search(&m).is_err() {
                return fail(format!("member {m} is neither a node nor a dummy"));
            }
            if owner.insert(m, sv.id).is_some() {
                return fail(format!("node {m} appears twice"));
            }
        }
    }
    if owner.len() != g.len() + dummies.len() {
        return fail("members do not cover every node and dummy".into());
    }

    let mut topo_pos = vec![0; g.len()];
    for (pos, &i) in g.topo_indices().iter().enumerate() {
        topo_pos[i] = pos;
    }
    let layout = t.layout();
    let real: Vec<Vec<usize>> = t
        .supervertices
        .iter()
        .map(|sv| sv.members.iter().filter_map(|&m| g.index_of(m)).collect())
        .collect();
    for (i, r) in real.iter().enumerate() {
        if r.is_empty() {
            return fail(format!("supervertex {i} has no real member"));
        }
        if r.windows(2).any(|w| topo_pos[w[0]] > topo_pos[w[1]]) {
            return fail(format!("supervertex {i} members are not in topological order"));
        }
    }

    // real vertex set of every subtree, children before parents
    let mut subtree: Vec<Vec<usize>> = real.clone();
    for i in (0..k).rev() {
        for &c in &layout.children[i] {
            let below = subtree[c].clone();
            subtree[i].extend(below);
        }
        subtree[i].sort_unstable();
    }
    let graph = UndirectedGraph::skeleton(g);
    for i in 0..k {
        let mut sep = real[i].clone();
        sep.sort_unstable();
        let Some(components) = balanced_split(&graph, &subtree[i], &sep) else {
            return fail(format!("supervertex {i} is not a balanced separator of its subtree"));
        };
        let mut child_sets: Vec<Vec<usize>> = layout.children[i].iter().map(|&c| subtree[c].clone()).collect();
        child_sets.sort();
        let mut comps = components;
        comps.sort();
        if child_sets != comps {
            return fail(format!("children of supervertex {i} do not match the components it leaves"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::querygraph::fixtures::*;
    use crate::querygraph::QueryNode;

    fn path(n: u32) -> QueryDag {
        let nodes = (1..=n)
            .map(|i| QueryNode::verifier(i, &(1..i).rev().take(1).collect::<Vec<_>>(), 0, vec![]))
            .collect();
        QueryDag::new(nodes, NodeId(n)).unwrap()
    }

    fn ids(g: &QueryDag, members: &[usize]) -> Vec<u32> {
        members.iter().map(|&i| g.nodes()[i].id.0).collect()
    }

    #[test]
    fn separator_examples() {
        let g = star(3);
        let sk = UndirectedGraph::skeleton(&g);
        let sep = find_balanced_separator(&sk, &[0, 1, 2, 3], 1).unwrap();
        assert_eq!(ids(&g, &sep.members), vec![4]);
        assert_eq!(sep.components.len(), 3);

        let g = single(vec![], 0);
        let sep = find_balanced_separator(&UndirectedGraph::skeleton(&g), &[0], 1).unwrap();
        assert_eq!(sep.members, vec![0]);

        let g = path(3);
        let sep = find_balanced_separator(&UndirectedGraph::skeleton(&g), &[0, 1, 2], 1).unwrap();
        assert_eq!(ids(&g, &sep.members), vec![2]);
    }

    #[test]
    fn no_separator_within_bound() {
        // K4 needs three vertices removed
        let nodes = vec![
            QueryNode::verifier(1, &[], 0, vec![]),
            QueryNode::verifier(2, &[1], 0, vec![]),
            QueryNode::verifier(3, &[1, 2], 0, vec![]),
            QueryNode::verifier(4, &[1, 2, 3], 0, vec![]),
        ];
        let g = QueryDag::new(nodes, NodeId(4)).unwrap();
        let sk = UndirectedGraph::skeleton(&g);
        assert!(find_balanced_separator(&sk, &[0, 1, 2, 3], 2).is_none());
        assert_eq!(find_balanced_separator(&sk, &[0, 1, 2, 3], 3).unwrap().members, vec![0, 1, 2]);
    }

    #[test]
    fn chain2_tree() {
        let g = chain2();
        let t = build_separator_tree(&g);
        assert_eq!(t.uniform_size, 1);
        assert_eq!(t.supervertices[0].members, vec![NodeId(1)]);
        assert_eq!(t.supervertices[1].members, vec![NodeId(2)]);
        assert_eq!(t.supervertices[1].parent, Some(0));
        assert_eq!(t.depth(), 2);
        assert!(verify_separator_tree(&g, &t));
        assert_eq!(build_depth_bounded_tree(&g, 2, 1), Some(t));
    }

    #[test]
    fn single_node_tree() {
        let g = single(vec![], 0);
        let t = build_separator_tree(&g);
        assert_eq!(t.supervertices.len(), 1);
        assert_eq!(t.depth(), 1);
        assert!(t.dummies.is_empty());
    }

    #[test]
    fn depth_bounded_examples() {
        let g = star(3);
        let t = build_depth_bounded_tree(&g, 2, 1).unwrap();
        assert_eq!(t.supervertices[0].members, vec![NodeId(4)]);
        assert_eq!(t.supervertices.len(), 4);
        assert!(verify_separator_tree(&g, &t));
        assert!(build_depth_bounded_tree(&path(4), 1, 1).is_none());
    }

    #[test]
    fn depth_bounded_pads_to_size_bound() {
        let g = path(3);
        let t = build_depth_bounded_tree(&g, 2, 2).unwrap();
        assert_eq!(t.uniform_size, 2);
        assert!(verify_separator_tree(&g, &t));
        assert!(t.dummies.iter().all(|d| d.0 > 3));
    }

    #[test]
    fn verification_examples() {
        let g = chain2();
        let whole = SeparatorTree {
            uniform_size: 2,
            supervertices: vec![Supervertex { id: 0, members: vec![NodeId(1), NodeId(2)], parent: None }],
            dummies: vec![],
        };
        assert!(verify_separator_tree(&g, &whole));

        let g = path(3);
        let misplaced = SeparatorTree {
            uniform_size: 2,
            supervertices: vec![
                Supervertex { id: 0, members: vec![NodeId(2), NodeId(4)], parent: None },
                Supervertex { id: 1, members: vec![NodeId(1), NodeId(3)], parent: Some(0) },
            ],
            dummies: vec![NodeId(4)],
        };
        assert!(!verify_separator_tree(&g, &misplaced));
    }

    #[test]
    fn rejects_out_of_order_members() {
        let g = chain2();
        let t = SeparatorTree {
            uniform_size: 2,
            supervertices: vec![Supervertex { id: 0, members: vec![NodeId(2), NodeId(1)], parent: None }],
            dummies: vec![],
        };
        assert!(!verify_separator_tree(&g, &t));
    }

    #[test]
    fn balanced_depth_is_logarithmic() {
        for n in 1..=16 {
            let g = path(n);
            let t = build_separator_tree(&g);
            assert!(verify_separator_tree(&g, &t));
            let bound = (n as f64).log2().ceil() as usize + 1;
            assert!(t.depth() <= bound, "n={n} depth={}", t.depth());
        }
    }

    #[test]
    fn document_round_trip() {
        let t = build_separator_tree(&star(3));
        let doc = t.to_document();
        assert!(doc.starts_with("{\"uniform_size\":1,\"supervertices\":[{\"id\":0,\"members\":[4],\"parent\":null}"));
        assert_eq!(SeparatorTree::from_document(&doc).unwrap(), t);
    }
}
