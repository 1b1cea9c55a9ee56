//! Finite weighted networks.
//!
//! Vertices are dense indices `0..n`. Conductances are symmetric; a self-loop
//! at `v` is stored as `c_vv` and contributes once to `c_v`. Under the unit
//! convention every ordinary edge has conductance 1 and every self-loop 2, so
//! that `c_v` equals the degree of `v`.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fmt::g17;

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    root: usize,
    /// Sorted by neighbor index; includes the self-loop entry when present.
    adjacency: Vec<Vec<(usize, f64)>>,
    totals: Vec<f64>,
    edge_count: usize,
}

/// A permutation of the vertices, starting at the root, in which every vertex
/// after the first is adjacent to some earlier one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexOrdering {
    pub order: Vec<usize>,
}

/// Parent pointers of a tree oriented toward the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeShape {
    pub root: usize,
    pub parent: Vec<Option<usize>>,
    /// Breadth-first order from the root; parents precede children.
    pub bfs_order: Vec<usize>,
    pub children: Vec<Vec<usize>>,
}

impl TreeShape {
    pub fn depth(&self, v: usize) -> usize {
        let mut d = 0;
        let mut cur = v;
        while let Some(p) = self.parent[cur] {
            d += 1;
            cur = p;
        }
        d
    }

    /// Diameter in edges (two breadth-first sweeps).
    pub fn diameter(&self) -> usize {
        let n = self.parent.len();
        let mut adj = vec![Vec::new(); n];
        for (v, p) in self.parent.iter().enumerate() {
            if let Some(p) = *p {
                adj[v].push(p);
                adj[p].push(v);
            }
        }
        let sweep = |src: usize| {
            let mut dist = vec![usize::MAX; n];
            dist[src] = 0;
            let mut q = VecDeque::from([src]);
            while let Some(u) = q.pop_front() {
                for &w in &adj[u] {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        q.push_back(w);
                    }
                }
            }
            dist.iter()
                .enumerate()
                .max_by_key(|&(i, &d)| (d, std::cmp::Reverse(i)))
                .map(|(i, &d)| (i, d))
                .unwrap()
        };
        let (far, _) = sweep(self.root);
        sweep(far).1
    }
}

impl Network {
    /// Builds a network from `(u, v, c)` triples. Repeated pairs add.
    pub fn from_edges<I>(vertex_count: usize, edges: I, root: usize) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        if vertex_count == 0 {
            return Err(Error::EmptyNetwork);
        }
        let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (i, (u, v, c)) in edges.into_iter().enumerate() {
            for w in [u, v] {
                if w >= vertex_count {
                    return Err(Error::VertexOutOfRange { vertex: w, vertex_count });
                }
            }
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::NonPositiveConductance { line: i + 1, value: c });
            }
            *acc.entry((u.min(v), u.max(v))).or_insert(0.0) += c;
        }
        Self::from_pair_map(vertex_count, &acc, root)
    }

    /// Unit-conductance network of a simple graph (self-loops get 2).
    pub fn unit<I>(vertex_count: usize, edges: I, root: usize) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::from_edges(
            vertex_count,
            edges
                .into_iter()
                .map(|(u, v)| (u, v, if u == v { 2.0 } else { 1.0 })),
            root,
        )
    }

    fn from_pair_map(n: usize, pairs: &BTreeMap<(usize, usize), f64>, root: usize) -> Result<Self> {
        if root >= n {
            return Err(Error::VertexOutOfRange { vertex: root, vertex_count: n });
        }
        let mut adjacency = vec![Vec::new(); n];
        for (&(u, v), &c) in pairs {
            adjacency[u].push((v, c));
            if u != v {
                adjacency[v].push((u, c));
            }
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(w, _)| w);
        }
        let totals: Vec<f64> = adjacency.iter().map(|l| l.iter().map(|&(_, c)| c).sum()).collect();
        let net = Network {
            root,
            adjacency,
            totals,
            edge_count: pairs.len(),
        };
        let components = net.component_count();
        if components > 1 {
            return Err(Error::Disconnected { components });
        }
        if let Some(v) = net.totals.iter().position(|&c| c <= 0.0) {
            // only reachable for an isolated vertex in a 1-vertex network
            return Err(Error::InvalidArgument(format!("vertex {v} has zero total conductance")));
        }
        Ok(net)
    }

    fn component_count(&self) -> usize {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut components = 0;
        for s in 0..n {
            if seen[s] {
                continue;
            }
            components += 1;
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &(w, _) in &self.adjacency[u] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        components
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    /// `|E|`, a self-loop counting as one edge.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn with_root(&self, root: usize) -> Result<Self> {
        if root >= self.vertex_count() {
            return Err(Error::VertexOutOfRange {
                vertex: root,
                vertex_count: self.vertex_count(),
            });
        }
        Ok(Network { root, ..self.clone() })
    }

    pub fn conductance(&self, u: usize, v: usize) -> f64 {
        let list = &self.adjacency[u];
        match list.binary_search_by_key(&v, |&(w, _)| w) {
            Ok(i) => list[i].1,
            Err(_) => 0.0,
        }
    }

    /// `c_v = Σ_u c_uv`.
    pub fn total_conductance(&self, v: usize) -> f64 {
        self.totals[v]
    }

    pub fn self_loop(&self, v: usize) -> f64 {
        self.conductance(v, v)
    }

    /// `č_v = c_v − c_vv`, the rate at which the walk actually leaves `v`.
    pub fn escape_conductance(&self, v: usize) -> f64 {
        self.totals[v] - self.self_loop(v)
    }

    /// `Σ_v c_v`; equals `2|E|` under the unit convention.
    pub fn conductance_sum(&self) -> f64 {
        self.totals.iter().sum()
    }

    /// Neighbors `u ≠ v` with their conductances, ascending.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.adjacency[v].iter().copied().filter(move |&(u, _)| u != v)
    }

    /// Number of distinct neighbors, self-loop excluded.
    pub fn degree(&self, v: usize) -> usize {
        self.neighbors(v).count()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.vertex_count()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Edges as `(u, v, c)` with `u <= v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for (u, list) in self.adjacency.iter().enumerate() {
            for &(v, c) in list {
                if u <= v {
                    out.push((u, v, c));
                }
            }
        }
        out
    }

    pub fn has_self_loops(&self) -> bool {
        (0..self.vertex_count()).any(|v| self.self_loop(v) > 0.0)
    }

    /// True when every ordinary edge has conductance 1 and every loop 2.
    pub fn is_unit(&self) -> bool {
        self.edges()
            .iter()
            .all(|&(u, v, c)| c == if u == v { 2.0 } else { 1.0 })
    }

    /// Writes sorted `u v c` lines with 17 significant digits.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        for (u, v, c) in self.edges() {
            let _ = writeln!(s, "{u} {v} {}", g17(c));
        }
        s
    }

    /// Breadth-first ordering from the root, ties broken by ascending index.
    pub fn connected_ordering(&self) -> VertexOrdering {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::from([self.root]);
        seen[self.root] = true;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for (w, _) in self.neighbors(u) {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        VertexOrdering { order }
    }

    /// `Some(shape)` iff the network is a tree: `|E| = |V| − 1` and no loops.
    pub fn tree_shape(&self) -> Option<TreeShape> {
        let n = self.vertex_count();
        if self.edge_count + 1 != n || self.has_self_loops() {
            return None;
        }
        let bfs_order = self.connected_ordering().order;
        let mut parent = vec![None; n];
        let mut seen = vec![false; n];
        seen[self.root] = true;
        let mut children = vec![Vec::new(); n];
        for &u in &bfs_order {
            for (w, _) in self.neighbors(u) {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(u);
                    children[u].push(w);
                }
            }
        }
        Some(TreeShape {
            root: self.root,
            parent,
            bfs_order,
            children,
        })
    }

    pub fn is_tree(&self) -> bool {
        self.tree_shape().is_some()
    }

    pub(crate) fn require_unit_tree(&self) -> Result<TreeShape> {
        let shape = self
            .tree_shape()
            .ok_or_else(|| Error::NotATree(format!("|V| = {}, |E| = {}", self.vertex_count(), self.edge_count)))?;
        if !self.is_unit() {
            return Err(Error::NotUnitConductance);
        }
        Ok(shape)
    }

    pub(crate) fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.vertex_count() {
            Err(Error::VertexOutOfRange {
                vertex: v,
                vertex_count: self.vertex_count(),
            })
        } else {
            Ok(())
        }
    }
}

impl VertexOrdering {
    /// Checks the adjacency invariant against `net`.
    pub fn is_valid_for(&self, net: &Network) -> bool {
        let n = net.vertex_count();
        if self.order.len() != n || self.order.first() != Some(&net.root()) {
            return false;
        }
        let mut seen = vec![false; n];
        for (k, &v) in self.order.iter().enumerate() {
            if v >= n || seen[v] {
                return false;
            }
            if k > 0 && !net.neighbors(v).any(|(u, _)| seen[u]) {
                return false;
            }
            seen[v] = true;
        }
        true
    }
}

/// Parses a whitespace-separated `u v c` edge list. `#` starts a comment.
/// The vertex count is one more than the largest index mentioned.
pub fn load_network(text: &str, root: usize) -> Result<Network> {
    let mut triples = Vec::new();
    let mut max_vertex = None::<usize>;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected `u v c`, found {} fields", fields.len()),
            });
        }
        let vertex = |s: &str| {
            s.parse::<usize>().map_err(|e| Error::Parse {
                line: line_no,
                message: format!("bad vertex `{s}`: {e}"),
            })
        };
        let u = vertex(fields[0])?;
        let v = vertex(fields[1])?;
        let c: f64 = fields[2].parse().map_err(|e| Error::Parse {
            line: line_no,
            message: format!("bad conductance `{}`: {e}", fields[2]),
        })?;
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::NonPositiveConductance { line: line_no, value: c });
        }
        max_vertex = Some(max_vertex.map_or(u.max(v), |m| m.max(u).max(v)));
        triples.push((u, v, c));
    }
    let n = max_vertex.map(|m| m + 1).ok_or(Error::EmptyNetwork)?;
    if root >= n {
        return Err(Error::VertexOutOfRange { vertex: root, vertex_count: n });
    }
    Network::from_edges(n, triples, root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_edge() {
        let net = load_network("0 1 1.0", 0).unwrap();
        assert_eq!(net.vertex_count(), 2);
        assert_eq!(net.edge_count(), 1);
        assert_eq!(net.total_conductance(0), 1.0);
        assert_eq!(net.total_conductance(1), 1.0);
    }

    #[test]
    fn self_loop_contributes_once() {
        let net = load_network("0 0 2.0\n0 1 1.0", 0).unwrap();
        assert_eq!(net.self_loop(0), 2.0);
        assert_eq!(net.total_conductance(0), 3.0);
        assert_eq!(net.escape_conductance(0), 1.0);
        assert_eq!(net.edge_count(), 2);
        assert_eq!(net.degree(0), 1);
    }

    #[test]
    fn duplicate_lines_sum() {
        let net = load_network("0 1 1\n1 0 0.5 # again\n", 0).unwrap();
        assert_eq!(net.conductance(0, 1), 1.5);
        assert_eq!(net.edge_count(), 1);
    }

    #[test]
    fn load_errors_are_distinct() {
        assert!(matches!(load_network("0 1 1.0\n2 3 1.0", 0), Err(Error::Disconnected { components: 2 })));
        assert!(matches!(load_network("0 1 x", 0), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(load_network("0 1", 0), Err(Error::Parse { .. })));
        assert!(matches!(load_network("0 1 -1", 0), Err(Error::NonPositiveConductance { .. })));
        assert!(matches!(load_network("0 1 0", 0), Err(Error::NonPositiveConductance { .. })));
        assert!(matches!(load_network("0 1 1", 5), Err(Error::VertexOutOfRange { vertex: 5, .. })));
        assert!(matches!(load_network("# nothing", 0), Err(Error::EmptyNetwork)));
    }

    #[test]
    fn orderings() {
        let path = Network::unit(3, [(0, 1), (1, 2)], 0).unwrap();
        assert_eq!(path.connected_ordering().order, vec![0, 1, 2]);
        let star = Network::unit(4, [(0, 3), (0, 1), (0, 2)], 0).unwrap();
        assert_eq!(star.connected_ordering().order, vec![0, 1, 2, 3]);
        let rooted_mid = path.with_root(1).unwrap();
        assert_eq!(rooted_mid.connected_ordering().order, vec![1, 0, 2]);
        assert!(rooted_mid.connected_ordering().is_valid_for(&rooted_mid));
    }

    #[test]
    fn tree_detection() {
        let path = Network::unit(3, [(0, 1), (1, 2)], 0).unwrap();
        assert!(path.is_tree());
        let tri = Network::unit(3, [(0, 1), (1, 2), (2, 0)], 0).unwrap();
        assert!(!tri.is_tree());
        let looped = Network::unit(2, [(0, 1), (1, 1)], 0).unwrap();
        assert!(!looped.is_tree());
        let shape = path.with_root(2).unwrap().tree_shape().unwrap();
        assert_eq!(shape.parent, vec![Some(1), Some(2), None]);
        assert_eq!(shape.diameter(), 2);
    }

    #[test]
    fn max_degree_ignores_loops() {
        let net = Network::unit(3, [(0, 1), (0, 2), (0, 0), (1, 2)], 0).unwrap();
        assert_eq!(net.max_degree(), 2);
        assert_eq!(net.total_conductance(0), 4.0);
    }

    fn arb_network() -> impl Strategy<Value = Network> {
        (2usize..9)
            .prop_flat_map(|n| {
                let tree = proptest::collection::vec((0.0f64..1.0, 0.05f64..5.0), n - 1);
                let extra = proptest::collection::vec((0..n, 0..n, 0.05f64..5.0), 0..6);
                (Just(n), tree, extra)
            })
            .prop_map(|(n, tree, extra)| {
                let mut edges = Vec::new();
                for (k, (r, c)) in tree.into_iter().enumerate() {
                    let v = k + 1;
                    let u = ((r * v as f64) as usize).min(v - 1);
                    edges.push((u, v, c));
                }
                edges.extend(extra);
                Network::from_edges(n, edges, 0).unwrap()
            })
    }

    proptest! {
        #[test]
        fn edge_list_round_trip_is_bit_identical(net in arb_network()) {
            let text = net.to_edge_list();
            let back = load_network(&text, net.root()).unwrap();
            prop_assert_eq!(back.edges().len(), net.edges().len());
            for ((u, v, c), (u2, v2, c2)) in net.edges().into_iter().zip(back.edges()) {
                prop_assert_eq!((u, v), (u2, v2));
                prop_assert_eq!(c.to_bits(), c2.to_bits());
            }
        }

        #[test]
        fn ordering_invariant_holds(net in arb_network()) {
            let ord = net.connected_ordering();
            prop_assert_eq!(ord.order.len(), net.vertex_count());
            prop_assert!(ord.is_valid_for(&net));
        }

        #[test]
        fn max_degree_by_scan(net in arb_network()) {
            let n = net.vertex_count();
            let by_scan = (0..n)
                .map(|v| (0..n).filter(|&u| u != v && net.conductance(u, v) > 0.0).count())
                .max()
                .unwrap();
            prop_assert_eq!(net.max_degree(), by_scan);
        }

        #[test]
        fn conductances_are_symmetric(net in arb_network()) {
            let n = net.vertex_count();
            for u in 0..n {
                for v in 0..n {
                    prop_assert_eq!(net.conductance(u, v), net.conductance(v, u));
                }
            }
        }
    }
}
