//! Finite simple graphs, Droms recognition and the decomposition tree.
//!
//! Vertices are named; the canonical vertex order is lexicographic on names
//! and every derived structure (components, centers, decomposition trees)
//! lists vertices in that order, which keeps the whole crate deterministic.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Errors produced while building or analysing graphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    /// A vertex name is empty or contains characters outside
    /// `[A-Za-z][A-Za-z0-9_]*`.
    BadVertexName(String),
    /// The same vertex name was given twice.
    DuplicateVertex(String),
    /// An edge mentions a vertex that is not in the vertex list.
    UnknownVertex(String),
    /// An edge joins a vertex to itself.
    LoopEdge(String),
    /// The two recognition routes (forbidden-subgraph scan and recursive
    /// decomposition) disagreed; this indicates a bug, never bad input.
    InternalDisagreement,
    /// The graph is not a Droms graph; carries the four vertices of an
    /// induced path or cycle witnessing this.
    NotDroms(ForbiddenSubgraph),
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::BadVertexName(name) => write!(f, "bad vertex name: {name:?}"),
            GraphError::DuplicateVertex(name) => write!(f, "duplicate vertex: {name}"),
            GraphError::UnknownVertex(name) => write!(f, "edge mentions unknown vertex: {name}"),
            GraphError::LoopEdge(name) => write!(f, "loop edge at vertex: {name}"),
            GraphError::InternalDisagreement => {
                write!(f, "internal error: Droms recognition routes disagree")
            }
            GraphError::NotDroms(w) => write!(
                f,
                "not a Droms graph: induced {} on {}, {}, {}, {}",
                match w.kind {
                    ForbiddenKind::Path4 => "path",
                    ForbiddenKind::Cycle4 => "cycle",
                },
                w.vertices[0],
                w.vertices[1],
                w.vertices[2],
                w.vertices[3]
            ),
        }
    }
}

/// The kind of induced subgraph that disqualifies a graph from being Droms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForbiddenKind {
    /// An induced path on four vertices.
    Path4,
    /// An induced cycle on four vertices.
    Cycle4,
}

/// Four vertices spanning an induced path or cycle on four vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForbiddenSubgraph {
    pub kind: ForbiddenKind,
    /// The four vertex names, in canonical (lexicographic) order.
    pub vertices: [String; 4],
}

/// A finite simple graph with named vertices.
///
/// Vertices are stored sorted by name; all indices refer to that order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    vertices: Vec<String>,
    /// Adjacency matrix in row-major order, `adj[u * n + v]`.
    adj: Vec<bool>,
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl SimpleGraph {
    /// Builds a graph from vertex names and edges given as name pairs.
    pub fn new<S: AsRef<str>>(vertices: &[S], edges: &[(S, S)]) -> Result<Self, GraphError> {
        let mut names: Vec<String> = Vec::with_capacity(vertices.len());
        for v in vertices {
            let v = v.as_ref();
            if !valid_name(v) {
                return Err(GraphError::BadVertexName(v.to_string()));
            }
            names.push(v.to_string());
        }
        names.sort();
        for pair in names.windows(2) {
            if pair[0] == pair[1] {
                return Err(GraphError::DuplicateVertex(pair[0].clone()));
            }
        }
        let n = names.len();
        let mut adj = vec![false; n * n];
        for (a, b) in edges {
            let (a, b) = (a.as_ref(), b.as_ref());
            let ia = names
                .binary_search_by(|x| x.as_str().cmp(a))
                .map_err(|_| GraphError::UnknownVertex(a.to_string()))?;
            let ib = names
                .binary_search_by(|x| x.as_str().cmp(b))
                .map_err(|_| GraphError::UnknownVertex(b.to_string()))?;
            if ia == ib {
                return Err(GraphError::LoopEdge(a.to_string()));
            }
            adj[ia * n + ib] = true;
            adj[ib * n + ia] = true;
        }
        Ok(SimpleGraph {
            vertices: names,
            adj,
        })
    }

    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    /// True when the graph has no vertices.
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Vertex names in canonical order.
    pub fn vertex_names(&self) -> &[String] {
        &self.vertices
    }

    /// The canonical index of a vertex name, if present.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vertices
            .binary_search_by(|x| x.as_str().cmp(name))
            .ok()
    }

    /// The name at a canonical index.
    pub fn name_of(&self, index: usize) -> &str {
        &self.vertices[index]
    }

    /// Whether two vertices are adjacent.
    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.adj[u * self.len() + v]
    }

    /// All edges as index pairs `(u, v)` with `u < v`, lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if self.adj[u * n + v] {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Connected components of the induced subgraph on `verts`, each sorted,
    /// ordered by smallest member.
    pub fn components_within(&self, verts: &[usize]) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut inside = vec![false; self.len()];
        for &v in verts {
            inside[v] = true;
        }
        let mut out = Vec::new();
        for &start in verts {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut head = 0;
            while head < comp.len() {
                let u = comp[head];
                head += 1;
                for &v in verts {
                    if !seen[v] && inside[v] && self.adjacent(u, v) {
                        seen[v] = true;
                        comp.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Vertices of `verts` adjacent to every other vertex of `verts`
    /// (the center of the induced subgraph), in canonical order.
    pub fn center_within(&self, verts: &[usize]) -> Vec<usize> {
        verts
            .iter()
            .copied()
            .filter(|&u| verts.iter().all(|&v| v == u || self.adjacent(u, v)))
            .collect()
    }

    /// Whether the induced subgraph on `verts` is complete.
    pub fn is_complete_within(&self, verts: &[usize]) -> bool {
        self.center_within(verts).len() == verts.len()
    }

    /// The induced subgraph on the named vertices (which must exist).
    pub fn induced(&self, verts: &[usize]) -> SimpleGraph {
        let names: Vec<&String> = verts.iter().map(|&v| &self.vertices[v]).collect();
        let mut sorted: Vec<usize> = verts.to_vec();
        sorted.sort_unstable();
        let edges: Vec<(&String, &String)> = sorted
            .iter()
            .enumerate()
            .flat_map(|(i, &u)| {
                sorted[i + 1..]
                    .iter()
                    .filter(move |&&v| self.adjacent(u, v))
                    .map(move |&v| (&self.vertices[u], &self.vertices[v]))
            })
            .collect();
        SimpleGraph::new(&names, &edges).expect("induced subgraph of a valid graph is valid")
    }

    /// Scans all four-vertex subsets for an induced path or cycle on four
    /// vertices; returns the first one in lexicographic subset order.
    pub fn find_forbidden(&self) -> Option<ForbiddenSubgraph> {
        let n = self.len();
        for a in 0..n {
            for b in (a + 1)..n {
                for c in (b + 1)..n {
                    for d in (c + 1)..n {
                        if let Some(found) = self.classify_four([a, b, c, d]) {
                            return Some(found);
                        }
                    }
                }
            }
        }
        None
    }

    fn classify_four(&self, q: [usize; 4]) -> Option<ForbiddenSubgraph> {
        let mut degs = [0usize; 4];
        let mut edge_count = 0;
        for i in 0..4 {
            for j in (i + 1)..4 {
                if self.adjacent(q[i], q[j]) {
                    degs[i] += 1;
                    degs[j] += 1;
                    edge_count += 1;
                }
            }
        }
        let kind = match edge_count {
            // A path on four vertices: three edges, degree multiset {1,1,2,2},
            // and connected (three edges with that degree multiset and no
            // isolated vertex is either a path or a triangle+isolated vertex;
            // the latter has a degree-zero vertex).
            3 if degs.iter().all(|&d| d >= 1) && degs.iter().filter(|&&d| d == 2).count() == 2 => {
                ForbiddenKind::Path4
            }
            // A cycle on four vertices: four edges, every degree two.
            4 if degs.iter().all(|&d| d == 2) => ForbiddenKind::Cycle4,
            _ => return None,
        };
        Some(ForbiddenSubgraph {
            kind,
            vertices: [
                self.vertices[q[0]].clone(),
                self.vertices[q[1]].clone(),
                self.vertices[q[2]].clone(),
                self.vertices[q[3]].clone(),
            ],
        })
    }

    /// Recursive Droms recognition: a graph qualifies when it is empty, or
    /// disconnected with all components qualifying, or its center is
    /// nonempty and the rest qualifies.
    pub fn is_droms_recursive(&self) -> bool {
        let all: Vec<usize> = (0..self.len()).collect();
        self.is_droms_within(&all)
    }

    fn is_droms_within(&self, verts: &[usize]) -> bool {
        if verts.is_empty() {
            return true;
        }
        let comps = self.components_within(verts);
        if comps.len() > 1 {
            return comps.iter().all(|c| self.is_droms_within(c));
        }
        let center = self.center_within(verts);
        if center.is_empty() {
            return false;
        }
        let rest: Vec<usize> = verts
            .iter()
            .copied()
            .filter(|v| !center.contains(v))
            .collect();
        self.is_droms_within(&rest)
    }

    /// Decides whether the graph is Droms by both routes, insisting that
    /// they agree. `Ok(None)` means Droms; `Ok(Some(w))` carries a witness.
    pub fn droms_witness(&self) -> Result<Option<ForbiddenSubgraph>, GraphError> {
        let scan = self.find_forbidden();
        let recursive = self.is_droms_recursive();
        match (&scan, recursive) {
            (None, true) => Ok(None),
            (Some(_), false) => Ok(scan),
            _ => Err(GraphError::InternalDisagreement),
        }
    }

    /// Canonical one-line rendering, used for memoization keys.
    pub fn canonical_string(&self) -> String {
        let mut s = String::new();
        s.push_str(&self.vertices.join(" "));
        s.push(';');
        for (u, v) in self.edges() {
            s.push_str(&format!(" {}-{}", self.vertices[u], self.vertices[v]));
        }
        s
    }
}

/// The shape of a node of the decomposition tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DromsKind {
    /// The empty graph; the trivial group.
    Trivial,
    /// A nonempty center: the group is `Z^m x (child)`, where `m` is the
    /// number of central vertices and the child holds the remaining
    /// vertices (and is trivial or a free product).
    CentralExtension {
        /// Root indices of the central vertices, sorted.
        central: Vec<usize>,
        child: Box<DromsNode>,
    },
    /// A disconnected graph: the free product of its components, listed by
    /// smallest vertex. Always has at least two children, none trivial.
    FreeProduct { children: Vec<DromsNode> },
}

/// A node of the decomposition tree of a Droms graph.
///
/// Every node carries the sorted root-graph indices of the vertices it
/// covers, so group elements — words over root vertices — can be interpreted
/// at any node without re-indexing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DromsNode {
    /// Root indices of the vertices of this node, sorted.
    pub verts: Vec<usize>,
    pub kind: DromsKind,
}

impl DromsNode {
    fn build(graph: &SimpleGraph, verts: Vec<usize>) -> DromsNode {
        if verts.is_empty() {
            return DromsNode {
                verts,
                kind: DromsKind::Trivial,
            };
        }
        let comps = graph.components_within(&verts);
        if comps.len() > 1 {
            let children = comps
                .into_iter()
                .map(|c| DromsNode::build(graph, c))
                .collect();
            return DromsNode {
                verts,
                kind: DromsKind::FreeProduct { children },
            };
        }
        let central = graph.center_within(&verts);
        debug_assert!(!central.is_empty(), "connected Droms graph has a center");
        let rest: Vec<usize> = verts
            .iter()
            .copied()
            .filter(|v| !central.contains(v))
            .collect();
        let child = Box::new(DromsNode::build(graph, rest));
        DromsNode {
            verts,
            kind: DromsKind::CentralExtension { central, child },
        }
    }

    /// True when this node covers no vertices.
    pub fn is_trivial(&self) -> bool {
        matches!(self.kind, DromsKind::Trivial)
    }

    /// True when the node is a complete graph (a free abelian layer with no
    /// further structure): trivial, or a central extension of the trivial
    /// node.
    pub fn is_abelian(&self) -> bool {
        match &self.kind {
            DromsKind::Trivial => true,
            DromsKind::CentralExtension { child, .. } => child.is_trivial(),
            DromsKind::FreeProduct { .. } => false,
        }
    }

    /// Canonical one-line rendering of the subtree.
    pub fn canonical_string(&self, graph: &SimpleGraph) -> String {
        match &self.kind {
            DromsKind::Trivial => "1".to_string(),
            DromsKind::CentralExtension { central, child } => {
                let names: Vec<&str> = central.iter().map(|&v| graph.name_of(v)).collect();
                format!("Z[{}] x {}", names.join(" "), child.canonical_string(graph))
            }
            DromsKind::FreeProduct { children } => {
                let parts: Vec<String> = children
                    .iter()
                    .map(|c| {
                        let s = c.canonical_string(graph);
                        // Parenthesise composite factors so the rendering
                        // is unambiguous.
                        if matches!(c.kind, DromsKind::CentralExtension { .. }) {
                            format!("({s})")
                        } else {
                            s
                        }
                    })
                    .collect();
                format!("({})", parts.join(" * "))
            }
        }
    }
}

/// A Droms right-angled Artin group: a validated graph together with its
/// decomposition tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raag {
    graph: SimpleGraph,
    tree: DromsNode,
}

impl Raag {
    /// Validates that the graph is Droms and computes its decomposition.
    pub fn new(graph: SimpleGraph) -> Result<Raag, GraphError> {
        if let Some(witness) = graph.droms_witness()? {
            return Err(GraphError::NotDroms(witness));
        }
        let all: Vec<usize> = (0..graph.len()).collect();
        let tree = DromsNode::build(&graph, all);
        Ok(Raag { graph, tree })
    }

    pub fn graph(&self) -> &SimpleGraph {
        &self.graph
    }

    pub fn tree(&self) -> &DromsNode {
        &self.tree
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(vertices: &[&str], edges: &[(&str, &str)]) -> SimpleGraph {
        SimpleGraph::new(vertices, edges).unwrap()
    }

    #[test]
    fn vertex_order_is_lexicographic() {
        let g = graph(&["c", "a", "b"], &[("a", "c")]);
        assert_eq!(g.vertex_names(), &["a", "b", "c"]);
        assert!(g.adjacent(0, 2));
        assert!(!g.adjacent(0, 1));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            SimpleGraph::new(&["1a"], &[]),
            Err(GraphError::BadVertexName(_))
        ));
        assert!(matches!(
            SimpleGraph::new(&["a", "a"], &[]),
            Err(GraphError::DuplicateVertex(_))
        ));
        assert!(matches!(
            SimpleGraph::new(&["a"], &[("a", "b")]),
            Err(GraphError::UnknownVertex(_))
        ));
        assert!(matches!(
            SimpleGraph::new(&["a"], &[("a", "a")]),
            Err(GraphError::LoopEdge(_))
        ));
    }

    #[test]
    fn path_on_four_is_forbidden() {
        let g = graph(&["a", "b", "c", "d"], &[("a", "b"), ("b", "c"), ("c", "d")]);
        let w = g.droms_witness().unwrap().unwrap();
        assert_eq!(w.kind, ForbiddenKind::Path4);
        assert!(!g.is_droms_recursive());
    }

    #[test]
    fn cycle_on_four_is_forbidden() {
        let g = graph(
            &["a", "b", "c", "d"],
            &[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")],
        );
        let w = g.droms_witness().unwrap().unwrap();
        assert_eq!(w.kind, ForbiddenKind::Cycle4);
    }

    #[test]
    fn triangle_plus_isolated_vertex_is_droms() {
        // Three edges among four vertices but with an isolated vertex: not a
        // path on four vertices.
        let g = graph(&["a", "b", "c", "d"], &[("a", "b"), ("b", "c"), ("a", "c")]);
        assert!(g.droms_witness().unwrap().is_none());
    }

    #[test]
    fn decomposition_of_path_on_three() {
        // a - b - c: center {b}, rest {a, c} disconnected.
        let g = graph(&["a", "b", "c"], &[("a", "b"), ("b", "c")]);
        let raag = Raag::new(g).unwrap();
        match &raag.tree().kind {
            DromsKind::CentralExtension { central, child } => {
                assert_eq!(central, &[1]); // "b"
                match &child.kind {
                    DromsKind::FreeProduct { children } => {
                        assert_eq!(children.len(), 2);
                        assert_eq!(children[0].verts, vec![0]);
                        assert_eq!(children[1].verts, vec![2]);
                    }
                    other => panic!("expected free product, got {other:?}"),
                }
            }
            other => panic!("expected central extension, got {other:?}"),
        }
        assert_eq!(raag.tree().canonical_string(raag.graph()), "Z[b] x ((Z[a] x 1) * (Z[c] x 1))");
    }

    #[test]
    fn complete_graph_is_abelian() {
        let g = graph(&["a", "b"], &[("a", "b")]);
        let raag = Raag::new(g).unwrap();
        assert!(raag.tree().is_abelian());
    }

    #[test]
    fn empty_graph_is_trivial() {
        let g = SimpleGraph::new::<&str>(&[], &[]).unwrap();
        let raag = Raag::new(g).unwrap();
        assert!(raag.tree().is_trivial());
    }
}
