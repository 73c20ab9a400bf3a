//! Typed directed graphs shared by the grounded and lifted builders.
//!
//! A [`TypedDigraph`] is a dense node array (ids `0..n`) where every node
//! carries a [`NodeKind`] from one fixed vocabulary, plus a sorted,
//! duplicate-free edge list. Node kinds drive the one-hot feature encoding;
//! vocabulary order is part of the on-disk format and must not change.

mod io;

pub use io::{
    deserialize, from_edge_csv, from_json, read_graph, serialize, to_edge_csv, to_json, write_graph, Format, GraphFile,
    GraphIoError, SchemaError,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which graph construction a node vocabulary belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Problem description graph over a grounded task.
    Pdg,
    /// Abstract structure graph over a lifted task.
    Asg,
}

impl Family {
    pub fn vocabulary(self) -> &'static [NodeKind] {
        match self {
            Family::Pdg => &PDG_VOCABULARY,
            Family::Asg => &ASG_VOCABULARY,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Pdg => "pdg",
            Family::Asg => "asg",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Init,
    Goal,
    Variable,
    Fact,
    Operator,
    OperatorEffect,
    Axiom,
    Set,
    Tuple,
    Aux,
    SymbolPredicate,
    SymbolFunction,
    SymbolNumber,
    SymbolVariable,
    SymbolConstant,
}

pub const PDG_VOCABULARY: [NodeKind; 7] = [
    NodeKind::Init,
    NodeKind::Goal,
    NodeKind::Variable,
    NodeKind::Fact,
    NodeKind::Operator,
    NodeKind::OperatorEffect,
    NodeKind::Axiom,
];

pub const ASG_VOCABULARY: [NodeKind; 8] = [
    NodeKind::Set,
    NodeKind::Tuple,
    NodeKind::Aux,
    NodeKind::SymbolPredicate,
    NodeKind::SymbolFunction,
    NodeKind::SymbolNumber,
    NodeKind::SymbolVariable,
    NodeKind::SymbolConstant,
];

impl NodeKind {
    pub fn family(self) -> Family {
        match self {
            NodeKind::Init
            | NodeKind::Goal
            | NodeKind::Variable
            | NodeKind::Fact
            | NodeKind::Operator
            | NodeKind::OperatorEffect
            | NodeKind::Axiom => Family::Pdg,
            _ => Family::Asg,
        }
    }

    /// Column of this kind in its family's one-hot encoding.
    pub fn feature_index(self) -> usize {
        let vocab = self.family().vocabulary();
        vocab
            .iter()
            .position(|&k| k == self)
            .expect("every kind is in its family vocabulary")
    }

    pub fn name(self) -> &'static str {
        match self {
            NodeKind::Init => "init",
            NodeKind::Goal => "goal",
            NodeKind::Variable => "variable",
            NodeKind::Fact => "fact",
            NodeKind::Operator => "operator",
            NodeKind::OperatorEffect => "operator_effect",
            NodeKind::Axiom => "axiom",
            NodeKind::Set => "set",
            NodeKind::Tuple => "tuple",
            NodeKind::Aux => "aux",
            NodeKind::SymbolPredicate => "symbol_predicate",
            NodeKind::SymbolFunction => "symbol_function",
            NodeKind::SymbolNumber => "symbol_number",
            NodeKind::SymbolVariable => "symbol_variable",
            NodeKind::SymbolConstant => "symbol_constant",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown node kind `{0}`")]
pub struct UnknownKind(pub String);

impl FromStr for NodeKind {
    type Err = UnknownKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PDG_VOCABULARY
            .iter()
            .chain(ASG_VOCABULARY.iter())
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("edge ({src}, {dst}) has an endpoint outside 0..{num_nodes}")]
    EdgeOutOfRange { src: u32, dst: u32, num_nodes: usize },
    #[error("duplicate edge ({src}, {dst})")]
    DuplicateEdge { src: u32, dst: u32 },
    #[error("node {node} has kind `{kind}` which is not in the {family} vocabulary")]
    KindOutsideFamily {
        node: usize,
        kind: NodeKind,
        family: Family,
    },
    #[error("{provenance} provenance entries for {nodes} nodes")]
    ProvenanceLength { nodes: usize, provenance: usize },
    #[error("graph exceeds the 32-bit node id space")]
    TooManyNodes,
}

/// Directed graph with one kind tag per node.
///
/// Edges are kept sorted by `(src, dst)` and are duplicate-free, so two
/// graphs built from equal inputs compare (and serialize) equal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypedDigraph {
    family: Family,
    kinds: Vec<NodeKind>,
    provenance: Vec<String>,
    edges: Vec<(u32, u32)>,
}

impl TypedDigraph {
    /// Validates and canonicalizes a graph. Edges may arrive in any order but
    /// must not repeat.
    pub fn new(
        family: Family,
        kinds: Vec<NodeKind>,
        provenance: Vec<String>,
        mut edges: Vec<(u32, u32)>,
    ) -> Result<Self, GraphError> {
        if kinds.len() > u32::MAX as usize {
            return Err(GraphError::TooManyNodes);
        }
        if provenance.len() != kinds.len() {
            return Err(GraphError::ProvenanceLength {
                nodes: kinds.len(),
                provenance: provenance.len(),
            });
        }
        if let Some((node, &kind)) = kinds.iter().enumerate().find(|(_, k)| k.family() != family) {
            return Err(GraphError::KindOutsideFamily { node, kind, family });
        }
        let n = kinds.len();
        if let Some(&(src, dst)) = edges.iter().find(|&&(s, d)| s as usize >= n || d as usize >= n) {
            return Err(GraphError::EdgeOutOfRange { src, dst, num_nodes: n });
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateEdge {
                src: w[0].0,
                dst: w[0].1,
            });
        }
        Ok(TypedDigraph {
            family,
            kinds,
            provenance,
            edges,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn num_nodes(&self) -> usize {
        self.kinds.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn kinds(&self) -> &[NodeKind] {
        &self.kinds
    }

    pub fn kind(&self, node: u32) -> NodeKind {
        self.kinds[node as usize]
    }

    pub fn provenance(&self, node: u32) -> &str {
        &self.provenance[node as usize]
    }

    /// Edges sorted by `(src, dst)`.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn kind_vocabulary(&self) -> &'static [NodeKind] {
        self.family.vocabulary()
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_nodes()];
        for &(s, _) in &self.edges {
            deg[s as usize] += 1;
        }
        deg
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_nodes()];
        for &(_, d) in &self.edges {
            deg[d as usize] += 1;
        }
        deg
    }

    /// Successor lists in compressed form.
    pub fn successors(&self) -> Adjacency {
        Adjacency::from_sorted_pairs(self.num_nodes(), self.edges.iter().copied())
    }

    /// Compares family, kinds and edges; provenance is ignored.
    pub fn same_structure(&self, other: &TypedDigraph) -> bool {
        self.family == other.family && self.kinds == other.kinds && self.edges == other.edges
    }

    /// Count of nodes per vocabulary entry, in vocabulary order.
    pub fn kind_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.kind_vocabulary().len()];
        for k in &self.kinds {
            counts[k.feature_index()] += 1;
        }
        counts
    }

    /// One row per node with a single 1.0 at the node kind's vocabulary index.
    pub fn one_hot_features(&self) -> FeatureMatrix {
        let cols = self.kind_vocabulary().len();
        let mut data = vec![0.0; self.num_nodes() * cols];
        for (i, k) in self.kinds.iter().enumerate() {
            data[i * cols + k.feature_index()] = 1.0;
        }
        FeatureMatrix {
            rows: self.num_nodes(),
            cols,
            data,
        }
    }

    /// Simple undirected graph: `{u, v}` for every `(u, v)` or `(v, u)` with
    /// `u != v`. Reciprocal pairs collapse and self-loops are dropped.
    pub fn undirected_view(&self) -> UndirectedGraph {
        let mut pairs: Vec<(u32, u32)> = self
            .edges
            .iter()
            .filter(|(s, d)| s != d)
            .map(|&(s, d)| if s < d { (s, d) } else { (d, s) })
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        UndirectedGraph::from_edges(self.num_nodes(), pairs)
    }
}

/// Accumulates nodes and edges during construction; duplicate edges are
/// merged when the graph is finished.
#[derive(Debug)]
pub struct GraphBuilder {
    family: Family,
    kinds: Vec<NodeKind>,
    provenance: Vec<String>,
    edges: Vec<(u32, u32)>,
}

impl GraphBuilder {
    pub fn new(family: Family) -> Self {
        GraphBuilder {
            family,
            kinds: Vec::new(),
            provenance: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn with_capacity(family: Family, nodes: usize, edges: usize) -> Self {
        GraphBuilder {
            family,
            kinds: Vec::with_capacity(nodes),
            provenance: Vec::with_capacity(nodes),
            edges: Vec::with_capacity(edges),
        }
    }

    pub fn add_node(&mut self, kind: NodeKind, provenance: impl Into<String>) -> u32 {
        let id = u32::try_from(self.kinds.len()).expect("node ids fit in u32");
        self.kinds.push(kind);
        self.provenance.push(provenance.into());
        id
    }

    pub fn add_edge(&mut self, src: u32, dst: u32) {
        self.edges.push((src, dst));
    }

    pub fn num_nodes(&self) -> usize {
        self.kinds.len()
    }

    pub fn finish(mut self) -> Result<TypedDigraph, GraphError> {
        self.edges.sort_unstable();
        self.edges.dedup();
        TypedDigraph::new(self.family, self.kinds, self.provenance, self.edges)
    }
}

/// Dense row-major feature matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f32>,
}

impl FeatureMatrix {
    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_sums(&self) -> Vec<f32> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn column_sums(&self) -> Vec<f32> {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, v) in sums.iter_mut().zip(self.row(i)) {
                *s += v;
            }
        }
        sums
    }
}

/// Compressed adjacency lists (CSR).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Adjacency {
    /// `pairs` must be sorted by source.
    fn from_sorted_pairs(n: usize, pairs: impl Iterator<Item = (u32, u32)>) -> Self {
        let mut offsets = vec![0usize; n + 1];
        let mut targets = Vec::new();
        for (s, d) in pairs {
            offsets[s as usize + 1] += 1;
            targets.push(d);
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        Adjacency { offsets, targets }
    }

    pub fn neighbors(&self, node: u32) -> &[u32] {
        let i = node as usize;
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }
}

/// Simple undirected graph with edges stored once as `(u, v)`, `u < v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UndirectedGraph {
    num_nodes: usize,
    edges: Vec<(u32, u32)>,
    adjacency: Adjacency,
}

impl UndirectedGraph {
    /// `edges` must be sorted, deduplicated, loop-free and oriented `u < v`.
    fn from_edges(num_nodes: usize, edges: Vec<(u32, u32)>) -> Self {
        let mut both: Vec<(u32, u32)> = edges.iter().flat_map(|&(u, v)| [(u, v), (v, u)]).collect();
        both.sort_unstable();
        let adjacency = Adjacency::from_sorted_pairs(num_nodes, both.into_iter());
        UndirectedGraph {
            num_nodes,
            edges,
            adjacency,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn neighbors(&self, node: u32) -> &[u32] {
        self.adjacency.neighbors(node)
    }
}
