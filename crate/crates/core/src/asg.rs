//! Abstract structures and their graphs.
//!
//! An abstract structure is a typed symbol, a set of structures, or a tuple
//! of structures. Its graph has one node per (sub-)structure; sets point at
//! their members, and a tuple of arity `n` points at a chain of `n`
//! auxiliary nodes whose `i`-th link points at the `i`-th component. All
//! edges go from a structure to its parts, so the graph is acyclic.
//!
//! By default structurally equal sub-structures share one node. With
//! sharing off, every occurrence of a set or tuple gets its own node while
//! symbols stay shared. Auxiliary nodes always belong to exactly one tuple
//! node.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::graph::{Family, GraphBuilder, NodeKind, TypedDigraph};

pub const DEFAULT_MAX_STRUCTURES: usize = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymbolType {
    Predicate,
    Function,
    Number,
    Variable,
    Constant,
}

impl SymbolType {
    pub fn node_kind(self) -> NodeKind {
        match self {
            SymbolType::Predicate => NodeKind::SymbolPredicate,
            SymbolType::Function => NodeKind::SymbolFunction,
            SymbolType::Number => NodeKind::SymbolNumber,
            SymbolType::Variable => NodeKind::SymbolVariable,
            SymbolType::Constant => NodeKind::SymbolConstant,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SymbolType::Predicate => "predicate",
            SymbolType::Function => "function",
            SymbolType::Number => "number",
            SymbolType::Variable => "variable",
            SymbolType::Constant => "constant",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    pub name: String,
    pub ty: SymbolType,
}

/// Members of a set structure, kept sorted and duplicate-free so that equal
/// sets are equal values.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StructureSet(Vec<AbstractStructure>);

impl StructureSet {
    pub fn members(&self) -> &[AbstractStructure] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<AbstractStructure> for StructureSet {
    fn from_iter<I: IntoIterator<Item = AbstractStructure>>(iter: I) -> Self {
        let mut members: Vec<_> = iter.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        StructureSet(members)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AbstractStructure {
    Symbol(Symbol),
    Set(StructureSet),
    Tuple(Vec<AbstractStructure>),
}

impl AbstractStructure {
    pub fn symbol(name: impl Into<String>, ty: SymbolType) -> Self {
        AbstractStructure::Symbol(Symbol { name: name.into(), ty })
    }

    pub fn set(members: impl IntoIterator<Item = AbstractStructure>) -> Self {
        AbstractStructure::Set(members.into_iter().collect())
    }

    pub fn tuple(components: impl IntoIterator<Item = AbstractStructure>) -> Self {
        AbstractStructure::Tuple(components.into_iter().collect())
    }

    pub fn children(&self) -> &[AbstractStructure] {
        match self {
            AbstractStructure::Symbol(_) => &[],
            AbstractStructure::Set(s) => s.members(),
            AbstractStructure::Tuple(t) => t,
        }
    }

    /// Visits every symbol occurrence, depth first.
    pub fn for_each_symbol<'a>(&'a self, f: &mut impl FnMut(&'a Symbol)) {
        match self {
            AbstractStructure::Symbol(s) => f(s),
            _ => {
                for c in self.children() {
                    c.for_each_symbol(f);
                }
            }
        }
    }
}

impl fmt::Display for AbstractStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, items: &[AbstractStructure]| {
            for (i, c) in items.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{c}")?;
            }
            Ok(())
        };
        match self {
            AbstractStructure::Symbol(s) => write!(f, "{}:{}", s.name, s.ty.name()),
            AbstractStructure::Set(s) => {
                f.write_str("{")?;
                list(f, s.members())?;
                f.write_str("}")
            }
            AbstractStructure::Tuple(t) => {
                f.write_str("<")?;
                list(f, t)?;
                f.write_str(">")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AsgOptions {
    /// Share structurally equal sets and tuples.
    pub sharing: bool,
    /// Upper bound on distinct structure nodes (aux nodes not counted).
    pub max_structures: usize,
}

impl Default for AsgOptions {
    fn default() -> Self {
        AsgOptions {
            sharing: true,
            max_structures: DEFAULT_MAX_STRUCTURES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AsgError {
    #[error("more than {cap} distinct structures")]
    SharingOverflow { cap: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("graph has a cycle through nodes {cycle:?}")]
pub struct CycleError {
    /// Node ids along the cycle; the last node has an edge back to the first.
    pub cycle: Vec<u32>,
}

#[derive(Hash, PartialEq, Eq)]
enum Key<'a> {
    Symbol(&'a Symbol),
    Set(Vec<u32>),
    Tuple(Vec<u32>),
}

enum Interned<'a> {
    Symbol(&'a Symbol),
    Set(Vec<u32>),
    Tuple(Vec<u32>),
}

/// Table of distinct structures, children before parents.
struct Interner<'a> {
    sharing: bool,
    cap: usize,
    lookup: HashMap<Key<'a>, u32>,
    items: Vec<Interned<'a>>,
}

impl<'a> Interner<'a> {
    fn push(&mut self, item: Interned<'a>) -> Result<u32, AsgError> {
        if self.items.len() >= self.cap {
            return Err(AsgError::SharingOverflow { cap: self.cap });
        }
        self.items.push(item);
        Ok((self.items.len() - 1) as u32)
    }

    fn intern(&mut self, s: &'a AbstractStructure) -> Result<u32, AsgError> {
        match s {
            AbstractStructure::Symbol(sym) => {
                if let Some(&id) = self.lookup.get(&Key::Symbol(sym)) {
                    return Ok(id);
                }
                let id = self.push(Interned::Symbol(sym))?;
                self.lookup.insert(Key::Symbol(sym), id);
                Ok(id)
            }
            AbstractStructure::Set(_) | AbstractStructure::Tuple(_) => {
                let children = s
                    .children()
                    .iter()
                    .map(|c| self.intern(c))
                    .collect::<Result<Vec<u32>, _>>()?;
                let is_set = matches!(s, AbstractStructure::Set(_));
                if self.sharing {
                    let key = if is_set {
                        Key::Set(children.clone())
                    } else {
                        Key::Tuple(children.clone())
                    };
                    if let Some(&id) = self.lookup.get(&key) {
                        return Ok(id);
                    }
                    let item = if is_set {
                        Interned::Set(children)
                    } else {
                        Interned::Tuple(children)
                    };
                    let id = self.push(item)?;
                    self.lookup.insert(key, id);
                    Ok(id)
                } else if is_set {
                    self.push(Interned::Set(children))
                } else {
                    self.push(Interned::Tuple(children))
                }
            }
        }
    }
}

/// Builds the abstract structure graph of `root`.
///
/// Node ids follow a depth-first pre-order walk from the root: a structure
/// gets its id on first visit, a tuple's auxiliary nodes come right after
/// it, then its components in position order. Set members are visited in
/// their canonical (sorted) order.
pub fn build_asg(root: &AbstractStructure, options: &AsgOptions) -> Result<TypedDigraph, AsgError> {
    let mut interner = Interner {
        sharing: options.sharing,
        cap: options.max_structures,
        lookup: HashMap::new(),
        items: Vec::new(),
    };
    let root_id = interner.intern(root)?;
    let items = interner.items;

    let mut g = GraphBuilder::new(Family::Asg);
    let mut node_of: Vec<Option<u32>> = vec![None; items.len()];
    visit(root_id, &items, &mut node_of, &mut g);
    Ok(g.finish().expect("builder only emits in-range ASG edges"))
}

fn visit(item: u32, items: &[Interned<'_>], node_of: &mut [Option<u32>], g: &mut GraphBuilder) -> u32 {
    if let Some(node) = node_of[item as usize] {
        return node;
    }
    match &items[item as usize] {
        Interned::Symbol(sym) => {
            let node = g.add_node(sym.ty.node_kind(), format!("{} {}", sym.ty.name(), sym.name));
            node_of[item as usize] = Some(node);
            node
        }
        Interned::Set(children) => {
            let node = g.add_node(NodeKind::Set, format!("set of {}", children.len()));
            node_of[item as usize] = Some(node);
            for &c in children {
                let child = visit(c, items, node_of, g);
                g.add_edge(node, child);
            }
            node
        }
        Interned::Tuple(children) => {
            let n = children.len();
            let node = g.add_node(NodeKind::Tuple, format!("tuple of {n}"));
            node_of[item as usize] = Some(node);
            let aux: Vec<u32> = (1..=n)
                .map(|i| g.add_node(NodeKind::Aux, format!("aux {i}/{n} of node {node}")))
                .collect();
            if let Some(&first) = aux.first() {
                g.add_edge(node, first);
            }
            for w in aux.windows(2) {
                g.add_edge(w[0], w[1]);
            }
            for (&a, &c) in aux.iter().zip(children) {
                let child = visit(c, items, node_of, g);
                g.add_edge(a, child);
            }
            node
        }
    }
}

/// Topological order of `g` (Kahn's algorithm, FIFO over ready nodes in id
/// order), or a witness cycle.
pub fn assert_acyclic(g: &TypedDigraph) -> Result<Vec<u32>, CycleError> {
    let succ = g.successors();
    let mut indegree = g.in_degrees();
    let mut ready: VecDeque<u32> = (0..g.num_nodes() as u32)
        .filter(|&v| indegree[v as usize] == 0)
        .collect();
    let mut order = Vec::with_capacity(g.num_nodes());
    while let Some(v) = ready.pop_front() {
        order.push(v);
        for &w in succ.neighbors(v) {
            indegree[w as usize] -= 1;
            if indegree[w as usize] == 0 {
                ready.push_back(w);
            }
        }
    }
    if order.len() == g.num_nodes() {
        return Ok(order);
    }
    // Every unsorted node has an unsorted predecessor, so walking
    // predecessors among them must revisit a node.
    let mut pred: Vec<Option<u32>> = vec![None; g.num_nodes()];
    for &(s, d) in g.edges() {
        if indegree[s as usize] > 0 && indegree[d as usize] > 0 {
            pred[d as usize] = Some(s);
        }
    }
    let start = (0..g.num_nodes())
        .find(|&v| indegree[v] > 0)
        .expect("some node is unsorted") as u32;
    let mut seen_at: HashMap<u32, usize> = HashMap::new();
    let mut walk = Vec::new();
    let mut v = start;
    loop {
        if let Some(&i) = seen_at.get(&v) {
            let mut cycle = walk[i..].to_vec();
            cycle.reverse();
            return Err(CycleError { cycle });
        }
        seen_at.insert(v, walk.len());
        walk.push(v);
        v = pred[v as usize].expect("unsorted nodes have unsorted predecessors");
    }
}
