//! Problem description graphs of grounded tasks.
//!
//! Node ids are assigned in a fixed order: init, goal, one node per
//! variable, one per fact (variable order, then value), one per operator,
//! one per operator effect (operator order, then effect order), one per
//! axiom. Edges:
//!
//! | family | edges |
//! |---|---|
//! | init | `init -> fact(v, s0[v])` |
//! | goal | `goal -> fact(v, d)` for each goal fact |
//! | variable | `var(v) -> fact(v, d)` for each `d` in the domain |
//! | axiom | `axiom -> fact` for each body fact and for the head fact |
//! | operator | `op -> fact` per precondition, `op -> effect` per effect, `fact -> effect` per effect condition, `effect -> fact` for the effect's target |
//!
//! Derived variables get variable and fact nodes like any other variable;
//! their default values produce no edges.

use crate::graph::{Family, GraphBuilder, NodeKind, TypedDigraph};
use crate::sas::{Fact, SasTask};

/// `2 + |V| + sum |dom(v)| + |O| + sum |effs(o)| + |A|`.
pub fn pdg_node_count(task: &SasTask) -> usize {
    2 + task.variables.len()
        + task.variables.iter().map(|v| v.domain_size()).sum::<usize>()
        + task.operators.len()
        + task.operators.iter().map(|o| o.effects.len()).sum::<usize>()
        + task.axioms.len()
}

/// Builds the problem description graph of a validated task.
///
/// # Panics
///
/// If the task references a variable or value outside its declared domains
/// (see [`SasTask::validate`]).
pub fn build_pdg(task: &SasTask) -> TypedDigraph {
    let mut g = GraphBuilder::with_capacity(Family::Pdg, pdg_node_count(task), 0);

    let init = g.add_node(NodeKind::Init, "init");
    let goal = g.add_node(NodeKind::Goal, "goal");

    let var_nodes: Vec<u32> = task
        .variables
        .iter()
        .enumerate()
        .map(|(i, v)| g.add_node(NodeKind::Variable, format!("var {i} {}", v.name)))
        .collect();

    let mut fact_offsets = Vec::with_capacity(task.variables.len());
    for (i, v) in task.variables.iter().enumerate() {
        fact_offsets.push(g.num_nodes() as u32);
        for (d, value) in v.values.iter().enumerate() {
            g.add_node(NodeKind::Fact, format!("fact v{i}={d} {value}"));
        }
    }
    let fact = |f: &Fact| -> u32 {
        assert!(
            f.value < task.variables[f.var].domain_size(),
            "fact {}={} outside the variable's domain",
            f.var,
            f.value
        );
        fact_offsets[f.var] + f.value as u32
    };

    let op_nodes: Vec<u32> = task
        .operators
        .iter()
        .enumerate()
        .map(|(i, o)| g.add_node(NodeKind::Operator, format!("op {i} {}", o.name)))
        .collect();
    let mut effect_nodes = Vec::with_capacity(task.operators.len());
    for (i, o) in task.operators.iter().enumerate() {
        let ids: Vec<u32> = (0..o.effects.len())
            .map(|e| g.add_node(NodeKind::OperatorEffect, format!("op {i} effect {e}")))
            .collect();
        effect_nodes.push(ids);
    }
    let axiom_nodes: Vec<u32> = (0..task.axioms.len())
        .map(|i| g.add_node(NodeKind::Axiom, format!("axiom {i}")))
        .collect();

    for (var, &value) in task.initial_state.iter().enumerate() {
        g.add_edge(init, fact(&Fact::new(var, value)));
    }
    for f in &task.goal {
        g.add_edge(goal, fact(f));
    }
    for (i, v) in task.variables.iter().enumerate() {
        for d in 0..v.domain_size() {
            g.add_edge(var_nodes[i], fact(&Fact::new(i, d)));
        }
    }
    for (a, ax) in task.axioms.iter().enumerate() {
        for f in &ax.condition {
            g.add_edge(axiom_nodes[a], fact(f));
        }
        g.add_edge(axiom_nodes[a], fact(&Fact::new(ax.var, ax.value)));
    }
    for (i, o) in task.operators.iter().enumerate() {
        let op = op_nodes[i];
        for f in &o.precondition {
            g.add_edge(op, fact(f));
        }
        for (e, eff) in o.effects.iter().enumerate() {
            let en = effect_nodes[i][e];
            g.add_edge(op, en);
            for c in &eff.condition {
                g.add_edge(fact(c), en);
            }
            g.add_edge(en, fact(&Fact::new(eff.var, eff.value)));
        }
    }

    g.finish().expect("builder only emits in-range PDG edges")
}

/// Whether `(src, dst)` kinds form one of the edge shapes a PDG may contain.
pub fn is_legal_edge(src: NodeKind, dst: NodeKind) -> bool {
    use NodeKind::*;
    matches!(
        (src, dst),
        (Init, Fact)
            | (Goal, Fact)
            | (Variable, Fact)
            | (Axiom, Fact)
            | (Operator, Fact)
            | (Operator, OperatorEffect)
            | (Fact, OperatorEffect)
            | (OperatorEffect, Fact)
    )
}

/// First edge whose endpoint kinds are not a legal PDG shape, if any.
pub fn find_illegal_edge(g: &TypedDigraph) -> Option<(u32, u32)> {
    g.edges()
        .iter()
        .copied()
        .find(|&(s, d)| !is_legal_edge(g.kind(s), g.kind(d)))
}
