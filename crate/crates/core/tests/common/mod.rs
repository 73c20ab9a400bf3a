//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};
use std::path::PathBuf;

use ipcgraph::asg::{AbstractStructure, SymbolType};
use ipcgraph::dataset::{Predictions, TargetTable, TaskId, TaskRow, CENSORED_VALUE, NUM_PLANNERS};
use ipcgraph::graph::{Family, GraphBuilder, NodeKind, TypedDigraph};
use ipcgraph::sas::{Effect, Fact, GroundAxiom, GroundOperator, SasTask, Variable};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap()
}

pub const SAS_FIXTURES: &[&str] = &["minimal.sas", "empty_goal.sas", "cond_effect.sas", "axiom.sas"];
pub const PDDL_FIXTURES: &[(&str, &str)] = &[
    ("gripper-domain.pddl", "gripper-p01.pddl"),
    ("switches-domain.pddl", "switches-p01.pddl"),
];

fn distinct_vars(rng: &mut ChaCha8Rng, pool: &[usize], max: usize) -> Vec<usize> {
    let k = rng.gen_range(0..=max.min(pool.len()));
    let mut vars: Vec<usize> = pool.choose_multiple(rng, k).copied().collect();
    vars.sort_unstable();
    vars
}

fn random_facts(rng: &mut ChaCha8Rng, vars: &[Variable], pool: &[usize], max: usize) -> Vec<Fact> {
    distinct_vars(rng, pool, max)
        .into_iter()
        .map(|v| Fact::new(v, rng.gen_range(0..vars[v].domain_size())))
        .collect()
}

/// A valid task with 1..=`max_vars` variables, some of them derived.
pub fn random_sas(rng: &mut ChaCha8Rng, max_vars: usize) -> SasTask {
    let n = rng.gen_range(1..=max_vars);
    let variables: Vec<Variable> = (0..n)
        .map(|i| {
            let derived = rng.gen_bool(0.15);
            let size = if derived { 2 } else { rng.gen_range(1..=4) };
            Variable {
                name: format!("var{i}"),
                axiom_layer: if derived { rng.gen_range(0..=2) } else { -1 },
                values: (0..size).map(|d| format!("Atom p{i}(c{d})")).collect(),
            }
        })
        .collect();
    let all: Vec<usize> = (0..n).collect();
    let basic: Vec<usize> = all.iter().copied().filter(|&v| !variables[v].is_derived()).collect();
    let derived: Vec<usize> = all.iter().copied().filter(|&v| variables[v].is_derived()).collect();
    let initial_state = variables.iter().map(|v| rng.gen_range(0..v.domain_size())).collect();
    let goal = random_facts(rng, &variables, &all, 4);
    let mutexes = (0..rng.gen_range(0..3))
        .map(|_| random_facts(rng, &variables, &all, 3))
        .collect();
    let n_ops = if basic.is_empty() { 0 } else { rng.gen_range(0..=20) };
    let operators = (0..n_ops)
        .map(|i| {
            let precondition = random_facts(rng, &variables, &all, 3);
            let mut effect_vars = distinct_vars(rng, &basic, 3);
            if effect_vars.is_empty() {
                effect_vars.push(*basic.choose(rng).unwrap());
            }
            let effects = effect_vars
                .into_iter()
                .map(|var| Effect {
                    condition: if rng.gen_bool(0.3) {
                        random_facts(rng, &variables, &all, 2)
                    } else {
                        vec![]
                    },
                    var,
                    value: rng.gen_range(0..variables[var].domain_size()),
                })
                .collect();
            GroundOperator {
                name: format!("op{i} a b"),
                precondition,
                effects,
                cost: rng.gen_range(0..=10),
            }
        })
        .collect();
    let n_axioms = if derived.is_empty() { 0 } else { rng.gen_range(0..=5) };
    let axioms = (0..n_axioms)
        .map(|_| {
            let var = *derived.choose(rng).unwrap();
            GroundAxiom {
                condition: random_facts(rng, &variables, &all, 3),
                var,
                old_value: rng.gen_bool(0.5).then(|| rng.gen_range(0..2)),
                value: rng.gen_range(0..2),
            }
        })
        .collect();
    SasTask {
        metric: rng.gen_bool(0.5),
        variables,
        mutexes,
        initial_state,
        goal,
        operators,
        axioms,
    }
}

const SYMBOL_TYPES: [SymbolType; 5] = [
    SymbolType::Predicate,
    SymbolType::Function,
    SymbolType::Number,
    SymbolType::Variable,
    SymbolType::Constant,
];

/// Leaf-biased random structure of height at most `depth` and at most
/// `width` children per set or tuple. Symbols come from a small pool so that
/// sharing actually happens.
pub fn random_structure(rng: &mut ChaCha8Rng, depth: u32, width: usize) -> AbstractStructure {
    if depth == 0 || rng.gen_bool(0.45) {
        let name = ["a", "b", "c", "d"][rng.gen_range(0..4)];
        return AbstractStructure::symbol(name, SYMBOL_TYPES[rng.gen_range(0..5)]);
    }
    let k = rng.gen_range(0..=width);
    let children: Vec<_> = (0..k).map(|_| random_structure(rng, depth - 1, width)).collect();
    if rng.gen_bool(0.5) {
        AbstractStructure::set(children)
    } else {
        AbstractStructure::tuple(children)
    }
}

pub fn structure_height(s: &AbstractStructure) -> u32 {
    s.children().iter().map(|c| 1 + structure_height(c)).max().unwrap_or(0)
}

/// Expected (nodes, edges) of the graph of `root`, counted directly on the
/// structure. With sharing every distinct sub-structure is one node; without
/// it only symbols are merged.
pub fn asg_size_oracle(root: &AbstractStructure, sharing: bool) -> (usize, usize) {
    fn contribution(s: &AbstractStructure) -> (usize, usize) {
        match s {
            AbstractStructure::Symbol(_) => (1, 0),
            AbstractStructure::Set(m) => (1, m.len()),
            AbstractStructure::Tuple(c) => (1 + c.len(), 2 * c.len()),
        }
    }
    fn walk<'a>(
        s: &'a AbstractStructure,
        seen: &mut HashSet<&'a AbstractStructure>,
        sharing: bool,
        acc: &mut (usize, usize),
    ) {
        let shared = sharing || matches!(s, AbstractStructure::Symbol(_));
        if shared && !seen.insert(s) {
            return;
        }
        let (n, e) = contribution(s);
        acc.0 += n;
        acc.1 += e;
        for c in s.children() {
            walk(c, seen, sharing, acc);
        }
    }
    let mut acc = (0, 0);
    walk(root, &mut HashSet::new(), sharing, &mut acc);
    acc
}

/// Random digraph on 1..=`max_nodes` nodes with a density chosen per graph.
pub fn random_graph(rng: &mut ChaCha8Rng, max_nodes: usize) -> TypedDigraph {
    let n = rng.gen_range(1..=max_nodes);
    let mut b = GraphBuilder::new(Family::Asg);
    for _ in 0..n {
        b.add_node(NodeKind::Set, "");
    }
    let avg_out = [0.0, 0.5, 1.0, 1.5, 3.0][rng.gen_range(0..5)];
    let m = (n as f64 * avg_out) as usize;
    for _ in 0..m {
        let u = rng.gen_range(0..n as u32);
        let v = rng.gen_range(0..n as u32);
        if u != v {
            b.add_edge(u, v);
        }
    }
    b.finish().unwrap()
}

pub struct Apsp {
    pub diameter: u32,
    pub components: usize,
    pub undirected_edges: usize,
}

/// All-pairs shortest paths on the undirected view by Floyd-Warshall.
pub fn floyd_warshall(g: &TypedDigraph) -> Apsp {
    const INF: u32 = u32::MAX / 2;
    let n = g.num_nodes();
    let mut d = vec![INF; n * n];
    for i in 0..n {
        d[i * n + i] = 0;
    }
    for &(u, v) in g.edges() {
        let (u, v) = (u as usize, v as usize);
        if u != v {
            d[u * n + v] = 1;
            d[v * n + u] = 1;
        }
    }
    let mut undirected_edges = 0;
    for i in 0..n {
        for j in i + 1..n {
            undirected_edges += usize::from(d[i * n + j] == 1);
        }
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i * n + k];
            if dik == INF {
                continue;
            }
            for j in 0..n {
                let via = dik + d[k * n + j];
                if via < d[i * n + j] {
                    d[i * n + j] = via;
                }
            }
        }
    }
    let diameter = d.iter().copied().filter(|&x| x < INF).max().unwrap_or(0);
    // A node starts a new component iff no lower-numbered node reaches it.
    let components = (0..n).filter(|&i| (0..i).all(|j| d[j * n + i] == INF)).count();
    Apsp {
        diameter,
        components,
        undirected_edges,
    }
}

/// Random table of `n` tasks over `domains` domains. About half the entries
/// are censored, and some sit exactly on the 1800 s boundary.
pub fn random_targets(rng: &mut ChaCha8Rng, n: usize, domains: usize) -> TargetTable {
    let rows = (0..n)
        .map(|i| {
            let mut runtimes = [CENSORED_VALUE; NUM_PLANNERS];
            for r in runtimes.iter_mut() {
                *r = match rng.gen_range(0..10) {
                    0..=4 => CENSORED_VALUE,
                    5 => 1800.0,
                    _ => (rng.gen_range(0.0..3000.0f64) * 100.0).round() / 100.0,
                };
            }
            TaskRow {
                id: TaskId(format!("task{i:03}")),
                domain: format!("dom{}", rng.gen_range(0..domains)),
                runtimes,
            }
        })
        .collect();
    TargetTable::new(rows, 1800.0).unwrap()
}

/// Probability 0 at each task's fastest planner, 1 elsewhere.
pub fn oracle_predictions(t: &TargetTable) -> Predictions {
    t.rows()
        .iter()
        .map(|r| {
            let best = (0..NUM_PLANNERS)
                .min_by(|&a, &b| r.runtimes[a].total_cmp(&r.runtimes[b]))
                .unwrap();
            let mut p = vec![1.0; NUM_PLANNERS];
            p[best] = 0.0;
            (r.id.clone(), p)
        })
        .collect()
}

pub fn random_predictions(rng: &mut ChaCha8Rng, t: &TargetTable) -> Predictions {
    t.rows()
        .iter()
        .map(|r| {
            (
                r.id.clone(),
                (0..NUM_PLANNERS).map(|_| rng.gen_range(0.0..1.0)).collect(),
            )
        })
        .collect::<BTreeMap<_, _>>()
}

/// Share of `test` tasks that at least one planner solves below the timeout.
pub fn solvable_fraction(t: &TargetTable, test: &[TaskId]) -> f64 {
    let solvable = test
        .iter()
        .filter(|id| t.get(id).unwrap().runtimes.iter().any(|&r| r < t.timeout))
        .count();
    solvable as f64 / test.len() as f64
}
