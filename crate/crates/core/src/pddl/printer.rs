//! Pretty-printer. Output re-parses to an equal document.

use std::fmt::Write;

use super::ast::*;

fn typed(out: &mut String, names: &[TypedName]) {
    for (i, n) in names.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{} - {}", n.name, n.type_name);
    }
}

fn conjunction(out: &mut String, lits: &[Literal]) {
    out.push_str("(and");
    for l in lits {
        let _ = write!(out, " {l}");
    }
    out.push(')');
}

fn conditional_effect(out: &mut String, ce: &ConditionalEffect) {
    if !ce.params.is_empty() {
        out.push_str("(forall (");
        typed(out, &ce.params);
        out.push_str(") ");
    }
    if ce.condition.is_empty() {
        let _ = write!(out, "{}", ce.effect);
    } else {
        out.push_str("(when ");
        conjunction(out, &ce.condition);
        let _ = write!(out, " {})", ce.effect);
    }
    if !ce.params.is_empty() {
        out.push(')');
    }
}

pub fn print_domain(doc: &PddlDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (domain {})", doc.domain_name);
    if !doc.requirements.is_empty() {
        out.push_str("  (:requirements");
        for r in &doc.requirements {
            let _ = write!(out, " {}", r.keyword());
        }
        out.push_str(")\n");
    }
    if !doc.types.is_empty() {
        out.push_str("  (:types");
        for t in &doc.types {
            let _ = write!(out, " {} - {}", t.name, t.parent);
        }
        out.push_str(")\n");
    }
    if !doc.constants.is_empty() {
        out.push_str("  (:constants ");
        typed(&mut out, &doc.constants);
        out.push_str(")\n");
    }
    if !doc.predicates.is_empty() {
        out.push_str("  (:predicates");
        for p in &doc.predicates {
            let _ = write!(out, "\n    ({}", p.name);
            if !p.params.is_empty() {
                out.push(' ');
                typed(&mut out, &p.params);
            }
            out.push(')');
        }
        out.push_str(")\n");
    }
    if !doc.functions.is_empty() {
        out.push_str("  (:functions");
        for f in &doc.functions {
            let _ = write!(out, "\n    ({}", f.name);
            if !f.params.is_empty() {
                out.push(' ');
                typed(&mut out, &f.params);
            }
            out.push_str(") - number");
        }
        out.push_str(")\n");
    }
    for op in &doc.operators {
        let _ = write!(out, "  (:action {}\n    :parameters (", op.name);
        typed(&mut out, &op.parameters);
        out.push_str(")\n    :precondition ");
        conjunction(&mut out, &op.precondition);
        out.push_str("\n    :effect (and");
        for ce in &op.effects {
            out.push_str("\n      ");
            conditional_effect(&mut out, ce);
        }
        if let Some(cost) = &op.cost {
            let _ = write!(out, "\n      (increase ({TOTAL_COST}) {cost})");
        }
        out.push_str("))\n");
    }
    for ax in &doc.axioms {
        let _ = write!(out, "  (:derived ({}", ax.predicate);
        if !ax.parameters.is_empty() {
            out.push(' ');
            typed(&mut out, &ax.parameters);
        }
        out.push_str(")\n    ");
        if !ax.quantified.is_empty() {
            out.push_str("(exists (");
            typed(&mut out, &ax.quantified);
            out.push_str(") ");
        }
        conjunction(&mut out, &ax.body);
        if !ax.quantified.is_empty() {
            out.push(')');
        }
        out.push_str(")\n");
    }
    out.push_str(")\n");
    out
}

pub fn print_problem(doc: &PddlDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (problem {})", doc.problem_name);
    let _ = writeln!(out, "  (:domain {})", doc.domain_name);
    if !doc.objects.is_empty() {
        out.push_str("  (:objects ");
        typed(&mut out, &doc.objects);
        out.push_str(")\n");
    }
    out.push_str("  (:init");
    for entry in &doc.init {
        match entry {
            InitEntry::Atom(a) => {
                let _ = write!(out, "\n    {a}");
            }
            InitEntry::Assign { term, value, .. } => {
                let _ = write!(out, "\n    (= {term} {value})");
            }
        }
    }
    out.push_str(")\n  (:goal ");
    conjunction(&mut out, &doc.goal);
    out.push_str(")\n");
    if let Some(m) = &doc.metric {
        let dir = if m.minimize { "minimize" } else { "maximize" };
        let _ = writeln!(out, "  (:metric {dir} {})", m.term);
    }
    out.push_str(")\n");
    out
}
