//! Declaration and scoping checks on a parsed document.

use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::{PddlError, Pos};

fn invalid<T>(pos: Pos, message: impl Into<String>) -> Result<T, PddlError> {
    Err(PddlError::Validation {
        pos,
        message: message.into(),
    })
}

struct Scope<'a> {
    types: HashSet<&'a str>,
    predicates: HashMap<&'a str, usize>,
    functions: HashMap<&'a str, usize>,
    derived: HashSet<&'a str>,
    constants: HashSet<&'a str>,
    /// Constants plus problem objects.
    objects: HashSet<&'a str>,
}

fn distinct_names<'a>(names: impl IntoIterator<Item = (&'a str, Pos)>, what: &str) -> Result<(), PddlError> {
    let mut seen = HashSet::new();
    for (n, pos) in names {
        if !seen.insert(n) {
            return invalid(pos, format!("duplicate {what} `{n}`"));
        }
    }
    Ok(())
}

impl<'a> Scope<'a> {
    fn check_type(&self, t: &TypedName) -> Result<(), PddlError> {
        if !self.types.contains(t.type_name.as_str()) {
            return invalid(t.pos, format!("undeclared type `{}`", t.type_name));
        }
        Ok(())
    }

    fn check_params(&self, params: &[TypedName]) -> Result<(), PddlError> {
        distinct_names(params.iter().map(|p| (p.name.as_str(), p.pos)), "parameter")?;
        params.iter().try_for_each(|p| self.check_type(p))
    }

    fn check_term(&self, t: &Term, bound: &HashSet<&str>, ground_scope: &HashSet<&str>) -> Result<(), PddlError> {
        if t.is_variable() {
            if !bound.contains(t.name.as_str()) {
                return invalid(t.pos, format!("unbound variable `{}`", t.name));
            }
        } else if !ground_scope.contains(t.name.as_str()) {
            return invalid(t.pos, format!("undeclared object or constant `{}`", t.name));
        }
        Ok(())
    }

    fn check_atom(&self, a: &Atom, bound: &HashSet<&str>, ground_scope: &HashSet<&str>) -> Result<(), PddlError> {
        let arity = if a.predicate == EQUALITY {
            2
        } else {
            match self.predicates.get(a.predicate.as_str()) {
                Some(&n) => n,
                None => return invalid(a.pos, format!("undeclared predicate `{}`", a.predicate)),
            }
        };
        if a.args.len() != arity {
            return invalid(
                a.pos,
                format!(
                    "predicate `{}` takes {arity} argument(s), got {}",
                    a.predicate,
                    a.args.len()
                ),
            );
        }
        a.args.iter().try_for_each(|t| self.check_term(t, bound, ground_scope))
    }

    fn check_literals(
        &self,
        lits: &[Literal],
        bound: &HashSet<&str>,
        ground_scope: &HashSet<&str>,
    ) -> Result<(), PddlError> {
        lits.iter()
            .try_for_each(|l| self.check_atom(&l.atom, bound, ground_scope))
    }

    fn check_function_term(
        &self,
        f: &FunctionTerm,
        bound: &HashSet<&str>,
        ground_scope: &HashSet<&str>,
    ) -> Result<(), PddlError> {
        let Some(&arity) = self.functions.get(f.function.as_str()) else {
            return invalid(f.pos, format!("undeclared function `{}`", f.function));
        };
        if f.args.len() != arity {
            return invalid(
                f.pos,
                format!(
                    "function `{}` takes {arity} argument(s), got {}",
                    f.function,
                    f.args.len()
                ),
            );
        }
        f.args.iter().try_for_each(|t| self.check_term(t, bound, ground_scope))
    }

    fn check_changeable(&self, a: &Atom) -> Result<(), PddlError> {
        if a.predicate == EQUALITY {
            return invalid(a.pos, "equality cannot be an effect or initial fact");
        }
        if self.derived.contains(a.predicate.as_str()) {
            return invalid(
                a.pos,
                format!("derived predicate `{}` cannot be set directly", a.predicate),
            );
        }
        Ok(())
    }
}

fn check_type_hierarchy(doc: &PddlDocument, types: &HashSet<&str>) -> Result<(), PddlError> {
    distinct_names(doc.types.iter().map(|t| (t.name.as_str(), t.pos)), "type")?;
    let parent: HashMap<&str, &str> = doc.types.iter().map(|t| (t.name.as_str(), t.parent.as_str())).collect();
    for t in &doc.types {
        if !types.contains(t.parent.as_str()) {
            return invalid(t.pos, format!("undeclared parent type `{}`", t.parent));
        }
        let mut current = t.name.as_str();
        for _ in 0..=doc.types.len() {
            match parent.get(current) {
                Some(&p) => current = p,
                None => break,
            }
        }
        if parent.contains_key(current) {
            return invalid(t.pos, format!("type `{}` is part of a cycle", t.name));
        }
    }
    Ok(())
}

pub(super) fn validate(doc: &PddlDocument) -> Result<(), PddlError> {
    let mut types: HashSet<&str> = doc.types.iter().map(|t| t.name.as_str()).collect();
    types.insert(OBJECT_TYPE);
    check_type_hierarchy(doc, &types)?;

    distinct_names(doc.predicates.iter().map(|p| (p.name.as_str(), p.pos)), "predicate")?;
    distinct_names(doc.functions.iter().map(|f| (f.name.as_str(), f.pos)), "function")?;
    distinct_names(
        doc.constants
            .iter()
            .chain(&doc.objects)
            .map(|o| (o.name.as_str(), o.pos)),
        "object or constant",
    )?;
    distinct_names(doc.operators.iter().map(|o| (o.name.as_str(), o.pos)), "action")?;

    let scope = Scope {
        types,
        predicates: doc
            .predicates
            .iter()
            .map(|p| (p.name.as_str(), p.params.len()))
            .collect(),
        functions: doc
            .functions
            .iter()
            .map(|f| (f.name.as_str(), f.params.len()))
            .collect(),
        derived: doc.axioms.iter().map(|a| a.predicate.as_str()).collect(),
        constants: doc.constants.iter().map(|c| c.name.as_str()).collect(),
        objects: doc
            .constants
            .iter()
            .chain(&doc.objects)
            .map(|c| c.name.as_str())
            .collect(),
    };

    for p in &doc.predicates {
        if p.name == EQUALITY {
            return invalid(p.pos, "`=` is built in and cannot be declared");
        }
        scope.check_params(&p.params)?;
    }
    for f in &doc.functions {
        scope.check_params(&f.params)?;
    }
    for o in doc.constants.iter().chain(&doc.objects) {
        scope.check_type(o)?;
    }

    for op in &doc.operators {
        scope.check_params(&op.parameters)?;
        let bound: HashSet<&str> = op.parameters.iter().map(|p| p.name.as_str()).collect();
        scope.check_literals(&op.precondition, &bound, &scope.constants)?;
        for ce in &op.effects {
            scope.check_params(&ce.params)?;
            if let Some(p) = ce.params.iter().find(|p| bound.contains(p.name.as_str())) {
                return invalid(p.pos, format!("`{}` shadows an action parameter", p.name));
            }
            let mut inner = bound.clone();
            inner.extend(ce.params.iter().map(|p| p.name.as_str()));
            scope.check_literals(&ce.condition, &inner, &scope.constants)?;
            scope.check_atom(&ce.effect.atom, &inner, &scope.constants)?;
            scope.check_changeable(&ce.effect.atom)?;
        }
        if let Some(CostExpr::Function(f)) = &op.cost {
            scope.check_function_term(f, &bound, &scope.constants)?;
        }
        if op.cost.is_some() && !scope.functions.contains_key(TOTAL_COST) {
            return invalid(op.pos, format!("`{TOTAL_COST}` is used but not declared"));
        }
    }

    for ax in &doc.axioms {
        let Some(&arity) = scope.predicates.get(ax.predicate.as_str()) else {
            return invalid(ax.pos, format!("derived predicate `{}` is not declared", ax.predicate));
        };
        if arity != ax.parameters.len() {
            return invalid(
                ax.pos,
                format!(
                    "predicate `{}` takes {arity} argument(s), got {}",
                    ax.predicate,
                    ax.parameters.len()
                ),
            );
        }
        scope.check_params(&ax.parameters)?;
        scope.check_params(&ax.quantified)?;
        if let Some(q) = ax
            .quantified
            .iter()
            .find(|q| ax.parameters.iter().any(|p| p.name == q.name))
        {
            return invalid(q.pos, format!("`{}` shadows a head variable", q.name));
        }
        let bound: HashSet<&str> = ax
            .parameters
            .iter()
            .chain(&ax.quantified)
            .map(|p| p.name.as_str())
            .collect();
        scope.check_literals(&ax.body, &bound, &scope.constants)?;
    }

    let none = HashSet::new();
    for entry in &doc.init {
        match entry {
            InitEntry::Atom(a) => {
                scope.check_atom(a, &none, &scope.objects)?;
                scope.check_changeable(a)?;
            }
            InitEntry::Assign { term, .. } => scope.check_function_term(term, &none, &scope.objects)?,
        }
    }
    scope.check_literals(&doc.goal, &none, &scope.objects)?;
    if let Some(m) = &doc.metric {
        scope.check_function_term(&m.term, &none, &scope.objects)?;
    }
    Ok(())
}
