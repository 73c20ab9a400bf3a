//! S-expressions to syntax tree.
//!
//! Malformed shapes are [`PddlError::Parse`]; well-formed PDDL outside the
//! supported fragment (durative actions, disjunctions, numeric fluents, ...)
//! is [`PddlError::Validation`].

use std::collections::BTreeSet;

use num_bigint::BigUint;

use super::ast::*;
use super::lexer::Sexpr;
use super::{PddlError, Pos};

fn parse_err<T>(pos: Pos, message: impl Into<String>) -> Result<T, PddlError> {
    Err(PddlError::Parse {
        pos,
        message: message.into(),
    })
}

fn unsupported<T>(pos: Pos, message: impl Into<String>) -> Result<T, PddlError> {
    Err(PddlError::Validation {
        pos,
        message: message.into(),
    })
}

const UNSUPPORTED_FORMULAS: [&str; 4] = ["or", "imply", "exists", "forall"];
const NUMERIC_EFFECTS: [&str; 4] = ["decrease", "assign", "scale-up", "scale-down"];
const RESERVED: [&str; 12] = [
    "and",
    "or",
    "not",
    "imply",
    "exists",
    "forall",
    "when",
    "increase",
    "decrease",
    "assign",
    "scale-up",
    "scale-down",
];

pub(super) struct DomainPart {
    pub name: String,
    pub requirements: BTreeSet<Requirement>,
    pub types: Vec<TypeDecl>,
    pub constants: Vec<TypedName>,
    pub predicates: Vec<PredicateSig>,
    pub functions: Vec<FunctionSig>,
    pub operators: Vec<OperatorSchema>,
    pub axioms: Vec<AxiomSchema>,
}

pub(super) struct ProblemPart {
    pub name: String,
    pub domain_name: String,
    pub domain_pos: Pos,
    pub requirements: BTreeSet<Requirement>,
    pub objects: Vec<TypedName>,
    pub init: Vec<InitEntry>,
    pub goal: Vec<Literal>,
    pub metric: Option<Metric>,
}

fn list<'a>(e: &'a Sexpr, what: &str) -> Result<&'a [Sexpr], PddlError> {
    match e.as_list() {
        Some(items) => Ok(items),
        None => parse_err(e.pos(), format!("expected {what}")),
    }
}

fn word<'a>(e: &'a Sexpr, what: &str) -> Result<&'a str, PddlError> {
    match e.as_word() {
        Some(w) => Ok(w),
        None => parse_err(e.pos(), format!("expected {what}")),
    }
}

fn name<'a>(e: &'a Sexpr, what: &str) -> Result<&'a str, PddlError> {
    let w = word(e, what)?;
    if w.starts_with('?') || w.starts_with(':') || w == "-" {
        return parse_err(e.pos(), format!("expected {what}, found `{w}`"));
    }
    Ok(w)
}

/// `(define (<kind> <name>) sections...)`; returns the name and sections.
fn header<'a>(e: &'a Sexpr, kind: &str) -> Result<(String, &'a [Sexpr]), PddlError> {
    let items = list(e, "`(define ...)`")?;
    match items.first().and_then(Sexpr::as_word) {
        Some("define") => {}
        _ => return parse_err(e.pos(), "expected `(define ...)`"),
    }
    let Some(decl) = items.get(1) else {
        return parse_err(e.pos(), format!("missing `({kind} <name>)`"));
    };
    let decl_items = list(decl, &format!("`({kind} <name>)`"))?;
    match decl_items {
        [k, n] if k.as_word() == Some(kind) => Ok((name(n, &format!("{kind} name"))?.to_string(), &items[2..])),
        _ => parse_err(decl.pos(), format!("expected `({kind} <name>)`")),
    }
}

fn section_keyword(e: &Sexpr) -> Result<(&str, &[Sexpr]), PddlError> {
    let items = list(e, "a section")?;
    match items.first().and_then(Sexpr::as_word) {
        Some(k) if k.starts_with(':') => Ok((k, &items[1..])),
        _ => parse_err(e.pos(), "expected a `(:keyword ...)` section"),
    }
}

fn requirements(items: &[Sexpr], into: &mut BTreeSet<Requirement>) -> Result<(), PddlError> {
    for item in items {
        let flag = word(item, "a requirement flag")?;
        match Requirement::from_keyword(flag) {
            Some(r) => {
                into.insert(r);
            }
            None => return unsupported(item.pos(), format!("unsupported requirement flag `{flag}`")),
        }
    }
    Ok(())
}

/// `a b - t c - u d` style lists. Untyped entries default to `object`.
fn typed_list(items: &[Sexpr], variables: bool) -> Result<Vec<TypedName>, PddlError> {
    let what = if variables { "a variable" } else { "a name" };
    let mut out = Vec::new();
    let mut pending: Vec<(String, Pos)> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let item = &items[i];
        if item.as_word() == Some("-") {
            if pending.is_empty() {
                return parse_err(item.pos(), "`-` without preceding names");
            }
            let ty = match items.get(i + 1) {
                Some(t) if t.head() == Some("either") => {
                    return unsupported(t.pos(), "`either` types are not supported")
                }
                Some(t) => name(t, "a type name")?,
                None => return parse_err(item.pos(), "`-` must be followed by a type"),
            };
            for (n, pos) in pending.drain(..) {
                out.push(TypedName {
                    name: n,
                    type_name: ty.to_string(),
                    pos,
                });
            }
            i += 2;
            continue;
        }
        let w = word(item, what)?;
        if variables != w.starts_with('?') || w.starts_with(':') {
            return parse_err(item.pos(), format!("expected {what}, found `{w}`"));
        }
        pending.push((w.to_string(), item.pos()));
        i += 1;
    }
    out.extend(pending.into_iter().map(|(n, pos)| TypedName {
        name: n,
        type_name: OBJECT_TYPE.to_string(),
        pos,
    }));
    Ok(out)
}

fn term(e: &Sexpr) -> Result<Term, PddlError> {
    match e {
        Sexpr::Word(w, pos) if !w.starts_with(':') && w != "-" => Ok(Term {
            name: w.clone(),
            pos: *pos,
        }),
        Sexpr::List(..) => unsupported(e.pos(), "function terms as arguments are not supported"),
        Sexpr::Number(..) => unsupported(e.pos(), "numeric arguments are not supported"),
        _ => parse_err(e.pos(), "expected a term"),
    }
}

fn atom(e: &Sexpr) -> Result<Atom, PddlError> {
    let items = list(e, "an atom")?;
    let Some(first) = items.first() else {
        return parse_err(e.pos(), "empty atom");
    };
    let predicate = word(first, "a predicate name")?;
    if RESERVED.contains(&predicate) {
        return unsupported(e.pos(), format!("`{predicate}` is not supported in this position"));
    }
    if predicate.starts_with('?') || predicate.starts_with(':') {
        return parse_err(first.pos(), format!("expected a predicate name, found `{predicate}`"));
    }
    Ok(Atom {
        predicate: predicate.to_string(),
        args: items[1..].iter().map(term).collect::<Result<_, _>>()?,
        pos: e.pos(),
    })
}

fn literal(e: &Sexpr) -> Result<Literal, PddlError> {
    if e.head() == Some("not") {
        let items = list(e, "a literal")?;
        if items.len() != 2 {
            return parse_err(e.pos(), "`not` takes exactly one argument");
        }
        if items[1].head() == Some("not") {
            return unsupported(items[1].pos(), "double negation is not supported");
        }
        return Ok(Literal {
            negated: true,
            atom: atom(&items[1])?,
        });
    }
    Ok(Literal {
        negated: false,
        atom: atom(e)?,
    })
}

/// Flattens nested `and`s into a literal list.
fn conjunction(e: &Sexpr, out: &mut Vec<Literal>) -> Result<(), PddlError> {
    match e.head() {
        Some("and") => {
            for c in &list(e, "a conjunction")?[1..] {
                conjunction(c, out)?;
            }
            Ok(())
        }
        Some(h) if UNSUPPORTED_FORMULAS.contains(&h) => unsupported(
            e.pos(),
            format!("`{h}` is not supported; conditions must be conjunctions of literals"),
        ),
        _ if e.as_list().is_some_and(<[Sexpr]>::is_empty) => Ok(()),
        _ => {
            out.push(literal(e)?);
            Ok(())
        }
    }
}

fn function_term(e: &Sexpr) -> Result<FunctionTerm, PddlError> {
    let items = list(e, "a function term")?;
    let Some(first) = items.first() else {
        return parse_err(e.pos(), "empty function term");
    };
    Ok(FunctionTerm {
        function: name(first, "a function name")?.to_string(),
        args: items[1..].iter().map(term).collect::<Result<_, _>>()?,
        pos: e.pos(),
    })
}

struct EffectSink {
    effects: Vec<ConditionalEffect>,
    cost: Option<CostExpr>,
}

fn effect(
    e: &Sexpr,
    params: &[TypedName],
    condition: Option<&[Literal]>,
    sink: &mut EffectSink,
) -> Result<(), PddlError> {
    let head = e.head();
    match head {
        None if e.as_list().is_some_and(<[Sexpr]>::is_empty) => Ok(()),
        Some("and") => {
            for c in &list(e, "an effect")?[1..] {
                effect(c, params, condition, sink)?;
            }
            Ok(())
        }
        Some("forall") => {
            if condition.is_some() {
                return unsupported(e.pos(), "`forall` inside `when` is not supported");
            }
            let items = list(e, "an effect")?;
            let [_, vars, body] = items else {
                return parse_err(e.pos(), "`forall` takes a variable list and an effect");
            };
            let mut all = params.to_vec();
            all.extend(typed_list(list(vars, "a variable list")?, true)?);
            effect(body, &all, None, sink)
        }
        Some("when") => {
            if condition.is_some() {
                return unsupported(e.pos(), "nested `when` is not supported");
            }
            let items = list(e, "an effect")?;
            let [_, cond, body] = items else {
                return parse_err(e.pos(), "`when` takes a condition and an effect");
            };
            let mut lits = Vec::new();
            conjunction(cond, &mut lits)?;
            if body.head() == Some("forall") || body.head() == Some("when") {
                return unsupported(body.pos(), "only literals may appear under `when`");
            }
            effect(body, params, Some(&lits), sink)
        }
        Some("increase") => {
            if !params.is_empty() || condition.is_some() {
                return unsupported(e.pos(), "conditional or quantified cost effects are not supported");
            }
            let items = list(e, "an effect")?;
            let [_, target, value] = items else {
                return parse_err(e.pos(), "`increase` takes a target and a value");
            };
            let target = function_term(target)?;
            if target.function != TOTAL_COST || !target.args.is_empty() {
                return unsupported(
                    e.pos(),
                    format!("only `(increase ({TOTAL_COST}) ...)` is supported, found `{target}`"),
                );
            }
            if sink.cost.is_some() {
                return unsupported(e.pos(), "more than one cost effect");
            }
            sink.cost = Some(match value {
                Sexpr::Number(n, pos) => CostExpr::Constant(n.clone(), *pos),
                other => CostExpr::Function(function_term(other)?),
            });
            Ok(())
        }
        Some(h) if NUMERIC_EFFECTS.contains(&h) => {
            unsupported(e.pos(), format!("numeric effect `{h}` is not supported"))
        }
        Some(h) if UNSUPPORTED_FORMULAS.contains(&h) => {
            unsupported(e.pos(), format!("`{h}` is not supported in effects"))
        }
        _ => {
            let lit = literal(e)?;
            sink.effects.push(ConditionalEffect {
                params: params.to_vec(),
                condition: condition.map(<[Literal]>::to_vec).unwrap_or_default(),
                effect: lit,
                pos: e.pos(),
            });
            Ok(())
        }
    }
}

fn action(e: &Sexpr, items: &[Sexpr]) -> Result<OperatorSchema, PddlError> {
    let Some(n) = items.first() else {
        return parse_err(e.pos(), "`:action` needs a name");
    };
    let op_name = name(n, "an action name")?.to_string();
    let mut parameters = None;
    let mut precondition = None;
    let mut effect_expr = None;
    let mut rest = items[1..].iter();
    while let Some(k) = rest.next() {
        let key = word(k, "an action keyword")?;
        let Some(value) = rest.next() else {
            return parse_err(k.pos(), format!("`{key}` needs a value"));
        };
        let slot = match key {
            ":parameters" => &mut parameters,
            ":precondition" => &mut precondition,
            ":effect" => &mut effect_expr,
            _ => return parse_err(k.pos(), format!("unknown action keyword `{key}`")),
        };
        if slot.replace(value).is_some() {
            return parse_err(k.pos(), format!("duplicate `{key}`"));
        }
    }
    let parameters = match parameters {
        Some(p) => typed_list(list(p, "a parameter list")?, true)?,
        None => Vec::new(),
    };
    let mut pre = Vec::new();
    if let Some(p) = precondition {
        conjunction(p, &mut pre)?;
    }
    let mut sink = EffectSink {
        effects: Vec::new(),
        cost: None,
    };
    if let Some(eff) = effect_expr {
        effect(eff, &[], None, &mut sink)?;
    }
    Ok(OperatorSchema {
        name: op_name,
        parameters,
        precondition: pre,
        effects: sink.effects,
        cost: sink.cost,
        pos: e.pos(),
    })
}

fn derived(e: &Sexpr, items: &[Sexpr]) -> Result<AxiomSchema, PddlError> {
    let [head, body] = items else {
        return parse_err(e.pos(), "`:derived` takes a head and a body");
    };
    let head_items = list(head, "a derived predicate head")?;
    let Some(p) = head_items.first() else {
        return parse_err(head.pos(), "empty derived predicate head");
    };
    let predicate = name(p, "a predicate name")?.to_string();
    let parameters = typed_list(&head_items[1..], true)?;
    let mut quantified = Vec::new();
    let mut body = body;
    while body.head() == Some("exists") {
        let items = list(body, "a formula")?;
        let [_, vars, inner] = items else {
            return parse_err(body.pos(), "`exists` takes a variable list and a formula");
        };
        quantified.extend(typed_list(list(vars, "a variable list")?, true)?);
        body = inner;
    }
    let mut lits = Vec::new();
    conjunction(body, &mut lits)?;
    Ok(AxiomSchema {
        predicate,
        parameters,
        quantified,
        body: lits,
        pos: e.pos(),
    })
}

fn predicate_sigs(items: &[Sexpr]) -> Result<Vec<PredicateSig>, PddlError> {
    items
        .iter()
        .map(|p| {
            let parts = list(p, "a predicate declaration")?;
            let Some(n) = parts.first() else {
                return parse_err(p.pos(), "empty predicate declaration");
            };
            Ok(PredicateSig {
                name: word(n, "a predicate name")?.to_string(),
                params: typed_list(&parts[1..], true)?,
                pos: p.pos(),
            })
        })
        .collect()
}

fn function_sigs(items: &[Sexpr]) -> Result<Vec<FunctionSig>, PddlError> {
    let mut out = Vec::new();
    let mut pending = 0;
    let mut i = 0;
    while i < items.len() {
        let item = &items[i];
        if item.as_word() == Some("-") {
            let ty = match items.get(i + 1) {
                Some(t) => word(t, "a function type")?,
                None => return parse_err(item.pos(), "`-` must be followed by a type"),
            };
            if ty != "number" {
                return unsupported(item.pos(), format!("functions of type `{ty}` are not supported"));
            }
            if pending == 0 {
                return parse_err(item.pos(), "`-` without preceding functions");
            }
            pending = 0;
            i += 2;
            continue;
        }
        let parts = list(item, "a function declaration")?;
        let Some(n) = parts.first() else {
            return parse_err(item.pos(), "empty function declaration");
        };
        out.push(FunctionSig {
            name: name(n, "a function name")?.to_string(),
            params: typed_list(&parts[1..], true)?,
            pos: item.pos(),
        });
        pending += 1;
        i += 1;
    }
    Ok(out)
}

pub(super) fn parse_domain(e: &Sexpr) -> Result<DomainPart, PddlError> {
    let (domain_name, sections) = header(e, "domain")?;
    let mut part = DomainPart {
        name: domain_name,
        requirements: BTreeSet::new(),
        types: Vec::new(),
        constants: Vec::new(),
        predicates: Vec::new(),
        functions: Vec::new(),
        operators: Vec::new(),
        axioms: Vec::new(),
    };
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for s in sections {
        let (key, items) = section_keyword(s)?;
        let once = matches!(
            key,
            ":requirements" | ":types" | ":constants" | ":predicates" | ":functions"
        );
        if once && !seen.insert(key) {
            return parse_err(s.pos(), format!("duplicate `{key}` section"));
        }
        match key {
            ":requirements" => requirements(items, &mut part.requirements)?,
            ":types" => {
                part.types = typed_list(items, false)?
                    .into_iter()
                    .filter(|t| t.name != OBJECT_TYPE)
                    .map(|t| TypeDecl {
                        name: t.name,
                        parent: t.type_name,
                        pos: t.pos,
                    })
                    .collect()
            }
            ":constants" => part.constants = typed_list(items, false)?,
            ":predicates" => part.predicates = predicate_sigs(items)?,
            ":functions" => part.functions = function_sigs(items)?,
            ":action" => part.operators.push(action(s, items)?),
            ":derived" => part.axioms.push(derived(s, items)?),
            ":durative-action" | ":process" | ":event" | ":constraints" => {
                return unsupported(s.pos(), format!("`{key}` is not supported"))
            }
            _ => return parse_err(s.pos(), format!("unknown domain section `{key}`")),
        }
    }
    Ok(part)
}

pub(super) fn parse_problem(e: &Sexpr) -> Result<ProblemPart, PddlError> {
    let (problem_name, sections) = header(e, "problem")?;
    let mut domain = None;
    let mut requirement_set = BTreeSet::new();
    let mut objects = Vec::new();
    let mut init = None;
    let mut goal = None;
    let mut metric = None;
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for s in sections {
        let (key, items) = section_keyword(s)?;
        if !seen.insert(key) {
            return parse_err(s.pos(), format!("duplicate `{key}` section"));
        }
        match key {
            ":domain" => match items {
                [d] => domain = Some((name(d, "a domain name")?.to_string(), d.pos())),
                _ => return parse_err(s.pos(), "`:domain` takes one name"),
            },
            ":requirements" => requirements(items, &mut requirement_set)?,
            ":objects" => objects = typed_list(items, false)?,
            ":init" => init = Some(init_entries(items)?),
            ":goal" => match items {
                [g] => {
                    let mut lits = Vec::new();
                    conjunction(g, &mut lits)?;
                    goal = Some(lits);
                }
                _ => return parse_err(s.pos(), "`:goal` takes one formula"),
            },
            ":metric" => match items {
                [dir, expr] => {
                    let minimize = match word(dir, "`minimize` or `maximize`")? {
                        "minimize" => true,
                        "maximize" => false,
                        other => return parse_err(dir.pos(), format!("unknown metric direction `{other}`")),
                    };
                    metric = Some(Metric {
                        minimize,
                        term: function_term(expr)?,
                        pos: s.pos(),
                    });
                }
                _ => return parse_err(s.pos(), "`:metric` takes a direction and an expression"),
            },
            ":constraints" => return unsupported(s.pos(), "`:constraints` is not supported"),
            _ => return parse_err(s.pos(), format!("unknown problem section `{key}`")),
        }
    }
    let Some((domain_name, domain_pos)) = domain else {
        return parse_err(e.pos(), "missing `(:domain ...)`");
    };
    let Some(goal) = goal else {
        return parse_err(e.pos(), "missing `(:goal ...)`");
    };
    Ok(ProblemPart {
        name: problem_name,
        domain_name,
        domain_pos,
        requirements: requirement_set,
        objects,
        init: init.unwrap_or_default(),
        goal,
        metric,
    })
}

fn init_entries(items: &[Sexpr]) -> Result<Vec<InitEntry>, PddlError> {
    items
        .iter()
        .map(|item| {
            let parts = list(item, "an initial fact")?;
            match (item.head(), parts.get(1)) {
                (Some("="), Some(Sexpr::List(..))) => {
                    let [_, t, v] = parts else {
                        return parse_err(item.pos(), "`=` takes a function term and a value");
                    };
                    let value: BigUint = match v {
                        Sexpr::Number(n, _) => n.clone(),
                        _ => return unsupported(v.pos(), "function values must be nonnegative integers"),
                    };
                    Ok(InitEntry::Assign {
                        term: function_term(t)?,
                        value,
                        pos: item.pos(),
                    })
                }
                (Some("not"), _) => unsupported(item.pos(), "negative literals in the initial state"),
                (Some("at"), Some(Sexpr::Number(..))) => {
                    unsupported(item.pos(), "timed initial literals are not supported")
                }
                _ => Ok(InitEntry::Atom(atom(item)?)),
            }
        })
        .collect()
}
