//! Lifted task to abstract structure.
//!
//! Encoding (see also `docs/asg-encoding.md`):
//!
//! | construct | structure |
//! |---|---|
//! | task | tuple `<operators, axioms, init, goal, declarations>` |
//! | atom `(p t1 .. tn)` | tuple `<p, t1, .., tn>` |
//! | negated atom | 1-tuple `<atom>` |
//! | conjunction, operator set, axiom set, init, goal | set |
//! | typed name `?x - t` | tuple `<?x, t>` |
//! | parameter list | tuple of typed names |
//! | operator | tuple `<parameters, precondition, effects, cost>` |
//! | conditional effect | tuple `<forall parameters, condition, literal>` |
//! | cost | empty tuple, or 1-tuple of a number or function term |
//! | function term `(f t1 .. tn)` | tuple `<f, t1, .., tn>` |
//! | init assignment `(= (f ..) n)` | tuple `<function term, n>` |
//! | axiom | tuple `<head atom, head parameters, quantified variables, body>` |
//! | declarations | tuple `<types, predicates, functions, objects>`, each a set |
//! | type declaration | tuple `<type, parent>`; `object` is the 1-tuple `<object>` |
//! | predicate/function signature | tuple `<name, parameter types..>` |
//! | object or constant | tuple `<name, type>` |
//!
//! Symbol types: predicates, `=` and type names are `predicate`; functions
//! are `function`; integers are `number`; `?names` are `variable`; object and
//! constant names are `constant`. Operator names and the metric are not
//! encoded.

use crate::asg::{AbstractStructure as S, SymbolType};

use super::ast::*;

fn predicate(name: &str) -> S {
    S::symbol(name, SymbolType::Predicate)
}

fn term(t: &Term) -> S {
    let ty = if t.is_variable() {
        SymbolType::Variable
    } else {
        SymbolType::Constant
    };
    S::symbol(&t.name, ty)
}

fn atom(a: &Atom) -> S {
    S::tuple(std::iter::once(predicate(&a.predicate)).chain(a.args.iter().map(term)))
}

fn literal(l: &Literal) -> S {
    if l.negated {
        S::tuple([atom(&l.atom)])
    } else {
        atom(&l.atom)
    }
}

fn conjunction(lits: &[Literal]) -> S {
    S::set(lits.iter().map(literal))
}

fn typed_name(n: &TypedName) -> S {
    let ty = if n.name.starts_with('?') {
        SymbolType::Variable
    } else {
        SymbolType::Constant
    };
    S::tuple([S::symbol(&n.name, ty), predicate(&n.type_name)])
}

fn parameters(params: &[TypedName]) -> S {
    S::tuple(params.iter().map(typed_name))
}

fn function_term(f: &FunctionTerm) -> S {
    S::tuple(std::iter::once(S::symbol(&f.function, SymbolType::Function)).chain(f.args.iter().map(term)))
}

fn number(n: &num_bigint::BigUint) -> S {
    S::symbol(n.to_string(), SymbolType::Number)
}

fn operator(op: &OperatorSchema) -> S {
    let effects = S::set(
        op.effects
            .iter()
            .map(|ce| S::tuple([parameters(&ce.params), conjunction(&ce.condition), literal(&ce.effect)])),
    );
    let cost = S::tuple(op.cost.iter().map(|c| match c {
        CostExpr::Constant(n, _) => number(n),
        CostExpr::Function(f) => function_term(f),
    }));
    S::tuple([parameters(&op.parameters), conjunction(&op.precondition), effects, cost])
}

fn axiom(ax: &AxiomSchema) -> S {
    S::tuple([
        atom(&ax.head()),
        parameters(&ax.parameters),
        parameters(&ax.quantified),
        conjunction(&ax.body),
    ])
}

fn signature(name: S, params: &[TypedName]) -> S {
    S::tuple(std::iter::once(name).chain(params.iter().map(|p| predicate(&p.type_name))))
}

fn declarations(doc: &PddlDocument) -> S {
    let types = S::set(
        std::iter::once(S::tuple([predicate(OBJECT_TYPE)])).chain(
            doc.types
                .iter()
                .map(|t| S::tuple([predicate(&t.name), predicate(&t.parent)])),
        ),
    );
    let predicates = S::set(doc.predicates.iter().map(|p| signature(predicate(&p.name), &p.params)));
    let functions = S::set(
        doc.functions
            .iter()
            .map(|f| signature(S::symbol(&f.name, SymbolType::Function), &f.params)),
    );
    let objects = S::set(doc.constants.iter().chain(&doc.objects).map(typed_name));
    S::tuple([types, predicates, functions, objects])
}

/// Lowers a validated document to one root structure.
pub fn to_abstract_structure(doc: &PddlDocument) -> S {
    let init = S::set(doc.init.iter().map(|e| match e {
        InitEntry::Atom(a) => atom(a),
        InitEntry::Assign { term, value, .. } => S::tuple([function_term(term), number(value)]),
    }));
    S::tuple([
        S::set(doc.operators.iter().map(operator)),
        S::set(doc.axioms.iter().map(axiom)),
        init,
        conjunction(&doc.goal),
        declarations(doc),
    ])
}
