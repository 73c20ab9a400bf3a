//! Syntax tree for the supported PDDL fragment.
//!
//! Every node keeps the [`Pos`] it was parsed from. Positions never take part
//! in equality, so a re-parsed document compares equal to the original.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;

use super::Pos;

/// The root type every typed name falls back to.
pub const OBJECT_TYPE: &str = "object";
pub const TOTAL_COST: &str = "total-cost";
pub const EQUALITY: &str = "=";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Requirement {
    Strips,
    Typing,
    NegativePreconditions,
    Equality,
    ConditionalEffects,
    ActionCosts,
    DerivedPredicates,
    ExistentialPreconditions,
    Adl,
}

impl Requirement {
    pub const ALL: [Requirement; 9] = [
        Requirement::Strips,
        Requirement::Typing,
        Requirement::NegativePreconditions,
        Requirement::Equality,
        Requirement::ConditionalEffects,
        Requirement::ActionCosts,
        Requirement::DerivedPredicates,
        Requirement::ExistentialPreconditions,
        Requirement::Adl,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Requirement::Strips => ":strips",
            Requirement::Typing => ":typing",
            Requirement::NegativePreconditions => ":negative-preconditions",
            Requirement::Equality => ":equality",
            Requirement::ConditionalEffects => ":conditional-effects",
            Requirement::ActionCosts => ":action-costs",
            Requirement::DerivedPredicates => ":derived-predicates",
            Requirement::ExistentialPreconditions => ":existential-preconditions",
            Requirement::Adl => ":adl",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Requirement> {
        Requirement::ALL.into_iter().find(|r| r.keyword() == s)
    }
}

/// A name with its declared type: `?x - block`, `a - object`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypedName {
    pub name: String,
    pub type_name: String,
    pub pos: Pos,
}

/// `(:types child - parent)` entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: String,
    pub parent: String,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateSig {
    pub name: String,
    pub params: Vec<TypedName>,
    pub pos: Pos,
}

/// Numeric function; only `number`-valued functions are supported.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionSig {
    pub name: String,
    pub params: Vec<TypedName>,
    pub pos: Pos,
}

/// A variable (`?x`) or an object/constant name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub name: String,
    pub pos: Pos,
}

impl Term {
    pub fn is_variable(&self) -> bool {
        self.name.starts_with('?')
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Literal {
    pub negated: bool,
    pub atom: Atom,
}

/// Function application `(f t1 .. tn)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionTerm {
    pub function: String,
    pub args: Vec<Term>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CostExpr {
    Constant(BigUint, Pos),
    Function(FunctionTerm),
}

/// `forall params: when condition then literal`. Plain effects have no
/// parameters and an empty condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionalEffect {
    pub params: Vec<TypedName>,
    pub condition: Vec<Literal>,
    pub effect: Literal,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorSchema {
    pub name: String,
    pub parameters: Vec<TypedName>,
    /// Conjunction of literals.
    pub precondition: Vec<Literal>,
    pub effects: Vec<ConditionalEffect>,
    /// `(increase (total-cost) ...)`, if present.
    pub cost: Option<CostExpr>,
    pub pos: Pos,
}

/// `(:derived (head params) (exists (quantified) body))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomSchema {
    pub predicate: String,
    pub parameters: Vec<TypedName>,
    pub quantified: Vec<TypedName>,
    /// Conjunction of literals.
    pub body: Vec<Literal>,
    pub pos: Pos,
}

impl AxiomSchema {
    pub fn head(&self) -> Atom {
        Atom {
            predicate: self.predicate.clone(),
            args: self
                .parameters
                .iter()
                .map(|p| Term {
                    name: p.name.clone(),
                    pos: p.pos,
                })
                .collect(),
            pos: self.pos,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InitEntry {
    Atom(Atom),
    Assign {
        term: FunctionTerm,
        value: BigUint,
        pos: Pos,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Metric {
    pub minimize: bool,
    pub term: FunctionTerm,
    pub pos: Pos,
}

/// Domain and problem together.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PddlDocument {
    pub domain_name: String,
    pub problem_name: String,
    pub requirements: BTreeSet<Requirement>,
    /// Declared types other than `object`, in declaration order.
    pub types: Vec<TypeDecl>,
    pub predicates: Vec<PredicateSig>,
    pub functions: Vec<FunctionSig>,
    pub constants: Vec<TypedName>,
    pub operators: Vec<OperatorSchema>,
    pub axioms: Vec<AxiomSchema>,
    pub objects: Vec<TypedName>,
    pub init: Vec<InitEntry>,
    /// Conjunction of ground literals.
    pub goal: Vec<Literal>,
    pub metric: Option<Metric>,
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "(not {})", self.atom)
        } else {
            write!(f, "{}", self.atom)
        }
    }
}

impl fmt::Display for FunctionTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.function)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for CostExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostExpr::Constant(n, _) => write!(f, "{n}"),
            CostExpr::Function(t) => write!(f, "{t}"),
        }
    }
}
