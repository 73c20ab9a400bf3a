//! Lifted tasks in PDDL.
//!
//! Supported fragment: STRIPS with typing, negative preconditions,
//! equality, conditional and universally quantified effects, action costs
//! and derived predicates. Conditions are conjunctions of literals; axiom
//! bodies may be wrapped in `exists`. Identifiers are case-insensitive and
//! lower-cased while lexing; numbers are nonnegative integers.

mod ast;
mod lexer;
mod lower;
mod parser;
mod printer;
mod validate;

pub use ast::*;
pub use lower::to_abstract_structure;
pub use printer::{print_domain, print_problem};

use std::fmt;

use thiserror::Error;

/// Which input file a position refers to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Source {
    #[default]
    Domain,
    Problem,
}

/// 1-based line and column. Positions compare equal to each other so they
/// never affect structural equality of syntax trees.
#[derive(Clone, Copy, Debug, Default)]
pub struct Pos {
    pub source: Source,
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Pos {
    fn eq(&self, _: &Pos) -> bool {
        true
    }
}

impl Eq for Pos {}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PddlError {
    #[error("{pos}: lex error: {message}")]
    Lex { pos: Pos, message: String },
    #[error("{pos}: parse error: {message}")]
    Parse { pos: Pos, message: String },
    #[error("{pos}: validation error: {message}")]
    Validation { pos: Pos, message: String },
}

impl PddlError {
    pub fn pos(&self) -> Pos {
        match self {
            PddlError::Lex { pos, .. } | PddlError::Parse { pos, .. } | PddlError::Validation { pos, .. } => *pos,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            PddlError::Lex { message, .. }
            | PddlError::Parse { message, .. }
            | PddlError::Validation { message, .. } => message,
        }
    }

    /// `file:line:col: error: message`, naming whichever file the error is in.
    pub fn diagnostic(&self, domain_file: &str, problem_file: &str) -> String {
        let pos = self.pos();
        let file = match pos.source {
            Source::Domain => domain_file,
            Source::Problem => problem_file,
        };
        let kind = match self {
            PddlError::Lex { .. } => "lex error",
            PddlError::Parse { .. } => "parse error",
            PddlError::Validation { .. } => "validation error",
        };
        format!("{file}:{}:{}: error: {kind}: {}", pos.line, pos.col, self.message())
    }
}

/// Parses and validates a domain/problem pair.
pub fn parse_pddl(domain_text: &str, problem_text: &str) -> Result<PddlDocument, PddlError> {
    let domain_tokens = lexer::tokenize(domain_text, Source::Domain)?;
    let problem_tokens = lexer::tokenize(problem_text, Source::Problem)?;
    let domain = parser::parse_domain(&lexer::read_document(&domain_tokens, Source::Domain)?)?;
    let problem = parser::parse_problem(&lexer::read_document(&problem_tokens, Source::Problem)?)?;
    if problem.domain_name != domain.name {
        return Err(PddlError::Validation {
            pos: problem.domain_pos,
            message: format!(
                "problem is for domain `{}`, but the domain file defines `{}`",
                problem.domain_name, domain.name
            ),
        });
    }
    let mut requirements = domain.requirements;
    requirements.extend(problem.requirements);
    let doc = PddlDocument {
        domain_name: domain.name,
        problem_name: problem.name,
        requirements,
        types: domain.types,
        predicates: domain.predicates,
        functions: domain.functions,
        constants: domain.constants,
        operators: domain.operators,
        axioms: domain.axioms,
        objects: problem.objects,
        init: problem.init,
        goal: problem.goal,
        metric: problem.metric,
    };
    doc.validate()?;
    Ok(doc)
}

impl PddlDocument {
    pub fn validate(&self) -> Result<(), PddlError> {
        validate::validate(self)
    }
}
