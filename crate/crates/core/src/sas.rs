//! Grounded tasks in the translator's SAS+ output format (version 3).
//!
//! The parser is line oriented, mirroring how the translator writes the
//! file. Operator prevail conditions and effect "old values" are merged into
//! a single precondition; effect conditions stay attached to their effect.

use std::fmt::{self, Write as _};

use thiserror::Error;

pub const SUPPORTED_VERSION: u32 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SasError {
    #[error("line {line}: format error: {message}")]
    Format { line: usize, message: String },
    #[error("line {line}: value out of range: {message}")]
    Range { line: usize, message: String },
    #[error("line {line}: inconsistent task: {message}")]
    Consistency { line: usize, message: String },
}

impl SasError {
    pub fn line(&self) -> usize {
        match self {
            SasError::Format { line, .. } | SasError::Range { line, .. } | SasError::Consistency { line, .. } => *line,
        }
    }
}

/// An assignment `var = value`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fact {
    pub var: usize,
    pub value: usize,
}

impl Fact {
    pub fn new(var: usize, value: usize) -> Self {
        Fact { var, value }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    /// `-1` for state variables, the axiom layer otherwise.
    pub axiom_layer: i32,
    pub values: Vec<String>,
}

impl Variable {
    pub fn is_derived(&self) -> bool {
        self.axiom_layer >= 0
    }

    pub fn domain_size(&self) -> usize {
        self.values.len()
    }
}

/// Effect `<condition, var, value>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Effect {
    pub condition: Vec<Fact>,
    pub var: usize,
    pub value: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundOperator {
    pub name: String,
    /// Prevail conditions and effect old values, one entry per variable,
    /// sorted by variable.
    pub precondition: Vec<Fact>,
    pub effects: Vec<Effect>,
    pub cost: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundAxiom {
    pub condition: Vec<Fact>,
    pub var: usize,
    /// Value the rule expects the derived variable to hold before firing;
    /// `None` when the file says `-1`.
    pub old_value: Option<usize>,
    pub value: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SasTask {
    pub metric: bool,
    pub variables: Vec<Variable>,
    /// Parsed and range-checked; not used by the graph builders.
    pub mutexes: Vec<Vec<Fact>>,
    pub initial_state: Vec<usize>,
    pub goal: Vec<Fact>,
    pub operators: Vec<GroundOperator>,
    pub axioms: Vec<GroundAxiom>,
}

impl SasTask {
    pub fn derived_variables(&self) -> impl Iterator<Item = usize> + '_ {
        self.variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_derived())
            .map(|(i, _)| i)
    }

    /// Checks every structural invariant. Errors report line 0 because the
    /// task may not have come from a file.
    pub fn validate(&self) -> Result<(), SasError> {
        let consistency = |message: String| SasError::Consistency { line: 0, message };
        let range = |message: String| SasError::Range { line: 0, message };
        let check = |f: &Fact, what: &str| -> Result<(), SasError> {
            check_fact(&self.variables, *f).map_err(|m| range(format!("{what}: {m}")))
        };
        if self.initial_state.len() != self.variables.len() {
            return Err(consistency(format!(
                "initial state has {} values for {} variables",
                self.initial_state.len(),
                self.variables.len()
            )));
        }
        for (var, &value) in self.initial_state.iter().enumerate() {
            check(&Fact::new(var, value), "initial state")?;
        }
        for group in &self.mutexes {
            for f in group {
                check(f, "mutex group")?;
            }
        }
        for f in &self.goal {
            check(f, "goal")?;
        }
        distinct_vars(&self.goal).map_err(|v| consistency(format!("goal mentions variable {v} twice")))?;
        for op in &self.operators {
            for f in &op.precondition {
                check(f, &op.name)?;
            }
            distinct_vars(&op.precondition)
                .map_err(|v| consistency(format!("operator `{}` has two preconditions on variable {v}", op.name)))?;
            for e in &op.effects {
                for f in &e.condition {
                    check(f, &op.name)?;
                }
                check(&Fact::new(e.var, e.value), &op.name)?;
            }
        }
        for (i, ax) in self.axioms.iter().enumerate() {
            for f in &ax.condition {
                check(f, "axiom body")?;
            }
            check(&Fact::new(ax.var, ax.value), "axiom head")?;
            if let Some(old) = ax.old_value {
                check(&Fact::new(ax.var, old), "axiom head")?;
            }
            if !self.variables[ax.var].is_derived() {
                return Err(consistency(format!("axiom {i} sets non-derived variable {}", ax.var)));
            }
        }
        Ok(())
    }

    /// Writes the task back out in translator format. Precondition facts on
    /// variables an operator also changes are emitted as effect old values,
    /// all others as prevail conditions, so reparsing yields an equal task.
    pub fn to_sas_string(&self) -> String {
        let mut out = String::new();
        let w = &mut out;
        let _ = writeln!(w, "begin_version\n{SUPPORTED_VERSION}\nend_version");
        let _ = writeln!(w, "begin_metric\n{}\nend_metric", u8::from(self.metric));
        let _ = writeln!(w, "{}", self.variables.len());
        for v in &self.variables {
            let _ = writeln!(w, "begin_variable\n{}\n{}\n{}", v.name, v.axiom_layer, v.values.len());
            for value in &v.values {
                let _ = writeln!(w, "{value}");
            }
            let _ = writeln!(w, "end_variable");
        }
        let _ = writeln!(w, "{}", self.mutexes.len());
        for group in &self.mutexes {
            let _ = writeln!(w, "begin_mutex_group\n{}", group.len());
            for f in group {
                let _ = writeln!(w, "{} {}", f.var, f.value);
            }
            let _ = writeln!(w, "end_mutex_group");
        }
        let _ = writeln!(w, "begin_state");
        for value in &self.initial_state {
            let _ = writeln!(w, "{value}");
        }
        let _ = writeln!(w, "end_state\nbegin_goal\n{}", self.goal.len());
        for f in &self.goal {
            let _ = writeln!(w, "{} {}", f.var, f.value);
        }
        let _ = writeln!(w, "end_goal\n{}", self.operators.len());
        for op in &self.operators {
            let affected = |var: usize| op.effects.iter().any(|e| e.var == var);
            let prevail: Vec<&Fact> = op.precondition.iter().filter(|f| !affected(f.var)).collect();
            let _ = writeln!(w, "begin_operator\n{}\n{}", op.name, prevail.len());
            for f in prevail {
                let _ = writeln!(w, "{} {}", f.var, f.value);
            }
            let _ = writeln!(w, "{}", op.effects.len());
            for e in &op.effects {
                let old = op
                    .precondition
                    .iter()
                    .find(|f| f.var == e.var)
                    .map_or(-1, |f| f.value as i64);
                let _ = write!(w, "{}", e.condition.len());
                for c in &e.condition {
                    let _ = write!(w, " {} {}", c.var, c.value);
                }
                let _ = writeln!(w, " {} {} {}", e.var, old, e.value);
            }
            let _ = writeln!(w, "{}\nend_operator", op.cost);
        }
        let _ = writeln!(w, "{}", self.axioms.len());
        for ax in &self.axioms {
            let _ = writeln!(w, "begin_rule\n{}", ax.condition.len());
            for f in &ax.condition {
                let _ = writeln!(w, "{} {}", f.var, f.value);
            }
            let old = ax.old_value.map_or(-1, |v| v as i64);
            let _ = writeln!(w, "{} {} {}\nend_rule", ax.var, old, ax.value);
        }
        out
    }
}

fn check_fact(variables: &[Variable], f: Fact) -> Result<(), String> {
    match variables.get(f.var) {
        None => Err(format!(
            "variable {} does not exist ({} variables)",
            f.var,
            variables.len()
        )),
        Some(v) if f.value >= v.domain_size() => Err(format!(
            "value {} outside the domain of variable {} (size {})",
            f.value,
            f.var,
            v.domain_size()
        )),
        Some(_) => Ok(()),
    }
}

fn distinct_vars(facts: &[Fact]) -> Result<(), usize> {
    let mut seen: Vec<usize> = facts.iter().map(|f| f.var).collect();
    seen.sort_unstable();
    match seen.windows(2).find(|w| w[0] == w[1]) {
        Some(w) => Err(w[0]),
        None => Ok(()),
    }
}

struct Cursor<'a> {
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor {
            lines: text.lines().enumerate().peekable(),
            line: 0,
        }
    }

    fn format_err(&self, message: impl fmt::Display) -> SasError {
        SasError::Format {
            line: self.line,
            message: message.to_string(),
        }
    }

    fn range_err(&self, message: impl fmt::Display) -> SasError {
        SasError::Range {
            line: self.line,
            message: message.to_string(),
        }
    }

    /// Next non-blank line, trimmed.
    fn next(&mut self, what: &str) -> Result<&'a str, SasError> {
        for (i, raw) in self.lines.by_ref() {
            self.line = i + 1;
            let trimmed = raw.trim();
            if !trimmed.is_empty() {
                return Ok(trimmed);
            }
        }
        self.line += 1;
        Err(self.format_err(format!("unexpected end of file, expected {what}")))
    }

    fn at_end(&mut self) -> bool {
        while let Some((_, raw)) = self.lines.peek() {
            if raw.trim().is_empty() {
                self.lines.next();
            } else {
                return false;
            }
        }
        true
    }

    fn expect(&mut self, keyword: &str) -> Result<(), SasError> {
        let found = self.next(keyword)?;
        if found != keyword {
            return Err(self.format_err(format!("expected `{keyword}`, found `{found}`")));
        }
        Ok(())
    }

    fn ints(&mut self, count: usize, what: &str) -> Result<Vec<i64>, SasError> {
        let line = self.next(what)?;
        let values = line
            .split_whitespace()
            .map(|t| t.parse::<i64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| self.format_err(format!("expected {what}, found `{line}`")))?;
        if values.len() != count {
            return Err(self.format_err(format!(
                "expected {count} integer(s) for {what}, found {}",
                values.len()
            )));
        }
        Ok(values)
    }

    fn int(&mut self, what: &str) -> Result<i64, SasError> {
        Ok(self.ints(1, what)?[0])
    }

    fn count(&mut self, what: &str) -> Result<usize, SasError> {
        let v = self.int(what)?;
        usize::try_from(v).map_err(|_| self.format_err(format!("negative {what} {v}")))
    }

    fn index(&self, v: i64, what: &str) -> Result<usize, SasError> {
        usize::try_from(v).map_err(|_| self.range_err(format!("negative {what} {v}")))
    }

    fn fact(&self, variables: &[Variable], var: i64, value: i64) -> Result<Fact, SasError> {
        let f = Fact::new(self.index(var, "variable")?, self.index(value, "value")?);
        check_fact(variables, f).map_err(|m| self.range_err(m))?;
        Ok(f)
    }

    fn fact_line(&mut self, variables: &[Variable], what: &str) -> Result<Fact, SasError> {
        let v = self.ints(2, what)?;
        self.fact(variables, v[0], v[1])
    }
}

/// Parses a translator output file.
pub fn parse_sas(text: &str) -> Result<SasTask, SasError> {
    let mut c = Cursor::new(text);

    c.expect("begin_version")?;
    let version = c.int("version number")?;
    if version != i64::from(SUPPORTED_VERSION) {
        return Err(c.format_err(format!(
            "unsupported version {version}; only version {SUPPORTED_VERSION} is supported"
        )));
    }
    c.expect("end_version")?;

    c.expect("begin_metric")?;
    let metric = match c.int("metric flag")? {
        0 => false,
        1 => true,
        other => return Err(c.format_err(format!("metric flag must be 0 or 1, found {other}"))),
    };
    c.expect("end_metric")?;

    let num_vars = c.count("variable count")?;
    let mut variables = Vec::with_capacity(num_vars);
    for _ in 0..num_vars {
        c.expect("begin_variable")?;
        let name = c.next("variable name")?.to_string();
        let layer = c.int("axiom layer")?;
        let axiom_layer = i32::try_from(layer)
            .ok()
            .filter(|&l| l >= -1)
            .ok_or_else(|| c.range_err(format!("axiom layer {layer} below -1")))?;
        let size = c.count("domain size")?;
        if size == 0 {
            return Err(c.range_err(format!("variable `{name}` has an empty domain")));
        }
        let values = (0..size)
            .map(|_| c.next("value name").map(str::to_string))
            .collect::<Result<Vec<_>, _>>()?;
        c.expect("end_variable")?;
        variables.push(Variable {
            name,
            axiom_layer,
            values,
        });
    }

    let num_mutexes = c.count("mutex group count")?;
    let mut mutexes = Vec::with_capacity(num_mutexes);
    for _ in 0..num_mutexes {
        c.expect("begin_mutex_group")?;
        let n = c.count("mutex group size")?;
        let group = (0..n)
            .map(|_| c.fact_line(&variables, "mutex fact"))
            .collect::<Result<Vec<_>, _>>()?;
        c.expect("end_mutex_group")?;
        mutexes.push(group);
    }

    c.expect("begin_state")?;
    let mut initial_state = Vec::with_capacity(num_vars);
    loop {
        let line = c.next("initial state value or `end_state`")?;
        if line == "end_state" {
            break;
        }
        let value: i64 = line
            .parse()
            .map_err(|_| c.format_err(format!("expected initial state value, found `{line}`")))?;
        if initial_state.len() >= num_vars {
            return Err(SasError::Consistency {
                line: c.line,
                message: format!("initial state has more than {num_vars} values"),
            });
        }
        let f = c.fact(&variables, initial_state.len() as i64, value)?;
        initial_state.push(f.value);
    }
    if initial_state.len() != num_vars {
        return Err(SasError::Consistency {
            line: c.line,
            message: format!(
                "initial state has {} values for {num_vars} variables",
                initial_state.len()
            ),
        });
    }

    c.expect("begin_goal")?;
    let n = c.count("goal size")?;
    let goal = (0..n)
        .map(|_| c.fact_line(&variables, "goal fact"))
        .collect::<Result<Vec<_>, _>>()?;
    c.expect("end_goal")?;
    if let Err(v) = distinct_vars(&goal) {
        return Err(SasError::Consistency {
            line: c.line,
            message: format!("goal mentions variable {v} twice"),
        });
    }

    let num_ops = c.count("operator count")?;
    let mut operators = Vec::with_capacity(num_ops);
    for _ in 0..num_ops {
        operators.push(parse_operator(&mut c, &variables)?);
    }

    let num_axioms = c.count("axiom count")?;
    let mut axioms = Vec::with_capacity(num_axioms);
    for _ in 0..num_axioms {
        c.expect("begin_rule")?;
        let n = c.count("rule condition count")?;
        let condition = (0..n)
            .map(|_| c.fact_line(&variables, "rule condition"))
            .collect::<Result<Vec<_>, _>>()?;
        let head = c.ints(3, "rule head `var old new`")?;
        let target = c.fact(&variables, head[0], head[2])?;
        let old_value = match head[1] {
            -1 => None,
            old => Some(c.fact(&variables, head[0], old)?.value),
        };
        if !variables[target.var].is_derived() {
            return Err(SasError::Consistency {
                line: c.line,
                message: format!("rule sets non-derived variable {}", target.var),
            });
        }
        c.expect("end_rule")?;
        axioms.push(GroundAxiom {
            condition,
            var: target.var,
            old_value,
            value: target.value,
        });
    }

    if !c.at_end() {
        let line = c.next("end of file")?;
        return Err(c.format_err(format!("unexpected trailing content `{line}`")));
    }

    Ok(SasTask {
        metric,
        variables,
        mutexes,
        initial_state,
        goal,
        operators,
        axioms,
    })
}

fn parse_operator(c: &mut Cursor<'_>, variables: &[Variable]) -> Result<GroundOperator, SasError> {
    c.expect("begin_operator")?;
    let name = c.next("operator name")?.to_string();
    let mut precondition: Vec<Fact> = Vec::new();
    let mut add_pre = |c: &Cursor<'_>, f: Fact| -> Result<(), SasError> {
        match precondition.iter().find(|p| p.var == f.var) {
            Some(p) if p.value != f.value => Err(SasError::Consistency {
                line: c.line,
                message: format!(
                    "operator `{name}` requires variable {} to be both {} and {}",
                    f.var, p.value, f.value
                ),
            }),
            Some(_) => Ok(()),
            None => {
                precondition.push(f);
                Ok(())
            }
        }
    };
    let num_prevail = c.count("prevail count")?;
    for _ in 0..num_prevail {
        let f = c.fact_line(variables, "prevail condition")?;
        add_pre(c, f)?;
    }
    let num_effects = c.count("effect count")?;
    let mut effects = Vec::with_capacity(num_effects);
    for _ in 0..num_effects {
        let line = c.next("effect")?;
        let values = line
            .split_whitespace()
            .map(|t| t.parse::<i64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| c.format_err(format!("malformed effect line `{line}`")))?;
        let ncond = match values.first() {
            Some(&n) if n >= 0 => n as usize,
            _ => return Err(c.format_err(format!("malformed effect line `{line}`"))),
        };
        if values.len() != 1 + 2 * ncond + 3 {
            return Err(c.format_err(format!(
                "effect with {ncond} condition(s) needs {} integers, found {}",
                1 + 2 * ncond + 3,
                values.len()
            )));
        }
        let condition = values[1..1 + 2 * ncond]
            .chunks(2)
            .map(|p| c.fact(variables, p[0], p[1]))
            .collect::<Result<Vec<_>, _>>()?;
        let [var, old, new] = [values[1 + 2 * ncond], values[2 + 2 * ncond], values[3 + 2 * ncond]];
        let target = c.fact(variables, var, new)?;
        if old != -1 {
            let pre = c.fact(variables, var, old)?;
            add_pre(c, pre)?;
        }
        effects.push(Effect {
            condition,
            var: target.var,
            value: target.value,
        });
    }
    precondition.sort_unstable();
    let cost = c.int("operator cost")?;
    let cost = u64::try_from(cost).map_err(|_| c.range_err(format!("negative operator cost {cost}")))?;
    c.expect("end_operator")?;
    Ok(GroundOperator {
        name,
        precondition,
        effects,
        cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = "begin_version\n3\nend_version\nbegin_metric\n0\nend_metric\n1\n\
begin_variable\nvar0\n-1\n2\nAtom on()\nNegatedAtom on()\nend_variable\n0\n\
begin_state\n0\nend_state\nbegin_goal\n1\n0 1\nend_goal\n1\n\
begin_operator\nflip\n0\n1\n0 0 0 1\n1\nend_operator\n0\n";

    #[test]
    fn minimal_task() {
        let t = parse_sas(MINIMAL).unwrap();
        assert_eq!(t.variables.len(), 1);
        assert_eq!(t.operators.len(), 1);
        assert_eq!(t.axioms.len(), 0);
        assert_eq!(t.operators[0].precondition, vec![Fact::new(0, 0)]);
        assert_eq!(
            t.operators[0].effects,
            vec![Effect {
                condition: vec![],
                var: 0,
                value: 1
            }]
        );
        assert_eq!(t.goal, vec![Fact::new(0, 1)]);
        t.validate().unwrap();
    }

    #[test]
    fn version_two_rejected() {
        let text = MINIMAL.replacen("begin_version\n3", "begin_version\n2", 1);
        match parse_sas(&text) {
            Err(SasError::Format { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("version 3"), "{message}");
            }
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn effect_condition_stays_on_effect() {
        let text = "begin_version\n3\nend_version\nbegin_metric\n0\nend_metric\n2\n\
begin_variable\nv\n-1\n2\na\nb\nend_variable\n\
begin_variable\nw\n-1\n2\na\nb\nend_variable\n0\n\
begin_state\n0\n0\nend_state\nbegin_goal\n0\nend_goal\n1\n\
begin_operator\nop\n0\n1\n1 1 1 0 -1 1\n1\nend_operator\n0\n";
        let t = parse_sas(text).unwrap();
        let op = &t.operators[0];
        assert!(op.precondition.is_empty());
        assert_eq!(
            op.effects,
            vec![Effect {
                condition: vec![Fact::new(1, 1)],
                var: 0,
                value: 1
            }]
        );
    }

    #[test]
    fn value_out_of_domain() {
        let text = MINIMAL.replace("begin_goal\n1\n0 1", "begin_goal\n1\n0 2");
        assert!(matches!(parse_sas(&text), Err(SasError::Range { line: 21, .. })));
    }

    #[test]
    fn short_state_is_inconsistent() {
        let text = MINIMAL.replace("begin_state\n0\nend_state", "begin_state\nend_state");
        assert!(matches!(parse_sas(&text), Err(SasError::Consistency { .. })));
    }

    #[test]
    fn rule_on_state_variable_is_inconsistent() {
        let text = MINIMAL.trim_end().strip_suffix("0").unwrap().to_string() + "1\nbegin_rule\n0\n0 -1 1\nend_rule\n";
        assert!(matches!(parse_sas(&text), Err(SasError::Consistency { .. })));
    }

    #[test]
    fn conflicting_old_value_and_prevail() {
        let text = MINIMAL.replace("flip\n0\n1\n0 0 0 1", "flip\n1\n0 1\n1\n0 0 0 1");
        assert!(matches!(parse_sas(&text), Err(SasError::Consistency { .. })));
    }

    #[test]
    fn trailing_garbage() {
        let text = format!("{MINIMAL}extra\n");
        assert!(matches!(parse_sas(&text), Err(SasError::Format { .. })));
    }

    #[test]
    fn writer_round_trips() {
        let t = parse_sas(MINIMAL).unwrap();
        assert_eq!(parse_sas(&t.to_sas_string()).unwrap(), t);
    }
}
