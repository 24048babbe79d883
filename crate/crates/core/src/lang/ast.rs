use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Const(String),
    Int(i64),
    Var(String),
}

impl Term {
    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(s) | Term::Var(s) => f.write_str(s),
            Term::Int(i) => write!(f, "{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom { predicate: predicate.into(), args }
    }

    pub fn prop(predicate: impl Into<String>) -> Self {
        Atom::new(predicate, Vec::new())
    }

    pub fn is_ground(&self) -> bool {
        !self.args.iter().any(Term::is_var)
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            _ => None,
        })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, t) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{t}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal { atom, positive: true }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal { atom, positive: false }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            f.write_str("not ")?;
        }
        write!(f, "{}", self.atom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparator {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl Comparator {
    pub fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            Comparator::Lt => lhs < rhs,
            Comparator::Le => lhs <= rhs,
            Comparator::Gt => lhs > rhs,
            Comparator::Ge => lhs >= rhs,
            Comparator::Eq => lhs == rhs,
            Comparator::Ne => lhs != rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
            Comparator::Eq => "=",
            Comparator::Ne => "!=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AggElement {
    pub terms: Vec<Term>,
    pub condition: Vec<Literal>,
}

/// `#count{ elements } cmp guard`
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Aggregate {
    pub elements: Vec<AggElement>,
    pub cmp: Comparator,
    pub guard: Term,
}

impl fmt::Display for Aggregate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("#count{")?;
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write_joined(f, &e.terms, ",")?;
            f.write_str(" : ")?;
            write_joined(f, &e.condition, ", ")?;
        }
        write!(f, "}} {} {}", self.cmp.symbol(), self.guard)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BodyElem {
    Lit(Literal),
    Agg(Aggregate),
}

impl fmt::Display for BodyElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyElem::Lit(l) => write!(f, "{l}"),
            BodyElem::Agg(a) => write!(f, "{a}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleKind {
    Fact,
    Normal,
    Disjunctive,
    Constraint,
    Choice,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub head: Vec<Atom>,
    pub body: Vec<BodyElem>,
    pub kind: RuleKind,
}

impl Rule {
    /// Builds a non-choice rule, deriving its kind from the shape.
    pub fn new(head: Vec<Atom>, body: Vec<BodyElem>) -> Self {
        let kind = match (head.len(), body.is_empty()) {
            (0, _) => RuleKind::Constraint,
            (1, true) => RuleKind::Fact,
            (1, false) => RuleKind::Normal,
            _ => RuleKind::Disjunctive,
        };
        Rule { head, body, kind }
    }

    pub fn choice(head: Atom, body: Vec<BodyElem>) -> Self {
        Rule { head: vec![head], body, kind: RuleKind::Choice }
    }

    /// Variables occurring in positive body literals outside aggregates.
    pub fn bound_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for b in &self.body {
            if let BodyElem::Lit(l) = b {
                if l.positive {
                    out.extend(l.atom.vars().map(str::to_string));
                }
            }
        }
        out
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            RuleKind::Choice => write!(f, "{{{}}}", self.head[0])?,
            _ => write_joined(f, &self.head, " ; ")?,
        }
        if !self.body.is_empty() {
            if self.head.is_empty() {
                f.write_str(":- ")?;
            } else {
                f.write_str(" :- ")?;
            }
            write_joined(f, &self.body, ", ")?;
        }
        f.write_str(".")
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Program {
    pub prob_facts: Vec<(Atom, f64)>,
    pub decisions: Vec<Atom>,
    pub utilities: Vec<(Atom, f64)>,
    pub rules: Vec<Rule>,
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (a, p) in &self.prob_facts {
            writeln!(f, "{p}::{a}.")?;
        }
        for d in &self.decisions {
            writeln!(f, "decision {d}.")?;
        }
        for (a, r) in &self.utilities {
            writeln!(f, "utility({a},{r}).")?;
        }
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

fn write_joined<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T], sep: &str) -> fmt::Result {
    for (i, x) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}
