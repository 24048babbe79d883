use std::collections::HashMap;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use crate::error::ParseError;

/// Parses program text into a validated [`Program`].
pub fn parse(src: &str) -> Result<Program, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0 };
    let mut prog = Program::default();
    let mut spans = Spans::default();
    while p.peek() != &Tok::Eof {
        p.statement(&mut prog, &mut spans)?;
    }
    validate(&prog, &spans)?;
    Ok(prog)
}

/// Source positions of each statement, kept for validation messages.
#[derive(Default)]
struct Spans {
    prob_facts: Vec<(usize, usize)>,
    decisions: Vec<(usize, usize)>,
    utilities: Vec<(usize, usize)>,
    rules: Vec<(usize, usize)>,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (l, c) = self.here();
        Err(ParseError::new(l, c, msg))
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T, ParseError> {
        self.error(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn expect(&mut self, t: Tok, wanted: &str) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.unexpected(wanted)
        }
    }

    fn statement(&mut self, prog: &mut Program, spans: &mut Spans) -> Result<(), ParseError> {
        let start = self.here();
        match self.peek().clone() {
            Tok::Number(_) if *self.peek_at(1) == Tok::DoubleColon => {
                let prob = self.number()?;
                self.bump();
                let atom = self.atom()?;
                self.expect(Tok::Dot, "`.`")?;
                prog.prob_facts.push((atom, prob));
                spans.prob_facts.push(start);
            }
            Tok::Question => {
                self.bump();
                self.expect(Tok::DoubleColon, "`::`")?;
                let atom = self.atom()?;
                self.expect(Tok::Dot, "`.`")?;
                prog.decisions.push(atom);
                spans.decisions.push(start);
            }
            Tok::Ident(ref w) if w == "decision" && matches!(self.peek_at(1), Tok::Ident(_)) => {
                self.bump();
                let atom = self.atom()?;
                self.expect(Tok::Dot, "`.`")?;
                prog.decisions.push(atom);
                spans.decisions.push(start);
            }
            Tok::Ident(ref w) if w == "utility" && *self.peek_at(1) == Tok::LParen => {
                self.bump();
                self.bump();
                let atom = self.atom()?;
                self.expect(Tok::Comma, "`,`")?;
                let reward = self.signed_number()?;
                self.expect(Tok::RParen, "`)`")?;
                self.expect(Tok::Dot, "`.`")?;
                prog.utilities.push((atom, reward));
                spans.utilities.push(start);
            }
            _ => {
                let rule = self.rule()?;
                prog.rules.push(rule);
                spans.rules.push(start);
            }
        }
        Ok(())
    }

    fn rule(&mut self) -> Result<Rule, ParseError> {
        let head_choice = self.choice_head()?;
        let head = match head_choice {
            Some(_) => Vec::new(),
            None if *self.peek() == Tok::If => Vec::new(),
            None => self.disjunction()?,
        };
        let mut body = Vec::new();
        if *self.peek() == Tok::If {
            self.bump();
            body = self.body()?;
        } else if head.is_empty() && head_choice.is_none() {
            return self.unexpected("a rule");
        }
        self.expect(Tok::Dot, "`.`")?;
        Ok(match head_choice {
            Some(a) => Rule::choice(a, body),
            None => Rule::new(head, body),
        })
    }

    fn choice_head(&mut self) -> Result<Option<Atom>, ParseError> {
        let bounded = matches!(self.peek(), Tok::Number(_)) && *self.peek_at(1) == Tok::LBrace;
        if bounded {
            if *self.peek() != Tok::Number("0".into()) {
                return self.error("choice lower bound must be 0");
            }
            self.bump();
        }
        if *self.peek() != Tok::LBrace {
            return Ok(None);
        }
        self.bump();
        let atom = self.atom()?;
        self.expect(Tok::RBrace, "`}` (choice rules take exactly one atom)")?;
        if matches!(self.peek(), Tok::Number(_)) {
            if *self.peek() != Tok::Number("1".into()) {
                return self.error("choice upper bound must be 1");
            }
            self.bump();
        }
        Ok(Some(atom))
    }

    fn disjunction(&mut self) -> Result<Vec<Atom>, ParseError> {
        let mut head = vec![self.atom()?];
        while matches!(self.peek(), Tok::Semi | Tok::Bar) {
            self.bump();
            head.push(self.atom()?);
        }
        Ok(head)
    }

    fn body(&mut self) -> Result<Vec<BodyElem>, ParseError> {
        let mut body = vec![self.body_elem()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            body.push(self.body_elem()?);
        }
        Ok(body)
    }

    fn body_elem(&mut self) -> Result<BodyElem, ParseError> {
        if *self.peek() == Tok::Count {
            return Ok(BodyElem::Agg(self.aggregate()?));
        }
        Ok(BodyElem::Lit(self.literal()?))
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        let negated = match self.peek() {
            Tok::NegSlash => true,
            Tok::Ident(w) if w == "not" && matches!(self.peek_at(1), Tok::Ident(_)) => true,
            _ => false,
        };
        if negated {
            self.bump();
        }
        let atom = self.atom()?;
        Ok(Literal { atom, positive: !negated })
    }

    fn aggregate(&mut self) -> Result<Aggregate, ParseError> {
        self.bump();
        self.expect(Tok::LBrace, "`{`")?;
        let mut elements = Vec::new();
        if *self.peek() != Tok::RBrace {
            loop {
                elements.push(self.agg_element()?);
                if *self.peek() == Tok::Semi {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RBrace, "`}`")?;
        let cmp = match self.peek() {
            Tok::Cmp(c) => match *c {
                "<" => Comparator::Lt,
                "<=" => Comparator::Le,
                ">" => Comparator::Gt,
                ">=" => Comparator::Ge,
                "=" => Comparator::Eq,
                _ => Comparator::Ne,
            },
            _ => return self.unexpected("a comparison operator after the aggregate"),
        };
        self.bump();
        let guard = match self.peek().clone() {
            Tok::Var(v) => {
                self.bump();
                Term::Var(v)
            }
            Tok::Number(_) | Tok::Minus => Term::Int(self.integer()?),
            _ => return self.unexpected("an integer or variable guard"),
        };
        Ok(Aggregate { elements, cmp, guard })
    }

    fn agg_element(&mut self) -> Result<AggElement, ParseError> {
        let mut terms = vec![self.term()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            terms.push(self.term()?);
        }
        let mut condition = Vec::new();
        if *self.peek() == Tok::Colon {
            self.bump();
            if !matches!(self.peek(), Tok::Semi | Tok::RBrace) {
                condition.push(self.literal()?);
                while *self.peek() == Tok::Comma {
                    self.bump();
                    condition.push(self.literal()?);
                }
            }
        }
        Ok(AggElement { terms, condition })
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        let name = match self.peek().clone() {
            Tok::Ident(s) => s,
            _ => return self.unexpected("an atom"),
        };
        self.bump();
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.bump();
            args.push(self.term()?);
            while *self.peek() == Tok::Comma {
                self.bump();
                args.push(self.term()?);
            }
            self.expect(Tok::RParen, "`)`")?;
        }
        Ok(Atom::new(name, args))
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    return self.error("function symbols are not supported");
                }
                Ok(Term::Const(s))
            }
            Tok::Var(s) => {
                self.bump();
                Ok(Term::Var(s))
            }
            Tok::Number(_) | Tok::Minus => Ok(Term::Int(self.integer()?)),
            _ => self.unexpected("a term"),
        }
    }

    fn integer(&mut self) -> Result<i64, ParseError> {
        let neg = *self.peek() == Tok::Minus;
        if neg {
            self.bump();
        }
        match self.peek().clone() {
            Tok::Number(s) if !s.contains('.') => {
                let v: i64 = s.parse().or_else(|_| self.error("integer out of range"))?;
                self.bump();
                Ok(if neg { -v } else { v })
            }
            _ => self.unexpected("an integer"),
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        match self.peek().clone() {
            Tok::Number(s) => {
                self.bump();
                Ok(s.parse().expect("lexer produces valid decimals"))
            }
            _ => self.unexpected("a number"),
        }
    }

    fn signed_number(&mut self) -> Result<f64, ParseError> {
        let neg = *self.peek() == Tok::Minus;
        if neg {
            self.bump();
        }
        let v = self.number()?;
        Ok(if neg { -v } else { v })
    }
}

fn validate(prog: &Program, spans: &Spans) -> Result<(), ParseError> {
    let err = |pos: (usize, usize), msg: String| Err(ParseError::new(pos.0, pos.1, msg));
    let mut external: HashMap<&Atom, &str> = HashMap::new();
    for ((atom, p), &pos) in prog.prob_facts.iter().zip(&spans.prob_facts) {
        if !(0.0..=1.0).contains(p) {
            return err(pos, format!("probability {p} of {atom} is outside [0,1]"));
        }
        if !atom.is_ground() {
            return err(pos, format!("probabilistic fact {atom} is not ground"));
        }
        if external.insert(atom, "probabilistic fact").is_some() {
            return err(pos, format!("duplicate probabilistic fact {atom}"));
        }
    }
    for (atom, &pos) in prog.decisions.iter().zip(&spans.decisions) {
        if !atom.is_ground() {
            return err(pos, format!("decision atom {atom} is not ground"));
        }
        if let Some(what) = external.insert(atom, "decision atom") {
            return err(pos, format!("{atom} is declared both as decision atom and as {what}"));
        }
    }
    let mut seen = HashMap::new();
    for ((atom, r), &pos) in prog.utilities.iter().zip(&spans.utilities) {
        if !atom.is_ground() {
            return err(pos, format!("utility on non-ground atom {atom}"));
        }
        if !r.is_finite() {
            return err(pos, format!("utility of {atom} is not finite"));
        }
        if seen.insert(atom, ()).is_some() {
            return err(pos, format!("duplicate utility on {atom}"));
        }
    }
    for (rule, &pos) in prog.rules.iter().zip(&spans.rules) {
        for h in &rule.head {
            if let Some(what) = external.get(h) {
                return err(pos, format!("{what} {h} appears in a rule head"));
            }
        }
    }
    Ok(())
}
