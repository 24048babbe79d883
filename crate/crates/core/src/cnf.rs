//! Propositional CNF formulas, variable tiers and DIMACS text.

use std::fmt;
use std::ops::Not;

use serde::{Deserialize, Serialize};

use crate::error::ParseError;

/// Variable `v` (0-based) with a sign, packed as `2v + negated`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: usize, positive: bool) -> Self {
        Lit((var as u32) << 1 | u32::from(!positive))
    }

    pub fn pos(var: usize) -> Self {
        Lit::new(var, true)
    }

    pub fn neg(var: usize) -> Self {
        Lit::new(var, false)
    }

    pub fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn code(self) -> usize {
        self.0 as usize
    }

    /// DIMACS numbering is 1-based and signed.
    pub fn to_dimacs(self) -> i64 {
        let v = self.var() as i64 + 1;
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    pub fn from_dimacs(x: i64) -> Option<Self> {
        if x == 0 || x.unsigned_abs() > u32::MAX as u64 / 2 {
            return None;
        }
        Some(Lit::new(x.unsigned_abs() as usize - 1, x > 0))
    }

    pub fn holds(self, assignment: &[bool]) -> bool {
        assignment[self.var()] == self.is_positive()
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tier {
    Outer,
    Middle,
    Inner,
}

impl Tier {
    pub fn keyword(self) -> &'static str {
        match self {
            Tier::Outer => "outer",
            Tier::Middle => "middle",
            Tier::Inner => "inner",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Cnf {
    pub num_vars: usize,
    pub clauses: Vec<Vec<Lit>>,
    /// Optional display names, one per variable.
    pub names: Vec<String>,
}

impl Cnf {
    pub fn new(num_vars: usize) -> Self {
        Cnf { num_vars, clauses: Vec::new(), names: (1..=num_vars).map(|v| format!("v{v}")).collect() }
    }

    pub fn add_var(&mut self, name: impl Into<String>) -> usize {
        self.names.push(name.into());
        self.num_vars += 1;
        self.num_vars - 1
    }

    /// Sorts and dedups; tautologies are dropped.
    pub fn add_clause(&mut self, lits: impl IntoIterator<Item = Lit>) {
        let mut c: Vec<Lit> = lits.into_iter().collect();
        c.sort_unstable();
        c.dedup();
        if c.windows(2).any(|w| w[0].var() == w[1].var()) {
            return;
        }
        self.clauses.push(c);
    }

    pub fn name(&self, var: usize) -> &str {
        self.names.get(var).map_or("?", String::as_str)
    }

    pub fn var_by_name(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|l| l.holds(assignment)))
    }

    /// Satisfying assignments as bitmasks (bit `v` = variable `v`).
    pub fn models_brute_force(&self) -> Vec<u64> {
        assert!(self.num_vars <= 30, "brute force limited to 30 variables");
        let masks = self.clause_masks();
        (0..1u64 << self.num_vars).filter(|&m| satisfied_by_mask(&masks, m)).collect()
    }

    /// Per clause: (positive-variable mask, negative-variable mask).
    pub fn clause_masks(&self) -> Vec<(u64, u64)> {
        self.clauses
            .iter()
            .map(|c| {
                c.iter().fold((0, 0), |(p, n), l| {
                    if l.is_positive() {
                        (p | 1 << l.var(), n)
                    } else {
                        (p, n | 1 << l.var())
                    }
                })
            })
            .collect()
    }

    pub fn to_dimacs(&self, tiers: Option<&[Tier]>) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for (v, n) in self.names.iter().enumerate() {
            out.push_str(&format!("c var {} {}\n", v + 1, n));
        }
        if let Some(tiers) = tiers {
            for t in [Tier::Outer, Tier::Middle, Tier::Inner] {
                let vs: Vec<String> =
                    tiers.iter().enumerate().filter(|(_, x)| **x == t).map(|(v, _)| (v + 1).to_string()).collect();
                out.push_str(&format!("c {} {}\n", t.keyword(), vs.join(" ")));
            }
        }
        for c in &self.clauses {
            for l in c {
                out.push_str(&format!("{} ", l.to_dimacs()));
            }
            out.push_str("0\n");
        }
        out
    }
}

pub fn satisfied_by_mask(masks: &[(u64, u64)], m: u64) -> bool {
    masks.iter().all(|&(p, n)| m & p != 0 || !m & n != 0)
}

/// A parsed DIMACS file; `tiers` is filled when `c outer/middle/inner` lines are present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimacsFile {
    pub cnf: Cnf,
    pub tiers: Option<Vec<Tier>>,
}

pub fn parse_dimacs(src: &str) -> Result<DimacsFile, ParseError> {
    let mut header: Option<(usize, usize)> = None;
    let mut cnf = Cnf::default();
    let mut tier_lines: Vec<(Tier, Vec<usize>, usize)> = Vec::new();
    let mut names: Vec<(usize, String, usize)> = Vec::new();
    let mut current: Vec<Lit> = Vec::new();
    for (ln, line) in src.lines().enumerate() {
        let ln = ln + 1;
        let line = line.trim();
        if line.is_empty() || line == "%" {
            continue;
        }
        let mut words = line.split_whitespace();
        match words.next() {
            Some("c") => {
                let rest: Vec<&str> = words.collect();
                match rest.first().copied() {
                    Some("var") if rest.len() >= 3 => {
                        let v = parse_index(rest[1], ln)?;
                        names.push((v, rest[2..].join(" "), ln));
                    }
                    Some(kw @ ("outer" | "middle" | "inner")) => {
                        let t = match kw {
                            "outer" => Tier::Outer,
                            "middle" => Tier::Middle,
                            _ => Tier::Inner,
                        };
                        let vs = rest[1..].iter().map(|w| parse_index(w, ln)).collect::<Result<Vec<_>, _>>()?;
                        tier_lines.push((t, vs, ln));
                    }
                    _ => {}
                }
            }
            Some("p") => {
                if header.is_some() {
                    return Err(ParseError::new(ln, 1, "duplicate problem line"));
                }
                let f: Vec<&str> = words.collect();
                if f.len() != 3 || f[0] != "cnf" {
                    return Err(ParseError::new(ln, 1, "expected `p cnf <vars> <clauses>`"));
                }
                let nv = f[1].parse().map_err(|_| ParseError::new(ln, 1, "bad variable count"))?;
                let nc = f[2].parse().map_err(|_| ParseError::new(ln, 1, "bad clause count"))?;
                if nv > 1 << 20 {
                    return Err(ParseError::new(ln, 1, "too many variables"));
                }
                header = Some((nv, nc));
                cnf = Cnf::new(nv);
            }
            Some(_) => {
                let Some((nv, _)) = header else {
                    return Err(ParseError::new(ln, 1, "clause before problem line"));
                };
                for w in line.split_whitespace() {
                    let x: i64 = w.parse().map_err(|_| ParseError::new(ln, 1, format!("bad literal `{w}`")))?;
                    if x == 0 {
                        cnf.add_clause(current.drain(..));
                        continue;
                    }
                    let l = Lit::from_dimacs(x).filter(|l| l.var() < nv);
                    current.push(l.ok_or_else(|| ParseError::new(ln, 1, format!("literal {x} out of range")))?);
                }
            }
            None => {}
        }
    }
    let Some((nv, _)) = header else {
        return Err(ParseError::new(1, 1, "missing problem line"));
    };
    if !current.is_empty() {
        cnf.add_clause(current);
    }
    for (v, n, ln) in names {
        if v >= nv {
            return Err(ParseError::new(ln, 1, format!("variable {} out of range", v + 1)));
        }
        cnf.names[v] = n;
    }
    let tiers = if tier_lines.is_empty() {
        None
    } else {
        let mut tiers = vec![Tier::Inner; nv];
        for (t, vs, ln) in tier_lines {
            for v in vs {
                if v >= nv {
                    return Err(ParseError::new(ln, 1, format!("variable {} out of range", v + 1)));
                }
                tiers[v] = t;
            }
        }
        Some(tiers)
    };
    Ok(DimacsFile { cnf, tiers })
}

fn parse_index(w: &str, ln: usize) -> Result<usize, ParseError> {
    match w.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v - 1),
        _ => Err(ParseError::new(ln, 1, format!("bad variable index `{w}`"))),
    }
}

/// Parses `outer=1,2;middle=3` style tier assignments; unlisted variables are inner.
pub fn parse_tiers(spec: &str, num_vars: usize) -> Result<Vec<Tier>, ParseError> {
    let mut tiers = vec![Tier::Inner; num_vars];
    for part in spec.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, vs) = part.split_once('=').ok_or_else(|| ParseError::new(1, 1, format!("expected tier=vars in `{part}`")))?;
        let t = match k.trim() {
            "o" | "outer" => Tier::Outer,
            "m" | "middle" => Tier::Middle,
            "i" | "inner" => Tier::Inner,
            other => return Err(ParseError::new(1, 1, format!("unknown tier `{other}`"))),
        };
        for w in vs.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let v = parse_index(w, 1)?;
            if v >= num_vars {
                return Err(ParseError::new(1, 1, format!("variable {w} out of range")));
            }
            tiers[v] = t;
        }
    }
    Ok(tiers)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals() {
        let l = Lit::neg(3);
        assert_eq!((l.var(), l.is_positive(), l.to_dimacs()), (3, false, -4));
        assert_eq!(!l, Lit::pos(3));
        assert_eq!(Lit::from_dimacs(-4), Some(l));
        assert_eq!(Lit::from_dimacs(0), None);
    }

    #[test]
    fn dimacs_round_trip() {
        let src = "c comment\np cnf 3 2\nc var 1 a\nc outer 1\nc middle 2\n1 -2 0\n2 3\n0\n";
        let f = parse_dimacs(src).unwrap();
        assert_eq!(f.cnf.clauses.len(), 2);
        assert_eq!(f.cnf.name(0), "a");
        let tiers = f.tiers.clone().unwrap();
        assert_eq!(tiers, vec![Tier::Outer, Tier::Middle, Tier::Inner]);
        let again = parse_dimacs(&f.cnf.to_dimacs(Some(&tiers))).unwrap();
        assert_eq!(again, f);
    }

    #[test]
    fn dimacs_errors() {
        assert!(parse_dimacs("1 2 0").is_err());
        assert!(parse_dimacs("p cnf 2 1\n1 5 0").is_err());
        assert!(parse_dimacs("").is_err());
        assert!(parse_dimacs("p cnf 2 1\n1 x 0").is_err());
    }

    #[test]
    fn brute_force() {
        let mut c = Cnf::new(2);
        c.add_clause([Lit::pos(0), Lit::pos(1)]);
        assert_eq!(c.models_brute_force(), vec![1, 2, 3]);
        c.add_clause([Lit::pos(0), Lit::neg(0)]);
        assert_eq!(c.clauses.len(), 1);
        assert_eq!(parse_tiers("o=1;m=2", 3).unwrap(), vec![Tier::Outer, Tier::Middle, Tier::Inner]);
    }
}
