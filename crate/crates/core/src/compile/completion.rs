//! Clark completion of tight ground programs into CNF.

use std::collections::{BTreeMap, HashMap};

use crate::cnf::{Cnf, Lit, Tier};
use crate::error::{Error, Result, Unsupported};
use crate::lang::{AtomId, Comparator, GAggregate, GBody, GLit, GRule, GroundProgram};

/// A completed program: variable `i < num_atoms` is atom `i`, the rest are
/// auxiliary gate variables.
#[derive(Debug, Clone)]
pub struct CnfEncoding {
    pub cnf: Cnf,
    pub tiers: Vec<Tier>,
    pub num_atoms: usize,
}

/// A literal that may have been folded to a constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Term {
    Const(bool),
    Lit(Lit),
}

impl Term {
    fn negate(self) -> Term {
        match self {
            Term::Const(b) => Term::Const(!b),
            Term::Lit(l) => Term::Lit(!l),
        }
    }
}

struct Encoder<'a> {
    p: &'a GroundProgram,
    cnf: Cnf,
    ands: HashMap<Vec<Lit>, Lit>,
}

impl Encoder<'_> {
    fn fresh(&mut self, kind: &str) -> Lit {
        let v = self.cnf.num_vars;
        Lit::pos(self.cnf.add_var(format!("__{kind}{v}")))
    }

    /// `g <-> AND(lits)`, shared across identical literal sets.
    fn and_gate(&mut self, mut lits: Vec<Lit>, kind: &str) -> Term {
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0].var() == w[1].var()) {
            return Term::Const(false);
        }
        match lits.len() {
            0 => return Term::Const(true),
            1 => return Term::Lit(lits[0]),
            _ => {}
        }
        if let Some(&g) = self.ands.get(&lits) {
            return Term::Lit(g);
        }
        let g = self.fresh(kind);
        for &l in &lits {
            self.cnf.add_clause([!g, l]);
        }
        self.cnf.add_clause(lits.iter().map(|&l| !l).chain([g]));
        self.ands.insert(lits, g);
        Term::Lit(g)
    }

    fn or_gate(&mut self, lits: Vec<Lit>, kind: &str) -> Term {
        self.and_gate(lits.into_iter().map(|l| !l).collect(), kind).negate()
    }

    fn and_terms(&mut self, terms: &[Term], kind: &str) -> Term {
        if terms.contains(&Term::Const(false)) {
            return Term::Const(false);
        }
        let lits = terms.iter().filter_map(|t| if let Term::Lit(l) = t { Some(*l) } else { None }).collect();
        self.and_gate(lits, kind)
    }

    fn or_terms(&mut self, terms: &[Term], kind: &str) -> Term {
        if terms.contains(&Term::Const(true)) {
            return Term::Const(true);
        }
        let lits: Vec<Lit> = terms.iter().filter_map(|t| if let Term::Lit(l) = t { Some(*l) } else { None }).collect();
        if lits.is_empty() {
            return Term::Const(false);
        }
        self.or_gate(lits, kind)
    }

    fn lit(l: &GLit) -> Lit {
        Lit::new(l.atom, l.positive)
    }

    /// Conjuncts of a rule body. Bodies mixing decisions with at least two
    /// other literals share a gate over the non-decision part.
    fn conjuncts(&mut self, body: &[GLit]) -> Vec<Term> {
        let (dec, rest): (Vec<&GLit>, Vec<&GLit>) = body.iter().partition(|l| self.p.is_decision(l.atom));
        if !dec.is_empty() && rest.len() >= 2 {
            let g = self.and_gate(rest.iter().map(|l| Self::lit(l)).collect(), "shared");
            let mut terms: Vec<Term> = dec.iter().map(|l| Term::Lit(Self::lit(l))).collect();
            terms.push(g);
            return terms;
        }
        body.iter().map(|l| Term::Lit(Self::lit(l))).collect()
    }

    /// `h <-> AND(terms)` with `h` as the gate output.
    fn define(&mut self, h: Lit, terms: &[Term]) {
        if terms.contains(&Term::Const(false)) {
            self.cnf.add_clause([!h]);
            return;
        }
        let lits: Vec<Lit> = terms.iter().filter_map(|t| if let Term::Lit(l) = t { Some(*l) } else { None }).collect();
        for &l in &lits {
            self.cnf.add_clause([!h, l]);
        }
        self.cnf.add_clause(lits.iter().map(|&l| !l).chain([h]));
    }

    /// `count(groups) cmp guard`, as a disjunction of conjunctions of terms.
    fn aggregate(&mut self, a: &GAggregate) -> Vec<Vec<Term>> {
        let mut xs = Vec::new();
        for alts in &a.groups {
            let alts: Vec<Term> =
                alts.iter().map(|c| self.and_gate(c.iter().map(Self::lit).collect(), "cond")).collect();
            xs.push(self.or_terms(&alts, "group"));
        }
        let n = xs.len() as i64;
        // at_least[j]: at least j of the groups seen so far hold; thresholds
        // above guard + 1 are never read.
        let top = (a.guard + 1).clamp(0, n) as usize;
        let mut at_least: Vec<Term> = (0..=top).map(|j| Term::Const(j == 0)).collect();
        for x in &xs {
            let mut next = at_least.clone();
            for j in 1..=top {
                let carry = self.and_terms(&[at_least[j - 1], *x], "cnt");
                next[j] = self.or_terms(&[at_least[j], carry], "cnt");
            }
            at_least = next;
        }
        let s = |j: i64| -> Term {
            if j <= 0 {
                Term::Const(true)
            } else if j > n {
                Term::Const(false)
            } else {
                at_least[j as usize]
            }
        };
        let g = a.guard;
        match a.cmp {
            Comparator::Gt => vec![vec![s(g + 1)]],
            Comparator::Ge => vec![vec![s(g)]],
            Comparator::Lt => vec![vec![s(g).negate()]],
            Comparator::Le => vec![vec![s(g + 1).negate()]],
            Comparator::Eq => vec![vec![s(g), s(g + 1).negate()]],
            Comparator::Ne => vec![vec![s(g).negate()], vec![s(g + 1)]],
        }
    }

    /// Forbids every conjunction the constraint body can be expanded into.
    fn constraint(&mut self, r: &GRule) {
        let mut alternatives: Vec<Vec<Term>> = vec![Vec::new()];
        for b in &r.body {
            let options = match b {
                GBody::Lit(l) => vec![vec![Term::Lit(Self::lit(l))]],
                GBody::Agg(a) => self.aggregate(a),
            };
            alternatives = alternatives
                .iter()
                .flat_map(|prefix| {
                    options.iter().map(move |o| prefix.iter().chain(o).copied().collect::<Vec<Term>>())
                })
                .collect();
        }
        for conj in alternatives {
            if conj.contains(&Term::Const(false)) {
                continue;
            }
            let clause: Vec<Lit> =
                conj.iter().filter_map(|t| if let Term::Lit(l) = t { Some(!*l) } else { None }).collect();
            self.cnf.add_clause(clause);
        }
    }
}

/// Replaces each disjunctive rule by one normal rule per head atom, with the
/// other head atoms negated in the body.
pub fn shift(p: &GroundProgram) -> Vec<GRule> {
    let mut out = Vec::new();
    for r in &p.rules {
        if r.head.len() <= 1 {
            out.push(r.clone());
            continue;
        }
        for &h in &r.head {
            let mut body = r.body.clone();
            body.extend(r.head.iter().filter(|&&o| o != h).map(|&o| GBody::Lit(GLit::neg(o))));
            out.push(GRule { head: vec![h], body });
        }
    }
    out
}

/// Atoms of every nontrivial strongly connected component of the positive
/// dependency graph (head to positive body atom).
fn positive_cycles(p: &GroundProgram) -> Vec<Vec<AtomId>> {
    let n = p.num_atoms();
    let mut adj = vec![Vec::new(); n];
    for r in &p.rules {
        for &h in &r.head {
            adj[h].extend(r.positive_body());
        }
    }
    // Iterative Tarjan.
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut counter = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut work = vec![(root, 0usize)];
        while let Some(&mut (v, ref mut i)) = work.last_mut() {
            if *i == 0 {
                index[v] = counter;
                low[v] = counter;
                counter += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if *i < adj[v].len() {
                let w = adj[v][*i];
                *i += 1;
                if index[w] == usize::MAX {
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            work.pop();
            if let Some(&(u, _)) = work.last() {
                low[u] = low[u].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().unwrap();
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                if comp.len() > 1 || adj[v].contains(&v) {
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out
}

/// Fails unless the program can be completed faithfully.
pub fn check_supported(p: &GroundProgram) -> Result<()> {
    if let Some(r) = p.rules.iter().find(|r| !r.is_constraint() && r.has_aggregate()) {
        return Err(Error::Unsupported(Unsupported::Aggregates { rule: p.display_rule(r) }));
    }
    let cycles = positive_cycles(p);
    for comp in &cycles {
        for r in &p.rules {
            if r.head.iter().filter(|h| comp.binary_search(h).is_ok()).count() >= 2 {
                return Err(Error::Unsupported(Unsupported::NonHcf { rule: p.display_rule(r) }));
            }
        }
    }
    if let Some(comp) = cycles.first() {
        return Err(Error::Unsupported(Unsupported::NonTight { atoms: comp.iter().map(|&a| p.name(a)).collect() }));
    }
    Ok(())
}

/// Completion of a tight (after shifting) program whose aggregates occur
/// only in constraints. Models correspond one-to-one to the answer sets of
/// all (strategy, world) pairs.
pub fn to_cnf(p: &GroundProgram) -> Result<CnfEncoding> {
    check_supported(p)?;
    let n = p.num_atoms();
    let mut cnf = Cnf::new(n);
    cnf.names = (0..n).map(|a| p.name(a)).collect();
    let mut enc = Encoder { p, cnf, ands: HashMap::new() };

    let mut by_head: BTreeMap<AtomId, Vec<Vec<GLit>>> = BTreeMap::new();
    let mut constraints = Vec::new();
    for r in shift(p) {
        if r.is_constraint() {
            constraints.push(r);
            continue;
        }
        let body = r
            .body
            .iter()
            .map(|b| match b {
                GBody::Lit(l) => *l,
                GBody::Agg(_) => unreachable!("rejected by check_supported"),
            })
            .collect();
        by_head.entry(r.head[0]).or_default().push(body);
    }
    for a in 0..n {
        if p.is_decision(a) || p.is_prob_fact(a) {
            continue;
        }
        let h = Lit::pos(a);
        let bodies = by_head.remove(&a).unwrap_or_default();
        if let [body] = bodies.as_slice() {
            let terms = enc.conjuncts(body);
            enc.define(h, &terms);
            continue;
        }
        let mut terms = Vec::new();
        for b in &bodies {
            let c = enc.conjuncts(b);
            terms.push(enc.and_terms(&c, "body"));
        }
        let t = enc.or_terms(&terms, "body");
        enc.define(h, &[t]);
    }
    for r in &constraints {
        enc.constraint(r);
    }
    let cnf = enc.cnf;
    let tiers = (0..cnf.num_vars)
        .map(|v| {
            if v < n && p.is_decision(v) {
                Tier::Outer
            } else if v < n && p.is_prob_fact(v) {
                Tier::Middle
            } else {
                Tier::Inner
            }
        })
        .collect();
    Ok(CnfEncoding { cnf, tiers, num_atoms: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::load;

    fn count(src: &str) -> usize {
        to_cnf(&load(src).unwrap()).unwrap().cnf.models_brute_force().len()
    }

    #[test]
    fn even_loop_has_two_models() {
        assert_eq!(count("a :- not b. b :- not a."), 2);
    }

    #[test]
    fn rejections() {
        let p = load("0.5::c. a :- c. a :- b. b :- a.").unwrap();
        assert!(matches!(to_cnf(&p), Err(Error::Unsupported(Unsupported::NonTight { .. }))));
        let p = load("0.5::d. c :- d. a ; b :- c. c :- a. c :- b.").unwrap();
        assert!(matches!(to_cnf(&p), Err(Error::Unsupported(Unsupported::NonHcf { .. }))));
        let p = load("0.5::x. a :- #count{ 1 : x } >= 1.").unwrap();
        assert!(matches!(to_cnf(&p), Err(Error::Unsupported(Unsupported::Aggregates { .. }))));
    }

    #[test]
    fn tiers_and_counts() {
        let e = to_cnf(&load("0.4::a. decision d. q :- a, d. q :- not a.").unwrap()).unwrap();
        assert_eq!(&e.tiers[..3], &[Tier::Middle, Tier::Outer, Tier::Inner]);
        // One answer set per (strategy, world) pair.
        assert_eq!(e.cnf.models_brute_force().len(), 4);
        assert_eq!(count("0.5::x. 0.5::y. :- #count{ 1 : x ; 2 : y } = 1."), 2);
        assert_eq!(count("0.5::x. 0.5::y. :- #count{ 1 : x ; 2 : y } != 1."), 2);
        assert_eq!(count("0.5::x. 0.5::y. 0.5::z. :- #count{ 1 : x ; 2 : y ; 3 : z } > 1."), 4);
    }
}
