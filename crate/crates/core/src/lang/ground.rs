use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use super::ast::*;
use crate::error::{Error, Result};

pub type AtomId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GLit {
    pub atom: AtomId,
    pub positive: bool,
}

impl GLit {
    pub fn pos(atom: AtomId) -> Self {
        GLit { atom, positive: true }
    }

    pub fn neg(atom: AtomId) -> Self {
        GLit { atom, positive: false }
    }
}

/// A ground `#count`: one group per distinct term tuple, each group holding
/// alternative conditions; the group counts when any alternative holds.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GAggregate {
    pub groups: Vec<Vec<Vec<GLit>>>,
    pub cmp: Comparator,
    pub guard: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GBody {
    Lit(GLit),
    Agg(GAggregate),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GRule {
    pub head: Vec<AtomId>,
    pub body: Vec<GBody>,
}

impl GRule {
    pub fn is_constraint(&self) -> bool {
        self.head.is_empty()
    }

    pub fn has_aggregate(&self) -> bool {
        self.body.iter().any(|b| matches!(b, GBody::Agg(_)))
    }

    pub fn positive_body(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.body.iter().filter_map(|b| match b {
            GBody::Lit(l) if l.positive => Some(l.atom),
            _ => None,
        })
    }
}

/// Variable-free program over an indexed atom universe.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundProgram {
    pub atoms: Vec<Atom>,
    index: HashMap<Atom, AtomId>,
    pub rules: Vec<GRule>,
    pub prob_facts: Vec<(AtomId, f64)>,
    pub decisions: Vec<AtomId>,
    pub utilities: Vec<(AtomId, f64)>,
}

pub(crate) const AUX_PREFIX: &str = "__";

impl GroundProgram {
    fn empty() -> Self {
        GroundProgram {
            atoms: Vec::new(),
            index: HashMap::new(),
            rules: Vec::new(),
            prob_facts: Vec::new(),
            decisions: Vec::new(),
            utilities: Vec::new(),
        }
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn atom_id(&self, atom: &Atom) -> Option<AtomId> {
        self.index.get(atom).copied()
    }

    /// Looks up an atom written in source syntax, e.g. `buy(spaghetti,anna)`.
    pub fn lookup(&self, text: &str) -> Result<AtomId> {
        let prog = super::parse(&format!("{}.", text.trim()))
            .map_err(|_| Error::UnknownAtom(text.trim().to_string()))?;
        match prog.rules.as_slice() {
            [r] if r.kind == RuleKind::Fact => {
                self.atom_id(&r.head[0]).ok_or_else(|| Error::UnknownAtom(text.trim().to_string()))
            }
            _ => Err(Error::UnknownAtom(text.trim().to_string())),
        }
    }

    pub fn name(&self, id: AtomId) -> String {
        self.atoms[id].to_string()
    }

    pub fn is_aux(&self, id: AtomId) -> bool {
        self.atoms[id].predicate.starts_with(AUX_PREFIX)
    }

    pub fn is_decision(&self, id: AtomId) -> bool {
        self.decisions.contains(&id)
    }

    pub fn is_prob_fact(&self, id: AtomId) -> bool {
        self.prob_facts.iter().any(|&(a, _)| a == id)
    }

    fn intern(&mut self, atom: Atom) -> AtomId {
        if let Some(&id) = self.index.get(&atom) {
            return id;
        }
        let id = self.atoms.len();
        self.index.insert(atom.clone(), id);
        self.atoms.push(atom);
        id
    }

    /// Converts back to an AST program (choice rules stay translated).
    pub fn to_program(&self) -> Program {
        Program {
            prob_facts: self.prob_facts.iter().map(|&(a, p)| (self.atoms[a].clone(), p)).collect(),
            decisions: self.decisions.iter().map(|&d| self.atoms[d].clone()).collect(),
            utilities: self.utilities.iter().map(|&(a, r)| (self.atoms[a].clone(), r)).collect(),
            rules: self.rules.iter().map(|r| self.rule_ast(r)).collect(),
        }
    }

    /// Aggregate groups become elements keyed by their group index.
    pub fn rule_ast(&self, r: &GRule) -> Rule {
        let lit = |l: &GLit| Literal { atom: self.atoms[l.atom].clone(), positive: l.positive };
        let body = r
            .body
            .iter()
            .map(|b| match b {
                GBody::Lit(l) => BodyElem::Lit(lit(l)),
                GBody::Agg(a) => BodyElem::Agg(Aggregate {
                    elements: a
                        .groups
                        .iter()
                        .enumerate()
                        .flat_map(|(gi, alts)| {
                            alts.iter().map(move |c| AggElement {
                                terms: vec![Term::Int(gi as i64)],
                                condition: c.iter().map(lit).collect(),
                            })
                        })
                        .collect(),
                    cmp: a.cmp,
                    guard: Term::Int(a.guard),
                }),
            })
            .collect();
        Rule::new(r.head.iter().map(|&h| self.atoms[h].clone()).collect(), body)
    }

    /// Moves every utility placed on a decision atom `d` onto a fresh atom
    /// defined by `__util_d :- d.`, leaving rewards per answer set unchanged.
    pub fn lift_decision_utilities(&self) -> GroundProgram {
        let mut out = self.clone();
        for k in 0..out.utilities.len() {
            let (a, r) = out.utilities[k];
            if !self.decisions.contains(&a) {
                continue;
            }
            let src = &self.atoms[a];
            let aux = out.intern(Atom::new(format!("{AUX_PREFIX}util_{}", src.predicate), src.args.clone()));
            out.rules.push(GRule { head: vec![aux], body: vec![GBody::Lit(GLit::pos(a))] });
            out.utilities[k] = (aux, r);
        }
        out
    }

    pub fn display_rule(&self, r: &GRule) -> String {
        self.rule_ast(r).to_string()
    }
}

impl fmt::Display for GroundProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_program())
    }
}

type Subst = BTreeMap<String, Term>;

fn apply(atom: &Atom, s: &Subst) -> Atom {
    Atom {
        predicate: atom.predicate.clone(),
        args: atom
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => s.get(v).cloned().unwrap_or_else(|| t.clone()),
                _ => t.clone(),
            })
            .collect(),
    }
}

fn unify(pattern: &Atom, ground: &Atom, s: &mut Subst) -> bool {
    if pattern.predicate != ground.predicate || pattern.args.len() != ground.args.len() {
        return false;
    }
    for (p, g) in pattern.args.iter().zip(&ground.args) {
        match p {
            Term::Var(v) => match s.get(v) {
                Some(bound) if bound != g => return false,
                Some(_) => {}
                None => {
                    s.insert(v.clone(), g.clone());
                }
            },
            _ if p != g => return false,
            _ => {}
        }
    }
    true
}

/// Over-approximation of derivable atoms, indexed by predicate and arity.
#[derive(Default)]
struct Possible {
    set: HashSet<Atom>,
    by_pred: HashMap<(String, usize), Vec<Atom>>,
}

impl Possible {
    fn insert(&mut self, a: Atom) -> bool {
        if self.set.contains(&a) {
            return false;
        }
        self.by_pred.entry((a.predicate.clone(), a.args.len())).or_default().push(a.clone());
        self.set.insert(a);
        true
    }

    fn matches(&self, lits: &[&Atom], base: Subst) -> Vec<Subst> {
        let mut out = Vec::new();
        self.join(lits, base, &mut out);
        out
    }

    fn join(&self, lits: &[&Atom], s: Subst, out: &mut Vec<Subst>) {
        let Some((first, rest)) = lits.split_first() else {
            out.push(s);
            return;
        };
        let Some(cands) = self.by_pred.get(&(first.predicate.clone(), first.args.len())) else {
            return;
        };
        for g in cands {
            let mut s2 = s.clone();
            if unify(first, g, &mut s2) {
                self.join(rest, s2, out);
            }
        }
    }
}

fn positive_atoms(body: &[BodyElem]) -> Vec<&Atom> {
    body.iter()
        .filter_map(|b| match b {
            BodyElem::Lit(l) if l.positive => Some(&l.atom),
            _ => None,
        })
        .collect()
}

fn check_safety(rule: &Rule) -> Result<()> {
    let bound = rule.bound_vars();
    let unsafe_var = |v: &str| Error::Unsafe { rule: rule.to_string(), variable: v.to_string() };
    for h in &rule.head {
        if let Some(v) = h.vars().find(|v| !bound.contains(*v)) {
            return Err(unsafe_var(v));
        }
    }
    for b in &rule.body {
        match b {
            BodyElem::Lit(l) if !l.positive => {
                if let Some(v) = l.atom.vars().find(|v| !bound.contains(*v)) {
                    return Err(unsafe_var(v));
                }
            }
            BodyElem::Lit(_) => {}
            BodyElem::Agg(a) => {
                if let Term::Var(v) = &a.guard {
                    if !bound.contains(v) {
                        return Err(unsafe_var(v));
                    }
                }
                for e in &a.elements {
                    let mut local = bound.clone();
                    for l in e.condition.iter().filter(|l| l.positive) {
                        local.extend(l.atom.vars().map(str::to_string));
                    }
                    let neg = e.condition.iter().filter(|l| !l.positive).flat_map(|l| l.atom.vars());
                    let terms = e.terms.iter().filter_map(|t| match t {
                        Term::Var(v) => Some(v.as_str()),
                        _ => None,
                    });
                    if let Some(v) = terms.chain(neg).find(|v| !local.contains(*v)) {
                        return Err(unsafe_var(v));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Grounds a program by instantiating rules over the atoms that can possibly
/// be derived; negative literals on underivable atoms are dropped as true.
pub fn ground(p: &Program) -> Result<GroundProgram> {
    for r in &p.rules {
        check_safety(r)?;
    }
    let mut possible = Possible::default();
    for (a, _) in &p.prob_facts {
        possible.insert(a.clone());
    }
    for d in &p.decisions {
        possible.insert(d.clone());
    }
    loop {
        let mut changed = false;
        for r in p.rules.iter().filter(|r| !r.head.is_empty()) {
            for s in possible.matches(&positive_atoms(&r.body), Subst::new()) {
                for h in &r.head {
                    changed |= possible.insert(apply(h, &s));
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut g = GroundProgram::empty();
    for (a, pr) in &p.prob_facts {
        let id = g.intern(a.clone());
        g.prob_facts.push((id, *pr));
    }
    for d in &p.decisions {
        let id = g.intern(d.clone());
        g.decisions.push(id);
    }
    let external: HashSet<AtomId> =
        g.prob_facts.iter().map(|&(a, _)| a).chain(g.decisions.iter().copied()).collect();

    let mut seen = HashSet::new();
    for r in &p.rules {
        for s in possible.matches(&positive_atoms(&r.body), Subst::new()) {
            let Some(body) = ground_body(&mut g, &possible, &r.body, &s)? else { continue };
            let head: Vec<AtomId> = dedup(r.head.iter().map(|h| g.intern(apply(h, &s))));
            if let Some(&h) = head.iter().find(|h| external.contains(h)) {
                return Err(Error::Invalid(format!(
                    "{} appears in a rule head but is a probabilistic fact or decision",
                    g.name(h)
                )));
            }
            let new_rules = if r.kind == RuleKind::Choice {
                let a = head[0];
                let src = g.atoms[a].clone();
                let aux = g.intern(Atom::new(format!("{AUX_PREFIX}choice_{}", src.predicate), src.args));
                let mut b1 = body.clone();
                b1.push(GBody::Lit(GLit::neg(aux)));
                let mut b2 = body;
                b2.push(GBody::Lit(GLit::neg(a)));
                vec![GRule { head: vec![a], body: b1 }, GRule { head: vec![aux], body: b2 }]
            } else {
                vec![GRule { head, body }]
            };
            for nr in new_rules {
                if seen.insert(nr.clone()) {
                    g.rules.push(nr);
                }
            }
        }
    }
    for (a, r) in &p.utilities {
        let id = g.intern(a.clone());
        g.utilities.push((id, *r));
    }
    Ok(g)
}

fn dedup<I: IntoIterator<Item = AtomId>>(it: I) -> Vec<AtomId> {
    let mut out = Vec::new();
    for x in it {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

/// Grounds a body under a substitution of the global variables.
/// Returns `None` when the body is statically false.
fn ground_body(
    g: &mut GroundProgram,
    possible: &Possible,
    body: &[BodyElem],
    s: &Subst,
) -> Result<Option<Vec<GBody>>> {
    let mut out = Vec::new();
    for b in body {
        match b {
            BodyElem::Lit(l) => {
                let atom = apply(&l.atom, s);
                if l.positive {
                    out.push(GBody::Lit(GLit::pos(g.intern(atom))));
                } else if possible.set.contains(&atom) {
                    out.push(GBody::Lit(GLit::neg(g.intern(atom))));
                }
            }
            BodyElem::Agg(a) => {
                let guard = match &a.guard {
                    Term::Int(i) => *i,
                    Term::Var(v) => match s.get(v) {
                        Some(Term::Int(i)) => *i,
                        _ => return Ok(None),
                    },
                    Term::Const(_) => return Ok(None),
                };
                let mut groups: BTreeMap<Vec<Term>, BTreeSet<Vec<GLit>>> = BTreeMap::new();
                for e in &a.elements {
                    let pos: Vec<&Atom> = e.condition.iter().filter(|l| l.positive).map(|l| &l.atom).collect();
                    for s2 in possible.matches(&pos, s.clone()) {
                        let tuple: Vec<Term> = e
                            .terms
                            .iter()
                            .map(|t| match t {
                                Term::Var(v) => s2[v].clone(),
                                _ => t.clone(),
                            })
                            .collect();
                        let mut cond = Vec::new();
                        for l in &e.condition {
                            let atom = apply(&l.atom, &s2);
                            if l.positive {
                                cond.push(GLit::pos(g.intern(atom)));
                            } else if possible.set.contains(&atom) {
                                cond.push(GLit::neg(g.intern(atom)));
                            }
                        }
                        cond.sort();
                        cond.dedup();
                        groups.entry(tuple).or_default().insert(cond);
                    }
                }
                out.push(GBody::Agg(GAggregate {
                    groups: groups.into_values().map(|alts| alts.into_iter().collect()).collect(),
                    cmp: a.cmp,
                    guard,
                }));
            }
        }
    }
    Ok(Some(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse;

    fn g(src: &str) -> GroundProgram {
        ground(&parse(src).unwrap()).unwrap()
    }

    #[test]
    fn substitution_over_facts() {
        let gp = g("p(1). p(2). qr :- p(X).");
        let qr_rules = gp.rules.iter().filter(|r| gp.name(r.head[0]) == "qr").count();
        assert_eq!(qr_rules, 2);
    }

    #[test]
    fn aggregate_constraint_has_two_elements() {
        let src = "0.8::shops(anna). 0.5::shops(bob). decision target(anna). decision target(bob).\n\
            buy(spaghetti,anna) ; buy(steak,anna) :- shops(anna), target(anna).\n\
            buy(spaghetti,bob) ; buy(beans,bob) :- shops(bob), target(bob).\n\
            :- #count{X : buy(spaghetti,X)} > 1.";
        let gp = g(src);
        let cons: Vec<_> = gp.rules.iter().filter(|r| r.is_constraint()).collect();
        assert_eq!(cons.len(), 1);
        let GBody::Agg(a) = &cons[0].body[0] else { panic!() };
        assert_eq!(a.groups.len(), 2);
    }

    #[test]
    fn unsafe_rule_names_variable() {
        let err = ground(&parse("r(1). q(X) :- not r(X).").unwrap()).unwrap_err();
        assert!(matches!(err, Error::Unsafe { ref variable, .. } if variable == "X"));
        let err = ground(&parse(":- #count{Y : not p(Y)} > 1.").unwrap()).unwrap_err();
        assert!(matches!(err, Error::Unsafe { ref variable, .. } if variable == "Y"));
    }

    #[test]
    fn choice_is_translated() {
        let gp = g("{a}. b :- a.");
        assert_eq!(gp.rules.len(), 3);
        let aux = gp.atoms.iter().position(|a| a.predicate.starts_with(AUX_PREFIX)).unwrap();
        assert!(gp.is_aux(aux));
        assert_eq!(gp.lookup("a").unwrap(), 0);
    }

    #[test]
    fn underivable_negation_dropped() {
        let gp = g("a :- not b.");
        assert!(gp.rules[0].body.is_empty());
    }

    #[test]
    fn idempotent() {
        let gp = g("0.5::p(1). p(2). {q(X)} :- p(X). :- #count{X : q(X)} >= 2. r ; s :- q(1), not q(2).");
        let again = ground(&gp.to_program()).unwrap();
        assert_eq!(gp.num_atoms(), again.num_atoms());
        let render = |x: &GroundProgram| {
            let mut v: Vec<String> = x.rules.iter().map(|r| x.display_rule(r)).collect();
            v.sort();
            v
        };
        assert_eq!(render(&gp), render(&again));
    }
}
