//! Answer-set enumeration for ground programs (reduct-based semantics).

use std::cmp::Ordering;
use std::collections::BTreeSet;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::lang::{AtomId, GAggregate, GBody, GLit, GRule, GroundProgram};

pub const DEFAULT_ATOM_CAP: usize = 26;

/// A set of atoms over a program's universe.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interpretation(FixedBitSet);

impl Interpretation {
    pub fn empty(universe: usize) -> Self {
        Interpretation(FixedBitSet::with_capacity(universe))
    }

    pub fn from_atoms(universe: usize, atoms: impl IntoIterator<Item = AtomId>) -> Self {
        let mut s = Self::empty(universe);
        for a in atoms {
            s.0.insert(a);
        }
        s
    }

    pub fn contains(&self, a: AtomId) -> bool {
        self.0.contains(a)
    }

    pub fn insert(&mut self, a: AtomId) {
        self.0.insert(a);
    }

    pub fn atoms(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.0.ones()
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_subset(&self, other: &Interpretation) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn bits(&self) -> &FixedBitSet {
        &self.0
    }

    /// Atom names, skipping auxiliary atoms introduced by translation.
    pub fn names(&self, p: &GroundProgram) -> Vec<String> {
        self.atoms().filter(|&a| !p.is_aux(a)).map(|a| p.name(a)).collect()
    }

    pub fn render(&self, p: &GroundProgram) -> String {
        format!("{{{}}}", self.names(p).join(","))
    }
}

/// Ordered as the integer whose bit `i` is atom `i`.
impl Ord for Interpretation {
    fn cmp(&self, other: &Self) -> Ordering {
        let a: Vec<usize> = self.0.ones().collect();
        let b: Vec<usize> = other.0.ones().collect();
        a.iter().rev().cmp(b.iter().rev())
    }
}

impl PartialOrd for Interpretation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnswerSetCollection {
    pub sets: Vec<Interpretation>,
}

impl AnswerSetCollection {
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

fn lit_true(i: &FixedBitSet, l: GLit) -> bool {
    i.contains(l.atom) == l.positive
}

fn agg_true(i: &FixedBitSet, a: &GAggregate) -> bool {
    let count = a.groups.iter().filter(|alts| alts.iter().any(|c| c.iter().all(|&l| lit_true(i, l)))).count();
    a.cmp.holds(count as i64, a.guard)
}

pub fn body_true(i: &Interpretation, body: &[GBody]) -> bool {
    body.iter().all(|b| match b {
        GBody::Lit(l) => lit_true(&i.0, *l),
        GBody::Agg(a) => agg_true(&i.0, a),
    })
}

pub fn satisfies(i: &Interpretation, r: &GRule) -> bool {
    !body_true(i, &r.body) || r.head.iter().any(|&h| i.contains(h))
}

pub fn reduct(p: &GroundProgram, i: &Interpretation) -> GroundProgram {
    let mut out = p.clone();
    out.rules.retain(|r| body_true(i, &r.body));
    out
}

pub fn check_stable(p: &GroundProgram, i: &Interpretation) -> bool {
    check_stable_with(p, &Interpretation::empty(p.num_atoms()), i)
}

/// Stability of `i` for `p` extended with the atoms of `facts` as facts.
pub fn check_stable_with(p: &GroundProgram, facts: &Interpretation, i: &Interpretation) -> bool {
    if !facts.is_subset(i) || !p.rules.iter().all(|r| satisfies(i, r)) {
        return false;
    }
    let red: Vec<&GRule> = p.rules.iter().filter(|r| body_true(i, &r.body)).collect();
    is_minimal(&red, &facts.0, &i.0)
}

pub fn answer_sets(p: &GroundProgram) -> Result<AnswerSetCollection> {
    let sets = Solver::new(p, DEFAULT_ATOM_CAP)?.solve(&Interpretation::empty(p.num_atoms()))?;
    Ok(AnswerSetCollection { sets })
}

pub fn project(c: &AnswerSetCollection, b: &[AtomId]) -> BTreeSet<Interpretation> {
    c.sets
        .iter()
        .map(|s| {
            let n = s.0.len();
            Interpretation::from_atoms(n, b.iter().copied().filter(|&a| s.contains(a)))
        })
        .collect()
}

const UNKNOWN: i8 = 0;
const TRUE: i8 = 1;
const FALSE: i8 = -1;

#[derive(PartialEq)]
enum Tri {
    True,
    False,
    Unknown,
}

fn val(v: &[i8], l: GLit) -> i8 {
    match v[l.atom] {
        UNKNOWN => UNKNOWN,
        x if l.positive => x,
        x => -x,
    }
}

fn agg_status(v: &[i8], a: &GAggregate) -> Tri {
    let (mut lo, mut hi) = (0i64, 0i64);
    for alts in &a.groups {
        let mut any_true = false;
        let mut any_open = false;
        for c in alts {
            let vals: Vec<i8> = c.iter().map(|&l| val(v, l)).collect();
            if vals.iter().all(|&x| x == TRUE) {
                any_true = true;
            } else if !vals.contains(&FALSE) {
                any_open = true;
            }
        }
        if any_true {
            lo += 1;
            hi += 1;
        } else if any_open {
            hi += 1;
        }
    }
    let sat = (lo..=hi).filter(|&c| a.cmp.holds(c, a.guard)).count() as i64;
    if sat == hi - lo + 1 {
        Tri::True
    } else if sat == 0 {
        Tri::False
    } else {
        Tri::Unknown
    }
}

/// Body status plus the single open literal when exactly one element is open.
fn body_status(v: &[i8], body: &[GBody]) -> (Tri, Option<GLit>, usize) {
    let mut open = 0;
    let mut open_lit = None;
    for b in body {
        let st = match b {
            GBody::Lit(l) => match val(v, *l) {
                TRUE => Tri::True,
                FALSE => Tri::False,
                _ => {
                    open_lit = Some(*l);
                    Tri::Unknown
                }
            },
            GBody::Agg(a) => {
                let st = agg_status(v, a);
                if st == Tri::Unknown {
                    open_lit = None;
                }
                st
            }
        };
        match st {
            Tri::False => return (Tri::False, None, 0),
            Tri::Unknown => open += 1,
            Tri::True => {}
        }
    }
    if open == 0 {
        (Tri::True, None, 0)
    } else {
        (Tri::Unknown, if open == 1 { open_lit } else { None }, open)
    }
}

fn set_lit(v: &mut [i8], l: GLit, truth: bool) {
    v[l.atom] = if l.positive == truth { TRUE } else { FALSE };
}

/// Unit propagation over rules: returns false on conflict.
fn propagate_rules(rules: &[&GRule], v: &mut [i8]) -> bool {
    let mut changed = true;
    while changed {
        changed = false;
        for r in rules {
            if r.head.iter().any(|&h| v[h] == TRUE) {
                continue;
            }
            let open_heads: Vec<AtomId> = r.head.iter().copied().filter(|&h| v[h] == UNKNOWN).collect();
            let (st, open_lit, _) = body_status(v, &r.body);
            match st {
                Tri::True => match open_heads.len() {
                    0 => return false,
                    1 => {
                        v[open_heads[0]] = TRUE;
                        changed = true;
                    }
                    _ => {}
                },
                Tri::Unknown if open_heads.is_empty() => {
                    if let Some(l) = open_lit {
                        set_lit(v, l, false);
                        changed = true;
                    }
                }
                _ => {}
            }
        }
    }
    true
}

/// Whether no proper subset of `i` containing `facts` models the reduct `red`.
fn is_minimal(red: &[&GRule], facts: &FixedBitSet, i: &FixedBitSet) -> bool {
    if let Some(least) = horn_least_model(red, facts, i) {
        return least == *i;
    }
    let n = i.len();
    let mut v = vec![FALSE; n];
    for a in i.ones() {
        v[a] = UNKNOWN;
    }
    for a in facts.ones() {
        v[a] = TRUE;
    }
    !smaller_model(red, &mut v, i)
}

/// Least model of the reduct restricted to subsets of `i`, when the reduct
/// behaves monotonically there; `None` otherwise.
fn horn_least_model(red: &[&GRule], facts: &FixedBitSet, i: &FixedBitSet) -> Option<FixedBitSet> {
    let mut definite: Vec<(Option<AtomId>, Vec<AtomId>, Vec<&GAggregate>)> = Vec::new();
    for r in red {
        let heads: Vec<AtomId> = r.head.iter().copied().filter(|&h| i.contains(h)).collect();
        if heads.len() > 1 {
            return None;
        }
        let mut pos = Vec::new();
        let mut aggs = Vec::new();
        for b in &r.body {
            match b {
                GBody::Lit(l) if l.positive => pos.push(l.atom),
                GBody::Lit(_) => {}
                GBody::Agg(a) => {
                    let neg_inside =
                        a.groups.iter().flatten().flatten().any(|l| !l.positive && i.contains(l.atom));
                    if neg_inside {
                        return None;
                    }
                    match a.cmp {
                        crate::lang::Comparator::Gt | crate::lang::Comparator::Ge => aggs.push(a),
                        crate::lang::Comparator::Lt | crate::lang::Comparator::Le => {}
                        _ => return None,
                    }
                }
            }
        }
        definite.push((heads.first().copied(), pos, aggs));
    }
    let mut m = facts.clone();
    let mut changed = true;
    while changed {
        changed = false;
        for (h, pos, aggs) in &definite {
            let Some(h) = h else { continue };
            if m.contains(*h) {
                continue;
            }
            if pos.iter().all(|&a| m.contains(a)) && aggs.iter().all(|a| agg_true(&m, a)) {
                m.insert(*h);
                changed = true;
            }
        }
    }
    Some(m)
}

fn smaller_model(red: &[&GRule], v: &mut Vec<i8>, i: &FixedBitSet) -> bool {
    if !propagate_rules(red, v) {
        return false;
    }
    match v.iter().position(|&x| x == UNKNOWN) {
        None => v.iter().enumerate().any(|(a, &x)| i.contains(a) && x == FALSE),
        Some(a) => {
            for choice in [FALSE, TRUE] {
                let mut w = v.clone();
                w[a] = choice;
                if smaller_model(red, &mut w, i) {
                    return true;
                }
            }
            false
        }
    }
}

/// Reusable answer-set enumerator for one program under varying facts.
pub struct Solver<'a> {
    p: &'a GroundProgram,
    rules: Vec<&'a GRule>,
    heads_of: Vec<Vec<usize>>,
    external: FixedBitSet,
}

impl<'a> Solver<'a> {
    /// Fails when more than `cap` atoms can be derived by rules.
    pub fn new(p: &'a GroundProgram, cap: usize) -> Result<Self> {
        let n = p.num_atoms();
        let mut heads_of = vec![Vec::new(); n];
        for (k, r) in p.rules.iter().enumerate() {
            for &h in &r.head {
                heads_of[h].push(k);
            }
        }
        let mut external = FixedBitSet::with_capacity(n);
        for &(a, _) in &p.prob_facts {
            external.insert(a);
        }
        for &d in &p.decisions {
            external.insert(d);
        }
        let derivable = (0..n).filter(|&a| !heads_of[a].is_empty()).count();
        if derivable > cap {
            return Err(Error::Resource(format!("{derivable} derivable atoms exceed the cap of {cap}")));
        }
        Ok(Solver { p, rules: p.rules.iter().collect(), heads_of, external })
    }

    /// All answer sets of the program plus `facts`, in ascending order.
    pub fn solve(&self, facts: &Interpretation) -> Result<Vec<Interpretation>> {
        let n = self.p.num_atoms();
        let mut v = vec![UNKNOWN; n];
        for (a, x) in v.iter_mut().enumerate() {
            if facts.contains(a) {
                *x = TRUE;
            } else if self.external.contains(a) || self.heads_of[a].is_empty() {
                *x = FALSE;
            }
        }
        let mut out = Vec::new();
        self.search(v, facts, &mut out);
        out.sort();
        out.dedup();
        Ok(out)
    }

    fn propagate(&self, v: &mut [i8], facts: &Interpretation) -> bool {
        loop {
            if !propagate_rules(&self.rules, v) {
                return false;
            }
            let mut changed = false;
            for a in 0..v.len() {
                if v[a] == FALSE || facts.contains(a) || self.heads_of[a].is_empty() {
                    continue;
                }
                let supported = self.heads_of[a].iter().any(|&k| {
                    let r = &self.p.rules[k];
                    r.head.iter().all(|&h| h == a || v[h] != TRUE) && body_status(v, &r.body).0 != Tri::False
                });
                if !supported {
                    if v[a] == TRUE {
                        return false;
                    }
                    v[a] = FALSE;
                    changed = true;
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn search(&self, mut v: Vec<i8>, facts: &Interpretation, out: &mut Vec<Interpretation>) {
        if !self.propagate(&mut v, facts) {
            return;
        }
        match v.iter().position(|&x| x == UNKNOWN) {
            None => {
                let i = Interpretation::from_atoms(v.len(), (0..v.len()).filter(|&a| v[a] == TRUE));
                if check_stable_with(self.p, facts, &i) {
                    out.push(i);
                }
            }
            Some(a) => {
                for choice in [FALSE, TRUE] {
                    let mut w = v.clone();
                    w[a] = choice;
                    self.search(w, facts, out);
                }
            }
        }
    }
}
