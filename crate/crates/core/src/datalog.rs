//! Schema-level Horn rules for the two templates and naive bottom-up
//! fixed-point evaluation with stop detection.
//!
//! A [`HornRule`] quantifies rule variables over the instance's variables:
//! whenever all body atoms hold, the head tuple is forced (a head relation
//! tuple, or the distinguished STOP head that witnesses unsatisfiability).
//! Rule variables that occur only in the head range over every instance
//! variable; variables occurring in no atom are ignored during grounding.

use std::collections::HashMap;
use std::sync::LazyLock;

use crate::csp::{code_to_vars, vars_to_code, Instance, TemplateId, Var};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Atom {
    pub relation: usize,
    /// Rule-variable index per argument position.
    pub slots: Vec<usize>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum RuleHead {
    Atom(Atom),
    /// The nullary stop symbol; deriving it means the instance has no solution.
    Stop,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HornRule {
    pub var_count: usize,
    pub body: Vec<Atom>,
    pub head: RuleHead,
}

impl HornRule {
    pub fn is_stop(&self) -> bool {
        matches!(self.head, RuleHead::Stop)
    }

    /// Rule variables that occur in some atom (body or head), ascending.
    pub fn occurring_slots(&self) -> Vec<usize> {
        let mut seen = vec![false; self.var_count];
        for atom in self.atoms() {
            for &s in &atom.slots {
                seen[s] = true;
            }
        }
        (0..self.var_count).filter(|&s| seen[s]).collect()
    }

    fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.body.iter().chain(match &self.head {
            RuleHead::Atom(a) => Some(a),
            RuleHead::Stop => None,
        })
    }
}

#[derive(Clone, Debug)]
pub struct RuleSet {
    pub template: TemplateId,
    pub rules: Vec<HornRule>,
}

impl RuleSet {
    pub fn non_stop_rules(&self) -> impl Iterator<Item = &HornRule> {
        self.rules.iter().filter(|r| !r.is_stop())
    }

    pub fn stop_rules(&self) -> impl Iterator<Item = &HornRule> {
        self.rules.iter().filter(|r| r.is_stop())
    }
}

fn atom(relation: usize, slots: &[usize]) -> Atom {
    Atom { relation, slots: slots.to_vec() }
}

fn rule(var_count: usize, body: Vec<Atom>, head: Atom) -> HornRule {
    HornRule { var_count, body, head: RuleHead::Atom(head) }
}

fn stop(var_count: usize, body: Vec<Atom>) -> HornRule {
    HornRule { var_count, body, head: RuleHead::Stop }
}

// Horn3 relation indices.
const ZERO: usize = 0;
const ONE: usize = 1;
const AND: usize = 2;

// TwoSat relation indices.
const OR: usize = 0;
const IMP: usize = 1;
const NAND: usize = 2;

static HORN3_RULES: LazyLock<RuleSet> = LazyLock::new(|| {
    let rules = vec![
        // (1)  and(x,y,u) → and(y,x,u)                      x0 y1 u2
        rule(3, vec![atom(AND, &[0, 1, 2])], atom(AND, &[1, 0, 2])),
        // (2)  and(x,y,u) ∧ one(x) → and(z,y,u)             x0 y1 z2 u3
        rule(4, vec![atom(AND, &[0, 1, 3]), atom(ONE, &[0])], atom(AND, &[2, 1, 3])),
        // (3)  and(x,y,u) ∧ one(x) ∧ one(y) → one(u)        x0 y1 z2 u3 (z idle)
        rule(
            4,
            vec![atom(AND, &[0, 1, 3]), atom(ONE, &[0]), atom(ONE, &[1])],
            atom(ONE, &[3]),
        ),
        // (4)  and(x,y,u) ∧ one(x) ∧ zero(u) → zero(y)      x0 y1 z2 u3 (z idle)
        rule(
            4,
            vec![atom(AND, &[0, 1, 3]), atom(ONE, &[0]), atom(ZERO, &[3])],
            atom(ZERO, &[1]),
        ),
        // (5)  and(x,x,y) ∧ zero(y) → zero(x)               x0 y1
        rule(2, vec![atom(AND, &[0, 0, 1]), atom(ZERO, &[1])], atom(ZERO, &[0])),
        // (6)  zero(x) ∧ one(x) → STOP                      x0
        stop(1, vec![atom(ZERO, &[0]), atom(ONE, &[0])]),
        // (7)  and(x,y,z) ∧ and(z,x,u) → and(x,y,u)         x0 y1 z2 u3
        rule(4, vec![atom(AND, &[0, 1, 2]), atom(AND, &[2, 0, 3])], atom(AND, &[0, 1, 3])),
        // (8)  and(x,y,z) ∧ and(x,x,t) ∧ and(z,t,u) → and(x,y,u)   x0 y1 z2 t3 u4
        rule(
            5,
            vec![atom(AND, &[0, 1, 2]), atom(AND, &[0, 0, 3]), atom(AND, &[2, 3, 4])],
            atom(AND, &[0, 1, 4]),
        ),
        // (9)  and(x,y,z) ∧ and(x,y,t) ∧ and(z,t,u) → and(x,y,u)   x0 y1 z2 t3 u4
        rule(
            5,
            vec![atom(AND, &[0, 1, 2]), atom(AND, &[0, 1, 3]), atom(AND, &[2, 3, 4])],
            atom(AND, &[0, 1, 4]),
        ),
        // (10) and(x,y,z) ∧ and(z,t,u) ∧ one(t) → and(x,y,u)       x0 y1 z2 t3 u4
        rule(
            5,
            vec![atom(AND, &[0, 1, 2]), atom(AND, &[2, 3, 4]), atom(ONE, &[3])],
            atom(AND, &[0, 1, 4]),
        ),
        // (11) and(x,y,z) ∧ and(z,t,u) ∧ one(y) → and(x,t,u)       x0 y1 z2 t3 u4
        rule(
            5,
            vec![atom(AND, &[0, 1, 2]), atom(AND, &[2, 3, 4]), atom(ONE, &[1])],
            atom(AND, &[0, 3, 4]),
        ),
        // (12) and(x,y,z) ∧ and(z,t,u) ∧ and(x,y',t) ∧ one(y') → and(x,y,u)
        //      x0 y1 y'2 z3 t4 u5
        rule(
            6,
            vec![
                atom(AND, &[0, 1, 3]),
                atom(AND, &[3, 4, 5]),
                atom(AND, &[0, 2, 4]),
                atom(ONE, &[2]),
            ],
            atom(AND, &[0, 1, 5]),
        ),
        // (13) and(x,x,z) ∧ and(z,t,u) ∧ and(y,y',t) ∧ one(y') → and(x,y,u)
        //      x0 y1 y'2 z3 t4 u5
        rule(
            6,
            vec![
                atom(AND, &[0, 0, 3]),
                atom(AND, &[3, 4, 5]),
                atom(AND, &[1, 2, 4]),
                atom(ONE, &[2]),
            ],
            atom(AND, &[0, 1, 5]),
        ),
        // (14) and(x,y,z) ∧ and(z,t,u) ∧ one(y) ∧ one(t) → and(x,y,u)
        //      x0 y1 z2 t3 u4
        rule(
            5,
            vec![
                atom(AND, &[0, 1, 2]),
                atom(AND, &[2, 3, 4]),
                atom(ONE, &[1]),
                atom(ONE, &[3]),
            ],
            atom(AND, &[0, 1, 4]),
        ),
        // (15) and(x,y,z) ∧ and(z,t,u) ∧ and(x',y',t) ∧ one(x') ∧ one(y') → and(x,y,u)
        //      x0 y1 x'2 y'3 z4 t5 u6
        rule(
            7,
            vec![
                atom(AND, &[0, 1, 4]),
                atom(AND, &[4, 5, 6]),
                atom(AND, &[2, 3, 5]),
                atom(ONE, &[2]),
                atom(ONE, &[3]),
            ],
            atom(AND, &[0, 1, 6]),
        ),
        // (16) and(x,y,z) ∧ and(z,t,u) ∧ and(x',y',t) ∧ one(y) ∧ one(y') → and(x,x',u)
        //      x0 y1 x'2 y'3 z4 t5 u6
        rule(
            7,
            vec![
                atom(AND, &[0, 1, 4]),
                atom(AND, &[4, 5, 6]),
                atom(AND, &[2, 3, 5]),
                atom(ONE, &[1]),
                atom(ONE, &[3]),
            ],
            atom(AND, &[0, 2, 6]),
        ),
        // (17) true → and(x,y,x): x∧y ≤ x holds under every assignment.
        rule(2, vec![], atom(AND, &[0, 1, 0])),
        // (18) and(x,y,z) ∧ zero(z) → and(x,y,u): a forced-zero bound makes
        //      x∧y = 0, so every upper bound holds.                x0 y1 z2 u3
        rule(4, vec![atom(AND, &[0, 1, 2]), atom(ZERO, &[2])], atom(AND, &[0, 1, 3])),
    ];
    RuleSet { template: TemplateId::Horn3, rules }
});

static TWOSAT_RULES: LazyLock<RuleSet> = LazyLock::new(|| {
    let rules = vec![
        // (1)  true → imp(x,x)                              x0
        rule(1, vec![], atom(IMP, &[0, 0])),
        // (2)  or(x,y) → or(y,x)                            x0 y1
        rule(2, vec![atom(OR, &[0, 1])], atom(OR, &[1, 0])),
        // (3)  nand(x,y) → nand(y,x)                        x0 y1
        rule(2, vec![atom(NAND, &[0, 1])], atom(NAND, &[1, 0])),
        // (4)  imp(x,y) ∧ imp(y,z) → imp(x,z)               x0 y1 z2
        rule(3, vec![atom(IMP, &[0, 1]), atom(IMP, &[1, 2])], atom(IMP, &[0, 2])),
        // (5)  or(x,y) ∧ imp(y,z) → or(x,z)                 x0 y1 z2
        rule(3, vec![atom(OR, &[0, 1]), atom(IMP, &[1, 2])], atom(OR, &[0, 2])),
        // (6)  nand(x,y) ∧ imp(z,y) → nand(x,z)             x0 y1 z2
        rule(3, vec![atom(NAND, &[0, 1]), atom(IMP, &[2, 1])], atom(NAND, &[0, 2])),
        // (7)  nand(x,y) ∧ or(y,z) → imp(x,z)               x0 y1 z2
        rule(3, vec![atom(NAND, &[0, 1]), atom(OR, &[1, 2])], atom(IMP, &[0, 2])),
        // (8)  or(x,x) → or(x,z): a variable forced to 1 satisfies any
        //      clause containing it positively.              x0 z1
        rule(2, vec![atom(OR, &[0, 0])], atom(OR, &[0, 1])),
        // (9)  or(x,x) → imp(z,x)                            x0 z1
        rule(2, vec![atom(OR, &[0, 0])], atom(IMP, &[1, 0])),
        // (10) nand(x,x) → nand(x,z): a variable forced to 0 satisfies any
        //      clause containing it negatively.              x0 z1
        rule(2, vec![atom(NAND, &[0, 0])], atom(NAND, &[0, 1])),
        // (11) nand(x,x) → imp(x,z)                          x0 z1
        rule(2, vec![atom(NAND, &[0, 0])], atom(IMP, &[0, 1])),
        // stop: or(x,y) ∧ imp(x,y) ∧ nand(x,y) ∧ imp(y,x) → STOP   x0 y1
        stop(
            2,
            vec![
                atom(OR, &[0, 1]),
                atom(IMP, &[0, 1]),
                atom(NAND, &[0, 1]),
                atom(IMP, &[1, 0]),
            ],
        ),
        // stop: or(x,x) ∧ nand(x,x) → STOP                  x0
        stop(1, vec![atom(OR, &[0, 0]), atom(NAND, &[0, 0])]),
    ];
    RuleSet { template: TemplateId::TwoSat, rules }
});

/// The built-in rule set that solves densification for the template.
///
/// The Horn3 set has 17 non-stop rules plus one stop rule; the TwoSat set
/// has 11 non-stop rules plus two stop rules. Every non-stop rule holds on
/// [`template_as_instance`], and the fixed point of a satisfiable instance
/// under these rules is exactly its densification (both facts are asserted
/// by the test suite against brute-force oracles).
pub fn builtin_rules(template: TemplateId) -> &'static RuleSet {
    match template {
        TemplateId::Horn3 => &HORN3_RULES,
        TemplateId::TwoSat => &TWOSAT_RULES,
    }
}

/// The template itself viewed as an instance over two variables, where
/// variable `b` stands for the domain value `b`.
pub fn template_as_instance(template: TemplateId) -> Instance {
    let mut inst = Instance::new(template, 2).expect("two variables");
    for (i, rel) in template.template().relations.iter().enumerate() {
        for tuple in rel.tuples() {
            let vars: Vec<Var> = tuple.iter().map(|&b| b as Var).collect();
            inst.add_tuple(i, &vars).expect("in range");
        }
    }
    inst
}

/// Per-relation tuple snapshot with one lookup index per argument position.
struct Snapshot {
    n: usize,
    rels: Vec<RelSnapshot>,
}

struct RelSnapshot {
    arity: usize,
    codes: Vec<usize>,
    by_col: Vec<HashMap<Var, Vec<usize>>>,
}

impl Snapshot {
    fn new(instance: &Instance) -> Snapshot {
        let n = instance.n();
        let template = instance.template().template();
        let rels = (0..instance.relation_count())
            .map(|i| {
                let arity = template.relations[i].arity();
                let codes: Vec<usize> = instance.codes(i).iter().copied().collect();
                let mut by_col = vec![HashMap::new(); arity];
                for &code in &codes {
                    let vars = code_to_vars(code, arity, n);
                    for (p, &v) in vars.iter().enumerate() {
                        by_col[p].entry(v).or_insert_with(Vec::new).push(code);
                    }
                }
                RelSnapshot { arity, codes, by_col }
            })
            .collect();
        Snapshot { n, rels }
    }

    fn contains(&self, rel: usize, code: usize) -> bool {
        self.rels[rel].codes.binary_search(&code).is_ok()
    }
}

const EMPTY_CODES: &[usize] = &[];

/// Calls `visit` once per assignment of rule variables that satisfies every
/// body atom (variables not in the body stay unbound). Returns `false` if
/// `visit` aborted the search.
fn for_each_body_match(
    snap: &Snapshot,
    rule: &HornRule,
    visit: &mut impl FnMut(&[Option<Var>]) -> bool,
) -> bool {
    let mut binding = vec![None; rule.var_count];
    match_rest(snap, &rule.body, 0, &mut binding, visit)
}

fn match_rest(
    snap: &Snapshot,
    body: &[Atom],
    idx: usize,
    binding: &mut Vec<Option<Var>>,
    visit: &mut impl FnMut(&[Option<Var>]) -> bool,
) -> bool {
    if idx == body.len() {
        return visit(binding);
    }
    let atom = &body[idx];
    let rel = &snap.rels[atom.relation];
    // Prefer an indexed scan on the first already-bound position.
    let candidates: &[usize] = match atom
        .slots
        .iter()
        .enumerate()
        .find_map(|(p, &s)| binding[s].map(|v| (p, v)))
    {
        Some((p, v)) => rel.by_col[p].get(&v).map(Vec::as_slice).unwrap_or(EMPTY_CODES),
        None => &rel.codes,
    };
    for &code in candidates {
        let vars = code_to_vars(code, rel.arity, snap.n);
        let mut bound_here: [usize; 3] = [usize::MAX; 3];
        let mut bound_count = 0;
        let mut ok = true;
        for (p, &s) in atom.slots.iter().enumerate() {
            match binding[s] {
                Some(v) if v == vars[p] => {}
                Some(_) => {
                    ok = false;
                    break;
                }
                None => {
                    binding[s] = Some(vars[p]);
                    bound_here[bound_count] = s;
                    bound_count += 1;
                }
            }
        }
        let keep_going = !ok || match_rest(snap, body, idx + 1, binding, visit);
        for &s in &bound_here[..bound_count] {
            binding[s] = None;
        }
        if !keep_going {
            return false;
        }
    }
    true
}

/// Enumerates the head tuples produced by one rule under one body match;
/// head slots left unbound by the body range over all instance variables.
fn for_each_head_tuple(
    head: &Atom,
    binding: &[Option<Var>],
    n: usize,
    visit: &mut impl FnMut(usize) -> bool,
) -> bool {
    let free: Vec<usize> = {
        let mut seen = Vec::new();
        for &s in &head.slots {
            if binding[s].is_none() && !seen.contains(&s) {
                seen.push(s);
            }
        }
        seen
    };
    let mut choice = vec![0usize; free.len()];
    loop {
        let vars: Vec<Var> = head
            .slots
            .iter()
            .map(|&s| binding[s].unwrap_or_else(|| choice[free.iter().position(|&f| f == s).unwrap()]))
            .collect();
        if !visit(vars_to_code(&vars, n)) {
            return false;
        }
        // Odometer over the free head slots.
        let mut i = free.len();
        loop {
            if i == 0 {
                return true;
            }
            i -= 1;
            choice[i] += 1;
            if choice[i] < n {
                break;
            }
            choice[i] = 0;
        }
    }
}

/// True iff every assignment of instance variables to rule slots that
/// satisfies all body atoms also satisfies the head atom.
pub fn check_rule(instance: &Instance, rule: &HornRule) -> Result<bool> {
    let head = match &rule.head {
        RuleHead::Atom(a) => a,
        RuleHead::Stop => {
            return Err(Error::InvalidArgument(
                "check_rule is only defined for non-stop rules".into(),
            ))
        }
    };
    let snap = Snapshot::new(instance);
    let holds = for_each_body_match(&snap, rule, &mut |binding| {
        for_each_head_tuple(head, binding, snap.n, &mut |code| {
            snap.contains(head.relation, code)
        })
    });
    Ok(holds)
}

/// One parallel round of rule application: the returned instance carries
/// every input tuple plus every head tuple derivable from the input in a
/// single step. `stop_fired` reports whether some stop rule's body is
/// satisfiable in the input.
pub fn immediate_consequence(instance: &Instance, rules: &RuleSet) -> (Instance, bool) {
    assert_eq!(
        instance.template(),
        rules.template,
        "rule set and instance must share a template"
    );
    let snap = Snapshot::new(instance);
    let mut out = instance.clone();
    let mut stop_fired = false;
    for rule in &rules.rules {
        match &rule.head {
            RuleHead::Stop => {
                if !stop_fired {
                    let found = !for_each_body_match(&snap, rule, &mut |_| false);
                    stop_fired |= found;
                }
            }
            RuleHead::Atom(head) => {
                for_each_body_match(&snap, rule, &mut |binding| {
                    for_each_head_tuple(head, binding, snap.n, &mut |code| {
                        out.insert_code(head.relation, code);
                        true
                    })
                });
            }
        }
    }
    (out, stop_fired)
}

/// Naive bottom-up evaluation: iterates [`immediate_consequence`] until no
/// tuple is added. `stop_fired` is true if any stop rule's body became
/// satisfiable at any iteration, the final structure included.
pub fn fixed_point(instance: &Instance, rules: &RuleSet) -> (Instance, bool) {
    let mut current = instance.clone();
    let mut stop_fired = false;
    loop {
        let before = current.tuple_count();
        let (next, stop) = immediate_consequence(&current, rules);
        stop_fired |= stop;
        if next.tuple_count() == before {
            return (next, stop_fired);
        }
        current = next;
    }
}
