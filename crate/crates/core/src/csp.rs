//! Fixed Boolean templates, instances over them, and the constraint universe.
//!
//! Two constraint languages are built in:
//!
//! * `Horn3` — relations `zero/1`, `one/1` and `and/3`, where `and(x,y,z)`
//!   holds iff `x∧y ≤ z`;
//! * `TwoSat` — relations `or/2`, `imp/2` and `nand/2` (the three clause
//!   shapes of 2-SAT up to argument order).
//!
//! Variables are dense integers `0..n`. Every possible constraint over `n`
//! variables has a canonical integer id (see [`ConstraintSpace`]), which is
//! what the implicational-system machinery works with.

use std::collections::BTreeSet;
use std::sync::LazyLock;

use crate::error::{Error, Result};

pub type Var = usize;
/// Canonical id of one constraint in the universe of a `(template, n)` pair.
pub type LitId = usize;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum TemplateId {
    Horn3,
    TwoSat,
}

impl TemplateId {
    pub fn template(self) -> &'static Template {
        match self {
            TemplateId::Horn3 => &HORN3,
            TemplateId::TwoSat => &TWOSAT,
        }
    }

    /// Name used by the text formats: `horn3` or `2sat`.
    pub fn name(self) -> &'static str {
        match self {
            TemplateId::Horn3 => "horn3",
            TemplateId::TwoSat => "2sat",
        }
    }
}

/// A Boolean relation of small arity, stored as its explicit tuple set.
pub struct Relation {
    name: &'static str,
    arity: usize,
    // Bit `t` is set iff the tuple with big-endian index `t` satisfies the
    // relation (index of (a,b,c) is a<<2 | b<<1 | c).
    mask: u8,
}

impl Relation {
    fn from_fn(name: &'static str, arity: usize, pred: impl Fn(&[bool]) -> bool) -> Relation {
        assert!(arity >= 1 && arity <= 3);
        let mut mask = 0u8;
        for t in 0..1usize << arity {
            let tuple: Vec<bool> = (0..arity).map(|p| t >> (arity - 1 - p) & 1 == 1).collect();
            if pred(&tuple) {
                mask |= 1 << t;
            }
        }
        Relation { name, arity, mask }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn contains(&self, values: &[bool]) -> bool {
        debug_assert_eq!(values.len(), self.arity);
        let idx: usize = values.iter().fold(0, |acc, &b| acc << 1 | b as usize);
        self.mask >> idx & 1 == 1
    }

    /// The satisfying tuples in ascending (big-endian) order.
    pub fn tuples(&self) -> Vec<Vec<bool>> {
        (0..1usize << self.arity)
            .filter(|t| self.mask >> t & 1 == 1)
            .map(|t| (0..self.arity).map(|p| t >> (self.arity - 1 - p) & 1 == 1).collect())
            .collect()
    }

    pub(crate) fn mask(&self) -> u8 {
        self.mask
    }
}

pub struct Template {
    pub id: TemplateId,
    pub relations: Vec<Relation>,
}

static HORN3: LazyLock<Template> = LazyLock::new(|| Template {
    id: TemplateId::Horn3,
    relations: vec![
        Relation::from_fn("zero", 1, |v| !v[0]),
        Relation::from_fn("one", 1, |v| v[0]),
        Relation::from_fn("and", 3, |v| !(v[0] && v[1]) || v[2]),
    ],
});

static TWOSAT: LazyLock<Template> = LazyLock::new(|| Template {
    id: TemplateId::TwoSat,
    relations: vec![
        Relation::from_fn("or", 2, |v| v[0] || v[1]),
        Relation::from_fn("imp", 2, |v| !v[0] || v[1]),
        Relation::from_fn("nand", 2, |v| !(v[0] && v[1])),
    ],
});

pub(crate) fn vars_to_code(vars: &[Var], n: usize) -> usize {
    vars.iter().fold(0, |acc, &v| acc * n + v)
}

pub(crate) fn code_to_vars(code: usize, arity: usize, n: usize) -> Vec<Var> {
    let mut vars = vec![0; arity];
    let mut c = code;
    for p in (0..arity).rev() {
        vars[p] = c % n;
        c /= n;
    }
    vars
}

/// A relational structure over one of the fixed templates: a variable count
/// plus one tuple set per template relation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Instance {
    template: TemplateId,
    n: usize,
    // Tuple codes per relation; code of (v1,..,vk) is Σ v_i · n^(k-1-i).
    rels: Vec<BTreeSet<usize>>,
}

impl Instance {
    pub fn new(template: TemplateId, n: usize) -> Result<Instance> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "instances need at least one variable".into(),
            ));
        }
        let rels = template.template().relations.iter().map(|_| BTreeSet::new()).collect();
        Ok(Instance { template, n, rels })
    }

    /// The instance carrying every possible tuple of every relation.
    pub fn full(template: TemplateId, n: usize) -> Result<Instance> {
        let mut inst = Instance::new(template, n)?;
        for (i, rel) in template.template().relations.iter().enumerate() {
            inst.rels[i] = (0..n.pow(rel.arity() as u32)).collect();
        }
        Ok(inst)
    }

    pub fn template(&self) -> TemplateId {
        self.template
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn relation_count(&self) -> usize {
        self.rels.len()
    }

    pub fn add_tuple(&mut self, rel: usize, vars: &[Var]) -> Result<()> {
        let arity = self.arity_of(rel)?;
        if vars.len() != arity {
            return Err(Error::InvalidArgument(format!(
                "relation {rel} has arity {arity}, got {} variables",
                vars.len()
            )));
        }
        if let Some(&v) = vars.iter().find(|&&v| v >= self.n) {
            return Err(Error::InvalidArgument(format!(
                "variable {v} out of range for {} variables",
                self.n
            )));
        }
        self.rels[rel].insert(vars_to_code(vars, self.n));
        Ok(())
    }

    pub fn contains_tuple(&self, rel: usize, vars: &[Var]) -> bool {
        vars.iter().all(|&v| v < self.n)
            && rel < self.rels.len()
            && self.rels[rel].contains(&vars_to_code(vars, self.n))
    }

    pub fn tuples(&self, rel: usize) -> impl Iterator<Item = Vec<Var>> + '_ {
        let arity = self.template.template().relations[rel].arity();
        self.rels[rel].iter().map(move |&c| code_to_vars(c, arity, self.n))
    }

    pub(crate) fn codes(&self, rel: usize) -> &BTreeSet<usize> {
        &self.rels[rel]
    }

    pub(crate) fn insert_code(&mut self, rel: usize, code: usize) -> bool {
        self.rels[rel].insert(code)
    }

    pub fn tuple_count(&self) -> usize {
        self.rels.iter().map(|r| r.len()).sum()
    }

    /// Componentwise inclusion of tuple sets.
    pub fn is_sub_instance_of(&self, other: &Instance) -> bool {
        self.template == other.template
            && self.n == other.n
            && self.rels.iter().zip(&other.rels).all(|(a, b)| a.is_subset(b))
    }

    fn arity_of(&self, rel: usize) -> Result<usize> {
        self.template
            .template()
            .relations
            .get(rel)
            .map(|r| r.arity())
            .ok_or_else(|| Error::InvalidArgument(format!("no relation with index {rel}")))
    }
}

/// A total assignment of Boolean values to the variables `0..n`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn new(values: Vec<bool>) -> Assignment {
        Assignment(values)
    }

    /// Assignment with variable `i` set to bit `n-1-i` of `mask`, so that
    /// ascending masks enumerate assignments in ascending binary order.
    pub fn from_mask(mask: usize, n: usize) -> Assignment {
        Assignment((0..n).map(|i| mask >> (n - 1 - i) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, v: Var) -> bool {
        self.0[v]
    }

    pub fn values(&self) -> &[bool] {
        &self.0
    }
}

/// True iff the assignment maps every constrained tuple into its relation.
pub fn satisfies(assignment: &Assignment, instance: &Instance) -> Result<bool> {
    if assignment.len() != instance.n() {
        return Err(Error::InvalidArgument(format!(
            "assignment has {} values, instance has {} variables",
            assignment.len(),
            instance.n()
        )));
    }
    let template = instance.template().template();
    for (i, rel) in template.relations.iter().enumerate() {
        let mut values = vec![false; rel.arity()];
        for vars in instance.tuples(i) {
            for (p, &v) in vars.iter().enumerate() {
                values[p] = assignment.get(v);
            }
            if !rel.contains(&values) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The id space of all possible constraints over `n` variables.
///
/// Ids are assigned relation by relation in signature order, and inside one
/// relation by the big-endian tuple code, so for `Horn3` the layout is
/// `zero v ↦ v`, `one v ↦ n+v`, `and(i,j,k) ↦ 2n + i·n² + j·n + k`, and for
/// `TwoSat` it is `or(u,v) ↦ u·n+v`, `imp ↦ n²+…`, `nand ↦ 2n²+…`.
#[derive(Clone, Copy, Debug)]
pub struct ConstraintSpace {
    template: TemplateId,
    n: usize,
}

impl ConstraintSpace {
    pub fn new(template: TemplateId, n: usize) -> Result<ConstraintSpace> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "the constraint universe needs at least one variable".into(),
            ));
        }
        Ok(ConstraintSpace { template, n })
    }

    pub fn for_instance(instance: &Instance) -> ConstraintSpace {
        ConstraintSpace { template: instance.template(), n: instance.n() }
    }

    pub fn template(&self) -> TemplateId {
        self.template
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of possible constraints: `2n + n³` for Horn3, `3n²` for TwoSat.
    pub fn size(&self) -> usize {
        self.template
            .template()
            .relations
            .iter()
            .map(|r| self.n.pow(r.arity() as u32))
            .sum()
    }

    pub fn offset(&self, rel: usize) -> usize {
        self.template.template().relations[..rel]
            .iter()
            .map(|r| self.n.pow(r.arity() as u32))
            .sum()
    }

    pub fn encode(&self, rel: usize, vars: &[Var]) -> Result<LitId> {
        let relations = &self.template.template().relations;
        let arity = relations
            .get(rel)
            .map(|r| r.arity())
            .ok_or_else(|| Error::InvalidArgument(format!("no relation with index {rel}")))?;
        if vars.len() != arity {
            return Err(Error::InvalidArgument(format!(
                "relation {rel} has arity {arity}, got {} variables",
                vars.len()
            )));
        }
        if let Some(&v) = vars.iter().find(|&&v| v >= self.n) {
            return Err(Error::InvalidArgument(format!(
                "variable {v} out of range for {} variables",
                self.n
            )));
        }
        Ok(self.offset(rel) + vars_to_code(vars, self.n))
    }

    pub fn decode(&self, id: LitId) -> Result<(usize, Vec<Var>)> {
        let mut rest = id;
        for (i, rel) in self.template.template().relations.iter().enumerate() {
            let block = self.n.pow(rel.arity() as u32);
            if rest < block {
                return Ok((i, code_to_vars(rest, rel.arity(), self.n)));
            }
            rest -= block;
        }
        Err(Error::InvalidArgument(format!(
            "literal id {id} out of range for universe of size {}",
            self.size()
        )))
    }

    pub fn literal(&self, id: LitId) -> Result<ConstraintLiteral> {
        let (relation, vars) = self.decode(id)?;
        Ok(ConstraintLiteral { id, relation, vars })
    }
}

/// One element of the constraint universe, in decoded form.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConstraintLiteral {
    pub id: LitId,
    pub relation: usize,
    pub vars: Vec<Var>,
}

/// All possible constraints over `n` variables, in ascending id order.
pub fn constraint_universe(template: TemplateId, n: usize) -> Result<Vec<ConstraintLiteral>> {
    let space = ConstraintSpace::new(template, n)?;
    (0..space.size()).map(|id| space.literal(id)).collect()
}

/// The set of literal ids induced by an instance's tuple sets.
pub fn constraints_of(instance: &Instance) -> BTreeSet<LitId> {
    let space = ConstraintSpace::for_instance(instance);
    let mut out = BTreeSet::new();
    for rel in 0..instance.relation_count() {
        let offset = space.offset(rel);
        out.extend(instance.codes(rel).iter().map(|&c| offset + c));
    }
    out
}

/// Inverse of [`constraints_of`]: the instance whose constraint set is
/// exactly `literals`.
pub fn instance_of(literals: &BTreeSet<LitId>, template: TemplateId, n: usize) -> Result<Instance> {
    let space = ConstraintSpace::new(template, n)?;
    let mut inst = Instance::new(template, n)?;
    for &id in literals {
        let (rel, vars) = space.decode(id)?;
        inst.add_tuple(rel, &vars)?;
    }
    Ok(inst)
}
