//! Brute-force ground truth: homomorphism enumeration, densification by the
//! direct intersection formula, exhaustive minimal-set search, and path /
//! global consistency checks for TwoSat tables.
//!
//! Everything here trades speed for being exactly right; the size bounds are
//! hard limits with explicit errors, never silent sampling.

use std::collections::BTreeSet;

use crate::csp::{
    constraints_of, instance_of, satisfies, Assignment, ConstraintSpace, Instance, LitId,
    TemplateId, Var,
};
use crate::densify::{DensifyResult, Status};
use crate::error::{Error, Result};

/// Upper bound on the variable count for the 2^n assignment sweeps.
pub const MAX_ORACLE_VARS: usize = 20;
/// Upper bound on |Dense(C_R)| for the exhaustive minimal-set sweep.
pub const MAX_MIN_TARGET: usize = 14;

fn check_hom_bound(n: usize) -> Result<()> {
    if n > MAX_ORACLE_VARS {
        return Err(Error::ResourceLimit(format!(
            "homomorphism sweep needs n ≤ {MAX_ORACLE_VARS}, got {n}"
        )));
    }
    Ok(())
}

/// All satisfying assignments, in ascending binary order.
pub fn enumerate_homs(instance: &Instance) -> Result<Vec<Assignment>> {
    let n = instance.n();
    check_hom_bound(n)?;
    let mut homs = Vec::new();
    for mask in 0..1usize << n {
        let h = Assignment::from_mask(mask, n);
        if satisfies(&h, instance)? {
            homs.push(h);
        }
    }
    Ok(homs)
}

/// Densification by the intersection formula: a tuple belongs to the maximal
/// instance iff its image under every solution lies in the template relation.
/// With no solutions at all, the result is the full instance.
pub fn oracle_densify(instance: &Instance) -> Result<DensifyResult> {
    let homs = enumerate_homs(instance)?;
    let template = instance.template();
    let n = instance.n();
    if homs.is_empty() {
        let maximal = Instance::full(template, n)?;
        let space = ConstraintSpace::new(template, n)?;
        return Ok(DensifyResult {
            status: Status::Unsat,
            dense_set: (0..space.size()).collect(),
            maximal,
        });
    }

    let mut maximal = Instance::new(template, n)?;
    for (i, rel) in template.template().relations.iter().enumerate() {
        let arity = rel.arity();
        let mut vars = vec![0usize; arity];
        'tuples: for code in 0..n.pow(arity as u32) {
            let mut c = code;
            for p in (0..arity).rev() {
                vars[p] = c % n;
                c /= n;
            }
            let mut values = vec![false; arity];
            for h in &homs {
                for p in 0..arity {
                    values[p] = h.get(vars[p]);
                }
                if !rel.contains(&values) {
                    continue 'tuples;
                }
            }
            maximal.add_tuple(i, &vars)?;
        }
    }
    Ok(DensifyResult {
        status: Status::Sat,
        dense_set: constraints_of(&maximal),
        maximal,
    })
}

/// Exhaustive sweep for all inclusion-minimal constraint sets with the same
/// solution set as the input, ordered by size and then lexicographically.
pub fn oracle_min(instance: &Instance) -> Result<Vec<Instance>> {
    let dense = oracle_densify(instance)?.dense_set;
    if dense.len() > MAX_MIN_TARGET {
        return Err(Error::ResourceLimit(format!(
            "minimal-set sweep needs |Dense(C_R)| ≤ {MAX_MIN_TARGET}, got {}",
            dense.len()
        )));
    }
    let template = instance.template();
    let n = instance.n();
    let target_homs = enumerate_homs(instance)?;
    let pool: Vec<LitId> = dense.iter().copied().collect();

    // Visit subsets by ascending size, then lexicographically; minimality
    // then reduces to "no already-kept subset".
    let mut order: Vec<Vec<usize>> = (0..1usize << pool.len())
        .map(|m| (0..pool.len()).filter(|i| m >> i & 1 == 1).collect())
        .collect();
    order.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));

    let mut kept: Vec<BTreeSet<LitId>> = Vec::new();
    let mut minimals: Vec<Instance> = Vec::new();
    for positions in order {
        let subset: BTreeSet<LitId> = positions.iter().map(|&i| pool[i]).collect();
        if kept.iter().any(|k| k.is_subset(&subset)) {
            continue;
        }
        let candidate = instance_of(&subset, template, n)?;
        if enumerate_homs(&candidate)? == target_homs {
            kept.push(subset);
            minimals.push(candidate);
        }
    }
    Ok(minimals)
}

/// A subset of {0,1}², packed into four bits (bit `2a+b` for the pair (a,b)).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct PairRelation(u8);

impl PairRelation {
    pub const EMPTY: PairRelation = PairRelation(0b0000);
    pub const FULL: PairRelation = PairRelation(0b1111);
    pub const EQUALITY: PairRelation = PairRelation(0b1001);

    pub fn from_bits(bits: u8) -> PairRelation {
        PairRelation(bits & 0b1111)
    }

    pub fn contains(self, a: bool, b: bool) -> bool {
        self.0 >> ((a as u8) << 1 | b as u8) & 1 == 1
    }

    pub fn insert(&mut self, a: bool, b: bool) {
        self.0 |= 1 << ((a as u8) << 1 | b as u8);
    }

    pub fn intersect(self, other: PairRelation) -> PairRelation {
        PairRelation(self.0 & other.0)
    }

    pub fn transpose(self) -> PairRelation {
        let keep = self.0 & 0b1001;
        let swapped = (self.0 & 0b0010) << 1 | (self.0 & 0b0100) >> 1;
        PairRelation(keep | swapped)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: PairRelation) -> bool {
        self.0 & !other.0 == 0
    }

    /// Relational composition: (x,z) with (x,y) here and (y,z) there.
    pub fn compose(self, other: PairRelation) -> PairRelation {
        let mut out = PairRelation::EMPTY;
        for x in [false, true] {
            for z in [false, true] {
                for y in [false, true] {
                    if self.contains(x, y) && other.contains(y, z) {
                        out.insert(x, z);
                    }
                }
            }
        }
        out
    }
}

/// One binary relation per ordered variable pair (the full constraint
/// network induced by a TwoSat instance).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BinaryRelationTable {
    n: usize,
    cells: Vec<PairRelation>,
}

impl BinaryRelationTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, u: Var, v: Var) -> PairRelation {
        self.cells[u * self.n + v]
    }

    fn intersect_cell(&mut self, u: Var, v: Var, rel: PairRelation) {
        let cell = &mut self.cells[u * self.n + v];
        *cell = cell.intersect(rel);
    }
}

/// Builds the pairwise relation table of a TwoSat instance: each cell is the
/// intersection of the relations imposed on that ordered pair (transposed
/// memberships included), with diagonal cells cut down to equality.
pub fn build_relation_table(instance: &Instance) -> Result<BinaryRelationTable> {
    if instance.template() != TemplateId::TwoSat {
        return Err(Error::InvalidArgument(
            "relation tables are defined for TwoSat instances only".into(),
        ));
    }
    let n = instance.n();
    let mut table = BinaryRelationTable { n, cells: vec![PairRelation::FULL; n * n] };
    for v in 0..n {
        table.intersect_cell(v, v, PairRelation::EQUALITY);
    }
    let relations = &instance.template().template().relations;
    for (i, rel) in relations.iter().enumerate() {
        let mask = PairRelation::from_bits(rel.mask());
        for vars in instance.tuples(i) {
            let (u, v) = (vars[0], vars[1]);
            table.intersect_cell(u, v, mask);
            table.intersect_cell(v, u, mask.transpose());
        }
    }
    Ok(table)
}

/// Path consistency: every cell is nonempty, diagonal cells sit inside
/// equality, and ρ_uw ⊆ ρ_uv ∘ ρ_vw for all u, v, w.
pub fn path_consistent(table: &BinaryRelationTable) -> bool {
    let n = table.n();
    for u in 0..n {
        if !table.get(u, u).is_subset_of(PairRelation::EQUALITY) {
            return false;
        }
        for v in 0..n {
            if table.get(u, v).is_empty() {
                return false;
            }
        }
    }
    for u in 0..n {
        for v in 0..n {
            for w in 0..n {
                let composed = table.get(u, v).compose(table.get(v, w));
                if !table.get(u, w).is_subset_of(composed) {
                    return false;
                }
            }
        }
    }
    true
}

/// The pairwise projection of the solution set: {(h(u), h(v)) : h solves R}.
pub fn projection(instance: &Instance, u: Var, v: Var) -> Result<PairRelation> {
    if u >= instance.n() || v >= instance.n() {
        return Err(Error::InvalidArgument(format!(
            "projection pair ({u},{v}) out of range for {} variables",
            instance.n()
        )));
    }
    let mut out = PairRelation::EMPTY;
    for h in enumerate_homs(instance)? {
        out.insert(h.get(u), h.get(v));
    }
    Ok(out)
}
