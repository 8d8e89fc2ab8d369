//! Enumeration of all minimal instances with the same solution set, either
//! over the whole constraint universe or restricted to a constraint pool.

use std::collections::{BTreeSet, HashSet};

use crate::csp::{constraints_of, instance_of, ConstraintSpace, Instance, LitId};
use crate::densify::{cached_sigma, densify, Engine};
use crate::error::{Error, Result};
use crate::implsys::{
    closure, enumerate_minimal_keys, implies, Implication, ImplicationalSystem,
};

/// Cap on intermediate implication counts during resolution projection.
pub const PROJECTION_BUDGET: usize = 1_000_000;

#[derive(Clone, Debug)]
pub struct SparsifyResult {
    /// Minimal instances, ordered by constraint count and then
    /// lexicographically on sorted literal ids.
    pub minimals: Vec<Instance>,
    /// True when enumeration stopped at the requested limit with more
    /// sparsifications remaining.
    pub truncated: bool,
    /// Size of the densification every listed instance regenerates.
    pub target_size: usize,
}

/// Lists every minimal instance with the same solution set as the input:
/// the minimal keys of the grounded system that regenerate its densification.
pub fn sparsify_all(instance: &Instance, limit: usize) -> Result<SparsifyResult> {
    let dense = densify(instance, Engine::Datalog)?;
    let sigma = cached_sigma(instance.template(), instance.n())?;
    let keys = enumerate_minimal_keys(&sigma, &dense.dense_set, &dense.dense_set, limit)?;
    let minimals = keys
        .keys
        .iter()
        .map(|k| instance_of(k, instance.template(), instance.n()))
        .collect::<Result<Vec<_>>>()?;
    Ok(SparsifyResult {
        minimals,
        truncated: keys.truncated,
        target_size: dense.dense_set.len(),
    })
}

/// Lists the minimal instances whose constraints come from `pool` only.
///
/// The grounded system is projected onto `pool ∩ Dense(C_R)` by resolution
/// (eliminating every other dense literal) before key enumeration, so
/// derivation chains through eliminated literals survive as direct
/// implications. Returns no instances when the pool cannot regenerate the
/// densification.
pub fn sparsify_within(
    instance: &Instance,
    pool: &BTreeSet<LitId>,
    limit: usize,
) -> Result<SparsifyResult> {
    let space = ConstraintSpace::for_instance(instance);
    if let Some(&bad) = pool.iter().find(|&&id| id >= space.size()) {
        return Err(Error::InvalidArgument(format!(
            "pool literal {bad} outside the constraint universe of size {}",
            space.size()
        )));
    }
    let dense = densify(instance, Engine::Datalog)?;
    let sigma = cached_sigma(instance.template(), instance.n())?;
    let restricted: BTreeSet<LitId> = pool.intersection(&dense.dense_set).copied().collect();
    let target_size = dense.dense_set.len();

    if !implies(&sigma, &restricted, &dense.dense_set) {
        return Ok(SparsifyResult { minimals: Vec::new(), truncated: false, target_size });
    }

    let projected = project_onto(&sigma, &dense.dense_set, &restricted, PROJECTION_BUDGET)?;
    let keys = enumerate_minimal_keys(&projected, &restricted, &restricted, limit)?;
    let minimals = keys
        .keys
        .iter()
        .map(|k| instance_of(k, instance.template(), instance.n()))
        .collect::<Result<Vec<_>>>()?;
    Ok(SparsifyResult { minimals, truncated: keys.truncated, target_size })
}

/// Reduction by resolution: eliminates every literal of `dense ∖ keep` from
/// the system, so that closures of subsets of `keep` are preserved on
/// `keep ∪ {⊥}`. Implications whose bodies leave `dense` can never fire from
/// subsets of `keep` and are dropped up front.
fn project_onto(
    sigma: &ImplicationalSystem,
    dense: &BTreeSet<LitId>,
    keep: &BTreeSet<LitId>,
    budget: usize,
) -> Result<ImplicationalSystem> {
    let mut work: Vec<Implication> = sigma
        .implications()
        .iter()
        .filter(|imp| imp.body().iter().all(|b| dense.contains(b)))
        .cloned()
        .collect();

    for &gone in dense.iter().filter(|x| !keep.contains(x)) {
        let mut producers: Vec<Implication> = Vec::new();
        let mut consumers: Vec<Implication> = Vec::new();
        let mut rest: Vec<Implication> = Vec::new();
        for imp in work {
            if imp.head() == gone {
                producers.push(imp);
            } else if imp.body().contains(&gone) {
                consumers.push(imp);
            } else {
                rest.push(imp);
            }
        }
        let mut seen: HashSet<Implication> = rest.iter().cloned().collect();
        work = rest;
        for producer in &producers {
            for consumer in &consumers {
                let mut body: Vec<LitId> = consumer
                    .body()
                    .iter()
                    .copied()
                    .filter(|&b| b != gone)
                    .collect();
                body.extend_from_slice(producer.body());
                if let Some(resolvent) = Implication::new(body, consumer.head()) {
                    if seen.insert(resolvent.clone()) {
                        work.push(resolvent);
                        if work.len() > budget {
                            return Err(Error::ResourceLimit(format!(
                                "resolution projection exceeded {budget} implications"
                            )));
                        }
                    }
                }
            }
        }
    }

    ImplicationalSystem::new(sigma.template(), sigma.n(), sigma.universe(), work)
}

/// True iff removing any single constraint changes the densification.
pub fn is_minimal(instance: &Instance) -> Result<bool> {
    let sigma = cached_sigma(instance.template(), instance.n())?;
    let ids = constraints_of(instance);
    for &c in &ids {
        let mut rest = ids.clone();
        rest.remove(&c);
        // The densification shrinks iff the removed literal stops being
        // derivable.
        if closure(&sigma, &rest).contains(&c) {
            return Ok(false);
        }
    }
    Ok(true)
}
