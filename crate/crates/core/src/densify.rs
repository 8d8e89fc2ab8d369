//! The user-facing densification operator, the implication decision problem,
//! and maximality checking.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, LazyLock, Mutex};

use crate::csp::{constraints_of, instance_of, ConstraintSpace, Instance, LitId, TemplateId};
use crate::datalog::{builtin_rules, fixed_point};
use crate::error::{Error, Result};
use crate::implsys::{closure, ground_sigma, ImplicationalSystem};
use crate::oracle;

/// Which machinery computes the densification.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Engine {
    /// Naive bottom-up evaluation of the built-in rules (the default).
    Datalog,
    /// Closure of the constraint set in the grounded implicational system.
    Sigma,
    /// Brute-force intersection over all satisfying assignments (n ≤ 20).
    Oracle,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Status {
    Sat,
    Unsat,
}

/// The densification of an instance: the unique maximal instance with the
/// same solution set, or the full instance when there are no solutions.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DensifyResult {
    pub status: Status,
    pub maximal: Instance,
    pub dense_set: BTreeSet<LitId>,
}

static SIGMA_CACHE: LazyLock<Mutex<HashMap<(TemplateId, usize), Arc<ImplicationalSystem>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

/// The grounded system for `(template, n)`, computed once and shared.
pub fn cached_sigma(template: TemplateId, n: usize) -> Result<Arc<ImplicationalSystem>> {
    if let Some(sys) = SIGMA_CACHE.lock().unwrap().get(&(template, n)) {
        return Ok(Arc::clone(sys));
    }
    // Ground outside the lock; concurrent duplicates land on identical values.
    let sys = Arc::new(ground_sigma(template, n)?);
    let mut cache = SIGMA_CACHE.lock().unwrap();
    let entry = cache.entry((template, n)).or_insert_with(|| Arc::clone(&sys));
    Ok(Arc::clone(entry))
}

fn full_result(template: TemplateId, n: usize) -> Result<DensifyResult> {
    let space = ConstraintSpace::new(template, n)?;
    Ok(DensifyResult {
        status: Status::Unsat,
        maximal: Instance::full(template, n)?,
        dense_set: (0..space.size()).collect(),
    })
}

/// Computes the densification of `instance` with the chosen engine. All
/// engines produce identical results on every input.
pub fn densify(instance: &Instance, engine: Engine) -> Result<DensifyResult> {
    let template = instance.template();
    let n = instance.n();
    match engine {
        Engine::Datalog => {
            let (fp, stop) = fixed_point(instance, builtin_rules(template));
            if stop {
                full_result(template, n)
            } else {
                Ok(DensifyResult {
                    status: Status::Sat,
                    dense_set: constraints_of(&fp),
                    maximal: fp,
                })
            }
        }
        Engine::Sigma => {
            let sigma = cached_sigma(template, n)?;
            let closed = closure(&sigma, &constraints_of(instance));
            if closed.contains(&sigma.bottom()) {
                full_result(template, n)
            } else {
                let maximal = instance_of(&closed, template, n)?;
                Ok(DensifyResult { status: Status::Sat, maximal, dense_set: closed })
            }
        }
        Engine::Oracle => oracle::oracle_densify(instance),
    }
}

/// Decides whether every solution of `premise` also solves `conclusion`,
/// by testing `constraints_of(conclusion) ⊆ Dense(constraints_of(premise))`.
pub fn implication_problem(premise: &Instance, conclusion: &Instance) -> Result<bool> {
    if premise.template() != conclusion.template() || premise.n() != conclusion.n() {
        return Err(Error::InvalidArgument(
            "implication needs two instances over the same template and variables".into(),
        ));
    }
    let dense = densify(premise, Engine::Datalog)?;
    Ok(constraints_of(conclusion).is_subset(&dense.dense_set))
}

/// True iff no constraint can be added without shrinking the solution set,
/// i.e. the instance equals its own densification.
pub fn is_maximal(instance: &Instance) -> Result<bool> {
    let dense = densify(instance, Engine::Datalog)?;
    Ok(dense.maximal == *instance)
}
