//! Grounded implicational systems (functional dependencies over constraint
//! literals), linear-time closure, and minimal-key enumeration.
//!
//! [`ground_sigma`] instantiates the template's Horn rules over a concrete
//! variable count, yielding single-head implications over literal ids plus a
//! distinguished bottom literal `⊥` one past the constraint universe. The
//! closure of an instance's constraint set under this system is exactly its
//! densification, with `⊥` entering the closure iff the instance has no
//! solution (asserted against the brute-force oracle by the test suite).

use std::collections::{BTreeSet, HashSet, VecDeque};

use crate::csp::{ConstraintSpace, LitId, TemplateId, Var};
use crate::datalog::{builtin_rules, RuleHead};
use crate::error::{Error, Result};

/// A single-head functional dependency `body → head` over literal ids.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Implication {
    body: Vec<LitId>,
    head: LitId,
}

impl Implication {
    /// Normalizes the body (sorted, deduplicated); `None` if the head lies
    /// in its own body, since such an implication can never derive anything.
    pub fn new(mut body: Vec<LitId>, head: LitId) -> Option<Implication> {
        body.sort_unstable();
        body.dedup();
        if body.binary_search(&head).is_ok() {
            return None;
        }
        Some(Implication { body, head })
    }

    pub fn body(&self) -> &[LitId] {
        &self.body
    }

    pub fn head(&self) -> LitId {
        self.head
    }
}

/// An implicational system over `universe` literals, the last of which is
/// the bottom literal `⊥`.
#[derive(Clone, Debug)]
pub struct ImplicationalSystem {
    template: TemplateId,
    n: usize,
    universe: usize,
    implications: Vec<Implication>,
    // Closure bookkeeping, fixed at construction.
    watchers: Vec<Vec<u32>>,
    body_lens: Vec<u32>,
    fact_heads: Vec<LitId>,
}

impl ImplicationalSystem {
    pub fn new(
        template: TemplateId,
        n: usize,
        universe: usize,
        implications: Vec<Implication>,
    ) -> Result<ImplicationalSystem> {
        if universe == 0 {
            return Err(Error::InvalidArgument("universe must not be empty".into()));
        }
        let mut watchers = vec![Vec::new(); universe];
        let mut body_lens = Vec::with_capacity(implications.len());
        let mut fact_heads = Vec::new();
        for (idx, imp) in implications.iter().enumerate() {
            if imp.head >= universe || imp.body.iter().any(|&b| b >= universe) {
                return Err(Error::InvalidArgument(format!(
                    "implication #{idx} mentions a literal outside the universe of size {universe}"
                )));
            }
            body_lens.push(imp.body.len() as u32);
            if imp.body.is_empty() {
                fact_heads.push(imp.head);
            }
            for &b in &imp.body {
                watchers[b].push(idx as u32);
            }
        }
        Ok(ImplicationalSystem {
            template,
            n,
            universe,
            implications,
            watchers,
            body_lens,
            fact_heads,
        })
    }

    pub fn template(&self) -> TemplateId {
        self.template
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Universe size, the bottom literal included.
    pub fn universe(&self) -> usize {
        self.universe
    }

    /// The bottom literal `⊥`, one past the constraint universe.
    pub fn bottom(&self) -> LitId {
        self.universe - 1
    }

    pub fn implications(&self) -> &[Implication] {
        &self.implications
    }

    pub fn len(&self) -> usize {
        self.implications.len()
    }

    pub fn is_empty(&self) -> bool {
        self.implications.is_empty()
    }
}

/// Grounds the template's built-in rules over `n` variables.
///
/// Every non-stop rule contributes one implication per map of its occurring
/// slots into the variables; stop rules ground to `body → ⊥`, and `⊥ → x` is
/// added for every literal of the universe, so deriving `⊥` collapses the
/// closure to everything. Duplicates and implications whose head lies in
/// their own body are dropped.
pub fn ground_sigma(template: TemplateId, n: usize) -> Result<ImplicationalSystem> {
    let space = ConstraintSpace::new(template, n)?;
    let bottom = space.size();
    let mut seen: HashSet<Implication> = HashSet::new();
    let mut implications = Vec::new();

    for rule in &builtin_rules(template).rules {
        let occ = rule.occurring_slots();
        let mut assign: Vec<Var> = vec![0; rule.var_count];
        let mut choice = vec![0usize; occ.len()];
        loop {
            for (i, &slot) in occ.iter().enumerate() {
                assign[slot] = choice[i];
            }
            let body: Vec<LitId> = rule
                .body
                .iter()
                .map(|a| {
                    let vars: Vec<Var> = a.slots.iter().map(|&s| assign[s]).collect();
                    space.encode(a.relation, &vars).expect("grounding stays in range")
                })
                .collect();
            let head = match &rule.head {
                RuleHead::Stop => bottom,
                RuleHead::Atom(a) => {
                    let vars: Vec<Var> = a.slots.iter().map(|&s| assign[s]).collect();
                    space.encode(a.relation, &vars).expect("grounding stays in range")
                }
            };
            if let Some(imp) = Implication::new(body, head) {
                if seen.insert(imp.clone()) {
                    implications.push(imp);
                }
            }
            // Odometer over occurring slots.
            let mut i = occ.len();
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                choice[i] += 1;
                if choice[i] < n {
                    break;
                }
                choice[i] = 0;
            }
            if choice.iter().all(|&c| c == 0) {
                break;
            }
        }
    }

    for x in 0..space.size() {
        let imp = Implication::new(vec![bottom], x).expect("bottom is not x");
        implications.push(imp);
    }

    ImplicationalSystem::new(template, n, bottom + 1, implications)
}

/// Least superset of `seed` closed under all implications, computed with
/// per-implication unsatisfied-body counters and a work queue. If `⊥` enters
/// the closure, the result is the full universe, `⊥` included.
pub fn closure(sigma: &ImplicationalSystem, seed: &BTreeSet<LitId>) -> BTreeSet<LitId> {
    let mut closed = vec![false; sigma.universe];
    let mut remaining = sigma.body_lens.clone();
    let mut queue: Vec<LitId> = Vec::new();

    let add = |lit: LitId, closed: &mut Vec<bool>, queue: &mut Vec<LitId>| {
        if !closed[lit] {
            closed[lit] = true;
            queue.push(lit);
        }
    };

    for &h in &sigma.fact_heads {
        add(h, &mut closed, &mut queue);
    }
    for &x in seed {
        assert!(x < sigma.universe, "seed literal {x} outside the universe");
        add(x, &mut closed, &mut queue);
    }

    let bottom = sigma.bottom();
    while let Some(x) = queue.pop() {
        if closed[bottom] {
            break;
        }
        for &idx in &sigma.watchers[x] {
            let idx = idx as usize;
            remaining[idx] -= 1;
            if remaining[idx] == 0 {
                add(sigma.implications[idx].head, &mut closed, &mut queue);
            }
        }
    }

    if closed[bottom] {
        (0..sigma.universe).collect()
    } else {
        closed
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| c.then_some(i))
            .collect()
    }
}

/// True iff `b ⊆ closure(sigma, a)`.
pub fn implies(sigma: &ImplicationalSystem, a: &BTreeSet<LitId>, b: &BTreeSet<LitId>) -> bool {
    let cl = closure(sigma, a);
    b.is_subset(&cl)
}

/// Shrinks `key` to an inclusion-minimal subset still implying `target`,
/// dropping elements greedily in descending id order.
pub fn minimize_key(
    sigma: &ImplicationalSystem,
    key: &BTreeSet<LitId>,
    target: &BTreeSet<LitId>,
) -> Result<BTreeSet<LitId>> {
    if !implies(sigma, key, target) {
        return Err(Error::InvalidArgument(
            "minimize_key needs a key that already implies the target".into(),
        ));
    }
    let mut current = key.clone();
    for &x in key.iter().rev() {
        current.remove(&x);
        if !implies(sigma, &current, target) {
            current.insert(x);
        }
    }
    Ok(current)
}

#[derive(Clone, Debug)]
pub struct KeyEnumeration {
    /// Every minimal key, sorted by size and then lexicographically.
    pub keys: Vec<BTreeSet<LitId>>,
    /// True when enumeration stopped at `limit` with more keys remaining.
    pub truncated: bool,
}

/// Lists every inclusion-minimal `K ⊆ allowed` with `closure(K) ⊇ target`.
///
/// This is the Lucchesi–Osborn procedure: seed with a minimized superkey,
/// then for each found key `K` and implication `A → h` with `A ⊆ allowed`,
/// minimize the candidate `A ∪ (K ∖ {h})` (for a bottom-headed implication,
/// which stands for `A → everything`, the candidate is `A` itself) unless
/// some known key is already a subset of it. Enumeration stops after `limit`
/// keys and flags truncation if more exist.
///
/// The procedure is exhaustive whenever every derivation chain out of a
/// subset of `allowed` stays inside `allowed ∪ {⊥}` — in particular when
/// `allowed` is closed under the system (how the sparsifier calls it) or
/// equals the whole universe minus `⊥`.
pub fn enumerate_minimal_keys(
    sigma: &ImplicationalSystem,
    target: &BTreeSet<LitId>,
    allowed: &BTreeSet<LitId>,
    limit: usize,
) -> Result<KeyEnumeration> {
    if limit == 0 {
        return Err(Error::InvalidArgument("key limit must be at least 1".into()));
    }
    if allowed.contains(&sigma.bottom()) || target.contains(&sigma.bottom()) {
        return Err(Error::InvalidArgument(
            "target and allowed sets must not contain the bottom literal".into(),
        ));
    }
    if !implies(sigma, allowed, target) {
        return Err(Error::NoKey);
    }

    let bottom = sigma.bottom();
    let usable: Vec<&Implication> = sigma
        .implications
        .iter()
        .filter(|imp| imp.body.iter().all(|b| allowed.contains(b)))
        .collect();

    let seed = minimize_key(sigma, allowed, target)?;
    let mut keys: Vec<BTreeSet<LitId>> = vec![seed.clone()];
    let mut pending: VecDeque<BTreeSet<LitId>> = VecDeque::from([seed]);
    let mut truncated = false;

    'search: while let Some(key) = pending.pop_front() {
        for imp in &usable {
            let candidate: BTreeSet<LitId> = if imp.head == bottom {
                imp.body.iter().copied().collect()
            } else if key.contains(&imp.head) {
                let mut c = key.clone();
                c.remove(&imp.head);
                c.extend(imp.body.iter().copied());
                c
            } else {
                // body ∪ (K ∖ {h}) would contain the known key K.
                continue;
            };
            if keys.iter().any(|k| k.is_subset(&candidate)) {
                continue;
            }
            // Every candidate is a superkey: closure(body) covers the head
            // (or everything, for bottom), so it pulls in closure(key).
            let minimized = minimize_key(sigma, &candidate, target)?;
            if keys.len() == limit {
                truncated = true;
                break 'search;
            }
            keys.push(minimized.clone());
            pending.push_back(minimized);
        }
    }

    keys.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(KeyEnumeration { keys, truncated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn set(ids: &[LitId]) -> BTreeSet<LitId> {
        ids.iter().copied().collect()
    }

    /// Three-literal toy system over universe {a=0, b=1, c=2, ⊥=3}.
    fn chain_system() -> ImplicationalSystem {
        let imps = vec![
            Implication::new(vec![0], 1).unwrap(),
            Implication::new(vec![1], 2).unwrap(),
        ];
        ImplicationalSystem::new(TemplateId::Horn3, 1, 4, imps).unwrap()
    }

    /// Reference closure by repeated scanning, for cross-checking.
    pub(crate) fn naive_closure(
        universe: usize,
        imps: &[(Vec<LitId>, LitId)],
        seed: &BTreeSet<LitId>,
    ) -> BTreeSet<LitId> {
        let mut cur = seed.clone();
        loop {
            let mut changed = false;
            for (body, head) in imps {
                if !cur.contains(head) && body.iter().all(|b| cur.contains(b)) {
                    cur.insert(*head);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if cur.contains(&(universe - 1)) {
            (0..universe).collect()
        } else {
            cur
        }
    }

    pub(crate) fn random_system(rng: &mut ChaCha8Rng, universe: usize) -> ImplicationalSystem {
        let count = rng.gen_range(0..=25);
        let mut imps = Vec::new();
        for _ in 0..count {
            let body_len = rng.gen_range(0..=3);
            let body: Vec<LitId> = (0..body_len).map(|_| rng.gen_range(0..universe)).collect();
            let head = rng.gen_range(0..universe);
            if let Some(imp) = Implication::new(body, head) {
                imps.push(imp);
            }
        }
        ImplicationalSystem::new(TemplateId::TwoSat, 1, universe, imps).unwrap()
    }

    #[test]
    fn implication_normalizes_and_rejects_trivial() {
        let imp = Implication::new(vec![3, 1, 3], 2).unwrap();
        assert_eq!(imp.body(), &[1, 3]);
        assert!(Implication::new(vec![1, 2], 2).is_none());
    }

    #[test]
    fn closure_follows_chains_and_is_idempotent() {
        let sys = chain_system();
        assert_eq!(closure(&sys, &set(&[0])), set(&[0, 1, 2]));
        let closed = set(&[1, 2]);
        assert_eq!(closure(&sys, &closed), closed);
        assert_eq!(closure(&sys, &BTreeSet::new()), BTreeSet::new());
    }

    #[test]
    fn bottom_collapses_to_the_full_universe() {
        let imps = vec![Implication::new(vec![0], 3).unwrap()];
        let sys = ImplicationalSystem::new(TemplateId::Horn3, 1, 4, imps).unwrap();
        assert_eq!(closure(&sys, &set(&[0])), set(&[0, 1, 2, 3]));
    }

    #[test]
    fn closure_matches_naive_rescan_on_random_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let universe = rng.gen_range(2..=14);
            let sys = random_system(&mut rng, universe);
            let raw: Vec<(Vec<LitId>, LitId)> = sys
                .implications()
                .iter()
                .map(|i| (i.body().to_vec(), i.head()))
                .collect();
            let seed: BTreeSet<LitId> =
                (0..universe).filter(|_| rng.gen_bool(0.3)).collect();
            assert_eq!(closure(&sys, &seed), naive_closure(universe, &raw, &seed));
        }
    }

    #[test]
    fn closure_laws_hold_on_random_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..500 {
            let universe = rng.gen_range(2..=12);
            let sys = random_system(&mut rng, universe);
            let a: BTreeSet<LitId> = (0..universe).filter(|_| rng.gen_bool(0.3)).collect();
            let mut b = a.clone();
            b.extend((0..universe).filter(|_| rng.gen_bool(0.2)));

            let ca = closure(&sys, &a);
            assert!(a.is_subset(&ca), "extensive");
            assert_eq!(closure(&sys, &ca), ca, "idempotent");
            assert!(ca.is_subset(&closure(&sys, &b)), "isotone");
        }
    }

    #[test]
    fn implies_is_reflexive_and_transitive() {
        let sys = chain_system();
        assert!(implies(&sys, &set(&[0, 2]), &set(&[0, 2])));
        assert!(!implies(&sys, &set(&[1]), &set(&[0])));

        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let universe = rng.gen_range(2..=10);
            let sys = random_system(&mut rng, universe);
            let pick = |rng: &mut ChaCha8Rng| -> BTreeSet<LitId> {
                (0..universe).filter(|_| rng.gen_bool(0.3)).collect()
            };
            let (a, b, c) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
            if implies(&sys, &a, &b) && implies(&sys, &b, &c) {
                assert!(implies(&sys, &a, &c));
            }
        }
    }

    #[test]
    fn minimize_key_drops_redundant_elements() {
        let imps = vec![Implication::new(vec![0], 1).unwrap()];
        let sys = ImplicationalSystem::new(TemplateId::Horn3, 1, 3, imps).unwrap();
        let min = minimize_key(&sys, &set(&[0, 1]), &set(&[0, 1])).unwrap();
        assert_eq!(min, set(&[0]));

        // An already minimal key is returned unchanged.
        let min = minimize_key(&sys, &set(&[0]), &set(&[1])).unwrap();
        assert_eq!(min, set(&[0]));

        assert!(minimize_key(&sys, &set(&[1]), &set(&[0])).is_err());
    }

    #[test]
    fn minimize_key_output_is_minimal_on_random_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..200 {
            let universe = rng.gen_range(2..=10);
            let sys = random_system(&mut rng, universe);
            let key: BTreeSet<LitId> = (0..universe - 1).collect();
            let target: BTreeSet<LitId> =
                (0..universe - 1).filter(|_| rng.gen_bool(0.4)).collect();
            if !implies(&sys, &key, &target) {
                continue;
            }
            let min = minimize_key(&sys, &key, &target).unwrap();
            assert!(implies(&sys, &min, &target));
            for &x in &min {
                let mut less = min.clone();
                less.remove(&x);
                assert!(!implies(&sys, &less, &target), "dropping {x} must break the key");
            }
        }
    }

    #[test]
    fn enumerate_finds_both_keys_of_the_textbook_system() {
        // {a,b}→c, {c}→a, {c}→b over universe {a,b,c,⊥}.
        let imps = vec![
            Implication::new(vec![0, 1], 2).unwrap(),
            Implication::new(vec![2], 0).unwrap(),
            Implication::new(vec![2], 1).unwrap(),
        ];
        let sys = ImplicationalSystem::new(TemplateId::Horn3, 1, 4, imps).unwrap();
        let res =
            enumerate_minimal_keys(&sys, &set(&[0, 1, 2]), &set(&[0, 1, 2]), 100).unwrap();
        assert_eq!(res.keys, vec![set(&[2]), set(&[0, 1])]);
        assert!(!res.truncated);
    }

    #[test]
    fn empty_target_has_the_empty_key() {
        let sys = chain_system();
        let res = enumerate_minimal_keys(&sys, &BTreeSet::new(), &set(&[0, 1, 2]), 10).unwrap();
        assert_eq!(res.keys, vec![BTreeSet::new()]);
    }

    #[test]
    fn enumerate_rejects_bad_arguments() {
        let sys = chain_system();
        assert!(matches!(
            enumerate_minimal_keys(&sys, &set(&[0]), &set(&[0]), 0),
            Err(Error::InvalidArgument(_))
        ));
        // Neither target nor allowed may mention ⊥.
        assert!(matches!(
            enumerate_minimal_keys(&sys, &set(&[0]), &set(&[0, 3]), 5),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            enumerate_minimal_keys(&sys, &set(&[3]), &set(&[0]), 5),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn no_key_error_when_allowed_cannot_generate_target() {
        // Only implication: {0}→1.
        let sys = ImplicationalSystem::new(
            TemplateId::Horn3,
            1,
            4,
            vec![Implication::new(vec![0], 1).unwrap()],
        )
        .unwrap();
        assert!(enumerate_minimal_keys(&sys, &set(&[1, 2]), &set(&[0, 1, 2]), 5).is_ok());
        // Literal 2 is underivable from {0,1}.
        assert!(matches!(
            enumerate_minimal_keys(&sys, &set(&[1, 2]), &set(&[0, 1]), 5),
            Err(Error::NoKey)
        ));
        assert!(matches!(
            enumerate_minimal_keys(&sys, &set(&[1]), &BTreeSet::new(), 5),
            Err(Error::NoKey)
        ));
    }

    #[test]
    fn bottom_headed_implications_open_up_keys() {
        // Deriving ⊥ collapses the closure to everything, so {0} and {1} are
        // both keys for the whole set; the second is reachable only through
        // the bottom-headed candidate rule.
        let imps = vec![
            Implication::new(vec![0], 2).unwrap(),
            Implication::new(vec![1], 2).unwrap(),
        ];
        let sys = ImplicationalSystem::new(TemplateId::Horn3, 1, 3, imps).unwrap();
        let res = enumerate_minimal_keys(&sys, &set(&[0, 1]), &set(&[0, 1]), 50).unwrap();
        assert_eq!(res.keys, vec![set(&[0]), set(&[1])]);
    }

    #[test]
    fn truncation_is_flagged() {
        // or-style system: each of 1,2,3 alone implies 0.
        let imps = vec![
            Implication::new(vec![1], 0).unwrap(),
            Implication::new(vec![2], 0).unwrap(),
            Implication::new(vec![3], 0).unwrap(),
        ];
        let sys = ImplicationalSystem::new(TemplateId::Horn3, 1, 5, imps).unwrap();
        let all = enumerate_minimal_keys(&sys, &set(&[0]), &set(&[0, 1, 2, 3]), 100).unwrap();
        assert_eq!(all.keys.len(), 4, "{{0}}, {{1}}, {{2}}, {{3}}");
        assert!(!all.truncated);
        let capped = enumerate_minimal_keys(&sys, &set(&[0]), &set(&[0, 1, 2, 3]), 2).unwrap();
        assert_eq!(capped.keys.len(), 2);
        assert!(capped.truncated);
    }

    #[test]
    fn ground_sigma_small_cases() {
        // Horn3, n=1: rule (1) grounds to and(0,0,0)→and(0,0,0) and is
        // dropped as trivial.
        let sys = ground_sigma(TemplateId::Horn3, 1).unwrap();
        assert_eq!(sys.universe(), 4);
        assert!(sys
            .implications()
            .iter()
            .all(|i| !(i.body() == [2] && i.head() == 2)));
        // The tautology rule survives as a fact: ∅ → and(0,0,0).
        assert!(sys
            .implications()
            .iter()
            .any(|i| i.body().is_empty() && i.head() == 2));
        // Stop rule grounds to {zero 0, one 0} → ⊥.
        assert!(sys
            .implications()
            .iter()
            .any(|i| i.body() == [0, 1] && i.head() == sys.bottom()));

        // TwoSat, n=2: the fact rule fires for both diagonal imps.
        let sys = ground_sigma(TemplateId::TwoSat, 2).unwrap();
        let space = ConstraintSpace::new(TemplateId::TwoSat, 2).unwrap();
        for v in 0..2 {
            let id = space.encode(1, &[v, v]).unwrap();
            assert!(sys
                .implications()
                .iter()
                .any(|i| i.body().is_empty() && i.head() == id));
        }
        // Bottom fans out to the whole universe.
        let bottom = sys.bottom();
        let fanout = sys
            .implications()
            .iter()
            .filter(|i| i.body() == [bottom])
            .count();
        assert_eq!(fanout, space.size());
    }

    #[test]
    fn ground_sigma_closure_matches_datalog_fixed_point() {
        use crate::csp::{constraints_of, Instance};
        use crate::datalog::{fixed_point, builtin_rules};

        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for template in [TemplateId::Horn3, TemplateId::TwoSat] {
            let rules = builtin_rules(template);
            for n in 1..=3 {
                let sys = ground_sigma(template, n).unwrap();
                for _ in 0..50 {
                    let mut inst = Instance::new(template, n).unwrap();
                    for (i, rel) in template.template().relations.iter().enumerate() {
                        for _ in 0..rng.gen_range(0..=n) {
                            let vars: Vec<Var> =
                                (0..rel.arity()).map(|_| rng.gen_range(0..n)).collect();
                            inst.add_tuple(i, &vars).unwrap();
                        }
                    }
                    let (fp, stop) = fixed_point(&inst, rules);
                    let cl = closure(&sys, &constraints_of(&inst));
                    if stop {
                        assert!(cl.contains(&sys.bottom()));
                    } else {
                        assert!(!cl.contains(&sys.bottom()));
                        assert_eq!(cl, constraints_of(&fp));
                    }
                }
            }
        }
    }
}
