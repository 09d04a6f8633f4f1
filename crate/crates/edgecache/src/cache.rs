//! Cache configurations, update actions and the delivery subproblem.
//!
//! A [`CacheState`] is the MDP state: which content is cached at which SCBS,
//! subject to per-SCBS capacities. A [`CacheAction`] is a pair of add/evict
//! sets. The delivery subproblem (route every request to its cheapest
//! admissible source) decomposes per (content, user), so [`serving_cost`]
//! evaluates it exactly in closed form; [`serving_cost_bruteforce`] enumerates
//! the full assignment space and exists to defend that reduction in tests.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::topology::{Cost, CostMatrix};

/// Cache placement: for each SCBS the set of cached contents, plus content
/// sizes and per-SCBS capacities. Invariant: used capacity never exceeds
/// `capacity` at any SCBS.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheState {
    /// `per_scbs[m-1]` holds the contents cached at SCBS `m`.
    per_scbs: Vec<BTreeSet<u32>>,
    /// `owners[n]` lists the SCBSs holding content `n`, ascending.
    owners: Vec<Vec<usize>>,
    sizes: Vec<u32>,
    capacities: Vec<u32>,
    used: Vec<u32>,
}

impl CacheState {
    /// Empty caches for `sizes.len()` contents and `capacities.len()` SCBSs.
    pub fn empty(sizes: Vec<u32>, capacities: Vec<u32>) -> Self {
        let n = sizes.len();
        let m = capacities.len();
        CacheState {
            per_scbs: vec![BTreeSet::new(); m],
            owners: vec![Vec::new(); n],
            sizes,
            capacities,
            used: vec![0; m],
        }
    }

    /// Empty state with `n` unit-size contents and uniform capacity `b`.
    pub fn unit(n: usize, m: usize, b: u32) -> Self {
        CacheState::empty(vec![1; n], vec![b; m])
    }

    pub fn num_contents(&self) -> usize {
        self.owners.len()
    }

    pub fn num_scbs(&self) -> usize {
        self.per_scbs.len()
    }

    pub fn sizes(&self) -> &[u32] {
        &self.sizes
    }

    pub fn capacities(&self) -> &[u32] {
        &self.capacities
    }

    pub fn capacity(&self, m: usize) -> u32 {
        self.capacities[m - 1]
    }

    pub fn used(&self, m: usize) -> u32 {
        self.used[m - 1]
    }

    /// Registers a newly published content (initially uncached).
    pub fn push_content(&mut self, size: u32) {
        self.sizes.push(size);
        self.owners.push(Vec::new());
    }

    pub fn contains(&self, n: u32, m: usize) -> bool {
        self.per_scbs[m - 1].contains(&n)
    }

    /// SCBSs currently holding content `n`, ascending.
    pub fn owners(&self, n: u32) -> &[usize] {
        &self.owners[n as usize]
    }

    pub fn copies(&self, n: u32) -> usize {
        self.owners[n as usize].len()
    }

    pub fn cached_at(&self, m: usize) -> impl Iterator<Item = u32> + '_ {
        self.per_scbs[m - 1].iter().copied()
    }

    /// True when no content is cached more than once network-wide.
    pub fn is_single_copy(&self) -> bool {
        self.owners.iter().all(|o| o.len() <= 1)
    }

    pub fn total_cached(&self) -> usize {
        self.owners.iter().map(|o| o.len()).sum()
    }

    fn insert(&mut self, n: u32, m: usize) {
        self.per_scbs[m - 1].insert(n);
        let owners = &mut self.owners[n as usize];
        let pos = owners.partition_point(|&x| x < m);
        owners.insert(pos, m);
        self.used[m - 1] += self.sizes[n as usize];
    }

    fn remove(&mut self, n: u32, m: usize) {
        self.per_scbs[m - 1].remove(&n);
        self.owners[n as usize].retain(|&x| x != m);
        self.used[m - 1] -= self.sizes[n as usize];
    }

    /// Direct insertion used by solvers and trace replay; panics in debug
    /// builds when the pair is already present or capacity would overflow.
    pub fn insert_unchecked(&mut self, n: u32, m: usize) {
        debug_assert!(!self.contains(n, m));
        debug_assert!(self.used[m - 1] + self.sizes[n as usize] <= self.capacities[m - 1]);
        self.insert(n, m);
    }

    pub fn remove_unchecked(&mut self, n: u32, m: usize) {
        debug_assert!(self.contains(n, m));
        self.remove(n, m);
    }

    /// Checks membership of `action` in the feasible set: adds only where the
    /// content is absent, evicts only where present, no (content, SCBS) pair
    /// both added and evicted, and post-action capacity respected everywhere.
    pub fn is_feasible(&self, action: &CacheAction) -> bool {
        for &(n, m) in &action.adds {
            if (n as usize) >= self.num_contents() || m < 1 || m > self.num_scbs() {
                return false;
            }
            if self.contains(n, m) || action.evicts.binary_search(&(n, m)).is_ok() {
                return false;
            }
        }
        for &(n, m) in &action.evicts {
            if (n as usize) >= self.num_contents() || m < 1 || m > self.num_scbs() {
                return false;
            }
            if !self.contains(n, m) {
                return false;
            }
        }
        let mut delta = vec![0i64; self.num_scbs()];
        for &(n, m) in &action.adds {
            delta[m - 1] += self.sizes[n as usize] as i64;
        }
        for &(n, m) in &action.evicts {
            delta[m - 1] -= self.sizes[n as usize] as i64;
        }
        (0..self.num_scbs()).all(|i| self.used[i] as i64 + delta[i] <= self.capacities[i] as i64)
    }

    /// Applies a feasible action, producing the successor state
    /// `x' = x + a - d`.
    pub fn apply(&self, action: &CacheAction) -> Result<CacheState> {
        if !self.is_feasible(action) {
            return Err(Error::InfeasibleAction(format!(
                "{} adds / {} evicts rejected",
                action.adds.len(),
                action.evicts.len()
            )));
        }
        let mut next = self.clone();
        for &(n, m) in &action.evicts {
            next.remove(n, m);
        }
        for &(n, m) in &action.adds {
            next.insert(n, m);
        }
        Ok(next)
    }

    /// `content_id,scbs_id` rows, one per cached copy, sorted.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("content_id,scbs_id\n");
        for n in 0..self.num_contents() {
            for &m in self.owners(n as u32) {
                out.push_str(&format!("{n},{m}\n"));
            }
        }
        out
    }

    /// Rebuilds a state from [`CacheState::to_csv`] output given the sizes
    /// and capacities context.
    pub fn from_csv(text: &str, sizes: Vec<u32>, capacities: Vec<u32>) -> Result<CacheState> {
        let mut state = CacheState::empty(sizes, capacities);
        for (i, line) in text.lines().enumerate() {
            if i == 0 {
                if line.trim() != "content_id,scbs_id" {
                    return Err(Error::Parse(format!("bad header: {line:?}")));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let (n, m) = match (parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), None) => {
                    let n: u32 = a.trim().parse().map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
                    let m: usize = b.trim().parse().map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
                    (n, m)
                }
                _ => return Err(Error::Parse(format!("line {}: expected 2 fields", i + 1))),
            };
            if (n as usize) >= state.num_contents() || m < 1 || m > state.num_scbs() {
                return Err(Error::IndexOutOfRange(format!("line {}: ({n},{m})", i + 1)));
            }
            if state.used(m) + state.sizes[n as usize] > state.capacity(m) {
                return Err(Error::Validation(format!("capacity exceeded at SCBS {m}")));
            }
            state.insert(n, m);
        }
        Ok(state)
    }
}

/// Add/evict pair sets. Pairs are kept sorted and deduplicated; the same
/// (content, SCBS) pair must not appear on both sides.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CacheAction {
    adds: Vec<(u32, usize)>,
    evicts: Vec<(u32, usize)>,
}

impl CacheAction {
    pub fn new(mut adds: Vec<(u32, usize)>, mut evicts: Vec<(u32, usize)>) -> Self {
        adds.sort_unstable();
        adds.dedup();
        evicts.sort_unstable();
        evicts.dedup();
        CacheAction { adds, evicts }
    }

    pub fn empty() -> Self {
        CacheAction::default()
    }

    pub fn adds(&self) -> &[(u32, usize)] {
        &self.adds
    }

    pub fn evicts(&self) -> &[(u32, usize)] {
        &self.evicts
    }

    pub fn is_empty(&self) -> bool {
        self.adds.is_empty() && self.evicts.is_empty()
    }

    /// Number of cache changes, `|adds| + |evicts|`.
    pub fn size(&self) -> usize {
        self.adds.len() + self.evicts.len()
    }

    /// The reversing action (adds and evicts swapped).
    pub fn inverse(&self) -> CacheAction {
        CacheAction { adds: self.evicts.clone(), evicts: self.adds.clone() }
    }

    /// Action turning `from` into `to` (states must share dimensions).
    pub fn diff(from: &CacheState, to: &CacheState) -> CacheAction {
        debug_assert_eq!(from.num_contents(), to.num_contents());
        debug_assert_eq!(from.num_scbs(), to.num_scbs());
        let mut adds = Vec::new();
        let mut evicts = Vec::new();
        for n in 0..to.num_contents() as u32 {
            for &m in to.owners(n) {
                if !from.contains(n, m) {
                    adds.push((n, m));
                }
            }
            for &m in from.owners(n) {
                if !to.contains(n, m) {
                    evicts.push((n, m));
                }
            }
        }
        CacheAction::new(adds, evicts)
    }
}

/// Update penalty `gamma * (|adds| + |evicts|)`.
pub fn update_penalty(action: &CacheAction, gamma: Cost) -> Cost {
    debug_assert!(gamma >= 0);
    gamma * action.size() as Cost
}

/// Exact optimum of the delivery subproblem: every (content, user) request
/// is served from its cheapest admissible source, so the integer program
/// decomposes and the cost is
/// `sum_n w_n * sum_u min(c_0^u, min_{m: cached} c_m^u)`.
pub fn serving_cost(state: &CacheState, weights: &[Cost], costs: &CostMatrix) -> Cost {
    debug_assert_eq!(weights.len(), state.num_contents());
    debug_assert_eq!(costs.num_scbs(), state.num_scbs());
    let users = costs.num_users();
    let mut total = 0;
    for (n, &w) in weights.iter().enumerate() {
        if w == 0 {
            continue;
        }
        let owners = state.owners(n as u32);
        let mut per_unit = 0;
        for u in 0..users {
            per_unit += costs.best_source_cost(owners, u);
        }
        total += w * per_unit;
    }
    total
}

/// Brute-force oracle for [`serving_cost`]: enumerates every joint feasible
/// assignment of requests to sources and returns the minimum objective.
/// Rejects instances whose assignment space exceeds `max_assignments`
/// (default guard `1e6` via [`serving_cost_bruteforce`]).
pub fn serving_cost_bruteforce_capped(
    state: &CacheState,
    weights: &[Cost],
    costs: &CostMatrix,
    max_assignments: u128,
) -> Result<Cost> {
    let users = costs.num_users();
    // Admissible source lists per (content, user) pair: the MCBS plus the
    // SCBSs currently holding the content.
    let mut choices: Vec<(Cost, Vec<Cost>)> = Vec::new();
    let mut space: u128 = 1;
    for (n, &w) in weights.iter().enumerate() {
        let owners = state.owners(n as u32);
        for u in 0..users {
            let mut opts = vec![costs.mcbs_cost(u)];
            opts.extend(owners.iter().map(|&m| costs.cost(m, u)));
            space = space.saturating_mul(opts.len() as u128);
            if space > max_assignments {
                return Err(Error::InstanceTooLarge(format!(
                    "assignment space exceeds {max_assignments}"
                )));
            }
            choices.push((w, opts));
        }
    }

    fn recurse(choices: &[(Cost, Vec<Cost>)], acc: Cost, best: &mut Cost) {
        match choices.split_first() {
            None => {
                if acc < *best {
                    *best = acc;
                }
            }
            Some(((w, opts), rest)) => {
                for &c in opts {
                    recurse(rest, acc + w * c, best);
                }
            }
        }
    }

    let mut best = Cost::MAX;
    recurse(&choices, 0, &mut best);
    Ok(best)
}

/// [`serving_cost_bruteforce_capped`] with the default `1e6` assignment cap.
pub fn serving_cost_bruteforce(state: &CacheState, weights: &[Cost], costs: &CostMatrix) -> Result<Cost> {
    serving_cost_bruteforce_capped(state, weights, costs, 1_000_000)
}

/// Closed-form delivery cost valid only when each content has at most one
/// copy network-wide:
/// `sum_n w_n sum_u [c_0^u (1 - sum_m x_nm) + sum_m c_m^u x_nm]`.
pub fn single_copy_cost(state: &CacheState, weights: &[Cost], costs: &CostMatrix) -> Result<Cost> {
    let users = costs.num_users();
    let mut total = 0;
    for (n, &w) in weights.iter().enumerate() {
        let owners = state.owners(n as u32);
        if owners.len() > 1 {
            return Err(Error::MultiCopyState(n as u32));
        }
        let per_unit: Cost = match owners.first() {
            Some(&m) => (0..users).map(|u| costs.cost(m, u)).sum(),
            None => (0..users).map(|u| costs.mcbs_cost(u)).sum(),
        };
        total += w * per_unit;
    }
    Ok(total)
}

/// Number of MDP states for `n` unit-size contents, `m` SCBSs and uniform
/// capacity `b`: `(sum_{l=0}^{b} C(n,l))^m`.
pub fn count_states(n: u64, m: u32, b: u64) -> Result<u128> {
    let per_scbs = subsets_up_to(n, b.min(n))?;
    let mut total: u128 = 1;
    for _ in 0..m {
        total = total.checked_mul(per_scbs).ok_or(Error::Overflow("count_states"))?;
    }
    Ok(total)
}

/// `sum_{l=0}^{b} C(n,l)` with checked arithmetic.
fn subsets_up_to(n: u64, b: u64) -> Result<u128> {
    let mut sum: u128 = 1; // l = 0
    let mut binom: u128 = 1;
    for l in 1..=b {
        binom = binom
            .checked_mul((n - l + 1) as u128)
            .ok_or(Error::Overflow("count_states"))?
            / l as u128;
        sum = sum.checked_add(binom).ok_or(Error::Overflow("count_states"))?;
    }
    Ok(sum)
}
