//! Popularity-driven replacement baseline.
//!
//! Every stage, each SCBS may replace up to `r` of its cached contents: the
//! least popular cached items (by a recency-decayed demand score) give way
//! to the most requested uncached ones, and a swap happens only when the
//! incoming content was requested strictly more often this stage than the
//! outgoing one. The single-copy variant skips candidates already cached
//! anywhere in the network; the multi-copy variant only looks at its own
//! cache. Updates are replacement-only: an SCBS never grows its item count.

use crate::cache::{CacheAction, CacheState};
use crate::topology::Cost;

/// Recency-decayed demand scores: `score = demand_t + decay * score_prev`.
/// Decay 1.0 degenerates to cumulative frequency, 0.0 to the current stage
/// only.
#[derive(Clone, Debug)]
pub struct LruBook {
    scores: Vec<f64>,
    decay: f64,
}

impl LruBook {
    pub fn new(num_contents: usize, decay: f64) -> LruBook {
        LruBook { scores: vec![0.0; num_contents], decay }
    }

    pub fn grow(&mut self, num_contents: usize) {
        self.scores.resize(num_contents, 0.0);
    }

    /// Folds the current stage's observed demand into the scores.
    pub fn observe(&mut self, demand_t: &[u32]) {
        self.grow(demand_t.len());
        for (score, &d) in self.scores.iter_mut().zip(demand_t) {
            *score = d as f64 + self.decay * *score;
        }
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }
}

/// Computes the replacement action for one stage. `scores` ranks eviction
/// victims (ascending); candidates rank by current observed demand
/// (descending). At most `r` replacements per SCBS.
pub fn lru_update(
    state: &CacheState,
    demand_t: &[u32],
    scores: &[f64],
    r: u32,
    single_copy: bool,
) -> CacheAction {
    let mut work = state.clone();
    let m_count = state.num_scbs();
    let cost_of = |x: f64| -> Cost {
        // Total order for f64 scores; ties resolved by content id below.
        (x * 1e6) as Cost
    };
    for m in 1..=m_count {
        // Eviction order: least popular cached first.
        let mut victims: Vec<u32> = work.cached_at(m).collect();
        victims.sort_by_key(|&n| (cost_of(scores[n as usize]), n));
        // Candidate order: most requested first.
        let mut candidates: Vec<u32> = (0..demand_t.len() as u32)
            .filter(|&n| demand_t[n as usize] > 0)
            .filter(|&n| {
                if single_copy {
                    work.copies(n) == 0
                } else {
                    !work.contains(n, m)
                }
            })
            .collect();
        candidates.sort_by_key(|&n| (std::cmp::Reverse(demand_t[n as usize]), n));

        let mut replaced = 0u32;
        let mut vi = 0;
        for &incoming in &candidates {
            if replaced >= r || vi >= victims.len() {
                break;
            }
            let outgoing = victims[vi];
            if demand_t[incoming as usize] <= demand_t[outgoing as usize] {
                break;
            }
            let fits = work.used(m) - work.sizes()[outgoing as usize]
                + work.sizes()[incoming as usize]
                <= work.capacity(m);
            if !fits {
                continue;
            }
            work.remove_unchecked(outgoing, m);
            work.insert_unchecked(incoming, m);
            vi += 1;
            replaced += 1;
        }
    }
    CacheAction::diff(state, &work)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_demand_means_no_action() {
        let mut state = CacheState::unit(4, 2, 1);
        state.insert_unchecked(0, 1);
        let scores = vec![0.0; 4];
        let action = lru_update(&state, &[0, 0, 0, 0], &scores, 1, false);
        assert!(action.is_empty());
    }

    #[test]
    fn full_turnover_when_budget_allows() {
        // Two junk items with zero demand, two hot newcomers, r = capacity.
        let mut state = CacheState::unit(4, 1, 2);
        state.insert_unchecked(0, 1);
        state.insert_unchecked(1, 1);
        let demand = [0, 0, 9, 7];
        let scores = vec![0.0, 0.5, 0.0, 0.0];
        let action = lru_update(&state, &demand, &scores, 2, false);
        assert_eq!(action.size(), 4);
        let next = state.apply(&action).unwrap();
        assert!(next.contains(2, 1) && next.contains(3, 1));
    }

    #[test]
    fn replacement_requires_strictly_higher_demand() {
        let mut state = CacheState::unit(2, 1, 1);
        state.insert_unchecked(0, 1);
        let scores = vec![0.0, 0.0];
        let action = lru_update(&state, &[5, 5], &scores, 1, false);
        assert!(action.is_empty());
    }

    #[test]
    fn single_copy_variant_skips_network_cached_candidates() {
        let mut state = CacheState::unit(3, 2, 1);
        state.insert_unchecked(0, 1); // junk at SCBS 1
        state.insert_unchecked(2, 2); // the hot content already at SCBS 2
        let demand = [0, 3, 9];
        let scores = vec![0.0; 3];
        let single = lru_update(&state, &demand, &scores, 1, true);
        let next = state.apply(&single).unwrap();
        // Content 2 is skipped at SCBS 1; content 1 replaces the junk.
        assert!(next.contains(1, 1));
        assert_eq!(next.copies(2), 1);

        let multi = lru_update(&state, &demand, &scores, 1, false);
        let next = state.apply(&multi).unwrap();
        // The multi-copy variant duplicates the hot content instead.
        assert!(next.contains(2, 1));
        assert_eq!(next.copies(2), 2);
    }

    #[test]
    fn never_grows_item_count() {
        let mut state = CacheState::unit(5, 2, 2);
        state.insert_unchecked(0, 1);
        let demand = [1, 8, 6, 4, 2];
        let scores = vec![0.0; 5];
        let action = lru_update(&state, &demand, &scores, 2, false);
        let next = state.apply(&action).unwrap();
        for m in 1..=2 {
            assert!(next.cached_at(m).count() <= state.cached_at(m).count());
        }
    }
}
