//! Content catalogue, demand realization and auto-regressive forecasting.
//!
//! Per-content request counts evolve by an AR recursion: the expected count
//! for the next stage is a convex combination (weights `beta`) of the last
//! `H` counts, scaled by a stage-dependent factor `mu_t` and perturbed by
//! Gaussian noise. Realized counts are Poisson draws around that mean, so a
//! trace is fully determined by its seed.
//!
//! Newly published contents have no real history, so they carry a synthetic
//! seed level: a Zipf share at a uniformly drawn rank, scaled to the current
//! total demand. Forecasts treat pre-birth stages as that seed level.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One content: identifier (its catalogue index), size in capacity units,
/// birth stage and the synthetic demand level assumed before birth.
#[derive(Clone, Debug, PartialEq)]
pub struct Content {
    pub id: u32,
    pub size: u32,
    pub birth_stage: u32,
    pub seed_level: f64,
}

/// Append-only content catalogue.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Catalog {
    contents: Vec<Content>,
}

impl Catalog {
    /// Initial catalogue of `n0` unit-size contents born at stage 1 with
    /// Zipf-distributed seed levels: content `n` (rank `n+1`) gets
    /// `p_{n+1} * n0 * demand_scale` expected requests per stage.
    pub fn initial(n0: usize, zipf_skew: f64, demand_scale: f64) -> Result<Catalog> {
        let p = zipf_popularity(n0, zipf_skew)?;
        let contents = (0..n0)
            .map(|n| Content {
                id: n as u32,
                size: 1,
                birth_stage: 1,
                seed_level: p[n] * n0 as f64 * demand_scale,
            })
            .collect();
        Ok(Catalog { contents })
    }

    pub fn len(&self) -> usize {
        self.contents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contents.is_empty()
    }

    pub fn content(&self, n: u32) -> &Content {
        &self.contents[n as usize]
    }

    pub fn contents(&self) -> &[Content] {
        &self.contents
    }

    pub fn sizes(&self) -> Vec<u32> {
        self.contents.iter().map(|c| c.size).collect()
    }

    /// Number of contents already published at stage `t`.
    pub fn alive_at(&self, t: u32) -> usize {
        self.contents.iter().take_while(|c| c.birth_stage <= t).count()
    }

    /// Appends `arrivals` new unit-size contents born at stage `t`.
    ///
    /// Each newcomer draws a uniform rank `r` in `1..=N` and is seeded with
    /// the Zipf(`zipf_skew`) share of rank `r` applied to `recent_total`, the
    /// current total per-stage demand, so the newcomer's expected popularity
    /// is that of a randomly ranked existing content.
    pub fn spawn_contents(
        &mut self,
        arrivals: u32,
        t: u32,
        zipf_skew: f64,
        recent_total: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<()> {
        for _ in 0..arrivals {
            let n = self.len();
            let p = zipf_popularity(n.max(1), zipf_skew)?;
            let rank = rng.random_range(0..n.max(1));
            self.contents.push(Content {
                id: n as u32,
                size: 1,
                birth_stage: t,
                seed_level: p[rank] * recent_total,
            });
        }
        Ok(())
    }
}

/// How a stage's mean is turned into a realized count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RealizationMode {
    /// Poisson draw around the AR mean (the normal operating mode).
    Stochastic,
    /// Rounded AR mean with no noise; used for reproducible fixtures.
    Deterministic,
}

/// Auto-regressive demand model: `H` history weights `beta` (nonnegative,
/// summing to 1), a per-stage scale profile `mu`, the noise level and the
/// Zipf skew used for popularity seeding.
#[derive(Clone, Debug, PartialEq)]
pub struct ArModel {
    beta: Vec<f64>,
    mu_profile: Vec<f64>,
    pub noise_sigma: f64,
    pub zipf_skew: f64,
}

impl ArModel {
    pub fn new(beta: Vec<f64>, mu_profile: Vec<f64>, noise_sigma: f64, zipf_skew: f64) -> Result<ArModel> {
        if beta.is_empty() {
            return Err(Error::InvalidParameter("beta must not be empty".into()));
        }
        if beta.iter().any(|&b| b < 0.0) {
            return Err(Error::InvalidParameter("beta weights must be nonnegative".into()));
        }
        let sum: f64 = beta.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("beta weights must sum to 1, got {sum}")));
        }
        if mu_profile.is_empty() || mu_profile.iter().any(|&m| m <= 0.0) {
            return Err(Error::InvalidParameter("mu profile must be nonempty and positive".into()));
        }
        if noise_sigma < 0.0 {
            return Err(Error::InvalidParameter("noise_sigma must be nonnegative".into()));
        }
        if zipf_skew <= 0.0 {
            return Err(Error::InvalidParameter("zipf_skew must be positive".into()));
        }
        Ok(ArModel { beta, mu_profile, noise_sigma, zipf_skew })
    }

    /// Flat `mu = 1` model, convenient for tests.
    pub fn flat(beta: Vec<f64>, horizon: u32, noise_sigma: f64, zipf_skew: f64) -> Result<ArModel> {
        ArModel::new(beta, vec![1.0; horizon as usize], noise_sigma, zipf_skew)
    }

    /// History depth `H`.
    pub fn history_depth(&self) -> usize {
        self.beta.len()
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// Horizon `T` covered by the `mu` profile.
    pub fn horizon(&self) -> u32 {
        self.mu_profile.len() as u32
    }

    /// Scale factor of stage `t` (1-based).
    pub fn mu(&self, t: u32) -> f64 {
        self.mu_profile[(t - 1) as usize]
    }

    fn weighted_history(&self, window: &[f64]) -> f64 {
        self.beta.iter().zip(window).map(|(b, v)| b * v).sum()
    }
}

/// Expected request count `steps` stages after `t`, from the last `H`
/// realized counts (most recent first). Multi-step forecasts feed each
/// step's value back into the window.
pub fn forecast(model: &ArModel, history: &[f64], t: u32, steps: u32) -> Result<f64> {
    let h = model.history_depth();
    if history.len() < h {
        return Err(Error::InsufficientHistory { need: h, got: history.len() });
    }
    if steps < 1 {
        return Err(Error::InvalidParameter("steps must be >= 1".into()));
    }
    if t + steps > model.horizon() {
        return Err(Error::InvalidParameter(format!(
            "forecast target stage {} beyond horizon {}",
            t + steps,
            model.horizon()
        )));
    }
    let mut window: Vec<f64> = history[..h].to_vec();
    let mut value = 0.0;
    for step in 1..=steps {
        value = model.mu(t + step) * model.weighted_history(&window);
        window.rotate_right(1);
        window[0] = value;
    }
    Ok(value)
}

/// Realizes stage `t` counts for every content. `windows[n]` holds the last
/// `H` values for content `n` as of stage `t - 1` (most recent first;
/// pre-birth entries are the content's seed level). Deterministic for a
/// fixed generator state.
pub fn realize_demand(
    model: &ArModel,
    windows: &[Vec<f64>],
    t: u32,
    mode: RealizationMode,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<u32>> {
    let mut out = Vec::with_capacity(windows.len());
    let noise = if model.noise_sigma > 0.0 {
        Some(Normal::new(0.0, model.noise_sigma).expect("sigma checked nonnegative"))
    } else {
        None
    };
    for window in windows {
        if window.len() < model.history_depth() {
            return Err(Error::InsufficientHistory {
                need: model.history_depth(),
                got: window.len(),
            });
        }
        let base = model.weighted_history(window);
        let count = match mode {
            RealizationMode::Deterministic => (model.mu(t) * base).round().max(0.0) as u32,
            RealizationMode::Stochastic => {
                let eps = noise.as_ref().map_or(0.0, |d| d.sample(rng));
                let mean = (model.mu(t) * (base + eps)).max(0.0);
                if mean <= 0.0 {
                    0
                } else {
                    Poisson::new(mean).expect("positive mean").sample(rng) as u32
                }
            }
        };
        out.push(count);
    }
    Ok(out)
}

/// Zipf probability vector over ranks `1..=n`: `p_r ~ r^(-skew)`.
pub fn zipf_popularity(n: usize, skew: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter("zipf_popularity needs n >= 1".into()));
    }
    if skew <= 0.0 {
        return Err(Error::InvalidParameter("zipf skew must be positive".into()));
    }
    let raw: Vec<f64> = (1..=n).map(|r| (r as f64).powf(-skew)).collect();
    let norm: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|v| v / norm).collect())
}

/// Realized request counts per stage. `stages[t-1][n]` is the count of
/// content `n` at stage `t`; stage vectors only cover contents already born.
#[derive(Clone, Debug, PartialEq)]
pub struct DemandTrace {
    stages: Vec<Vec<u32>>,
    pub seed: u64,
}

impl DemandTrace {
    pub fn new(stages: Vec<Vec<u32>>, seed: u64) -> DemandTrace {
        DemandTrace { stages, seed }
    }

    pub fn horizon(&self) -> u32 {
        self.stages.len() as u32
    }

    /// Appends the next stage's realized counts.
    pub fn push_stage(&mut self, counts: Vec<u32>) {
        self.stages.push(counts);
    }

    /// Counts at stage `t` (1-based).
    pub fn stage(&self, t: u32) -> &[u32] {
        &self.stages[(t - 1) as usize]
    }

    /// Count of content `n` at stage `t`; zero for stages or contents the
    /// trace does not record.
    pub fn count(&self, t: u32, n: u32) -> u32 {
        self.stages
            .get((t - 1) as usize)
            .and_then(|s| s.get(n as usize))
            .copied()
            .unwrap_or(0)
    }

    pub fn total_at(&self, t: u32) -> u64 {
        self.stage(t).iter().map(|&c| c as u64).sum()
    }

    /// `stage,content_id,requests` rows for every nonzero count.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("stage,content_id,requests\n");
        for (i, stage) in self.stages.iter().enumerate() {
            for (n, &count) in stage.iter().enumerate() {
                if count > 0 {
                    out.push_str(&format!("{},{},{}\n", i + 1, n, count));
                }
            }
        }
        out
    }

    /// Parses [`DemandTrace::to_csv`] output. The horizon is the largest
    /// stage seen and every stage vector covers the largest content id seen.
    pub fn from_csv(text: &str) -> Result<DemandTrace> {
        let mut rows: Vec<(u32, u32, u32)> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if i == 0 {
                if line.trim() != "stage,content_id,requests" {
                    return Err(Error::Parse(format!("bad header: {line:?}")));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Parse(format!("line {}: expected 3 fields", i + 1)));
            }
            let parse = |s: &str| -> Result<u32> {
                s.trim().parse().map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))
            };
            let (t, n, c) = (parse(fields[0])?, parse(fields[1])?, parse(fields[2])?);
            if t < 1 {
                return Err(Error::Parse(format!("line {}: stage must be >= 1", i + 1)));
            }
            rows.push((t, n, c));
        }
        let horizon = rows.iter().map(|r| r.0).max().unwrap_or(0);
        let n_max = rows.iter().map(|r| r.1 + 1).max().unwrap_or(0);
        let mut stages = vec![vec![0u32; n_max as usize]; horizon as usize];
        for (t, n, c) in rows {
            stages[(t - 1) as usize][n as usize] = c;
        }
        Ok(DemandTrace { stages, seed: 0 })
    }
}

/// History window for content `n` as of stage `t`: the values of stages
/// `t, t-1, ..., t-H+1` (most recent first), substituting the content's
/// seed level for stages before its birth.
pub fn history_window(catalog: &Catalog, trace: &DemandTrace, n: u32, t: u32, h: usize) -> Vec<f64> {
    let content = catalog.content(n);
    (0..h)
        .map(|back| {
            let stage = t as i64 - back as i64;
            if stage >= content.birth_stage as i64 {
                trace.count(stage as u32, n) as f64
            } else {
                content.seed_level
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model3(horizon: u32, sigma: f64) -> ArModel {
        ArModel::flat(vec![0.6, 0.3, 0.1], horizon, sigma, 0.8).unwrap()
    }

    #[test]
    fn one_step_forecast() {
        let m = model3(10, 0.0);
        let f = forecast(&m, &[10.0, 20.0, 30.0], 1, 1).unwrap();
        assert!((f - 15.0).abs() < 1e-12);
    }

    #[test]
    fn constant_history_is_a_fixed_point() {
        let m = ArModel::flat(vec![0.2, 0.5, 0.3], 10, 0.0, 1.0).unwrap();
        for steps in 1..=5 {
            let f = forecast(&m, &[5.0, 5.0, 5.0], 1, steps).unwrap();
            assert!((f - 5.0).abs() < 1e-9, "steps {steps}: {f}");
        }
    }

    #[test]
    fn two_step_forecast_feeds_back() {
        let m = model3(10, 0.0);
        let f = forecast(&m, &[10.0, 20.0, 30.0], 1, 2).unwrap();
        // Step 1 gives 15; window becomes (15, 10, 20).
        assert!((f - 14.0).abs() < 1e-12);
    }

    #[test]
    fn forecast_requires_full_history() {
        let m = model3(10, 0.0);
        assert!(matches!(
            forecast(&m, &[1.0, 2.0], 1, 1),
            Err(Error::InsufficientHistory { need: 3, got: 2 })
        ));
    }

    #[test]
    fn forecast_rejects_stages_beyond_horizon() {
        let m = model3(4, 0.0);
        assert!(forecast(&m, &[1.0, 1.0, 1.0], 3, 2).is_err());
    }

    #[test]
    fn deterministic_realization_equals_forecast() {
        let m = model3(10, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let counts = realize_demand(
            &m,
            &[vec![10.0, 20.0, 30.0]],
            2,
            RealizationMode::Deterministic,
            &mut rng,
        )
        .unwrap();
        assert_eq!(counts, vec![15]);
    }

    #[test]
    fn zero_history_realizes_zero() {
        let m = model3(10, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let counts =
            realize_demand(&m, &[vec![0.0; 3]], 1, RealizationMode::Stochastic, &mut rng).unwrap();
        assert_eq!(counts, vec![0]);
    }

    #[test]
    fn fixed_seed_reproduces_counts() {
        let m = model3(10, 2.0);
        let windows = vec![vec![12.0, 9.0, 11.0], vec![3.0, 4.0, 2.0]];
        let a = realize_demand(
            &m,
            &windows,
            1,
            RealizationMode::Stochastic,
            &mut ChaCha8Rng::seed_from_u64(42),
        )
        .unwrap();
        let b = realize_demand(
            &m,
            &windows,
            1,
            RealizationMode::Stochastic,
            &mut ChaCha8Rng::seed_from_u64(42),
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn poisson_mean_matches_forecast_empirically() {
        // sigma = 0: realized counts are Poisson(15); the sample mean over
        // 1e5 draws must sit within 3 standard errors of 15.
        let m = model3(10, 0.0);
        let windows = vec![vec![10.0, 20.0, 30.0]];
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let draws = 100_000u64;
        let mut sum = 0u64;
        for _ in 0..draws {
            sum += realize_demand(&m, &windows, 2, RealizationMode::Stochastic, &mut rng).unwrap()
                [0] as u64;
        }
        let mean = sum as f64 / draws as f64;
        let se = (15.0f64 / draws as f64).sqrt();
        assert!((mean - 15.0).abs() < 3.0 * se, "mean {mean}, tolerance {}", 3.0 * se);
    }

    #[test]
    fn spawn_grows_catalog_by_arrivals() {
        let mut catalog = Catalog::initial(10, 0.8, 10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for t in 1..=24 {
            catalog.spawn_contents(1, t, 0.8, 100.0, &mut rng).unwrap();
        }
        assert_eq!(catalog.len(), 34);
        assert_eq!(catalog.alive_at(1), 11);
    }

    #[test]
    fn spawn_zero_is_a_no_op() {
        let mut catalog = Catalog::initial(10, 0.8, 10.0).unwrap();
        let before = catalog.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        catalog.spawn_contents(0, 3, 0.8, 100.0, &mut rng).unwrap();
        assert_eq!(catalog, before);
    }

    #[test]
    fn spawn_ten_per_stage() {
        let mut catalog = Catalog::initial(1000, 0.8, 10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for t in 1..=3 {
            let before = catalog.len();
            catalog.spawn_contents(10, t, 0.8, 10_000.0, &mut rng).unwrap();
            assert_eq!(catalog.len(), before + 10);
        }
    }

    #[test]
    fn zipf_examples() {
        assert_eq!(zipf_popularity(1, 1.0).unwrap(), vec![1.0]);
        let p = zipf_popularity(2, 1.0).unwrap();
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((p[1] - 1.0 / 3.0).abs() < 1e-12);
        assert!(zipf_popularity(0, 1.0).is_err());
    }

    #[test]
    fn zipf_normalizes_and_decreases() {
        for &(n, skew) in &[(5usize, 0.5f64), (100, 0.8), (1000, 1.2)] {
            let p = zipf_popularity(n, skew).unwrap();
            let sum: f64 = p.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            assert!(p.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn history_window_uses_seed_before_birth() {
        let mut catalog = Catalog::initial(1, 0.8, 10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        catalog.spawn_contents(1, 3, 0.8, 50.0, &mut rng).unwrap();
        let trace = DemandTrace::new(vec![vec![4], vec![6], vec![2, 7]], 0);
        let w = history_window(&catalog, &trace, 1, 3, 3);
        let seed = catalog.content(1).seed_level;
        assert_eq!(w[0], 7.0);
        assert_eq!(w[1], seed);
        assert_eq!(w[2], seed);
        // The original content has full realized history.
        assert_eq!(history_window(&catalog, &trace, 0, 3, 3), vec![2.0, 6.0, 4.0]);
    }

    proptest! {
        #[test]
        fn forecast_is_linear_in_history(
            hist in proptest::collection::vec(0.0f64..100.0, 3),
            k in 0.0f64..10.0,
            steps in 1u32..4,
        ) {
            let m = model3(10, 0.0);
            let scaled: Vec<f64> = hist.iter().map(|v| v * k).collect();
            let a = forecast(&m, &hist, 1, steps).unwrap();
            let b = forecast(&m, &scaled, 1, steps).unwrap();
            prop_assert!((b - k * a).abs() < 1e-6 * (1.0 + b.abs()));
        }

        #[test]
        fn trace_csv_round_trip(
            stages in proptest::collection::vec(
                proptest::collection::vec(0u32..50, 4),
                1..6,
            ),
        ) {
            let trace = DemandTrace::new(stages, 0);
            let parsed = DemandTrace::from_csv(&trace.to_csv()).unwrap();
            // Zero-padded tails may shrink, but every recorded count survives.
            for t in 1..=trace.horizon() {
                for n in 0..trace.stage(t).len() as u32 {
                    prop_assert_eq!(trace.count(t, n), parsed.count(t, n));
                }
            }
        }
    }
}
