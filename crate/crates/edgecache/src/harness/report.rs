//! Aggregated experiment reports and their CSV / JSON encodings.

use serde::Serialize;

/// One policy's aggregated metrics across all replications.
#[derive(Clone, Debug, Serialize)]
pub struct PolicyReportRow {
    pub policy: String,
    /// Solver label for forecast-driven policies, `-` otherwise.
    pub solver_mode: String,
    pub mean_cost: f64,
    pub stderr_cost: f64,
    /// Mean of per-replication `(cost - LB) / (x0 - LB)`; infinite when any
    /// replication was degenerate (`x0 = LB` with `cost > LB`).
    pub proportional_cost: f64,
    pub proportional_degenerate: bool,
    /// Fraction of requests served by any SCBS; `None` without requests.
    pub hit_ratio: Option<f64>,
    /// Fraction of requests served by the user's home SCBS.
    pub local_hit_ratio: Option<f64>,
    pub mean_updates: f64,
    pub wall_ms: f64,
    /// False when any replication fell back to a heuristic placement.
    pub placement_exact: bool,
    /// Total executed greedy replacements across replications.
    pub greedy_replacements: u64,
    /// Largest executed greedy delta (must stay negative).
    pub greedy_delta_max: Option<i64>,
}

/// Full experiment report.
#[derive(Clone, Debug, Serialize)]
pub struct SimulationReport {
    pub scenario: String,
    pub ratio: f64,
    pub replications: u32,
    pub seed: u64,
    pub lb_mean_cost: f64,
    pub x0_mean_cost: f64,
    /// False when the clairvoyant bound used the heuristic placement in any
    /// replication (the bound is then only indicative).
    pub lb_exact: bool,
    pub rows: Vec<PolicyReportRow>,
}

fn fmt(value: f64) -> String {
    if value.is_infinite() {
        "inf".into()
    } else if value.is_nan() {
        "na".into()
    } else {
        format!("{value:.6}")
    }
}

fn fmt_opt(value: Option<f64>) -> String {
    value.map_or_else(|| "na".into(), fmt)
}

impl SimulationReport {
    /// Stable-column CSV: one row per policy, `.` decimal separator, LF
    /// line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "scenario,policy,solver_mode,mean_cost,stderr_cost,proportional_cost,hit_ratio,mean_updates,wall_ms,local_hit_ratio\n",
        );
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                self.scenario,
                row.policy,
                row.solver_mode,
                fmt(row.mean_cost),
                fmt(row.stderr_cost),
                fmt(row.proportional_cost),
                fmt_opt(row.hit_ratio),
                fmt(row.mean_updates),
                fmt(row.wall_ms),
                fmt_opt(row.local_hit_ratio),
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn row(&self, policy: &str) -> Option<&PolicyReportRow> {
        self.rows.iter().find(|r| r.policy == policy)
    }

    /// Human-oriented fixed-width summary for terminal output.
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "scenario {} | ratio {:.1}% | reps {} | seed {} | LB {} | x0 {}{}\n",
            self.scenario,
            self.ratio * 100.0,
            self.replications,
            self.seed,
            fmt(self.lb_mean_cost),
            fmt(self.x0_mean_cost),
            if self.lb_exact { "" } else { " (LB heuristic)" },
        );
        out.push_str(&format!(
            "{:<10} {:<7} {:>14} {:>12} {:>10} {:>10} {:>10} {:>10}\n",
            "policy", "solver", "mean_cost", "prop_cost", "hit", "local_hit", "updates", "ms"
        ));
        for row in &self.rows {
            out.push_str(&format!(
                "{:<10} {:<7} {:>14} {:>12} {:>10} {:>10} {:>10} {:>10}\n",
                row.policy,
                row.solver_mode,
                fmt(row.mean_cost),
                fmt(row.proportional_cost),
                fmt_opt(row.hit_ratio),
                fmt_opt(row.local_hit_ratio),
                format!("{:.1}", row.mean_updates),
                format!("{:.1}", row.wall_ms),
            ));
        }
        out
    }
}
