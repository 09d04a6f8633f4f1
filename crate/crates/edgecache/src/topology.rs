//! SCBS grid network and delivery-cost structure.
//!
//! Small-cell base stations (SCBSs) sit on the crossover points of a
//! `rows x cols` grid and are indexed `1..=M`; index `0` is the macro-cell
//! base station (MCBS) that holds the whole catalogue. Delivering a content
//! from SCBS `m` to user `u` costs `hop_cost` per grid hop between `m` and
//! the user's home SCBS; fetching from the MCBS costs a flat `mcbs_cost`,
//! which must dominate every SCBS-to-SCBS delivery cost.
//!
//! All costs are integer cost units so downstream solvers can compare
//! objectives exactly.

use crate::error::{Error, Result};

/// Cost in integer cost units (pick the unit so all inputs are integral).
pub type Cost = i64;

/// A rectangular grid of SCBSs plus the MCBS and the user-to-home mapping.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridTopology {
    rows: usize,
    cols: usize,
    hop_cost: Cost,
    mcbs_cost: Cost,
    /// `user_map[u]` is user `u`'s home SCBS, in `1..=M`.
    user_map: Vec<usize>,
}

impl GridTopology {
    /// Builds the grid with one aggregate user homed at every SCBS.
    ///
    /// Fails with `InvalidParameter` when `mcbs_cost` does not strictly
    /// dominate the largest possible SCBS-to-SCBS delivery cost
    /// (`hop_cost * ((rows-1) + (cols-1))`), which would make the MCBS a
    /// cheaper source than a remote SCBS.
    pub fn build_grid(rows: usize, cols: usize, hop_cost: Cost, mcbs_cost: Cost) -> Result<Self> {
        if rows < 1 || cols < 1 {
            return Err(Error::InvalidParameter("grid needs rows >= 1 and cols >= 1".into()));
        }
        if hop_cost < 0 {
            return Err(Error::InvalidParameter("hop_cost must be nonnegative".into()));
        }
        let max_hops = (rows - 1 + cols - 1) as Cost;
        if mcbs_cost <= hop_cost * max_hops {
            return Err(Error::InvalidParameter(format!(
                "mcbs_cost {} must exceed hop_cost * max hop distance = {}",
                mcbs_cost,
                hop_cost * max_hops
            )));
        }
        let m = rows * cols;
        Ok(GridTopology { rows, cols, hop_cost, mcbs_cost, user_map: (1..=m).collect() })
    }

    /// Replaces the default identity user mapping. Every entry must name an
    /// SCBS in `1..=M`; the user count may differ from `M`.
    pub fn with_user_map(mut self, user_map: Vec<usize>) -> Result<Self> {
        if user_map.is_empty() {
            return Err(Error::InvalidParameter("user_map must not be empty".into()));
        }
        let m = self.num_scbs();
        if let Some(&bad) = user_map.iter().find(|&&h| h < 1 || h > m) {
            return Err(Error::IndexOutOfRange(format!("home SCBS {bad} not in 1..={m}")));
        }
        self.user_map = user_map;
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of SCBSs, `M = rows * cols`.
    pub fn num_scbs(&self) -> usize {
        self.rows * self.cols
    }

    pub fn num_users(&self) -> usize {
        self.user_map.len()
    }

    pub fn hop_cost(&self) -> Cost {
        self.hop_cost
    }

    pub fn mcbs_cost(&self) -> Cost {
        self.mcbs_cost
    }

    /// Home SCBS of user `u` (0-based user index).
    pub fn home(&self, u: usize) -> usize {
        self.user_map[u]
    }

    fn coords(&self, m: usize) -> (usize, usize) {
        ((m - 1) / self.cols, (m - 1) % self.cols)
    }

    /// Grid hops on a shortest path between two SCBSs. On the full grid this
    /// is the Manhattan distance between their crossover coordinates.
    pub fn hop_distance(&self, m1: usize, m2: usize) -> Result<usize> {
        let m = self.num_scbs();
        for idx in [m1, m2] {
            if idx < 1 || idx > m {
                return Err(Error::IndexOutOfRange(format!("SCBS {idx} not in 1..={m}")));
            }
        }
        let (r1, c1) = self.coords(m1);
        let (r2, c2) = self.coords(m2);
        Ok(r1.abs_diff(r2) + c1.abs_diff(c2))
    }

    /// Dense delivery-cost table `c[m][u]` for `m in 0..=M`, `u in 0..U`.
    pub fn cost_matrix(&self) -> CostMatrix {
        let m_count = self.num_scbs();
        let users = self.num_users();
        let mut c = vec![vec![0; users]; m_count + 1];
        for (u, &home) in self.user_map.iter().enumerate() {
            c[0][u] = self.mcbs_cost;
            for m in 1..=m_count {
                let hops = self.hop_distance(home, m).expect("valid indices") as Cost;
                c[m][u] = self.hop_cost * hops;
            }
        }
        CostMatrix { c, home: self.user_map.clone() }
    }
}

/// Delivery costs `c[m][u]` with `m = 0` for the MCBS.
///
/// Invariants: `c[0][u]` is the MCBS cost, `c[home(u)][u] = 0`, and
/// `c[m][u] < c[0][u]` for every SCBS `m >= 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostMatrix {
    c: Vec<Vec<Cost>>,
    home: Vec<usize>,
}

impl CostMatrix {
    /// Cost of serving user `u` from source `m` (`0` = MCBS).
    pub fn cost(&self, m: usize, u: usize) -> Cost {
        self.c[m][u]
    }

    pub fn mcbs_cost(&self, u: usize) -> Cost {
        self.c[0][u]
    }

    pub fn num_scbs(&self) -> usize {
        self.c.len() - 1
    }

    pub fn num_users(&self) -> usize {
        self.home.len()
    }

    pub fn home(&self, u: usize) -> usize {
        self.home[u]
    }

    /// Sum of MCBS costs over all users: the per-unit-demand cost of an
    /// entirely uncached content.
    pub fn total_mcbs_cost(&self) -> Cost {
        (0..self.num_users()).map(|u| self.c[0][u]).sum()
    }

    /// `s_m = sum_u (c_0^u - c_m^u)`: per-unit-demand saving of holding the
    /// only copy of a content at SCBS `m` instead of nowhere.
    pub fn single_copy_saving(&self, m: usize) -> Cost {
        (0..self.num_users()).map(|u| self.c[0][u] - self.c[m][u]).sum()
    }

    /// Cheapest cost of serving user `u` from the MCBS or any SCBS in
    /// `owners`.
    pub fn best_source_cost(&self, owners: &[usize], u: usize) -> Cost {
        let mut best = self.c[0][u];
        for &m in owners {
            if self.c[m][u] < best {
                best = self.c[m][u];
            }
        }
        best
    }
}
