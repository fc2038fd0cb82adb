//! Mean Hausdorff dimension and metric mean dimension of symbolic systems,
//! infinite-dimensional carpets and β-expansion systems, with brute-force
//! metric oracles on finite truncations.

pub mod error;
pub mod par;
pub mod symbolic;
pub mod weighted;
pub mod carpet;
pub mod oracle;
pub mod selfsim;
pub mod grid2d;
pub mod suite;

pub use error::{Error, Result};
pub use par::Execution;

/// Resource caps shared by the enumeration kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budgets {
    /// Words, tuples or fibers enumerated explicitly.
    pub words: u64,
    /// Transfer-matrix states for rectangle counts.
    pub grid_states: u64,
    /// Subset states in powerset determinization.
    pub subsets: u64,
    /// Points materialized in a point cloud.
    pub points: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            words: 20_000_000,
            grid_states: 1 << 22,
            subsets: 1 << 20,
            points: 200_000,
        }
    }
}

impl Budgets {
    /// Scales every cap by `factor`, keeping each at least 1.
    pub fn scaled(self, factor: f64) -> Self {
        let f = |x: u64| ((x as f64 * factor).round() as u64).max(1);
        Budgets {
            words: f(self.words),
            grid_states: f(self.grid_states),
            subsets: f(self.subsets),
            points: f(self.points),
        }
    }
}
