mod check;
mod tools;

pub use check::{run_check, run_holonomy, CHECKS};
pub use tools::{geodesic_csv, run_berger, run_geodesic, run_spin, run_split, GeodesicArgs, SplitBase, SplitExample};

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    /// Stamp `wall_time_ms` on each record.
    pub timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            seed: None,
            tol: None,
            timing: true,
        }
    }
}
