//! Parameter sweeps, heatmaps and Monte Carlo exploration over the full
//! single-point pipeline.

mod grid;
mod heatmap;
mod histogram;
mod montecarlo;
mod sweep;

pub use grid::{AxisRange, Scale};
pub use heatmap::{heatmap, HeatCell, Heatmap, HeatmapSpec};
pub use histogram::{Edge, Histogram};
pub use montecarlo::{
    monte_carlo, sign_law_holds, McResult, McSample, McSpec, ParamRanges, ViolationStats,
    BOUND_SLACK, CLASSICAL_SLACK, ORDERING_SLACK, POPULATION_SLACK,
};
pub use sweep::{sweep, sweep_point, SweepRow, SweepSpec, SweepValues};
