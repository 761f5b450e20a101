//! Numerical experiments with Chebyshev series on `[−1, 1]^d`.

pub mod chebyshev;
pub mod grid;
pub mod harness;
pub mod random_function;

pub use chebyshev::{chebyshev_eval, chebyshev_extrema, chebyshev_t};
pub use grid::{EvaluationGrid, GridConfig};
pub use harness::{
    estimate_errors, run_experiment, run_row, write_csv, write_jsonl, ErrorEstimate, ExperimentConfig, ExperimentRow,
};
pub use random_function::RandomPosdFunction;
