//! Error metrics, torque decompositions and result files.

mod decomposition;
mod metrics;
mod report;

pub use decomposition::{
    decompose_contributions, dissipative_estimate, dissipative_for_samples, true_dissipative,
    ContributionRow, Decomposition,
};
pub use metrics::{
    abs_error_distribution, mean, median, quantile, residuals, rmse_from_residuals, rmse_per_joint,
    states_of, ErrorSummary, JointSummary, Units,
};
pub use report::{
    check_ordering, gnuplot_script, rank, ranking_text, write_boxplot_csv, write_decomposition_csv,
    write_dissipative_csv, write_ranking, write_rmse_csv, OrderingCheck,
};
