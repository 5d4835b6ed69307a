//! Pairwise error probability bounds, coding gains and theorem checks.

pub mod bounds;
pub mod gain;
pub mod pep;

pub use bounds::{
    coding_gain_bound, coding_gain_bound_db, conditional_coding_gain, determinant_lower_bound,
    eigen_square_sum_bound, p_condition_number, trace_inverse_bound, verify_bounds, DeterminantBound,
    EigenSquareSumBound, TraceInverseBound, VerifyConfig, VerifyReport,
};
pub use gain::{average_coding_gain, gain_csv, GainConfig, GainResult, GAIN_CSV_HEADER};
pub use pep::{
    conditional_pep_bound, large_p_pep_bound, rician_factors, unconditional_pep_rayleigh,
    unconditional_pep_rician, GaussianApproxState, LargePBound, RicianFactors,
};
