//! Probability bounds and seeded experiments.

mod bounds;
mod estimate;
mod verify;

pub use bounds::{gadget_event_lower_bound, res_lower_bound, rho_lower_bound, rho_lower_bound_best, BoundValue};
pub use estimate::{
    estimate_cut_density, estimate_gamma, estimate_gamma_with, BlockGrowth, CutKind, DensityReport, EstimateReport,
    TrialRecord, VERSION,
};
pub use verify::{
    verify_law, verify_offset_tail, verify_res_bound, verify_restriction_offset_decay, CheckRow, DecayReport,
    DecayRow, LawReport, ResReport, TailReport, TailStat, MAX_TAIL_THRESHOLD,
};
