//! LP relaxation of the inner minimisation and the dual-point lower bound.

pub mod bound;
pub mod dual;
pub mod relax;

pub use bound::{
    default_gamma_grid, default_q_grid, maximin_lp_bound, theorem4_bound, Evaluation, MaximinBound, Theorem4Report,
};
pub use dual::{aux_output_law, build_theorem4_dual, partition, AuxLaw, DualPoint, PartitionKind, UPartition};
pub use relax::{solve_lp, solve_sc, DpResidual, DpVariables, LpSolutionReport, ScSolution};
