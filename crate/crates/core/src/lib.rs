//! Numerics for the endpoint distribution of directed polymers.
//!
//! The library evaluates Fredholm determinants of Airy-type kernels by
//! Nystrom discretization: Tracy-Widom GUE/GOE laws, the joint density of
//! the location and height of the maximum of the Airy2 process minus a
//! parabola, the endpoint density with its analytic tail envelopes, one- and
//! two-time parabolic barrier laws, and the extended-kernel two-time
//! distribution. A geometric last passage percolation simulator provides the
//! matching finite-size empirical law.

pub mod airy;
pub mod dist;
pub mod error;
pub mod fredholm;
pub mod kernels;
pub mod logspace;
pub mod lpp;
pub mod tails;
pub mod quadrature;

pub use dist::{
    endpoint_density, endpoint_moments, endpoint_table, endpoint_tail, f_goe, f_gue,
    joint_density, joint_sup_point_cdf, model_cdf_table, one_sided_sup_cdf, two_time_cdf,
    CdfTable, DensityTable, JointRoute, MomentReport, NumericsConfig, SupPointRoute,
};
pub use error::{Error, Result};
pub use lpp::{ks_distance, rescale, simulate, EmpiricalDist, LppConfig, Scale};
pub use tails::{fit_decay, lower_envelope, upper_envelope, DecayFit, TailRecord};
pub use logspace::LogVal;
pub use fredholm::{det_block2, det_fredholm, hs_norm, rank_one_trace, resolvent_apply, BlockKernel, DetResult, KernelFn};
pub use quadrature::{choose_truncation, DecayEnvelope, QuadratureRule, TruncationSpec};
