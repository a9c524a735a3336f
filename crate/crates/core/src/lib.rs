//! Numerical approximation of first- and high-order tangent cones to sets
//! in R^n, plus the necessary-condition checks for constrained minimizers
//! built on top of them.
//!
//! The pipeline: [`expr`] parses objectives and constraints, [`setmodels`]
//! turns set descriptions into a distance oracle, [`cones`] scans scaled
//! distances along refinement schedules to decide cone membership, and
//! [`optcheck`] combines memberships with exact arc jets ([`jets`]) and
//! explicit multi-index sums ([`taylor`]) to hunt for disqualification
//! certificates. [`benchsets`] ships the benchmark sets and [`props`] the
//! cross-check suites.

pub mod benchsets;
pub mod cones;
pub mod expr;
pub mod jets;
pub mod optcheck;
pub mod props;
pub mod setmodels;
pub mod taylor;

pub use cones::{
    fmt17, member_first_order, member_proper, member_slice, sample_cone, sample_directions,
    DirectionCollection, EvidenceRow, MembershipConfig, MembershipVerdict, RefinementSchedule,
    SliceSpec, TauRule, VerdictStatus,
};
pub use expr::{default_variables, parse, DomainError, Expr, ParseError, ParseErrorKind};
pub use jets::{eval_on_arc, gradient, Arc, ArcTail, Jet};
pub use optcheck::{
    check_collection, check_first_order, disqualify, CheckStatus, DisqualifyOutcome,
    OptimalityConfig, OptimalityReport,
};
pub use setmodels::{
    contains, distance, DistanceConfig, DistanceMethod, DistanceOracle, DistanceResult,
    OracleError, SetDesc, SetError,
};
pub use taylor::{
    derivative_tensor, enumerate_multiindices, sum_order_k, sum_order_s, MultiIndex, TaylorError,
};
