//! Frames of translates in discretized `L_p(ℝ^d)`: grids, Haar and Walsh
//! systems, frame operators, the unconditional translate construction for
//! `p > 2` and numerical diagnostics.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod construction;
pub mod dense;
pub mod diagnostics;
pub mod error;
pub mod frame;
pub mod grid;
pub mod haar;
pub mod lambda;
pub mod norms;
pub mod report;
pub mod separation;
pub mod sweep;
pub mod walsh;

pub use construction::{
    build_construction, choose_block_sizes, construct_frame, select_index_ladder, BlockPlan, BoundMode,
    ConstructedFrame, Construction, ConstructionConfig, IndexLadder,
};
pub use error::{Error, Result};
pub use frame::{
    apply_frame_operator, frame_constants, frame_constants_on, invert_frame_operator, promote_to_schauder_frame,
    seminormalize, FrameConstants, FramePair, SeminormalizationAuxiliary, Seminormalized, SeminormalizeSettings,
};
pub use grid::{make_indicator, pair, Exponents, GridFunction, GridSpec, LatticeBox};
pub use haar::{haar_system, BasisSystem};
pub use lambda::LambdaSource;
pub use report::{Provenance, Report, ReportEntry, Status};
pub use separation::{partition_uniformly_separated, refine, PointFamily, SeparationPartition};
pub use sweep::SweepMode;
