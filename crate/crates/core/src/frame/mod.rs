//! Frames, approximate frames and their operators.

mod invert;
mod model;
mod seminormalize;
pub mod span;

pub use invert::{
    invert_frame_operator, neumann_contraction, promote_to_schauder_frame, Inversion, InversionMethod, Promotion,
};
pub use model::{apply_frame_operator, frame_constants, frame_constants_on, FrameConstants, FramePair, DEFAULT_INPUTS};
pub use seminormalize::{
    seminormalize, K1Source, SeminormalizationAuxiliary, SeminormalizeSettings, Seminormalized,
};
pub use span::WorkingSpan;
