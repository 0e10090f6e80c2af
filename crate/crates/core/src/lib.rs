//! Single-image inverse tone mapping driven by semantic ordering.
//!
//! An SDR image is segmented into nine coarse classes. Clipped pixels of each
//! class are refined into an inpainting mask, filled by a generative backend
//! in an order dictated by an [`OrderedSemanticGraph`], placed into a virtual
//! exposure bracket whose level is estimated from the generated content, and
//! the bracket stack is finally fused into a radiance map.

pub mod exposure;
pub mod imgcore;
pub mod inpaint;
pub mod masking;
pub mod merge;
pub mod pipeline;
pub mod semgraph;

pub use exposure::{Bracket, BracketStack, ExposureEstimate};
pub use imgcore::{LinearImage, ResponseCurve, Rgb, SdrImage};
pub use inpaint::{Backend, HttpBackend, MockBackend};
pub use masking::{BinaryMask, DiskKernel, SemanticClass, SemanticLabeling, SoftMask};
pub use merge::{HdrImage, WeightFunction};
pub use pipeline::{PipelineConfig, PipelineError};
pub use semgraph::OrderedSemanticGraph;
