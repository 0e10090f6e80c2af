//! End-to-end orchestration: SDR file in, Radiance HDR file and manifest out.

mod config;
mod dataset;
mod run;

use std::fmt;
use std::path::PathBuf;

pub use self::config::{BackendConfig, OpeningParams, OpeningTable, PairOpening, PipelineConfig};
pub use self::dataset::{graph_build, GraphBuildReport};
pub use self::run::{
    dump_debug, manifest_path, process, run, sidecar_path, BracketEntry, ClassMasks, ClassReport,
    ClassStatus, Manifest, Processed, RunOptions, RunReport,
};

use crate::exposure::ExposureError;
use crate::imgcore::ImageError;
use crate::inpaint::BackendError;
use crate::masking::MaskError;
use crate::merge::MergeError;
use crate::semgraph::GraphError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Input,
    Graph,
    Segment,
    Masking,
    Prompt,
    Inpaint,
    Merge,
    Output,
    Dataset,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Config => "config",
            Stage::Input => "reading input",
            Stage::Graph => "loading graph",
            Stage::Segment => "segmentation",
            Stage::Masking => "masking",
            Stage::Prompt => "prompt selection",
            Stage::Inpaint => "inpainting",
            Stage::Merge => "merging",
            Stage::Output => "writing output",
            Stage::Dataset => "dataset",
        };
        f.write_str(s)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ErrorKind {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Image(ImageError),
    #[error(transparent)]
    Graph(GraphError),
    #[error(transparent)]
    Mask(MaskError),
    #[error(transparent)]
    Backend(BackendError),
    #[error(transparent)]
    Exposure(ExposureError),
    #[error(transparent)]
    Merge(MergeError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// A failure together with the stage that produced it.
#[derive(Debug, thiserror::Error)]
#[error("{stage}: {kind}")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub kind: ErrorKind,
}

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BACKEND: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_INTERNAL: i32 = 1;

fn image_exit(e: &ImageError) -> i32 {
    match e {
        ImageError::Io { .. } | ImageError::Unreadable { .. } | ImageError::UnsupportedBitDepth { .. } => {
            EXIT_IO
        }
        ImageError::InvalidCurve(_) => EXIT_CONFIG,
        _ => EXIT_INTERNAL,
    }
}

impl PipelineError {
    pub fn new(stage: Stage, kind: impl Into<ErrorKind>) -> Self {
        PipelineError {
            stage,
            kind: kind.into(),
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Self::new(Stage::Config, ErrorKind::Config(msg.into()))
    }

    pub fn io(stage: Stage, path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::new(
            stage,
            ErrorKind::Io {
                path: path.into(),
                source,
            },
        )
    }

    /// 2 for configuration problems, 3 for backend failures, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match &self.kind {
            ErrorKind::Config(_) => EXIT_CONFIG,
            ErrorKind::Io { .. } => EXIT_IO,
            ErrorKind::Image(e) => image_exit(e),
            ErrorKind::Graph(GraphError::Io { .. }) => EXIT_IO,
            ErrorKind::Graph(_) => EXIT_CONFIG,
            ErrorKind::Mask(MaskError::Image(e)) => image_exit(e),
            ErrorKind::Mask(_) => EXIT_CONFIG,
            ErrorKind::Backend(BackendError::InvalidRequest(_)) if self.stage == Stage::Config => {
                EXIT_CONFIG
            }
            ErrorKind::Backend(_) => EXIT_BACKEND,
            ErrorKind::Exposure(
                ExposureError::Backend { .. }
                | ExposureError::ZeroLuminance { .. }
                | ExposureError::EmptyRegion,
            ) => EXIT_BACKEND,
            ErrorKind::Exposure(_) | ErrorKind::Merge(_) => EXIT_INTERNAL,
        }
    }
}

macro_rules! kind_from {
    ($($t:ty => $v:ident),*) => {
        $(impl From<$t> for ErrorKind {
            fn from(e: $t) -> Self {
                ErrorKind::$v(e)
            }
        })*
    };
}

kind_from!(
    ImageError => Image,
    GraphError => Graph,
    MaskError => Mask,
    BackendError => Backend,
    ExposureError => Exposure,
    MergeError => Merge
);

/// Attaches a stage to any error convertible into [`ErrorKind`].
pub(crate) trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, PipelineError>;
}

impl<T, E: Into<ErrorKind>> AtStage<T> for Result<T, E> {
    fn at(self, stage: Stage) -> Result<T, PipelineError> {
        self.map_err(|e| PipelineError::new(stage, e))
    }
}
