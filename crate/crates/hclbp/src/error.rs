//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported format: {reason} ({path})")]
    UnsupportedFormat { path: PathBuf, reason: String },

    #[error("image has a zero dimension")]
    ZeroDimension,

    #[error("plane data length {len} does not match {width}x{height}")]
    BadPlaneLength { width: u32, height: u32, len: usize },

    #[error("plane dimensions differ between channels")]
    PlaneMismatch,

    #[error("invalid operator parameters: {0}")]
    BadParams(String),

    #[error("image {width}x{height} too small for radius {r} (needs more than {min}x{min})")]
    ImageTooSmall { width: u32, height: u32, r: u32, min: u32 },

    #[error("point ({x}, {y}) is within {r} pixels of the border")]
    OutsideInterior { x: u32, y: u32, r: u32 },

    #[error("window {w}x{h} does not fit inside {width}x{height}")]
    WindowTooLarge { w: u32, h: u32, width: u32, height: u32 },

    #[error("mask is {mw}x{mh} but the interior is {w}x{h}")]
    MaskMismatch { mw: u32, mh: u32, w: u32, h: u32 },

    #[error("no labeled pixels; histogram is undefined")]
    EmptyLabelMap,

    #[error("resolution schedule is invalid: {0}")]
    BadSchedule(String),

    #[error("noise ratio {0} is outside [0, 1]")]
    BadRatio(f64),

    #[error("dataset root {0} contains no class directories")]
    NoClassDirs(PathBuf),

    #[error("class directory {0} contains no images")]
    EmptyClassDir(PathBuf),

    #[error("class {class} has {size} samples, fewer than {folds} folds")]
    ClassSmallerThanFolds { class: String, size: usize, folds: usize },

    #[error("invalid configuration: {0}")]
    BadConfig(String),

    #[error("descriptor rows have mismatched lengths")]
    DescriptorMismatch,
}

impl Error {
    /// True for errors that indicate a bad request (unusable paths,
    /// out-of-range parameters) rather than a failure while computing.
    /// The command-line front end maps these to exit code 2.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::BadParams(_)
                | Error::BadSchedule(_)
                | Error::BadRatio(_)
                | Error::BadConfig(_)
        )
    }
}
