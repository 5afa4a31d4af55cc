//! Digital restoration of scanned ancient documents.
//!
//! The building blocks are point operations on [`Raster`]s (thresholding,
//! Otsu selection), dipole-moment edge detection, Fourier filtering with
//! high-pass and axis-notch masks, and compositing of the resulting layers.
//! [`pipeline`] strings them into reproducible recipes; [`service`] exposes
//! the same operations over HTTP for the interactive workbench.

pub mod codec;
pub mod compose;
pub mod edge;
pub mod error;
pub mod pipeline;
pub mod raster;
pub mod service;
pub mod spectral;

pub use codec::{decode_image, encode_image, ImageFormat};
pub use compose::{bas_relief, blend, enhance_text, overlay_edges, BasRelief, BlendMode, EnhanceParams, Threshold};
pub use edge::{dipole_edge_map, dipole_moments, edge_threshold, EdgeMap};
pub use error::{Error, Result};
pub use pipeline::{parse_pipeline, run_pipeline, PipelineSpec};
pub use raster::{histogram, normalize_range, otsu_threshold, threshold_binary, to_grayscale, Field, Histogram, Raster};
pub use spectral::{
    apply_mask, forward_spectrum, inverse_spectrum, make_axis_notch_mask, make_highpass_mask, mask_from_raster,
    spectrum_magnitude_view, FilterMask, NotchAxis, Spectrum,
};
