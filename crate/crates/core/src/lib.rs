//! Spatial soundscape synthesis for sound event localization and detection.
//!
//! The crate renders parametric virtual rooms (or databases of measured
//! impulse responses) into multichannel audio with frame-level direction
//! labels, and augments existing recordings without breaking label
//! consistency. The pieces:
//!
//! - [`geometry`]: rooms, microphone arrays, trajectories, angle math
//! - [`rir`]: image-source room impulse responses, T60 analysis, databases
//! - [`ambisonics`]: first-order ACN/SN3D encoding and DOA estimation
//! - [`spatializer`]: fast convolution, moving sources, levels, mixing
//! - [`composer`]: distribution-parameterized scenes rendered to
//!   audio + DCASE labels + provenance
//! - [`augment`]: channel swapping, rotation, time-frequency masking, remixing
//! - [`io`]: WAV, label CSV, scene configs, corpus/dataset scanning
//!
//! Core math is generic over the scalar via [`Float`]; the file pipeline
//! fixes [`Sample`] = `f64` and writes float32 WAV.

// Range guards are written as negations so NaN parameters fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]
#![allow(clippy::type_complexity)]
#![allow(clippy::should_implement_trait)]

pub mod ambisonics;
pub mod audio;
pub mod augment;
pub mod composer;
pub mod error;
pub mod geometry;
pub mod io;
pub mod rir;
pub mod spatializer;
pub mod stft;

mod float;

pub use error::{Error, Result};
pub use float::Float;

/// Scalar used by the composer, CLI, and file pipeline.
pub use composer::Sample;

/// Concrete aliases for the double-precision pipeline.
pub type Point3 = geometry::Vec3<Sample>;
pub type Room = geometry::RoomSpec<Sample>;
pub type Array = geometry::MicArray<Sample>;
pub type Clip = audio::AudioClip<Sample>;
pub type Response = rir::Rir<Sample>;
