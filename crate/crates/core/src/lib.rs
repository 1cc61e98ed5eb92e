//! Quality assessment of digital holograms.
//!
//! The crate covers the numerical side of a four-point assessment pipeline:
//! complex fields and their 8-bit quantization ([`field`]), Fourier/Fresnel
//! conversion and reconstruction ([`transform`]), speckle denoising
//! ([`denoise`]), full-reference quality metrics ([`metrics`]) and the
//! statistics used to benchmark metric predictions against subjective
//! scores ([`stats`]).

pub mod denoise;
pub mod fft;
pub mod field;
pub mod metrics;
pub mod stats;
pub mod transform;
