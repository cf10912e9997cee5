//! Streaming rank/percentile filters modeled clock by clock.
//!
//! The engines find the `M`-th largest of `N` integer samples by a radix-4
//! counting search: each stage of a chain resolves two bits of the answer
//! while the next data set is already flowing into the earlier stages. One
//! sample enters per clock, sets follow each other without gaps, and `N`
//! and `M` are plain parameters, so the same datapath serves as a median,
//! percentile, maximum or minimum filter over any window shape.
//!
//! - [`engine`]: the single-channel stage chain and its building blocks.
//! - [`multichannel`]: one window column per clock.
//! - [`ensembles`]: the one-result-per-clock sliding ensemble and the
//!   concentric 9/7/5/3 ensemble.
//! - [`imaging`]: window geometry, strip buffers and image drivers.
//! - [`oracle`]: brute-force references.
//! - [`pgm`], [`cli`]: file formats and the command-line front end.

pub mod cli;
pub mod engine;
pub mod ensembles;
pub mod error;
pub mod imaging;
pub mod multichannel;
pub mod oracle;
pub mod params;
pub mod pgm;

pub use engine::{run_stream, CycleInput, CycleOutput, Engine, PartialMedian};
pub use error::{Error, Result};
pub use imaging::{filter_image, BorderPolicy, EngineChoice, Image, WindowShape};
pub use oracle::select_desc;
pub use params::{FilterParams, Sample};
