//! Convolutional coding: encoder, BCJR decoder, distance search, interleaver.

pub mod bcjr;
pub mod conv;
pub mod distance;
pub mod interleaver;

pub use bcjr::{BcjrDecoder, BcjrOutput, MaxStar};
pub use conv::{ConvCode, Trellis};
pub use distance::{frame_distance, free_distance, min_distance, MinDistance};
pub use interleaver::Interleaver;
