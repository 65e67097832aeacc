//! Turns game state into observation channels: raster frames, video,
//! waveforms and assembled prompts. Everything here is a pure function of
//! its inputs.

pub mod audio;
pub mod frames;
pub mod prompt;
pub mod raster;

pub use audio::{encode_wav, synthesize_audio, Waveform, SAMPLE_RATE};
pub use prompt::{assemble_prompt, PromptTemplate};
pub use raster::encode_png;
