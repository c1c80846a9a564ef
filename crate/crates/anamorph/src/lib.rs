//! Standard-library companion to `anamorph-core`: image files, the external detector bridge,
//! trace and report formats, multi-threaded runs, and the `anamorph` command line.

pub use anamorph_core as core;

pub mod bridge;
pub mod cli;
pub mod formats;
pub mod imageio;
pub mod manifest;
pub mod parallel;
pub mod protocol;
pub mod scenarios;
