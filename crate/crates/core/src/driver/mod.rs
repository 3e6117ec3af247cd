//! Sweeps, resonance detection, configuration and the command line.

pub mod cli;
pub mod config;
pub mod resonance;
pub mod sweep;

pub use cli::{run_cli, run_cli_with};
pub use config::{Config, Mode, Spacing};
pub use resonance::{detect_in_curves, detect_resonances, AntiResonance, DetectionOptions, Peak, ResonanceReport};
pub use sweep::{sweep, sweep_point, SweepRecord, SweepResult};
