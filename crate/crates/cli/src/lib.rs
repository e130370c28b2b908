//! Command-line front end for `stinet-core`: layered configuration,
//! experiment presets, CSV/JSON/SVG artifacts.

pub mod command;
pub mod experiments;
pub mod output;
pub mod presets;
pub mod settings;
