//! Scenario runner for dysonlab: reads a TOML scenario, runs one mode and
//! writes CSV, JSON and SVG artifacts.

pub mod config;
pub mod report;
pub mod run;
pub mod svg;

pub use config::{ConfigError, Mode, Overrides, ScenarioConfig};
pub use report::{Check, Report, Status};
pub use run::{run, write_report};
pub use svg::{emit_svg, Polyline, SvgError, SvgStyle};
