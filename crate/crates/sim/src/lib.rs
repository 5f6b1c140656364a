//! Scenario files, demos, validation harnesses and output formats for the
//! bilayer strip model in `bilayer-core`.

pub mod config;
pub mod export;
pub mod fit;
pub mod metrics;
pub mod run;
pub mod scenario;
pub mod validate;

use config::{ConfigError, ScenarioConfig};

/// Demo names accepted by the `demo` subcommand.
pub const DEMOS: [&str; 5] = ["gripping", "crawl-inchworm", "crawl-dualleg", "jumping", "swimming"];

/// Shipped configuration text of a demo.
pub fn demo_source(name: &str) -> Option<&'static str> {
    Some(match name {
        "gripping" => include_str!("../configs/gripping.toml"),
        "crawl-inchworm" => include_str!("../configs/crawl-inchworm.toml"),
        "crawl-dualleg" => include_str!("../configs/crawl-dualleg.toml"),
        "jumping" => include_str!("../configs/jumping.toml"),
        "swimming" => include_str!("../configs/swimming.toml"),
        "helix" => include_str!("../configs/helix.toml"),
        _ => return None,
    })
}

pub fn demo_config(name: &str) -> Option<Result<ScenarioConfig, ConfigError>> {
    demo_source(name).map(ScenarioConfig::from_toml)
}

/// Frame stride for a configured output interval.
pub fn stride(config: &ScenarioConfig) -> usize {
    ((config.frame_interval / config.integrator.dt).round() as usize).max(1)
}
