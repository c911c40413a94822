//! Bundled instances.

use crate::instance::Instance;
use crate::io::parse_instance;

/// Source text of the four-node, two-zone network used across the docs.
pub const RUNNING_EXAMPLE_TOML: &str = include_str!("../fixtures/running_example.toml");

pub fn running_example() -> Instance {
    parse_instance(RUNNING_EXAMPLE_TOML).expect("bundled fixture is valid")
}
