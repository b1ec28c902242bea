//! The bundled example instances.

use crate::error::Result;
use crate::format::{load_str, Instance};

pub const RRA97_EXAMPLE: &str = include_str!("../../../fixtures/rra97_example.json");
pub const UARBAC_EXAMPLE: &str = include_str!("../../../fixtures/uarbac_example.json");
pub const DEPT_EXAMPLE: &str = include_str!("../../../fixtures/dept_example.json");

/// `(file name, contents)` of every bundled instance.
pub const ALL: [(&str, &str); 3] = [
    ("rra97_example.json", RRA97_EXAMPLE),
    ("uarbac_example.json", UARBAC_EXAMPLE),
    ("dept_example.json", DEPT_EXAMPLE),
];

pub fn rra97_example() -> Result<Instance> {
    load_str(RRA97_EXAMPLE)
}

pub fn uarbac_example() -> Result<Instance> {
    load_str(UARBAC_EXAMPLE)
}

pub fn dept_example() -> Result<Instance> {
    load_str(DEPT_EXAMPLE)
}
