//! Random instance generators and naive oracles used by the acceptance
//! suite and the property tests.

pub mod gen;
pub mod oracle;
pub mod rules;
