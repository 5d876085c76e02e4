//! mdbook cannot run book listings as tests, so each chapter is included
//! here as a doc comment and `cargo test --doc` compiles and runs every
//! fenced Rust block. One module per chapter keeps failures attributable.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/mixing-angles.md")]
pub mod mixing_angles {}

#[doc = include_str!("../../../book/src/dynamics.md")]
pub mod dynamics {}

#[doc = include_str!("../../../book/src/thermal-fields.md")]
pub mod thermal_fields {}

#[doc = include_str!("../../../book/src/bell-analysis.md")]
pub mod bell_analysis {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
