//! The chapters of the guide, so that `cargo test` runs their samples.

#[doc = include_str!("src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("src/fields.md")]
pub mod fields {}
#[doc = include_str!("src/verification.md")]
pub mod verification {}
#[doc = include_str!("src/gaf.md")]
pub mod gaf {}
#[doc = include_str!("src/planar.md")]
pub mod planar {}
#[doc = include_str!("src/multidim.md")]
pub mod multidim {}
#[doc = include_str!("src/cli.md")]
pub mod cli {}
