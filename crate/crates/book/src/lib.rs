//! Compiles the guide's code listings as doc-tests, so `cargo test` keeps
//! the book honest.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/operad.md")]
pub mod operad {}
#[doc = include_str!("../../../book/src/cosimplicial.md")]
pub mod cosimplicial {}
#[doc = include_str!("../../../book/src/spectral.md")]
pub mod spectral {}
#[doc = include_str!("../../../book/src/geometry.md")]
pub mod geometry {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
