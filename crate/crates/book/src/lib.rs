//! Runs the code samples of the user guide in `book/` as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/configuration.md")]
pub mod configuration {}

#[doc = include_str!("../../../book/src/closed-form.md")]
pub mod closed_form {}

#[doc = include_str!("../../../book/src/monte-carlo.md")]
pub mod monte_carlo {}

#[doc = include_str!("../../../book/src/optimization.md")]
pub mod optimization {}

#[doc = include_str!("../../../book/src/scaling.md")]
pub mod scaling {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

#[doc = include_str!("../../../README.md")]
pub mod readme {}
