//! Detection of sustained drops in periodic, noisy, uniformly sampled series.
//!
//! The crate is `no_std` (with `alloc`) so the models and detection rules can
//! run wherever the stream is consumed. File formats, the CLI and everything
//! else that touches IO live in the `dropwatch` crate.
//!
//! The flow is:
//!
//! 1. [`series`]: build a uniform [`series::Series`], fit min-max
//!    normalization on the training month and split train/test by calendar
//!    month.
//! 2. [`features`]: encode timestamps (and optionally the lagged derivative)
//!    into model inputs.
//! 3. [`predictors`]: fit a constant baseline, a Fourier series (Adagrad) or a
//!    ReLU6 MLP (Adam) using the optimizers in [`optim`].
//! 4. [`detection`]: compare predictions with actual values using the
//!    accumulator rule, the Gaussian tail-probability rule and their
//!    intersection.
//! 5. [`evaluation`]: score flags against labeled regions.
//!
//! [`synthetic`] generates the sine and stepwise-sine validation streams and
//! injects simulated outages.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_op_in_unsafe_fn)]

extern crate alloc;

pub mod calendar;
pub mod detection;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod optim;
pub mod predictors;
pub mod seed;
pub mod series;
pub mod synthetic;

pub use error::{Error, Result};
