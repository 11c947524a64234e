//! File formats, end-to-end pipeline and command-line front end for
//! [`dropwatch_core`].
//!
//! | file          | module        | layout                                             |
//! |---------------|---------------|----------------------------------------------------|
//! | series        | [`csv`]       | `timestamp,value` per line                         |
//! | labels        | [`labels`]    | `start_index,end_index` per line, inclusive        |
//! | flags         | [`flags`]     | header + one row per detected point                |
//! | model         | [`model_file`]| little-endian binary, see the module docs          |
//! | run config    | [`config`]    | flat `key = value`                                 |
//! | report        | [`report`]    | JSON                                               |
//! | plot          | [`plot`]      | SVG 1.1                                            |

pub mod config;
pub mod csv;
mod error;
pub mod flags;
pub mod labels;
pub mod model_file;
pub mod pipeline;
pub mod plot;
pub mod report;

pub use error::{Error, Result};
