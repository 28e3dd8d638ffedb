pub mod campaign;
pub mod commands;
pub mod error;
pub mod format;
pub mod graph;
pub mod mason;
pub mod oracles;
pub mod path_stats;
pub mod phi;
pub mod poly;
pub mod report;
pub mod resolvent;

pub use error::{Error, Result};
