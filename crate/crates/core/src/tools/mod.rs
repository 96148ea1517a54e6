//! The pipeline pieces behind the command-line verbs.

pub mod bench;
pub mod check;
pub mod fuzz;
pub mod idl;
pub mod rng;
pub mod serve;
