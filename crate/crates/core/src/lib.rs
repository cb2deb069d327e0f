pub mod depth;
pub mod error;
pub mod models;
pub mod pairwise;
pub mod perm;
pub mod sample;
pub mod trimming;
pub mod aggregation;
pub mod inference;
pub mod io;
pub mod cli;
