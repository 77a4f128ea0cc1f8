//! Train GloVe word vectors from raw review corpora and measure stereotypic
//! association bias between target and attribute word sets.

pub mod cooccur;
pub mod corpus;
mod error;
pub mod glove;
pub mod numfmt;
pub mod report;
pub mod stats;
pub mod vectors;
pub mod weat;
pub mod wordlists;

pub use error::{Error, Result};

/// Environment variable that overrides the default worker count.
pub const THREADS_ENV: &str = "EMBIAS_THREADS";

/// Worker count from `EMBIAS_THREADS` when set to a positive integer,
/// otherwise the machine's available parallelism.
pub fn default_threads() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}
