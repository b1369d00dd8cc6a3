use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rank out of range: {rank} > {total}")]
    RankOutOfRange { rank: usize, total: usize },

    #[error("combined input length overflows the index type ({m} + {n})")]
    SizeOverflow { m: usize, n: usize },

    #[error("length mismatch: output holds {actual} elements, expected {expected}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("worker count must be at least 1")]
    ZeroWorkers,

    #[error("worker id {worker} out of range for {workers} workers")]
    WorkerOutOfRange { worker: usize, workers: usize },

    #[error("input {input} is not sorted at position {position}")]
    Unsorted { input: String, position: usize },

    #[error("unknown distribution `{0}`")]
    UnknownDistribution(String),

    #[error("repetitions must be at least 1")]
    ZeroRepetitions,

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] io::Error),
}
