// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: sample needs at least one row and one column")]
    EmptyInput,

    #[error("non-finite entry at row {row}, column {col}")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("ragged input: row {row} has {found} columns, expected {expected}")]
    Ragged {
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty segment: interval ({s}, {e}) contains no rows")]
    EmptySegment { s: usize, e: usize },

    #[error("kernel gram needs {required} bytes, budget is {budget} bytes")]
    CapacityExceeded { required: u128, budget: u128 },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("interval ({s}, {e}) too short for buffer {buffer}: need e - s > {}", 2 * buffer + 1)]
    IntervalTooShort { s: usize, e: usize, buffer: usize },

    #[error("unsatisfiable interval constraints: {0}")]
    Unsatisfiable(String),

    #[error("KS statistic needs two nonempty samples")]
    EmptySample,

    #[error("invalid p-value {0}: must lie in [0, 1]")]
    InvalidPValue(f64),

    #[error("degenerate split: eta={eta} with bracket ({left}, {right}] leaves an empty side")]
    DegenerateSplit {
        eta: usize,
        left: usize,
        right: usize,
    },

    #[error("bad dimension for scenario {scenario}: {reason}")]
    BadDimension { scenario: u8, reason: String },

    #[error("bad length T={0}: must be a positive multiple of 3")]
    BadLength(usize),

    #[error("unknown scenario {0}: expected 1..=5")]
    UnknownScenario(u8),

    #[error("cannot aggregate an empty list of results")]
    EmptyList,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
