use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter combination the datapath cannot represent.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("rank {rank} out of range for a set of {size} samples")]
    RankOutOfRange { rank: usize, size: usize },

    #[error("sample {value} does not fit in {bits} bits")]
    SampleOutOfRange { value: u32, bits: u32 },

    /// A first-sample marker arrived while a set was still being accumulated.
    #[error("framing error at cycle {cycle}: set start marker arrived at set position {position}")]
    Framing { cycle: u64, position: usize },

    #[error("stream of {len} samples is not a whole number of {set_size}-sample sets")]
    StreamLength { len: usize, set_size: usize },

    #[error("column has {got} samples, engine expects {expected}")]
    ColumnWidth { got: usize, expected: usize },

    #[error("partial median is already fully resolved")]
    FullyResolved,

    #[error("engine is busy; parameters may only change between sets")]
    Busy,

    #[error("percentile {0} outside (0, 1]")]
    Percentile(f64),

    #[error("invalid window shape: {0}")]
    Shape(String),

    #[error("invalid image: {0}")]
    Image(String),

    #[error("PGM format error: {0}")]
    Pgm(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
