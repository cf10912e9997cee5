//! Static configuration of a single-channel percentile engine.

use crate::error::{Error, Result};

/// One data point. Only the low `data_bits` bits may be set.
pub type Sample = u16;

pub const DEFAULT_DATA_BITS: u32 = 8;
pub const DEFAULT_COUNTER_BITS: u32 = 8;
pub const DEFAULT_PIPE_LATENCY: usize = 5;
pub const DEFAULT_PIPE_CAPACITY: usize = 255;
pub const MAX_DATA_BITS: u32 = 16;
pub const MAX_COUNTER_BITS: u32 = 32;

/// Engine configuration: sample width, set size, rank and datapath sizing.
///
/// `rank` counts from the top: 1 selects the maximum, `set_size` the minimum.
/// Every constructor validates, so a value of this type always describes a
/// datapath that cannot overflow its accumulators or data pipes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FilterParams {
    data_bits: u32,
    set_size: usize,
    rank: usize,
    counter_bits: u32,
    pipe_latency: usize,
    pipe_capacity: usize,
}

impl FilterParams {
    /// 8-bit samples, 8-bit counters, 5-step stage pipeline, 255-deep pipes.
    pub fn new(set_size: usize, rank: usize) -> Result<Self> {
        let p = FilterParams {
            data_bits: DEFAULT_DATA_BITS,
            set_size,
            rank,
            counter_bits: DEFAULT_COUNTER_BITS,
            pipe_latency: DEFAULT_PIPE_LATENCY,
            pipe_capacity: DEFAULT_PIPE_CAPACITY,
        };
        p.validate()?;
        Ok(p)
    }

    /// Odd widths are padded up to the next even width with zero high bits.
    pub fn with_data_bits(mut self, bits: u32) -> Result<Self> {
        self.data_bits = padded_width(bits)?;
        self.validate()?;
        Ok(self)
    }

    pub fn with_counter_bits(mut self, bits: u32) -> Result<Self> {
        self.counter_bits = bits;
        self.validate()?;
        Ok(self)
    }

    pub fn with_pipe_latency(mut self, latency: usize) -> Result<Self> {
        self.pipe_latency = latency;
        self.validate()?;
        Ok(self)
    }

    pub fn with_pipe_capacity(mut self, capacity: usize) -> Result<Self> {
        self.pipe_capacity = capacity;
        self.validate()?;
        Ok(self)
    }

    pub fn with_rank(mut self, rank: usize) -> Result<Self> {
        self.rank = rank;
        self.validate()?;
        Ok(self)
    }

    /// Same configuration with a new set size and rank.
    pub fn with_set(mut self, set_size: usize, rank: usize) -> Result<Self> {
        self.set_size = set_size;
        self.rank = rank;
        self.validate()?;
        Ok(self)
    }

    pub fn data_bits(&self) -> u32 {
        self.data_bits
    }

    pub fn set_size(&self) -> usize {
        self.set_size
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn counter_bits(&self) -> u32 {
        self.counter_bits
    }

    pub fn pipe_latency(&self) -> usize {
        self.pipe_latency
    }

    pub fn pipe_capacity(&self) -> usize {
        self.pipe_capacity
    }

    /// Number of 2-bit refinement stages in the chain.
    pub fn stages(&self) -> usize {
        (self.data_bits / 2) as usize
    }

    /// Largest representable sample value, `2^B - 1`.
    pub fn max_sample(&self) -> u32 {
        (1u32 << self.data_bits) - 1
    }

    pub fn check_sample(&self, value: u32) -> Result<Sample> {
        if value > self.max_sample() {
            return Err(Error::SampleOutOfRange {
                value,
                bits: self.data_bits,
            });
        }
        Ok(value as Sample)
    }

    fn validate(&self) -> Result<()> {
        if self.data_bits < 2 || self.data_bits > MAX_DATA_BITS || !self.data_bits.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "data width {} must be even and within 2..={MAX_DATA_BITS}",
                self.data_bits
            )));
        }
        if self.set_size == 0 {
            return Err(Error::Config("set size must be at least 1".into()));
        }
        if self.rank == 0 || self.rank > self.set_size {
            return Err(Error::RankOutOfRange {
                rank: self.rank,
                size: self.set_size,
            });
        }
        if self.pipe_latency >= self.pipe_capacity
            || self.set_size > self.pipe_capacity - self.pipe_latency
        {
            return Err(Error::Config(format!(
                "set size {} exceeds pipe capacity {} minus stage latency {}",
                self.set_size, self.pipe_capacity, self.pipe_latency
            )));
        }
        check_counter_width(self.set_size, self.rank, self.counter_bits)
    }
}

/// Rounds a source width up to the even width the stage chain uses.
pub fn padded_width(bits: u32) -> Result<u32> {
    let even = bits + bits % 2;
    if bits == 0 || even > MAX_DATA_BITS {
        return Err(Error::Config(format!(
            "data width {bits} outside 1..={MAX_DATA_BITS}"
        )));
    }
    Ok(even)
}

/// Rejects accumulator widths whose sign bit could wrap for this (N, M).
///
/// The accumulator starts at `2^(C-1) - M` and receives at most `N` unit
/// increments, so both `M <= 2^(C-1)` and `N - M <= 2^(C-1) - 1` must hold
/// for bit `C-1` to equal `count >= M`.
pub fn check_counter_width(set_size: usize, rank: usize, counter_bits: u32) -> Result<()> {
    if !(2..=MAX_COUNTER_BITS).contains(&counter_bits) {
        return Err(Error::Config(format!(
            "counter width {counter_bits} outside 2..={MAX_COUNTER_BITS}"
        )));
    }
    let half = 1u64 << (counter_bits - 1);
    let (n, m) = (set_size as u64, rank as u64);
    if m > half {
        return Err(Error::Config(format!(
            "rank {rank} exceeds {half}, the {counter_bits}-bit counter preset range"
        )));
    }
    if n.saturating_sub(m) > half - 1 {
        return Err(Error::Config(format!(
            "set size {set_size} with rank {rank} overflows a {counter_bits}-bit counter"
        )));
    }
    Ok(())
}

/// Smallest counter width, no narrower than `floor`, valid for (N, M).
pub fn min_counter_bits(set_size: usize, rank: usize, floor: u32) -> u32 {
    (floor.max(2)..=MAX_COUNTER_BITS)
        .find(|&c| check_counter_width(set_size, rank, c).is_ok())
        .unwrap_or(MAX_COUNTER_BITS)
}
