//! Single-channel quaternary-search percentile engine.
//!
//! Each stage of the chain resolves two more bits of the selected value. A
//! stage splits the surviving range into four quarters, counts how many
//! samples of the set reach each of the three interior boundaries, and picks
//! the highest quarter whose count still reaches the rank. The counts never
//! need a comparator: accumulators are preset to `2^(C-1) - M`, so their top
//! bit flips exactly when the count reaches `M`.

mod pipe;
mod stage;
mod stream;

pub use pipe::DataPipe;
pub(crate) use stage::clock_chain;
pub use stage::{IncrementMode, StageConfig, StageState};
pub(crate) use stream::with_cycle;
pub use stream::{comparison_count, drain_cycles, run_stream, CycleInput, CycleOutput, Engine};

use crate::error::{Error, Result};
use crate::params::Sample;

/// The resolved high bits of the value being searched for.
///
/// `prefix` carries the resolved bits in place with the unresolved low bits
/// zero, so the value lies in `prefix ..= prefix + 2^(B - bits_resolved) - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PartialMedian {
    prefix: u32,
    bits_resolved: u32,
}

impl PartialMedian {
    /// Nothing resolved yet: the whole sample range.
    pub const ROOT: PartialMedian = PartialMedian {
        prefix: 0,
        bits_resolved: 0,
    };

    pub fn new(prefix: u32, bits_resolved: u32, data_bits: u32) -> Result<Self> {
        if bits_resolved > data_bits || !bits_resolved.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "{bits_resolved} resolved bits is not an even count within {data_bits}"
            )));
        }
        let width = data_bits - bits_resolved;
        if prefix >= 1u32 << data_bits || prefix & low_mask(width) != 0 {
            return Err(Error::Config(format!(
                "prefix {prefix} has bits set below its {bits_resolved} resolved bits"
            )));
        }
        Ok(PartialMedian {
            prefix,
            bits_resolved,
        })
    }

    pub fn prefix(&self) -> u32 {
        self.prefix
    }

    pub fn bits_resolved(&self) -> u32 {
        self.bits_resolved
    }

    /// Inclusive value range still possible under this prefix.
    pub fn range(&self, data_bits: u32) -> (u32, u32) {
        let span = 1u32 << (data_bits - self.bits_resolved);
        (self.prefix, self.prefix + span - 1)
    }

    pub fn contains(&self, value: u32, data_bits: u32) -> bool {
        let (lo, hi) = self.range(data_bits);
        (lo..=hi).contains(&value)
    }

    /// Appends two more resolved bits chosen by [`refine`].
    pub fn extend(&self, two_bits: u8, data_bits: u32) -> Result<Self> {
        if self.bits_resolved + 2 > data_bits {
            return Err(Error::FullyResolved);
        }
        let shift = data_bits - self.bits_resolved - 2;
        Ok(PartialMedian {
            prefix: self.prefix | (u32::from(two_bits & 0b11) << shift),
            bits_resolved: self.bits_resolved + 2,
        })
    }
}

fn low_mask(bits: u32) -> u32 {
    if bits >= 32 {
        u32::MAX
    } else {
        (1u32 << bits) - 1
    }
}

/// The three interior boundaries `(b1, b2, b3)` that quarter the range of `pm`.
///
/// These are the prefix with `01`, `10` and `11` appended below it.
pub fn boundaries(pm: PartialMedian, data_bits: u32) -> Result<(u32, u32, u32)> {
    if pm.bits_resolved + 2 > data_bits {
        return Err(Error::FullyResolved);
    }
    let quarter = 1u32 << (data_bits - pm.bits_resolved - 2);
    Ok((
        pm.prefix + quarter,
        pm.prefix + 2 * quarter,
        pm.prefix + 3 * quarter,
    ))
}

/// Boundary comparison results for one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BoundaryFlags {
    pub ge3: bool,
    pub ge2: bool,
    pub ge1: bool,
}

impl BoundaryFlags {
    /// True when a set flag implies every lower one is set too.
    pub fn is_thermometer(&self) -> bool {
        (!self.ge3 || self.ge2) && (!self.ge2 || self.ge1)
    }

    pub fn increments(&self) -> [u32; 3] {
        [self.ge3 as u32, self.ge2 as u32, self.ge1 as u32]
    }
}

/// Compares a sample against the three boundaries of `pm`.
///
/// Samples outside the range of `pm` are compared as plain integers; they add
/// to all three counters or to none, which cannot move the selected quarter.
pub fn incgen(x: Sample, pm: PartialMedian, data_bits: u32) -> Result<BoundaryFlags> {
    let (b1, b2, b3) = boundaries(pm, data_bits)?;
    let x = u32::from(x);
    Ok(BoundaryFlags {
        ge3: x >= b3,
        ge2: x >= b2,
        ge1: x >= b1,
    })
}

/// Accumulator preset `2^(C-1) - M` that turns bit `C-1` into `count >= M`.
pub fn counter_preset(rank: usize, counter_bits: u32) -> Result<u64> {
    if !(2..=crate::params::MAX_COUNTER_BITS).contains(&counter_bits) {
        return Err(Error::Config(format!(
            "counter width {counter_bits} unsupported"
        )));
    }
    let half = 1u64 << (counter_bits - 1);
    if rank == 0 || rank as u64 > half {
        return Err(Error::Config(format!(
            "rank {rank} outside 1..={half} for a {counter_bits}-bit counter"
        )));
    }
    Ok(half - rank as u64)
}

/// Priority-encodes the three accumulator sign bits into the next two bits.
///
/// `msb3` wins over `msb2`, which wins over `msb1`. Consistent counters are
/// always thermometer coded; the remaining rows are don't-cares and resolve
/// by the same priority.
pub fn refine(msb3: bool, msb2: bool, msb1: bool) -> u8 {
    if msb3 {
        0b11
    } else if msb2 {
        0b10
    } else if msb1 {
        0b01
    } else {
        0b00
    }
}

/// The three preset accumulators of one stage, `C` bits wide, wrapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageCounters {
    pub qc3: u64,
    pub qc2: u64,
    pub qc1: u64,
    bits: u32,
}

impl StageCounters {
    pub fn preset(rank: usize, counter_bits: u32) -> Result<Self> {
        let p = counter_preset(rank, counter_bits)?;
        Ok(StageCounters {
            qc3: p,
            qc2: p,
            qc1: p,
            bits: counter_bits,
        })
    }

    pub fn counter_bits(&self) -> u32 {
        self.bits
    }

    fn mask(&self) -> u64 {
        if self.bits >= 64 {
            u64::MAX
        } else {
            (1u64 << self.bits) - 1
        }
    }

    /// Adds per-boundary increments `[inc3, inc2, inc1]` modulo `2^C`.
    pub fn add(&mut self, inc: [u32; 3]) {
        let m = self.mask();
        self.qc3 = self.qc3.wrapping_add(u64::from(inc[0])) & m;
        self.qc2 = self.qc2.wrapping_add(u64::from(inc[1])) & m;
        self.qc1 = self.qc1.wrapping_add(u64::from(inc[2])) & m;
    }

    /// Sign bits `(msb3, msb2, msb1)`.
    pub fn msbs(&self) -> (bool, bool, bool) {
        let top = self.bits - 1;
        (
            (self.qc3 >> top) & 1 == 1,
            (self.qc2 >> top) & 1 == 1,
            (self.qc1 >> top) & 1 == 1,
        )
    }

    /// Recovers raw counts `(count3, count2, count1)` by removing the preset.
    pub fn raw_counts(&self, rank: usize) -> (u64, u64, u64) {
        let m = self.mask();
        let p = counter_preset(rank, self.bits).unwrap_or(0);
        (
            self.qc3.wrapping_sub(p) & m,
            self.qc2.wrapping_sub(p) & m,
            self.qc1.wrapping_sub(p) & m,
        )
    }
}
