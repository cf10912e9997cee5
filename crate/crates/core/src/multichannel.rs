//! Column-parallel engine: K samples per clock, accumulators take multi-unit
//! increments.

use crate::engine::{
    boundaries, clock_chain, with_cycle, DataPipe, IncrementMode, PartialMedian,
    StageConfig, StageState,
};
use crate::error::{Error, Result};
use crate::params::{FilterParams, Sample};

/// Number of asserted inputs of a 3-in-2-out encoder.
pub fn encode3(b2: bool, b1: bool, b0: bool) -> u8 {
    b2 as u8 + b1 as u8 + b0 as u8
}

/// Per-boundary counts `(inc3, inc2, inc1)` of samples in `col` reaching each
/// boundary of `pm`.
///
/// For each boundary the comparison bits are grouped in channel order into
/// triples (the last one zero padded), each triple is encoded to a 2-bit
/// count and the counts are summed. With nine channels that is three encoders
/// and one three-input adder per boundary.
pub fn mc_incgen(col: &[Sample], pm: PartialMedian, data_bits: u32) -> Result<(u32, u32, u32)> {
    let (b1, b2, b3) = boundaries(pm, data_bits)?;
    let count = |boundary: u32| -> u32 {
        col.chunks(3)
            .map(|t| {
                let bit = |i: usize| t.get(i).is_some_and(|&x| u32::from(x) >= boundary);
                u32::from(encode3(bit(0), bit(1), bit(2)))
            })
            .sum()
    };
    Ok((count(b3), count(b2), count(b1)))
}

/// Configuration of a K-channel engine: windows of `channels` rows by
/// `columns` clocks, selecting rank `M` of `N = K * Cw` samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McParams {
    channels: usize,
    columns: usize,
    filter: FilterParams,
}

impl McParams {
    pub fn new(channels: usize, columns: usize, rank: usize) -> Result<Self> {
        McParams::with_filter(channels, columns, FilterParams::new(channels * columns, rank)?)
    }

    /// Uses `filter` for everything but requires its set size to be `K * Cw`.
    pub fn with_filter(channels: usize, columns: usize, filter: FilterParams) -> Result<Self> {
        if channels == 0 || columns == 0 {
            return Err(Error::Config("channels and columns must be at least 1".into()));
        }
        if filter.set_size() != channels * columns {
            return Err(Error::Config(format!(
                "set size {} is not {channels} channels x {columns} columns",
                filter.set_size()
            )));
        }
        Ok(McParams {
            channels,
            columns,
            filter,
        })
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn filter(&self) -> &FilterParams {
        &self.filter
    }

    pub(crate) fn stage_config(&self) -> StageConfig {
        StageConfig {
            set_cycles: self.columns,
            mode: IncrementMode::EncoderTree,
            ..StageConfig::single(&self.filter)
        }
    }

    /// Idle clocks after the last column that flush the final window.
    pub fn drain_cycles(&self) -> usize {
        let f = &self.filter;
        (f.stages() - 1) * (self.columns + f.pipe_latency()) + f.pipe_latency()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct McSlot {
    column: Vec<Sample>,
    d1st: bool,
}

/// One clock of multi-channel output; `dout` carries all K delayed channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McCycleOutput {
    pub dv: bool,
    pub dout: Vec<Sample>,
    pub result: Sample,
}

/// K-channel stage chain with a column-wide data pipe.
#[derive(Debug, Clone)]
pub struct McEngine {
    params: McParams,
    stages: Vec<StageState>,
    pipe: DataPipe<McSlot>,
    result: Sample,
    cycle: u64,
}

impl McEngine {
    pub fn new(params: McParams) -> Result<Self> {
        let config = params.stage_config();
        let f = params.filter;
        let stages = (0..f.stages())
            .map(|_| StageState::new(config))
            .collect::<Result<Vec<_>>>()?;
        let idle = McSlot {
            column: vec![0; params.channels],
            d1st: false,
        };
        Ok(McEngine {
            pipe: DataPipe::new(f.stages(), params.columns + f.pipe_latency(), idle),
            params,
            stages,
            result: 0,
            cycle: 0,
        })
    }

    pub fn params(&self) -> &McParams {
        &self.params
    }

    pub fn latency(&self) -> usize {
        self.pipe.len() - 1
    }

    pub fn comparisons(&self) -> u64 {
        self.stages.iter().map(StageState::comparisons).sum()
    }

    pub fn stages(&self) -> &[StageState] {
        &self.stages
    }

    pub fn clock(&mut self, column: &[Sample], d1st: bool) -> Result<McCycleOutput> {
        if column.len() != self.params.channels {
            return Err(Error::ColumnWidth {
                got: column.len(),
                expected: self.params.channels,
            });
        }
        for &x in column {
            self.params.filter.check_sample(x.into())?;
        }
        self.pipe.push(McSlot {
            column: column.to_vec(),
            d1st,
        });
        let delay = self.pipe.depth();
        let pipe = &self.pipe;
        let emitted = clock_chain(&mut self.stages, |s| {
            let slot = pipe.tap(s * delay);
            (slot.column.as_slice(), slot.d1st, true)
        })
        .map_err(|e| with_cycle(e, self.cycle))?;
        if let Some(pm) = emitted {
            self.result = pm.prefix() as Sample;
        }
        self.cycle += 1;
        Ok(McCycleOutput {
            dv: emitted.is_some(),
            dout: self.pipe.tap(self.latency()).column.clone(),
            result: self.result,
        })
    }
}

/// Streams whole windows (each `Cw` columns of `K` samples) back to back and
/// returns one selection per window.
pub fn run_columns(params: McParams, columns: &[Vec<Sample>]) -> Result<Vec<Sample>> {
    let cw = params.columns;
    if !columns.len().is_multiple_of(cw) {
        return Err(Error::StreamLength {
            len: columns.len(),
            set_size: cw,
        });
    }
    let mut engine = McEngine::new(params)?;
    let mut results = Vec::with_capacity(columns.len() / cw);
    for (i, col) in columns.iter().enumerate() {
        let out = engine.clock(col, i % cw == 0)?;
        if out.dv {
            results.push(out.result);
        }
    }
    let idle = vec![0; params.channels];
    for _ in 0..params.drain_cycles() {
        let out = engine.clock(&idle, false)?;
        if out.dv {
            results.push(out.result);
        }
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encoder_counts() {
        assert_eq!(encode3(false, false, false), 0);
        assert_eq!(encode3(true, false, true), 2);
        assert_eq!(encode3(true, true, true), 3);
    }

    #[test]
    fn mc_incgen_examples() {
        let root = PartialMedian::ROOT;
        assert_eq!(mc_incgen(&[255; 9], root, 8).unwrap(), (9, 9, 9));
        let col = [0, 64, 128, 192, 0, 0, 0, 0, 0];
        assert_eq!(mc_incgen(&col, root, 8).unwrap(), (1, 2, 3));
        let pm = PartialMedian::new(128, 2, 8).unwrap();
        assert_eq!(mc_incgen(&[100, 150, 200], pm, 8).unwrap(), (1, 1, 2));
    }

    #[test]
    fn mc_incgen_pads_partial_triples() {
        let col = [200, 200, 200, 200];
        assert_eq!(mc_incgen(&col, PartialMedian::ROOT, 8).unwrap(), (4, 4, 4));
        assert_eq!(mc_incgen(&[7], PartialMedian::ROOT, 8).unwrap(), (0, 0, 0));
    }

    #[test]
    fn params_validation() {
        assert!(McParams::new(9, 11, 31).is_ok());
        assert!(McParams::new(9, 11, 100).is_err());
        assert!(McParams::new(0, 11, 1).is_err());
        let f = FilterParams::new(10, 5).unwrap();
        assert!(McParams::with_filter(3, 3, f).is_err());
        assert_eq!(McParams::new(9, 11, 50).unwrap().drain_cycles(), 3 * 16 + 5);
    }

    #[test]
    fn column_width_checked() {
        let mut e = McEngine::new(McParams::new(3, 3, 5).unwrap()).unwrap();
        assert_eq!(
            e.clock(&[1, 2], true).unwrap_err(),
            Error::ColumnWidth { got: 2, expected: 3 }
        );
    }

    #[test]
    fn window_median() {
        let p = McParams::new(3, 3, 5).unwrap();
        let cols = vec![vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]];
        assert_eq!(run_columns(p, &cols).unwrap(), vec![5]);
    }

    #[test]
    fn mid_window_marker_is_framing_error() {
        let mut e = McEngine::new(McParams::new(2, 3, 1).unwrap()).unwrap();
        e.clock(&[1, 1], true).unwrap();
        assert!(matches!(
            e.clock(&[1, 1], true),
            Err(Error::Framing { cycle: 1, position: 1 })
        ));
    }
}
