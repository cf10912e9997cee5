use super::stage::clock_chain;
use super::{DataPipe, StageConfig, StageState};
use crate::error::{Error, Result};
use crate::params::{FilterParams, Sample};

/// One clock of input: a sample and whether it starts a set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CycleInput {
    pub din: Sample,
    pub d1st: bool,
}

/// One clock of output.
///
/// `result` holds the last completed selection and is only meaningful on a
/// `dv` clock. `dout` is the raw input delayed so that the first sample of a
/// set leaves on the same clock as that set's result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CycleOutput {
    pub dv: bool,
    pub dout: Sample,
    pub result: Sample,
}

/// The clocked chain of `B/2` stages and their data pipes.
///
/// Stage `s` (0-based) sees the input stream `s * (N + L)` clocks late, which
/// is the earliest point where stage `s - 1` has emitted its partial median
/// for the same set. Results therefore leave `B/2 * (N + L) - 1` clocks after
/// a set's first sample, one set every `N` clocks when sets arrive
/// back to back.
#[derive(Debug, Clone)]
pub struct Engine {
    params: FilterParams,
    stages: Vec<StageState>,
    pipe: DataPipe<CycleInput>,
    result: Sample,
    cycle: u64,
}

impl Engine {
    pub fn new(params: FilterParams) -> Result<Self> {
        let config = StageConfig::single(&params);
        let stages = (0..params.stages())
            .map(|_| StageState::new(config))
            .collect::<Result<Vec<_>>>()?;
        let depth = params.set_size() + params.pipe_latency();
        Ok(Engine {
            pipe: DataPipe::new(params.stages(), depth, CycleInput::default()),
            params,
            stages,
            result: 0,
            cycle: 0,
        })
    }

    pub fn params(&self) -> &FilterParams {
        &self.params
    }

    /// Per-pipe delay `N + L`.
    pub fn pipe_delay(&self) -> usize {
        self.pipe.depth()
    }

    /// Clocks from a set's first sample to its `dv` pulse.
    pub fn latency(&self) -> usize {
        self.pipe.len() - 1
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn stages(&self) -> &[StageState] {
        &self.stages
    }

    /// Boundary comparisons performed so far, summed over all stages.
    pub fn comparisons(&self) -> u64 {
        self.stages.iter().map(StageState::comparisons).sum()
    }

    /// True when no set is in flight anywhere in the chain.
    pub fn is_idle(&self) -> bool {
        self.stages.iter().all(StageState::is_idle) && !self.pipe.iter().any(|s| s.d1st)
    }

    /// Changes set size, rank or any other parameter between sets.
    pub fn reconfigure(&mut self, params: FilterParams) -> Result<()> {
        if !self.is_idle() {
            return Err(Error::Busy);
        }
        let cycle = self.cycle;
        *self = Engine::new(params)?;
        self.cycle = cycle;
        Ok(())
    }

    pub fn clock(&mut self, input: CycleInput) -> Result<CycleOutput> {
        let din = self.params.check_sample(input.din.into())?;
        self.pipe.push(CycleInput { din, ..input });
        let delay = self.pipe.depth();
        let pipe = &self.pipe;
        let emitted = clock_chain(&mut self.stages, |s| {
            let slot = pipe.tap(s * delay);
            (std::slice::from_ref(&slot.din), slot.d1st, true)
        })
        .map_err(|e| with_cycle(e, self.cycle))?;
        let dv = emitted.is_some();
        if let Some(pm) = emitted {
            self.result = pm.prefix() as Sample;
        }
        let out = *self.pipe.tap(self.latency());
        debug_assert_eq!(out.d1st, dv);
        self.cycle += 1;
        Ok(CycleOutput {
            dv,
            dout: out.din,
            result: self.result,
        })
    }

    /// Convenience wrapper for `clock(CycleInput { din, d1st })`.
    pub fn clock_sample(&mut self, din: Sample, d1st: bool) -> Result<CycleOutput> {
        self.clock(CycleInput { din, d1st })
    }
}

/// Restamps a stage framing error with the engine-level clock count.
pub(crate) fn with_cycle(e: Error, cycle: u64) -> Error {
    match e {
        Error::Framing { position, .. } => Error::Framing { cycle, position },
        e => e,
    }
}

/// Idle clocks needed after the last sample to flush the final result.
pub fn drain_cycles(params: &FilterParams) -> usize {
    (params.stages() - 1) * (params.set_size() + params.pipe_latency()) + params.pipe_latency()
}

/// Frames `data` into back-to-back sets of `N`, clocks them through a fresh
/// engine and returns the `M`-th largest value of each set.
pub fn run_stream(params: FilterParams, data: &[Sample]) -> Result<Vec<Sample>> {
    let n = params.set_size();
    if !data.len().is_multiple_of(n) {
        return Err(Error::StreamLength {
            len: data.len(),
            set_size: n,
        });
    }
    let mut engine = Engine::new(params)?;
    let mut results = Vec::with_capacity(data.len() / n);
    let inputs = data
        .iter()
        .enumerate()
        .map(|(i, &din)| CycleInput {
            din,
            d1st: i % n == 0,
        })
        .chain(std::iter::repeat_n(CycleInput::default(), drain_cycles(&params)));
    for input in inputs {
        let out = engine.clock(input)?;
        if out.dv {
            results.push(out.result);
        }
    }
    debug_assert_eq!(results.len(), data.len() / n);
    Ok(results)
}

/// Exact number of boundary comparisons for `num_sets` sets: `3 N (B/2)` each.
pub fn comparison_count(params: &FilterParams, num_sets: usize) -> u64 {
    3 * params.set_size() as u64 * params.stages() as u64 * num_sets as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_stream_examples() {
        let set = [3, 1, 4, 1, 5, 9, 2, 6, 5];
        let p = FilterParams::new(9, 5).unwrap();
        assert_eq!(run_stream(p, &set).unwrap(), vec![4]);
        assert_eq!(run_stream(p.with_rank(1).unwrap(), &set).unwrap(), vec![9]);
        assert_eq!(run_stream(p.with_rank(9).unwrap(), &set).unwrap(), vec![1]);
    }

    #[test]
    fn ramp_median() {
        let data: Vec<Sample> = (0..25).collect();
        let p = FilterParams::new(25, 13).unwrap();
        assert_eq!(run_stream(p, &data).unwrap(), vec![12]);
    }

    #[test]
    fn constant_set() {
        let p = FilterParams::new(7, 3).unwrap();
        assert_eq!(run_stream(p, &[77; 7]).unwrap(), vec![77]);
    }

    #[test]
    fn stream_must_be_whole_sets() {
        let p = FilterParams::new(3, 2).unwrap();
        assert_eq!(
            run_stream(p, &[1, 2, 3, 4]),
            Err(Error::StreamLength { len: 4, set_size: 3 })
        );
        assert_eq!(run_stream(p, &[]).unwrap(), Vec::<Sample>::new());
    }

    #[test]
    fn sample_width_enforced() {
        let p = FilterParams::new(1, 1).unwrap().with_data_bits(4).unwrap();
        assert!(matches!(
            run_stream(p, &[16]),
            Err(Error::SampleOutOfRange { value: 16, bits: 4 })
        ));
    }

    #[test]
    fn latency_and_drain_match() {
        let p = FilterParams::new(25, 13).unwrap();
        let e = Engine::new(p).unwrap();
        assert_eq!(e.latency(), 3 * (25 + 5) + 5 + 25 - 1);
        assert_eq!(drain_cycles(&p), 3 * 30 + 5);
    }

    #[test]
    fn comparison_count_examples() {
        assert_eq!(comparison_count(&FilterParams::new(25, 13).unwrap(), 1), 300);
        let tiny = FilterParams::new(1, 1).unwrap().with_data_bits(2).unwrap();
        assert_eq!(comparison_count(&tiny, 1), 3);
        assert_eq!(comparison_count(&FilterParams::new(9, 5).unwrap(), 2), 216);
    }

    #[test]
    fn framing_error_reports_cycle() {
        let mut e = Engine::new(FilterParams::new(4, 2).unwrap()).unwrap();
        e.clock_sample(1, true).unwrap();
        e.clock_sample(1, false).unwrap();
        assert_eq!(
            e.clock_sample(1, true),
            Err(Error::Framing { cycle: 2, position: 2 })
        );
    }

    #[test]
    fn reconfigure_only_when_idle() {
        let p = FilterParams::new(3, 2).unwrap();
        let mut e = Engine::new(p).unwrap();
        e.clock_sample(5, true).unwrap();
        assert_eq!(e.reconfigure(p.with_rank(1).unwrap()), Err(Error::Busy));
        for _ in 0..(e.latency() + 1) {
            e.clock_sample(0, false).unwrap();
        }
        assert!(e.is_idle());
        e.reconfigure(FilterParams::new(5, 1).unwrap()).unwrap();
        assert_eq!(e.pipe_delay(), 10);
    }
}
