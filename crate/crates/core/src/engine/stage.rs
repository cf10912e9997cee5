use std::collections::VecDeque;

use super::{incgen, refine, PartialMedian, StageCounters};
use crate::error::{Error, Result};
use crate::multichannel::mc_incgen;
use crate::params::{FilterParams, Sample};

/// How a stage turns the samples of one clock into counter increments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IncrementMode {
    /// One comparator triple per lane, summed directly.
    Comparator,
    /// Per-boundary comparison bits grouped into 3-in-2-out encoders and an adder tree.
    EncoderTree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageConfig {
    pub data_bits: u32,
    /// Clocks from the first-sample marker to the end of a set.
    pub set_cycles: usize,
    pub rank: usize,
    pub counter_bits: u32,
    /// Internal pipeline steps between the last sample and the output.
    pub latency: usize,
    pub mode: IncrementMode,
}

impl StageConfig {
    pub fn single(params: &FilterParams) -> Self {
        StageConfig {
            data_bits: params.data_bits(),
            set_cycles: params.set_size(),
            rank: params.rank(),
            counter_bits: params.counter_bits(),
            latency: params.pipe_latency(),
            mode: IncrementMode::Comparator,
        }
    }
}

/// One 2-bit refinement stage.
///
/// The stage latches its partial median on the first-sample marker, presets
/// its accumulators, and counts every enabled clock until `set_cycles` clocks
/// have passed. The refined partial median then travels through `latency`
/// pipeline registers before it appears at the output.
#[derive(Debug, Clone)]
pub struct StageState {
    config: StageConfig,
    position: Option<usize>,
    pm: PartialMedian,
    counters: StageCounters,
    delay: VecDeque<Option<PartialMedian>>,
    output: Option<PartialMedian>,
    comparisons: u64,
    cycle: u64,
}

impl StageState {
    pub fn new(config: StageConfig) -> Result<Self> {
        if config.set_cycles == 0 {
            return Err(Error::Config("stage needs at least one clock per set".into()));
        }
        Ok(StageState {
            config,
            position: None,
            pm: PartialMedian::ROOT,
            counters: StageCounters::preset(config.rank, config.counter_bits)?,
            delay: std::iter::repeat_n(None, config.latency).collect(),
            output: None,
            comparisons: 0,
            cycle: 0,
        })
    }

    pub fn config(&self) -> &StageConfig {
        &self.config
    }

    /// Single-sample clock with the stage always enabled.
    pub fn clock(
        &mut self,
        x: Sample,
        d1st: bool,
        pm_in: PartialMedian,
    ) -> Result<Option<PartialMedian>> {
        self.clock_lanes(&[x], d1st, true, pm_in)
    }

    /// Advances one clock with `lanes` presented in parallel.
    ///
    /// `pm_in` is only sampled on the marker clock. Returns the refined
    /// partial median on the clock it leaves the stage pipeline.
    pub fn clock_lanes(
        &mut self,
        lanes: &[Sample],
        d1st: bool,
        enable: bool,
        pm_in: PartialMedian,
    ) -> Result<Option<PartialMedian>> {
        let cfg = self.config;
        if d1st {
            if let Some(position) = self.position {
                return Err(Error::Framing {
                    cycle: self.cycle,
                    position,
                });
            }
            self.pm = pm_in;
            self.counters = StageCounters::preset(cfg.rank, cfg.counter_bits)?;
            self.position = Some(0);
        }

        let mut entering = None;
        if let Some(p) = self.position {
            if enable {
                let inc = self.increments(lanes)?;
                self.counters.add(inc);
                self.comparisons += 3 * lanes.len() as u64;
            }
            if p + 1 == cfg.set_cycles {
                let (m3, m2, m1) = self.counters.msbs();
                debug_assert!((!m3 || m2) && (!m2 || m1), "counter signs out of order");
                entering = Some(self.pm.extend(refine(m3, m2, m1), cfg.data_bits)?);
                self.position = None;
            } else {
                self.position = Some(p + 1);
            }
        }

        let out = if cfg.latency == 0 {
            entering
        } else {
            self.delay.push_back(entering);
            self.delay.pop_front().flatten()
        };
        if out.is_some() {
            self.output = out;
        }
        self.cycle += 1;
        Ok(out)
    }

    fn increments(&self, lanes: &[Sample]) -> Result<[u32; 3]> {
        let b = self.config.data_bits;
        match self.config.mode {
            IncrementMode::Comparator => {
                let mut inc = [0u32; 3];
                for &x in lanes {
                    let f = incgen(x, self.pm, b)?;
                    debug_assert!(!self.pm.contains(x.into(), b) || f.is_thermometer());
                    for (acc, i) in inc.iter_mut().zip(f.increments()) {
                        *acc += i;
                    }
                }
                Ok(inc)
            }
            IncrementMode::EncoderTree => {
                let (i3, i2, i1) = mc_incgen(lanes, self.pm, b)?;
                Ok([i3, i2, i1])
            }
        }
    }

    /// Last partial median this stage emitted; the next stage reads it.
    pub fn output(&self) -> Option<PartialMedian> {
        self.output
    }

    /// Partial median latched for the set in progress.
    pub fn latched(&self) -> PartialMedian {
        self.pm
    }

    pub fn counters(&self) -> &StageCounters {
        &self.counters
    }

    /// Set position of the next sample, or `None` between sets.
    pub fn position(&self) -> Option<usize> {
        self.position
    }

    pub fn comparisons(&self) -> u64 {
        self.comparisons
    }

    /// No set in progress and nothing left in the pipeline registers.
    pub fn is_idle(&self) -> bool {
        self.position.is_none() && self.delay.iter().all(Option::is_none)
    }
}

/// Clocks a chain of stages once and returns what the last one emitted.
///
/// `tap(s)` supplies stage `s` with its lanes, marker and enable for this
/// clock. Stages are clocked last to first so each samples the output its
/// predecessor registered on an earlier clock.
pub(crate) fn clock_chain<'a, F>(stages: &mut [StageState], mut tap: F) -> Result<Option<PartialMedian>>
where
    F: FnMut(usize) -> (&'a [Sample], bool, bool),
{
    let mut last = None;
    for s in (0..stages.len()).rev() {
        let (lanes, d1st, enable) = tap(s);
        let pm_in = match s {
            0 => PartialMedian::ROOT,
            _ => stages[s - 1].output().unwrap_or(PartialMedian::ROOT),
        };
        let out = stages[s].clock_lanes(lanes, d1st, enable, pm_in)?;
        if s + 1 == stages.len() {
            last = out;
        }
    }
    Ok(last)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stage(n: usize, m: usize) -> StageState {
        let p = FilterParams::new(n, m).unwrap();
        StageState::new(StageConfig::single(&p)).unwrap()
    }

    fn feed(s: &mut StageState, data: &[Sample], pm: PartialMedian) -> Vec<(usize, PartialMedian)> {
        let mut out = Vec::new();
        for (i, &x) in data.iter().enumerate() {
            if let Some(r) = s.clock(x, i == 0, pm).unwrap() {
                out.push((i, r));
            }
        }
        for i in data.len()..data.len() + 10 {
            if let Some(r) = s.clock(0, false, pm).unwrap() {
                out.push((i, r));
            }
        }
        out
    }

    #[test]
    fn first_stage_selects_third_quarter() {
        // 25 samples, rank 13: 6 at >=192, 14 in [128,192), 5 below.
        let mut data = vec![200; 6];
        data.extend(std::iter::repeat_n(150, 14));
        data.extend(std::iter::repeat_n(20, 5));
        let mut s = stage(25, 13);
        let out = feed(&mut s, &data, PartialMedian::ROOT);
        assert_eq!(out, vec![(24 + 5, PartialMedian::new(128, 2, 8).unwrap())]);
        assert_eq!(s.counters().raw_counts(13), (6, 20, 20));
    }

    #[test]
    fn single_sample_at_floor() {
        let pm = PartialMedian::new(64, 2, 8).unwrap();
        let mut s = stage(1, 1);
        let out = feed(&mut s, &[64], pm);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].1, PartialMedian::new(64, 4, 8).unwrap());
        assert_eq!(s.counters().msbs(), (false, false, false));
    }

    #[test]
    fn latency_is_exact() {
        let p = FilterParams::new(3, 2).unwrap().with_pipe_latency(0).unwrap();
        let mut s = StageState::new(StageConfig::single(&p)).unwrap();
        let out = feed(&mut s, &[1, 2, 3], PartialMedian::ROOT);
        assert_eq!(out[0].0, 2);
    }

    #[test]
    fn marker_mid_set_is_framing_error() {
        let mut s = stage(4, 2);
        s.clock(1, true, PartialMedian::ROOT).unwrap();
        s.clock(1, false, PartialMedian::ROOT).unwrap();
        let e = s.clock(1, true, PartialMedian::ROOT).unwrap_err();
        assert_eq!(e, Error::Framing { cycle: 2, position: 2 });
    }

    #[test]
    fn back_to_back_sets_need_no_gap() {
        let mut s = stage(2, 1);
        let pm = PartialMedian::ROOT;
        let mut emitted = 0;
        for i in 0..20 {
            if s.clock(255, i % 2 == 0, pm).unwrap().is_some() {
                emitted += 1;
            }
        }
        // Sets ending after clock 13 are still in the stage pipeline.
        assert_eq!(emitted, 7);
        assert_eq!(s.comparisons(), 60);
    }
}
