//! Ensembles of multi-channel stage chains sharing one data pipe.
//!
//! [`SlidingEnsemble`] staggers W chains by one clock each so a W x W window
//! result matures every clock. [`Ensemble9753`] runs 9-, 7-, 5- and
//! 3-channel chains over one 9-clock cadence and yields four concentric
//! window results per cadence.

use crate::engine::{clock_chain, with_cycle, DataPipe, IncrementMode, StageConfig, StageState};
use crate::error::{Error, Result};
use crate::params::{FilterParams, Sample};

#[derive(Debug, Clone, Default)]
struct SlidingSlot {
    column: Vec<Sample>,
    /// Bit `j` is the first-column marker as seen by chain `j`.
    markers: u32,
}

/// A matured sliding-window result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlidingOutput {
    /// Column index, relative to the first marker, where the window starts.
    pub start: u64,
    pub chain: usize,
    pub result: Sample,
}

/// W chains of W-channel stages over one shared data pipe.
///
/// The external marker pulses on the first column of chain 0's windows, one
/// pulse every W columns. Chain `j` sees the marker `j` clocks later, so it
/// interprets the same column stream as windows starting at `j, j + W, ...`.
#[derive(Debug, Clone)]
pub struct SlidingEnsemble {
    width: usize,
    filter: FilterParams,
    chains: Vec<Vec<StageState>>,
    pipe: DataPipe<SlidingSlot>,
    markers: u32,
    anchor: Option<u64>,
    cycle: u64,
    #[cfg(test)]
    observed: Vec<Vec<Vec<Sample>>>,
}

impl SlidingEnsemble {
    /// W x W windows, rank `M` of `W^2`, default datapath sizing.
    pub fn new(width: usize, rank: usize) -> Result<Self> {
        SlidingEnsemble::with_filter(width, FilterParams::new(width * width, rank)?)
    }

    pub fn with_filter(width: usize, filter: FilterParams) -> Result<Self> {
        if width == 0 || width.is_multiple_of(2) || width > 31 {
            return Err(Error::Config(format!(
                "sliding window side {width} must be odd and at most 31"
            )));
        }
        if filter.set_size() != width * width {
            return Err(Error::Config(format!(
                "set size {} does not match a {width}x{width} window",
                filter.set_size()
            )));
        }
        let config = StageConfig {
            set_cycles: width,
            mode: IncrementMode::EncoderTree,
            ..StageConfig::single(&filter)
        };
        let chain = (0..filter.stages())
            .map(|_| StageState::new(config))
            .collect::<Result<Vec<_>>>()?;
        let idle = SlidingSlot {
            column: vec![0; width],
            markers: 0,
        };
        Ok(SlidingEnsemble {
            width,
            filter,
            chains: vec![chain; width],
            pipe: DataPipe::new(filter.stages(), width + filter.pipe_latency(), idle),
            markers: 0,
            anchor: None,
            cycle: 0,
            #[cfg(test)]
            observed: vec![vec![Vec::new(); filter.stages()]; width],
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn filter(&self) -> &FilterParams {
        &self.filter
    }

    /// Clocks from a window's first column to its result.
    pub fn latency(&self) -> usize {
        self.pipe.len() - 1
    }

    /// Idle clocks after the last column of a strip until the window ending
    /// on that column matures.
    pub fn drain_cycles(&self) -> usize {
        self.latency() + 1 - self.width
    }

    pub fn comparisons(&self) -> u64 {
        self.chains.iter().flatten().map(StageState::comparisons).sum()
    }

    /// No window in flight. A marker arriving now starts a fresh cadence.
    pub fn is_idle(&self) -> bool {
        self.markers == 0 && self.chains.iter().flatten().all(StageState::is_idle)
    }

    /// Advances one column. Returns the window that matured on this clock.
    pub fn clock(&mut self, column: &[Sample], d1st: bool) -> Result<Option<SlidingOutput>> {
        if column.len() != self.width {
            return Err(Error::ColumnWidth {
                got: column.len(),
                expected: self.width,
            });
        }
        for &x in column {
            self.filter.check_sample(x.into())?;
        }
        if d1st {
            match self.anchor {
                _ if self.is_idle() => self.anchor = Some(self.cycle),
                None => unreachable!("an unanchored ensemble is idle"),
                Some(a) => {
                    let position = ((self.cycle - a) % self.width as u64) as usize;
                    if position != 0 {
                        return Err(Error::Framing {
                            cycle: self.cycle,
                            position,
                        });
                    }
                }
            }
        }
        let mask = if self.width == 32 {
            u32::MAX
        } else {
            (1u32 << self.width) - 1
        };
        self.markers = ((self.markers << 1) | d1st as u32) & mask;
        self.pipe.push(SlidingSlot {
            column: column.to_vec(),
            markers: self.markers,
        });

        let delay = self.pipe.depth();
        let latency = self.latency() as u64;
        let pipe = &self.pipe;
        let mut matured = None;
        for (j, chain) in self.chains.iter_mut().enumerate() {
            #[cfg(test)]
            let observed = &mut self.observed[j];
            let emitted = clock_chain(chain, |s| {
                let slot = pipe.tap(s * delay);
                #[cfg(test)]
                observed[s].clone_from(&slot.column);
                (slot.column.as_slice(), (slot.markers >> j) & 1 == 1, true)
            })
            .map_err(|e| with_cycle(e, self.cycle))?;
            if let Some(pm) = emitted {
                // Chains are staggered by distinct offsets modulo W.
                debug_assert!(matured.is_none());
                let anchor = self.anchor.unwrap_or(0);
                matured = Some(SlidingOutput {
                    start: self.cycle - latency - anchor,
                    chain: j,
                    result: pm.prefix() as Sample,
                });
            }
        }
        self.cycle += 1;
        Ok(matured)
    }
}

/// Streams a strip of W-row columns through `ens` and returns the result for
/// every window that lies fully inside the strip, in start order.
///
/// Returns as soon as the last such window matures. Windows the other chains
/// opened past the strip end are still in flight; clock idle columns until
/// [`SlidingEnsemble::is_idle`] before reusing the ensemble.
pub fn run_sliding(ens: &mut SlidingEnsemble, columns: &[Vec<Sample>]) -> Result<Vec<Sample>> {
    let w = ens.width();
    if columns.len() < w {
        return Ok(Vec::new());
    }
    let windows = columns.len() - w + 1;
    let mut out = vec![0; windows];
    let mut seen = 0;
    let idle = vec![0; w];
    let feed = columns
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_slice(), i % w == 0 && i < windows))
        .chain(std::iter::repeat_n((idle.as_slice(), false), ens.drain_cycles()));
    for (col, d1st) in feed {
        if let Some(r) = ens.clock(col, d1st)? {
            if let Some(slot) = out.get_mut(r.start as usize) {
                *slot = r.result;
                seen += 1;
            }
        }
    }
    debug_assert_eq!(seen, windows);
    Ok(out)
}

/// Channel counts of the four concentric chains.
pub const WIDTHS_9753: [usize; 4] = [9, 7, 5, 3];
/// Clocks per window position.
pub const CADENCE: usize = 9;

/// Whether the `w`-channel chain counts the column at `phase` of the cadence.
///
/// Active phases are the middle `w` of nine.
pub fn enable_schedule(w: usize, phase: usize) -> bool {
    phase < CADENCE && phase.abs_diff(4) <= w.saturating_sub(1) / 2
}

/// Column enables for the 7-, 5- and 3-channel chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Enables {
    pub en7: bool,
    pub en5: bool,
    pub en3: bool,
}

impl Enables {
    pub fn for_phase(phase: usize) -> Self {
        Enables {
            en7: enable_schedule(7, phase),
            en5: enable_schedule(5, phase),
            en3: enable_schedule(3, phase),
        }
    }

    pub const ALL: Enables = Enables {
        en7: true,
        en5: true,
        en3: true,
    };

    fn per_chain(&self) -> [bool; 4] {
        [true, self.en7, self.en5, self.en3]
    }
}

#[derive(Debug, Clone, Default)]
struct Slot9753 {
    column: Vec<Sample>,
    d1st: bool,
    enables: [bool; 4],
}

/// One clock of the 9753 ensemble.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle9753 {
    pub dv: bool,
    pub dout: Vec<Sample>,
    /// Results of the 9-, 7-, 5- and 3-channel chains; valid when `dv`.
    pub results: [Sample; 4],
    /// Enables applied to this clock's input column.
    pub enables: Enables,
}

impl Cycle9753 {
    pub fn medians(&self) -> Option<[Sample; 4]> {
        self.dv.then_some(self.results)
    }
}

/// 9-, 7-, 5- and 3-channel chains over one 9-row data pipe.
///
/// The `w`-channel chain reads the centered `w` rows of each column and
/// counts only the columns its enable admits, so with the default schedule
/// it selects over the centered `w x w` sub-window. Enables may also be
/// supplied per clock to build `w x 9` and other rectangles.
#[derive(Debug, Clone)]
pub struct Ensemble9753 {
    ranks: [usize; 4],
    data_bits: u32,
    chains: Vec<Vec<StageState>>,
    pipe: DataPipe<Slot9753>,
    anchor: Option<u64>,
    results: [Sample; 4],
    cycle: u64,
}

impl Ensemble9753 {
    /// Median of each concentric window: ranks 41, 25, 13 and 5.
    pub fn medians() -> Result<Self> {
        Ensemble9753::new([41, 25, 13, 5])
    }

    pub fn new(ranks: [usize; 4]) -> Result<Self> {
        Ensemble9753::with_base(FilterParams::new(81, 41)?, ranks)
    }

    /// Takes data width, counter width and latency from `base`.
    ///
    /// Each chain is validated for the largest set it can see, `9 w` samples
    /// with every column enabled.
    pub fn with_base(base: FilterParams, ranks: [usize; 4]) -> Result<Self> {
        let mut chains = Vec::with_capacity(4);
        for (&w, &rank) in WIDTHS_9753.iter().zip(&ranks) {
            let p = base.with_set(CADENCE * w, rank)?;
            let config = StageConfig {
                set_cycles: CADENCE,
                mode: IncrementMode::EncoderTree,
                ..StageConfig::single(&p)
            };
            chains.push(
                (0..p.stages())
                    .map(|_| StageState::new(config))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        let idle = Slot9753 {
            column: vec![0; CADENCE],
            ..Default::default()
        };
        Ok(Ensemble9753 {
            ranks,
            data_bits: base.data_bits(),
            chains,
            pipe: DataPipe::new(base.stages(), CADENCE + base.pipe_latency(), idle),
            anchor: None,
            results: [0; 4],
            cycle: 0,
        })
    }

    pub fn ranks(&self) -> [usize; 4] {
        self.ranks
    }

    pub fn latency(&self) -> usize {
        self.pipe.len() - 1
    }

    pub fn drain_cycles(&self) -> usize {
        self.latency() + 1 - CADENCE
    }

    /// No window in flight. A marker arriving now starts a fresh cadence.
    pub fn is_idle(&self) -> bool {
        self.chains.iter().flatten().all(StageState::is_idle)
    }

    /// Cadence phase of the next clock, once the first marker has been seen.
    pub fn phase(&self) -> Option<usize> {
        self.anchor
            .map(|a| ((self.cycle - a) % CADENCE as u64) as usize)
    }

    /// Clocks one column with enables generated from the cadence phase.
    pub fn clock(&mut self, column: &[Sample], d1st: bool) -> Result<Cycle9753> {
        let phase = if d1st { Some(0) } else { self.phase() };
        let enables = phase.map(Enables::for_phase).unwrap_or_default();
        self.clock_with_enables(column, d1st, enables)
    }

    /// Clocks one column with externally supplied enables.
    pub fn clock_with_enables(
        &mut self,
        column: &[Sample],
        d1st: bool,
        enables: Enables,
    ) -> Result<Cycle9753> {
        if column.len() != CADENCE {
            return Err(Error::ColumnWidth {
                got: column.len(),
                expected: CADENCE,
            });
        }
        let max = (1u32 << self.data_bits) - 1;
        if let Some(&x) = column.iter().find(|&&x| u32::from(x) > max) {
            return Err(Error::SampleOutOfRange {
                value: x.into(),
                bits: self.data_bits,
            });
        }
        if d1st {
            match self.phase() {
                _ if self.is_idle() => self.anchor = Some(self.cycle),
                None => unreachable!("an unanchored ensemble is idle"),
                Some(0) => {}
                Some(position) => {
                    return Err(Error::Framing {
                        cycle: self.cycle,
                        position,
                    })
                }
            }
        }
        self.pipe.push(Slot9753 {
            column: column.to_vec(),
            d1st,
            enables: enables.per_chain(),
        });

        let delay = self.pipe.depth();
        let pipe = &self.pipe;
        let mut emitted = [None; 4];
        for (k, chain) in self.chains.iter_mut().enumerate() {
            let w = WIDTHS_9753[k];
            let top = (CADENCE - w) / 2;
            emitted[k] = clock_chain(chain, |s| {
                let slot = pipe.tap(s * delay);
                (&slot.column[top..top + w], slot.d1st, slot.enables[k])
            })
            .map_err(|e| with_cycle(e, self.cycle))?;
        }
        debug_assert!(emitted.iter().all(|e| e.is_some() == emitted[0].is_some()));
        for (r, e) in self.results.iter_mut().zip(emitted) {
            if let Some(pm) = e {
                *r = pm.prefix() as Sample;
            }
        }
        self.cycle += 1;
        Ok(Cycle9753 {
            dv: emitted[0].is_some(),
            dout: self.pipe.tap(self.latency()).column.clone(),
            results: self.results,
            enables,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_examples() {
        assert!(!enable_schedule(7, 0));
        assert!(enable_schedule(7, 1));
        assert!(enable_schedule(7, 7));
        assert!(!enable_schedule(7, 8));
        assert!(enable_schedule(3, 4));
        assert!(enable_schedule(5, 2));
        assert!(!enable_schedule(5, 7));
        for phase in 0..9 {
            assert!(enable_schedule(9, phase));
        }
        let active = |w| (0..9).filter(|&p| enable_schedule(w, p)).count();
        assert_eq!((active(7), active(5), active(3)), (7, 5, 3));
    }

    #[test]
    fn sliding_constant_strip() {
        let mut e = SlidingEnsemble::new(3, 5).unwrap();
        let cols = vec![vec![42; 3]; 20];
        assert_eq!(run_sliding(&mut e, &cols).unwrap(), vec![42; 18]);
    }

    #[test]
    fn sliding_rejects_even_width() {
        assert!(SlidingEnsemble::new(4, 8).is_err());
    }

    #[test]
    fn sliding_marker_off_cadence() {
        let mut e = SlidingEnsemble::new(3, 5).unwrap();
        e.clock(&[0; 3], true).unwrap();
        e.clock(&[0; 3], false).unwrap();
        assert!(matches!(
            e.clock(&[0; 3], true),
            Err(Error::Framing { cycle: 2, position: 2 })
        ));
    }

    #[test]
    fn chains_share_pipe_data() {
        let mut e = SlidingEnsemble::new(5, 13).unwrap();
        for t in 0..200u16 {
            let col: Vec<Sample> = (0..5).map(|r| (t * 7 + r * 31) % 256).collect();
            e.clock(&col, t % 5 == 0 && t < 100).unwrap();
            for s in 0..e.filter().stages() {
                let first = &e.observed[0][s];
                assert!(e.observed.iter().all(|c| &c[s] == first));
            }
        }
    }

    #[test]
    fn ensemble_9753_constant() {
        let mut e = Ensemble9753::medians().unwrap();
        let mut got = Vec::new();
        for t in 0..(9 + e.drain_cycles()) {
            let out = e.clock(&[99; 9], t == 0).unwrap();
            got.extend(out.medians());
        }
        assert_eq!(got, vec![[99; 4]]);
    }

    #[test]
    fn ensemble_9753_cadence_break() {
        let mut e = Ensemble9753::medians().unwrap();
        e.clock(&[0; 9], true).unwrap();
        assert!(matches!(
            e.clock(&[0; 9], true),
            Err(Error::Framing { position: 1, .. })
        ));
    }
}
