//! Window geometry, strip buffering and image-level drivers for every engine.

use std::fmt;
use std::str::FromStr;

use crate::engine::{drain_cycles, CycleInput, Engine};
use crate::ensembles::{Ensemble9753, SlidingEnsemble, CADENCE, WIDTHS_9753};
use crate::error::{Error, Result};
use crate::multichannel::{McEngine, McParams};
use crate::params::{min_counter_bits, padded_width, FilterParams, Sample};

/// Grayscale image, row-major, every pixel at most `maxval`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    maxval: u16,
    pixels: Vec<Sample>,
}

impl Image {
    pub fn new(width: usize, height: usize, maxval: u16, pixels: Vec<Sample>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::Image(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        if maxval == 0 {
            return Err(Error::Image("maxval must be at least 1".into()));
        }
        if let Some(p) = pixels.iter().find(|&&p| p > maxval) {
            return Err(Error::Image(format!("pixel {p} exceeds maxval {maxval}")));
        }
        Ok(Image {
            width,
            height,
            maxval,
            pixels,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        maxval: u16,
        mut f: impl FnMut(usize, usize) -> Sample,
    ) -> Result<Self> {
        let pixels = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Image::new(width, height, maxval, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn maxval(&self) -> u16 {
        self.maxval
    }

    pub fn pixels(&self) -> &[Sample] {
        &self.pixels
    }

    /// Sample width the engines need for this image, rounded up to even.
    pub fn data_bits(&self) -> u32 {
        let bits = 16 - self.maxval.leading_zeros();
        padded_width(bits).expect("maxval fits in 16 bits")
    }

    pub fn get(&self, x: usize, y: usize) -> Sample {
        self.pixels[y * self.width + x]
    }

    /// Pixel with coordinates clipped to the image.
    pub fn get_clamped(&self, x: isize, y: isize) -> Sample {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.get(cx, cy)
    }
}

/// Which pixels around the anchor form one data set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WindowShape {
    /// `width` columns by `height` rows.
    Rect { width: usize, height: usize },
    /// `|dx| + |dy| <= (d - 1) / 2`, odd `d`.
    Diamond(usize),
    Custom(Vec<(isize, isize)>),
}

impl WindowShape {
    pub fn rect(width: usize, height: usize) -> Self {
        WindowShape::Rect { width, height }
    }

    pub fn square(side: usize) -> Self {
        WindowShape::Rect {
            width: side,
            height: side,
        }
    }

    /// Side length when the shape is a square rectangle.
    pub fn square_side(&self) -> Option<usize> {
        match *self {
            WindowShape::Rect { width, height } if width == height => Some(width),
            _ => None,
        }
    }

    pub fn size(&self) -> Result<usize> {
        window_offsets(self).map(|o| o.len())
    }
}

impl fmt::Display for WindowShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WindowShape::Rect { width, height } => write!(f, "{width}x{height}"),
            WindowShape::Diamond(d) => write!(f, "diamond{d}"),
            WindowShape::Custom(o) => write!(f, "custom({})", o.len()),
        }
    }
}

impl FromStr for WindowShape {
    type Err = Error;

    /// Parses `WxH` or `diamondD`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let bad = || Error::Shape(format!("cannot parse window '{s}'"));
        if let Some(d) = s.strip_prefix("diamond") {
            return Ok(WindowShape::Diamond(d.trim().parse().map_err(|_| bad())?));
        }
        let (w, h) = s.split_once('x').ok_or_else(bad)?;
        Ok(WindowShape::Rect {
            width: w.trim().parse().map_err(|_| bad())?,
            height: h.trim().parse().map_err(|_| bad())?,
        })
    }
}

/// Pixel offsets of `shape` relative to its anchor, ordered by `dy` then `dx`.
///
/// Rectangles put the anchor at column `(w - 1) / 2` and row `(h - 1) / 2`.
pub fn window_offsets(shape: &WindowShape) -> Result<Vec<(isize, isize)>> {
    let offsets = match shape {
        &WindowShape::Rect { width, height } => {
            if width == 0 || height == 0 {
                return Err(Error::Shape("rectangle sides must be at least 1".into()));
            }
            let (x0, y0) = ((width as isize - 1) / 2, (height as isize - 1) / 2);
            (0..height as isize)
                .flat_map(|r| (0..width as isize).map(move |c| (c - x0, r - y0)))
                .collect()
        }
        &WindowShape::Diamond(d) => {
            if d % 2 == 0 {
                return Err(Error::Shape(format!("diamond diameter {d} must be odd")));
            }
            let r = (d as isize - 1) / 2;
            (-r..=r)
                .flat_map(|dy| (-r..=r).map(move |dx| (dx, dy)))
                .filter(|(dx, dy)| dx.abs() + dy.abs() <= r)
                .collect()
        }
        WindowShape::Custom(list) => {
            if list.is_empty() {
                return Err(Error::Shape("custom window has no offsets".into()));
            }
            let mut sorted = list.clone();
            sorted.sort_by_key(|&(dx, dy)| (dy, dx));
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Shape("custom window repeats an offset".into()));
            }
            sorted
        }
    };
    Ok(offsets)
}

/// Inclusive offset extents `(min_dx, max_dx, min_dy, max_dy)`.
fn extents(offsets: &[(isize, isize)]) -> (isize, isize, isize, isize) {
    offsets.iter().fold(
        (isize::MAX, isize::MIN, isize::MAX, isize::MIN),
        |(a, b, c, d), &(dx, dy)| (a.min(dx), b.max(dx), c.min(dy), d.max(dy)),
    )
}

/// How windows that reach past the image edge are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BorderPolicy {
    /// Replicate edge pixels; output has the input's size.
    #[default]
    Clamp,
    /// Only anchors whose window lies fully inside; output shrinks.
    ValidOnly,
}

/// Anchors whose output pixel is produced, as inclusive ranges `(x0, x1, y0, y1)`.
fn anchor_range(
    img: &Image,
    offsets: &[(isize, isize)],
    border: BorderPolicy,
) -> Result<(isize, isize, isize, isize)> {
    let (w, h) = (img.width as isize, img.height as isize);
    if w == 0 || h == 0 {
        return Err(Error::Image("image has no pixels".into()));
    }
    let r = match border {
        BorderPolicy::Clamp => (0, w - 1, 0, h - 1),
        BorderPolicy::ValidOnly => {
            let (a, b, c, d) = extents(offsets);
            (-a, w - 1 - b, -c, h - 1 - d)
        }
    };
    if r.0 > r.1 || r.2 > r.3 {
        return Err(Error::Shape(format!(
            "window does not fit a {}x{} image",
            img.width, img.height
        )));
    }
    Ok(r)
}

/// Row buffers over a horizontal strip, read one column per clock.
#[derive(Debug, Clone)]
pub struct StripBuffer {
    rows: Vec<Vec<Sample>>,
    top: isize,
}

impl StripBuffer {
    /// Buffers image rows `top .. top + rows`. Under [`BorderPolicy::Clamp`]
    /// rows outside the image replicate the nearest edge row.
    pub fn load(img: &Image, top: isize, rows: usize, border: BorderPolicy) -> Result<Self> {
        if rows == 0 || img.width == 0 || img.height == 0 {
            return Err(Error::Image("empty strip".into()));
        }
        let inside = top >= 0 && top as usize + rows <= img.height;
        if border == BorderPolicy::ValidOnly && !inside {
            return Err(Error::Image(format!(
                "strip rows {top}..{} outside a {}-row image",
                top + rows as isize,
                img.height
            )));
        }
        let rows = (0..rows as isize)
            .map(|r| {
                let y = (top + r).clamp(0, img.height as isize - 1) as usize;
                img.pixels[y * img.width..(y + 1) * img.width].to_vec()
            })
            .collect();
        Ok(StripBuffer { rows, top })
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.rows[0].len()
    }

    pub fn top(&self) -> isize {
        self.top
    }

    /// One sample per row at column `x`, clipped to the strip.
    pub fn column(&self, x: isize) -> Vec<Sample> {
        let cx = x.clamp(0, self.width() as isize - 1) as usize;
        self.rows.iter().map(|r| r[cx]).collect()
    }

    /// Columns left to right. `Clamp` adds `pad` replicated columns on each
    /// side; `ValidOnly` yields the image columns only.
    pub fn feed(&self, border: BorderPolicy, pad: usize) -> impl Iterator<Item = Vec<Sample>> + '_ {
        let pad = match border {
            BorderPolicy::Clamp => pad as isize,
            BorderPolicy::ValidOnly => 0,
        };
        (-pad..self.width() as isize + pad).map(move |x| self.column(x))
    }
}

/// Top rows of the strips a `rows`-high window needs, one per anchor row.
pub fn strip_tops(height: usize, rows: usize, border: BorderPolicy) -> Result<Vec<isize>> {
    if rows == 0 || rows > height && border == BorderPolicy::ValidOnly {
        return Err(Error::Image(format!(
            "a {rows}-row strip does not fit a {height}-row image"
        )));
    }
    let half = (rows as isize - 1) / 2;
    Ok(match border {
        BorderPolicy::Clamp => (0..height as isize).map(|y| y - half).collect(),
        BorderPolicy::ValidOnly => (0..=(height - rows) as isize).collect(),
    })
}

/// Column stream for the strip starting at `top`.
pub fn strip_feed(
    img: &Image,
    top: isize,
    rows: usize,
    border: BorderPolicy,
    pad: usize,
) -> Result<Vec<Vec<Sample>>> {
    let buf = StripBuffer::load(img, top, rows, border)?;
    Ok(buf.feed(border, pad).collect())
}

/// `M = ceil(p N)`, clamped to `1..=N`.
pub fn percentile_to_rank(p: f64, n: usize) -> Result<usize> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Percentile(p));
    }
    if n == 0 {
        return Err(Error::Config("set size must be at least 1".into()));
    }
    // Guard products such as 0.3 * 10 landing a hair above an integer.
    let m = (p * n as f64 - 1e-9).ceil() as usize;
    Ok(m.clamp(1, n))
}

/// Frames per second when every output pixel costs `cycles_per_pixel` clocks.
pub fn frame_rate(freq_hz: f64, width: usize, height: usize, cycles_per_pixel: f64) -> f64 {
    freq_hz / (width as f64 * height as f64 * cycles_per_pixel)
}

/// Which engine drives an image filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EngineChoice {
    /// One sample per clock, offsets streamed from the window lookup table.
    #[default]
    Single,
    /// One window column per clock; rectangles whose height is the channel count.
    MultiChannel,
    /// One result per clock; odd squares.
    Sliding,
    /// Concentric 9/7/5/3 chains; squares of side 3, 5, 7 or 9.
    Ensemble9753,
}

impl EngineChoice {
    /// Steady-state clocks per output pixel for `shape`.
    pub fn cycles_per_result(&self, shape: &WindowShape) -> Result<usize> {
        let n = shape.size()?;
        Ok(match (self, shape) {
            (EngineChoice::Single, _) => n,
            (EngineChoice::MultiChannel, WindowShape::Rect { width, .. }) => *width,
            (EngineChoice::Sliding, _) => 1,
            (EngineChoice::Ensemble9753, _) => CADENCE,
            (EngineChoice::MultiChannel, _) => {
                return Err(Error::Shape(
                    "multi-channel engine needs a rectangular window".into(),
                ))
            }
        })
    }
}

impl fmt::Display for EngineChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EngineChoice::Single => "single",
            EngineChoice::MultiChannel => "multichannel",
            EngineChoice::Sliding => "sliding",
            EngineChoice::Ensemble9753 => "9753",
        })
    }
}

impl FromStr for EngineChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "single" => Ok(EngineChoice::Single),
            "multichannel" | "multi" => Ok(EngineChoice::MultiChannel),
            "sliding" => Ok(EngineChoice::Sliding),
            "9753" => Ok(EngineChoice::Ensemble9753),
            other => Err(Error::Config(format!("unknown engine '{other}'"))),
        }
    }
}

/// Whether independent row bands run on the rayon pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential when built without the `parallel` feature.
    #[default]
    Parallel,
}

/// Datapath sizing for image filtering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterOptions {
    /// `None` picks the narrowest width of at least 8 bits that cannot overflow.
    pub counter_bits: Option<u32>,
    pub pipe_latency: usize,
    pub execution: Execution,
    /// Output rows per independently simulated band.
    pub band_rows: usize,
}

impl Default for FilterOptions {
    fn default() -> Self {
        FilterOptions {
            counter_bits: None,
            pipe_latency: crate::params::DEFAULT_PIPE_LATENCY,
            execution: Execution::default(),
            band_rows: 16,
        }
    }
}

/// Filtered image plus the simulated clock count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterOutcome {
    pub image: Image,
    pub set_size: usize,
    pub rank: usize,
    /// Clocks summed over all bands, drain included.
    pub cycles: u64,
    pub bands: usize,
}

/// Replaces each anchor pixel with the `rank`-th largest pixel of its window.
pub fn filter_image(
    img: &Image,
    shape: &WindowShape,
    rank: usize,
    engine: EngineChoice,
    border: BorderPolicy,
) -> Result<Image> {
    filter_image_with(img, shape, rank, engine, border, &FilterOptions::default()).map(|o| o.image)
}

pub fn filter_image_with(
    img: &Image,
    shape: &WindowShape,
    rank: usize,
    engine: EngineChoice,
    border: BorderPolicy,
    opts: &FilterOptions,
) -> Result<FilterOutcome> {
    let offsets = window_offsets(shape)?;
    let n = offsets.len();
    if rank == 0 || rank > n {
        return Err(Error::RankOutOfRange { rank, size: n });
    }
    let (ax0, ax1, ay0, ay1) = anchor_range(img, &offsets, border)?;
    let counter_bits = opts
        .counter_bits
        .unwrap_or_else(|| min_counter_bits(n, rank, crate::params::DEFAULT_COUNTER_BITS));
    let params = FilterParams::new(1, 1)?
        .with_counter_bits(counter_bits)?
        .with_data_bits(img.data_bits())?
        .with_pipe_latency(opts.pipe_latency)?
        .with_set(n, rank)?;

    let job = Job {
        img,
        offsets: &offsets,
        params,
        anchors_x: (ax0, ax1),
    };
    match engine {
        EngineChoice::Single => {}
        EngineChoice::MultiChannel => {
            if !matches!(shape, WindowShape::Rect { .. }) {
                return Err(Error::Shape(format!(
                    "multi-channel engine needs a rectangle, got {shape}"
                )));
            }
        }
        EngineChoice::Sliding => {
            if !shape.square_side().is_some_and(|w| w % 2 == 1) {
                return Err(Error::Shape(format!(
                    "sliding engine needs an odd square window, got {shape}"
                )));
            }
        }
        EngineChoice::Ensemble9753 => {
            if !shape.square_side().is_some_and(|w| WIDTHS_9753.contains(&w)) {
                return Err(Error::Shape(format!(
                    "9753 engine needs a 3x3, 5x5, 7x7 or 9x9 window, got {shape}"
                )));
            }
        }
    }

    let band_rows = opts.band_rows.max(1) as isize;
    let bands: Vec<(isize, isize)> = (ay0..=ay1)
        .step_by(band_rows as usize)
        .map(|y| (y, (y + band_rows - 1).min(ay1)))
        .collect();
    let run = |&(y0, y1): &(isize, isize)| -> Result<(Vec<Sample>, u64)> {
        match engine {
            EngineChoice::Single => job.single(y0, y1),
            EngineChoice::MultiChannel => job.multichannel(y0, y1),
            EngineChoice::Sliding => job.sliding(y0, y1),
            EngineChoice::Ensemble9753 => job.ensemble9753(y0, y1),
        }
    };
    let results = map_bands(&bands, opts.execution, run)?;

    let mut pixels = Vec::with_capacity(((ax1 - ax0 + 1) * (ay1 - ay0 + 1)) as usize);
    let mut cycles = 0;
    for (band, c) in results {
        pixels.extend(band);
        cycles += c;
    }
    let image = Image::new(
        (ax1 - ax0 + 1) as usize,
        (ay1 - ay0 + 1) as usize,
        img.maxval,
        pixels,
    )?;
    Ok(FilterOutcome {
        image,
        set_size: n,
        rank,
        cycles,
        bands: bands.len(),
    })
}

fn map_bands<F>(
    bands: &[(isize, isize)],
    execution: Execution,
    run: F,
) -> Result<Vec<(Vec<Sample>, u64)>>
where
    F: Fn(&(isize, isize)) -> Result<(Vec<Sample>, u64)> + Sync + Send,
{
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            bands.par_iter().map(run).collect()
        }
        _ => bands.iter().map(run).collect(),
    }
}

struct Job<'a> {
    img: &'a Image,
    offsets: &'a [(isize, isize)],
    params: FilterParams,
    anchors_x: (isize, isize),
}

impl Job<'_> {
    fn xs(&self) -> std::ops::RangeInclusive<isize> {
        self.anchors_x.0..=self.anchors_x.1
    }

    fn single(&self, y0: isize, y1: isize) -> Result<(Vec<Sample>, u64)> {
        let mut engine = Engine::new(self.params)?;
        let mut out = Vec::new();
        let mut cycles = 0u64;
        let mut clock = |input: CycleInput, out: &mut Vec<Sample>| -> Result<()> {
            let o = engine.clock(input)?;
            cycles += 1;
            if o.dv {
                out.push(o.result);
            }
            Ok(())
        };
        for y in y0..=y1 {
            for x in self.xs() {
                for (i, &(dx, dy)) in self.offsets.iter().enumerate() {
                    let din = self.img.get_clamped(x + dx, y + dy);
                    clock(CycleInput { din, d1st: i == 0 }, &mut out)?;
                }
            }
        }
        for _ in 0..drain_cycles(&self.params) {
            clock(CycleInput::default(), &mut out)?;
        }
        Ok((out, cycles))
    }

    fn multichannel(&self, y0: isize, y1: isize) -> Result<(Vec<Sample>, u64)> {
        let (x_lo, x_hi, y_lo, y_hi) = extents(self.offsets);
        let (cols, rows) = ((x_hi - x_lo + 1) as usize, (y_hi - y_lo + 1) as usize);
        let mc = McParams::with_filter(rows, cols, self.params)?;
        let mut engine = McEngine::new(mc)?;
        let mut out = Vec::new();
        let mut cycles = 0u64;
        for y in y0..=y1 {
            let strip = StripBuffer::load(self.img, y + y_lo, rows, BorderPolicy::Clamp)?;
            for x in self.xs() {
                for dx in x_lo..=x_hi {
                    let o = engine.clock(&strip.column(x + dx), dx == x_lo)?;
                    cycles += 1;
                    if o.dv {
                        out.push(o.result);
                    }
                }
            }
        }
        let idle = vec![0; rows];
        for _ in 0..mc.drain_cycles() {
            let o = engine.clock(&idle, false)?;
            cycles += 1;
            if o.dv {
                out.push(o.result);
            }
        }
        Ok((out, cycles))
    }

    fn sliding(&self, y0: isize, y1: isize) -> Result<(Vec<Sample>, u64)> {
        let (x_lo, x_hi, y_lo, _) = extents(self.offsets);
        let w = (x_hi - x_lo + 1) as usize;
        let mut out = Vec::new();
        let mut cycles = 0u64;
        for y in y0..=y1 {
            let strip = StripBuffer::load(self.img, y + y_lo, w, BorderPolicy::Clamp)?;
            let columns: Vec<Vec<Sample>> = (self.anchors_x.0 + x_lo..=self.anchors_x.1 + x_hi)
                .map(|x| strip.column(x))
                .collect();
            let mut ens = SlidingEnsemble::with_filter(w, self.params)?;
            out.extend(crate::ensembles::run_sliding(&mut ens, &columns)?);
            cycles += (columns.len() + ens.drain_cycles()) as u64;
        }
        Ok((out, cycles))
    }

    fn ensemble9753(&self, y0: isize, y1: isize) -> Result<(Vec<Sample>, u64)> {
        let (x_lo, x_hi, ..) = extents(self.offsets);
        let w = (x_hi - x_lo + 1) as usize;
        let chain = WIDTHS_9753.iter().position(|&c| c == w).expect("validated width");
        let mut ranks = [41, 25, 13, 5];
        ranks[chain] = self.params.rank();
        let bits = WIDTHS_9753
            .iter()
            .zip(ranks)
            .map(|(&c, m)| min_counter_bits(CADENCE * c, m, 2))
            .max()
            .unwrap_or(2)
            .max(self.params.counter_bits());
        let base = FilterParams::new(1, 1)?
            .with_counter_bits(bits)?
            .with_data_bits(self.params.data_bits())?
            .with_pipe_latency(self.params.pipe_latency())?;
        let mut ens = Ensemble9753::with_base(base, ranks)?;
        let half = (CADENCE as isize - 1) / 2;
        let mut out = Vec::new();
        let mut cycles = 0u64;
        for y in y0..=y1 {
            let strip = StripBuffer::load(self.img, y - half, CADENCE, BorderPolicy::Clamp)?;
            for x in self.xs() {
                for dx in -half..=half {
                    let o = ens.clock(&strip.column(x + dx), dx == -half)?;
                    cycles += 1;
                    out.extend(o.medians().map(|r| r[chain]));
                }
            }
        }
        let idle = vec![0; CADENCE];
        for _ in 0..ens.drain_cycles() {
            let o = ens.clock(&idle, false)?;
            cycles += 1;
            out.extend(o.medians().map(|r| r[chain]));
        }
        Ok((out, cycles))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_shape_sizes() {
        let n = |s: &str| s.parse::<WindowShape>().unwrap().size().unwrap();
        assert_eq!(n("3x3"), 9);
        assert_eq!(n("5x5"), 25);
        assert_eq!(n("3x5"), 15);
        assert_eq!(n("3x7"), 21);
        assert_eq!(n("diamond5"), 13);
        assert_eq!(n("diamond7"), 25);
    }

    #[test]
    fn offsets_are_row_major() {
        let o = window_offsets(&WindowShape::rect(3, 2)).unwrap();
        assert_eq!(o, vec![(-1, 0), (0, 0), (1, 0), (-1, 1), (0, 1), (1, 1)]);
        let d = window_offsets(&WindowShape::Diamond(3)).unwrap();
        assert_eq!(d, vec![(0, -1), (-1, 0), (0, 0), (1, 0), (0, 1)]);
    }

    #[test]
    fn shape_errors() {
        assert!(window_offsets(&WindowShape::Diamond(4)).is_err());
        assert!(window_offsets(&WindowShape::Custom(vec![])).is_err());
        assert!(window_offsets(&WindowShape::Custom(vec![(0, 0), (0, 0)])).is_err());
        assert!("5by5".parse::<WindowShape>().is_err());
        let c = WindowShape::Custom(vec![(1, 0), (0, 0), (0, -1)]);
        assert_eq!(window_offsets(&c).unwrap(), vec![(0, -1), (0, 0), (1, 0)]);
    }

    #[test]
    fn percentile_ranks() {
        assert_eq!(percentile_to_rank(0.5, 25).unwrap(), 13);
        assert_eq!(percentile_to_rank(0.5, 81).unwrap(), 41);
        assert_eq!(percentile_to_rank(0.5, 99).unwrap(), 50);
        assert_eq!(percentile_to_rank(0.3, 10).unwrap(), 3);
        assert_eq!(percentile_to_rank(1.0, 9).unwrap(), 9);
        assert_eq!(percentile_to_rank(1e-6, 9).unwrap(), 1);
        assert!(percentile_to_rank(0.0, 9).is_err());
        assert!(percentile_to_rank(1.5, 9).is_err());
        assert!(percentile_to_rank(f64::NAN, 9).is_err());
    }

    #[test]
    fn strip_examples() {
        let img = Image::from_fn(4, 9, 255, |x, y| (10 * y + x) as Sample).unwrap();
        let cols = strip_feed(&img, 0, 9, BorderPolicy::ValidOnly, 0).unwrap();
        assert_eq!(cols.len(), 4);
        assert_eq!(cols[2], (0..9).map(|y| 10 * y + 2).collect::<Vec<Sample>>());

        let tiny = Image::from_fn(2, 1, 255, |x, _| x as Sample + 1).unwrap();
        let cols = strip_feed(&tiny, 0, 1, BorderPolicy::Clamp, 2).unwrap();
        assert_eq!(cols, vec![vec![1], vec![1], vec![1], vec![2], vec![2], vec![2]]);

        assert_eq!(strip_tops(11, 9, BorderPolicy::ValidOnly).unwrap(), vec![0, 1, 2]);
        assert!(strip_feed(&img, 1, 9, BorderPolicy::ValidOnly, 0).is_err());
        assert_eq!(strip_tops(3, 3, BorderPolicy::Clamp).unwrap(), vec![-1, 0, 1]);
    }

    #[test]
    fn data_bits_from_maxval() {
        let img = |m| Image::new(1, 1, m, vec![0]).unwrap().data_bits();
        assert_eq!(img(255), 8);
        assert_eq!(img(1023), 10);
        assert_eq!(img(511), 10);
        assert_eq!(img(1), 2);
        assert_eq!(img(65535), 16);
    }

    #[test]
    fn frame_rates() {
        let fps = |n: usize| frame_rate(275e6, 1024, 768, n as f64);
        assert!((fps(25) - 13.987).abs() < 1e-3);
        assert!((fps(9) - 38.853).abs() < 1e-3);
    }

    #[test]
    fn engine_requirements() {
        let img = Image::from_fn(8, 8, 255, |x, y| (x * y) as Sample).unwrap();
        let run = |shape: WindowShape, e| filter_image(&img, &shape, 1, e, BorderPolicy::Clamp);
        assert!(run(WindowShape::Diamond(3), EngineChoice::MultiChannel).is_err());
        assert!(run(WindowShape::rect(3, 5), EngineChoice::Sliding).is_err());
        assert!(run(WindowShape::square(4), EngineChoice::Sliding).is_err());
        assert!(run(WindowShape::square(11), EngineChoice::Ensemble9753).is_err());
        assert!(filter_image(&img, &WindowShape::square(3), 10, EngineChoice::Single, BorderPolicy::Clamp).is_err());
        let big = WindowShape::square(9);
        assert!(filter_image(&img, &big, 1, EngineChoice::Single, BorderPolicy::ValidOnly).is_err());
    }

    #[test]
    fn constant_image_is_fixed_point() {
        let img = Image::from_fn(12, 7, 255, |_, _| 77).unwrap();
        for (shape, engine) in [
            (WindowShape::square(3), EngineChoice::Single),
            (WindowShape::rect(5, 3), EngineChoice::MultiChannel),
            (WindowShape::square(5), EngineChoice::Sliding),
            (WindowShape::square(7), EngineChoice::Ensemble9753),
        ] {
            let out = filter_image(&img, &shape, 2, engine, BorderPolicy::Clamp).unwrap();
            assert_eq!(out, img, "{engine} {shape}");
        }
    }

    #[test]
    fn valid_only_shrinks() {
        let img = Image::from_fn(10, 6, 255, |x, _| x as Sample).unwrap();
        let out = filter_image(&img, &WindowShape::rect(3, 5), 1, EngineChoice::Single, BorderPolicy::ValidOnly)
            .unwrap();
        assert_eq!((out.width(), out.height()), (8, 2));
        // Max of columns x-1..=x+1 is x+1.
        assert_eq!(out.pixels()[..8], [2, 3, 4, 5, 6, 7, 8, 9]);
    }
}
