//! Sort-based reference selection. Deliberately naive: every equivalence
//! check in the crate is measured against these functions.

use crate::error::{Error, Result};
use crate::imaging::{window_offsets, BorderPolicy, Image, WindowShape};
use crate::params::Sample;

/// Element `M - 1` of `data` sorted in descending order.
pub fn select_desc(data: &[Sample], rank: usize) -> Result<Sample> {
    if rank == 0 || rank > data.len() {
        return Err(Error::RankOutOfRange {
            rank,
            size: data.len(),
        });
    }
    let mut sorted = data.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    Ok(sorted[rank - 1])
}

/// Reference image filter: gathers each window and sorts it.
pub fn filter_image_oracle(
    img: &Image,
    shape: &WindowShape,
    rank: usize,
    border: BorderPolicy,
) -> Result<Image> {
    let offsets = window_offsets(shape)?;
    if rank == 0 || rank > offsets.len() {
        return Err(Error::RankOutOfRange {
            rank,
            size: offsets.len(),
        });
    }
    let (w, h) = (img.width() as isize, img.height() as isize);
    let inside = |x: isize, y: isize| {
        offsets
            .iter()
            .all(|&(dx, dy)| (0..w).contains(&(x + dx)) && (0..h).contains(&(y + dy)))
    };
    let mut out = Vec::new();
    let (mut ow, mut oh) = (0, 0);
    for y in 0..h {
        let mut row = 0;
        for x in 0..w {
            if border == BorderPolicy::ValidOnly && !inside(x, y) {
                continue;
            }
            let window: Vec<Sample> = offsets
                .iter()
                .map(|&(dx, dy)| img.get_clamped(x + dx, y + dy))
                .collect();
            out.push(select_desc(&window, rank)?);
            row += 1;
        }
        if row > 0 {
            ow = row;
            oh += 1;
        }
    }
    if out.is_empty() {
        return Err(Error::Shape(format!(
            "window does not fit a {w}x{h} image"
        )));
    }
    Image::new(ow, oh, img.maxval(), out)
}
