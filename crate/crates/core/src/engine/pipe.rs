/// Chain of equal-depth circular buffers sharing one pair of address counters.
///
/// The buffers are laid end to end in one ring: tap `d` returns the slot
/// written `d` clocks ago, so the input of pipe `k` is tap `k * depth`. An
/// extra output tap of `depth - 1` past the last stage aligns raw data with
/// the final result.
#[derive(Debug, Clone)]
pub struct DataPipe<T> {
    ring: Vec<T>,
    depth: usize,
    write: usize,
}

impl<T: Clone> DataPipe<T> {
    /// `pipes` buffers of `depth` slots each, filled with `idle`.
    pub fn new(pipes: usize, depth: usize, idle: T) -> Self {
        let len = (pipes * depth).max(1);
        DataPipe {
            ring: vec![idle; len],
            depth,
            write: 0,
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Total delay the ring can provide.
    pub fn len(&self) -> usize {
        self.ring.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ring.is_empty()
    }

    /// Writes this clock's input; it becomes tap 0.
    pub fn push(&mut self, slot: T) {
        self.write = (self.write + 1) % self.ring.len();
        self.ring[self.write] = slot;
    }

    /// Slot written `delay` clocks ago.
    pub fn tap(&self, delay: usize) -> &T {
        debug_assert!(delay < self.ring.len());
        let n = self.ring.len();
        &self.ring[(self.write + n - delay % n) % n]
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.ring.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taps_delay_by_distance() {
        let mut p = DataPipe::new(3, 4, -1i32);
        for t in 0..20 {
            p.push(t);
            assert_eq!(*p.tap(0), t);
            let d8 = if t >= 8 { t - 8 } else { -1 };
            assert_eq!(*p.tap(8), d8);
            let d11 = if t >= 11 { t - 11 } else { -1 };
            assert_eq!(*p.tap(11), d11);
        }
    }
}
