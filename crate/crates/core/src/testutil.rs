//! Shared fixtures for unit tests.

use crate::coeff::{CoefficientSequence, FrameSlot};
use crate::index::{Bounds, WaveletIndex, ROOT};

/// The worked three-node sequence used throughout the tests: squared masses
/// p=0: generator 1, root 1, (1,0) 0.25, (1,1) 0.25;
/// p=1: generator 0.5, root 0.5, (1,0) 0.1, (1,1) 0.1.
pub(crate) fn worked_sequence() -> CoefficientSequence {
    let wi = |j, k| WaveletIndex::new(j, k).unwrap();
    let mut seq = CoefficientSequence::new(Bounds::new(6, 3).unwrap());
    let entries: [(FrameSlot, f64); 8] = [
        (FrameSlot::generator(0), 1.0),
        (FrameSlot::quarklet(0, ROOT), 1.0),
        (FrameSlot::quarklet(0, wi(1, 0)), 0.25),
        (FrameSlot::quarklet(0, wi(1, 1)), 0.25),
        (FrameSlot::generator(1), 0.5),
        (FrameSlot::quarklet(1, ROOT), 0.5),
        (FrameSlot::quarklet(1, wi(1, 0)), 0.1),
        (FrameSlot::quarklet(1, wi(1, 1)), 0.1),
    ];
    for (slot, sq) in entries {
        seq.set(slot, sq.sqrt()).unwrap();
    }
    seq
}
