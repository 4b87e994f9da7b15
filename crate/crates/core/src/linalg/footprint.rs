//! Per-thread accounting of live matrix storage.
//!
//! Every [`DenseMatrix`](super::DenseMatrix) and
//! [`ComplexMatrix`](super::ComplexMatrix) registers its payload here on
//! construction and releases it on drop, so a caller can bracket a
//! computation with [`reset_peak`] / [`peak_bytes`] and read off the largest
//! simultaneous matrix footprint it produced on the current thread.

use std::cell::Cell;

thread_local! {
    static LIVE: Cell<usize> = const { Cell::new(0) };
    static PEAK: Cell<usize> = const { Cell::new(0) };
}

pub(crate) fn acquire(bytes: usize) {
    LIVE.with(|live| {
        let now = live.get() + bytes;
        live.set(now);
        PEAK.with(|peak| {
            if now > peak.get() {
                peak.set(now);
            }
        });
    });
}

pub(crate) fn release(bytes: usize) {
    LIVE.with(|live| live.set(live.get().saturating_sub(bytes)));
}

/// Bytes of matrix storage currently alive on this thread.
pub fn live_bytes() -> usize {
    LIVE.with(Cell::get)
}

/// Highest value of [`live_bytes`] since the last [`reset_peak`].
pub fn peak_bytes() -> usize {
    PEAK.with(Cell::get)
}

/// Resets the peak to the current live footprint.
pub fn reset_peak() {
    let now = live_bytes();
    PEAK.with(|peak| peak.set(now));
}
