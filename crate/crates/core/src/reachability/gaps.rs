use crate::renewal::RenewalTrain;

/// Whether some subinterval `[x, x + g)` of `[t1, t2]` holds no renewal mark.
pub fn detect_gap(train: &RenewalTrain, t1: f64, t2: f64, g: f64) -> bool {
    if t2 - t1 < g {
        return false;
    }
    let mut prev = t1;
    for &m in train.marks_in(t1, t2) {
        if m - prev >= g {
            return true;
        }
        prev = m;
    }
    t2 - prev >= g
}

/// First odd block index `2i + 1` at which the timeline has no mark in `[2iB, (2i+1)B)`.
///
/// Only blocks ending by `max_end` are inspected.
pub fn first_odd_gap(train: &RenewalTrain, block: f64, max_end: f64) -> Option<u64> {
    let mut i = 0u64;
    loop {
        let lo = 2.0 * i as f64 * block;
        let hi = lo + block;
        if hi > max_end {
            return None;
        }
        match train.first_mark_at_or_after(lo) {
            Some(m) if m < hi => {}
            _ => return Some(2 * i + 1),
        }
        i += 1;
    }
}

/// Block length `2^{n−k}` and number of sites `⌊2^{nβ}⌋ + 1` of the stopping index at scale `n`.
pub fn stopping_geometry(n: u32, k: u32, beta: f64) -> (f64, usize) {
    let block = 2f64.powi(n as i32 - k as i32);
    let width = 2f64.powf(n as f64 * beta).floor() as usize;
    (block, width + 1)
}

/// `T_n`: the least odd block index at which some timeline among `trains` has
/// its next mark at or beyond the block's end. `None` if no such block ends
/// inside the trains' common horizon.
pub fn stopping_index(trains: &[RenewalTrain], n: u32, k: u32) -> Option<u64> {
    let block = 2f64.powi(n as i32 - k as i32);
    let max_end = trains
        .iter()
        .map(|t| t.horizon)
        .fold(f64::INFINITY, f64::min);
    trains
        .iter()
        .filter_map(|t| first_odd_gap(t, block, max_end))
        .min()
}
