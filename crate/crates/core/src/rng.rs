//! Counter-based 64-bit generator used by the random presets.
//!
//! Word `i` of stream `seed` is the SplitMix64 finalizer applied to
//! `seed + (i + 1)·0x9E3779B97F4A7C15` (wrapping). There is no hidden state,
//! so a value depends only on `(seed, counter)`. This algorithm is frozen:
//! changing it changes every random construction.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The `counter`-th word of stream `seed`.
#[inline]
pub fn word(seed: u64, counter: u64) -> u64 {
    mix64(seed.wrapping_add(GOLDEN.wrapping_mul(counter.wrapping_add(1))))
}

/// Counter for column `column` of stage `stage`.
#[inline]
pub fn stage_counter(stage: usize, column: usize) -> u64 {
    ((stage as u64) << 32) | (column as u64 & 0xFFFF_FFFF)
}

/// Uniform integer in `[0, bound]` by 64×64→128 multiply-shift.
/// Returns `None` when `bound + 1` does not fit in 64 bits.
pub fn uniform_inclusive(x: u64, bound: u128) -> Option<u128> {
    let span = bound.checked_add(1)?;
    if span > (1u128 << 64) {
        return None;
    }
    Some(((x as u128) * span) >> 64)
}
