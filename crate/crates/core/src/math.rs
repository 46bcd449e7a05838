//! Float routines that are not in `core`; backed by `libm` so results do not
//! depend on the platform math library.

pub use libm::{acos, atan2, ceil, cos, exp, floor, round, sin, sqrt};

pub const PI: f64 = core::f64::consts::PI;

#[inline]
pub fn deg(rad: f64) -> f64 {
    rad * 180.0 / PI
}

#[inline]
pub fn rad(deg: f64) -> f64 {
    deg * PI / 180.0
}

/// Nearest-rank percentile of an ascending slice (`q` in `(0, 1]`).
pub fn nearest_rank(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let rank = ceil(q * sorted.len() as f64) as usize;
    let rank = rank.clamp(1, sorted.len());
    Some(sorted[rank - 1])
}

/// Median of an unsorted slice; averages the two middle values for even length.
pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

/// One standard normal draw (Box-Muller).
pub fn standard_normal<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    sqrt(-2.0 * libm::log(u1)) * cos(2.0 * PI * u2)
}
