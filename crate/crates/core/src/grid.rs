use crate::error::{invalid, Result};

/// `count` evenly spaced points from `start` to `stop`, both included.
pub fn linspace(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if !start.is_finite() || !stop.is_finite() {
        return Err(invalid("grid bounds must be finite"));
    }
    match count {
        0 => Err(invalid("grid needs at least one point")),
        1 if start == stop => Ok(vec![start]),
        1 => Err(invalid("a one-point grid needs start == stop")),
        _ => {
            let span = stop - start;
            let last = (count - 1) as f64;
            Ok((0..count).map(|i| if i + 1 == count { stop } else { start + span * (i as f64 / last) }).collect())
        }
    }
}
