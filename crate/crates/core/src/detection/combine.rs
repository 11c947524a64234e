use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Inclusive `(start, end)` run of flagged points.
pub type Region = (usize, usize);

/// Pointwise AND.
pub fn intersect(a: &[bool], b: &[bool]) -> Result<Vec<bool>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(&x, &y)| x && y).collect())
}

/// Maximal runs of `true`.
pub fn flags_to_regions(flags: &[bool]) -> Vec<Region> {
    let mut regions = Vec::new();
    let mut start = None;
    for (i, &f) in flags.iter().enumerate() {
        match (f, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                regions.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        regions.push((s, flags.len() - 1));
    }
    regions
}
