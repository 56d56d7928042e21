use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `max(3, floor(log2 m))`.
pub fn default_level_count(m: usize) -> usize {
    let log = if m > 1 { usize::BITS as usize - 1 - m.leading_zeros() as usize } else { 0 };
    log.max(3)
}

/// Groups details into `level_count` artificial levels by quantiles of their
/// scales. `scales` is in removal order; equal scales keep removal order, so
/// earlier removals land in finer levels. Level `0` is the finest.
pub fn assign_artificial_levels<T: Scalar>(scales: &[T], level_count: usize) -> Result<Vec<usize>> {
    if level_count < 3 {
        return Err(Error::InvalidConfig(format!("{level_count} levels; need at least 3")));
    }
    let n = scales.len();
    if level_count > n {
        return Err(Error::InvalidConfig(format!("{level_count} levels for {n} details")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scales[a].partial_cmp(&scales[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut levels = vec![0; n];
    for (rank, &i) in order.iter().enumerate() {
        levels[i] = rank * level_count / n;
    }
    Ok(levels)
}
