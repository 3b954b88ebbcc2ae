//! Distributive merge of scaled-integer partial aggregates, shared by the fact
//! builder and the cube.

use thiserror::Error;

use crate::design::Aggregation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("arithmetic overflow")]
pub struct Overflow;

/// A partial aggregate. `None` is SQL NULL: the identity for SUM, MIN and MAX.
pub type Cell = Option<i64>;

/// Merges two partial values of a column whose combine function is `agg`.
/// COUNT partials are summed.
pub fn merge(agg: Aggregation, a: Cell, b: Cell) -> Result<Cell, Overflow> {
    Ok(match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(match agg {
            Aggregation::Sum | Aggregation::Count | Aggregation::Avg => x.checked_add(y).ok_or(Overflow)?,
            Aggregation::Min => x.min(y),
            Aggregation::Max => x.max(y),
        }),
    })
}

/// `sum / count` rescaled by 10^`extra`, rounded half away from zero.
pub fn average(sum: Cell, count: Cell, extra: u8) -> Result<Cell, Overflow> {
    let (Some(sum), Some(count)) = (sum, count) else { return Ok(None) };
    if count == 0 {
        return Ok(None);
    }
    let num = sum as i128 * 10i128.pow(extra as u32);
    let den = count as i128;
    let q = num / den;
    let r = num % den;
    let q = if 2 * r.abs() >= den.abs() { q + num.signum() * den.signum() } else { q };
    i64::try_from(q).map(Some).map_err(|_| Overflow)
}
