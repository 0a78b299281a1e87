use crate::error::Result;

/// Outcome of a search for the supremum of `{x ∈ [lo, hi] : pred(x)}`,
/// assuming that set is an interval starting at `lo`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    /// Largest point where the predicate was verified.
    pub last_true: f64,
    /// Smallest point where it was verified false (`hi` when capped).
    pub first_false: f64,
    /// The predicate held at the upper end of the search interval.
    pub capped: bool,
    pub evaluations: usize,
}

impl Bracket {
    pub fn width(&self) -> f64 {
        self.first_false - self.last_true
    }
}

/// Bisection on a monotone (true-then-false) predicate. Returns `Ok(None)`
/// when the predicate already fails at `lo`.
pub fn last_true<F>(lo: f64, hi: f64, width: f64, mut pred: F) -> Result<Option<Bracket>>
where
    F: FnMut(f64) -> Result<bool>,
{
    let mut evaluations = 1;
    if !pred(lo)? {
        return Ok(None);
    }
    evaluations += 1;
    if pred(hi)? {
        return Ok(Some(Bracket { last_true: hi, first_false: hi, capped: true, evaluations }));
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > width {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        evaluations += 1;
        if pred(mid)? {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(Some(Bracket { last_true: a, first_false: b, capped: false, evaluations }))
}
