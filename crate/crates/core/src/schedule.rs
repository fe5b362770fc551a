//! Index schedules: the finite grids of `k` at which ratio sequences are sampled.

use crate::natural::Natural;

/// Default geometric growth factor.
pub const DEFAULT_RATIO: f64 = 1.1;

/// Geometric grids stop here even when the horizon is larger; beyond it only
/// named anchor points (e.g. a weight's breakpoints) are sampled.
pub fn geometric_cap() -> Natural {
    Natural::pow2(128u32)
}

/// A sorted, duplicate-free list of sample indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Schedule(Vec<Natural>);

impl Schedule {
    pub fn new(mut points: Vec<Natural>) -> Self {
        points.sort();
        points.dedup();
        Schedule(points)
    }

    /// `floor(ratio^j)` for `j = 0, 1, ...` up to `min(horizon, cap)`, plus the
    /// horizon itself when it is under the cap.
    pub fn geometric(ratio: f64, horizon: &Natural) -> Self {
        assert!(ratio > 1.0, "geometric ratio must exceed 1");
        let cap = geometric_cap();
        let top = if horizon < &cap { horizon.clone() } else { cap };
        let mut points = Vec::new();
        let mut x = 1.0f64;
        loop {
            let k = Natural::from_f64_floor(x).expect("finite grid value");
            if k > top {
                break;
            }
            points.push(k);
            x *= ratio;
        }
        if !top.is_zero() {
            points.push(top);
        }
        Schedule::new(points)
    }

    pub fn default_geometric(horizon: &Natural) -> Self {
        Schedule::geometric(DEFAULT_RATIO, horizon)
    }

    /// Consecutive integers `from..=to`.
    pub fn dense(from: u64, to: u64) -> Self {
        Schedule((from..=to).map(Natural::from).collect())
    }

    /// `2^(m!)` for `m` in the range, the growth scale of the ES1 weight.
    pub fn factorial_powers(ms: std::ops::RangeInclusive<u64>) -> Self {
        Schedule::new(ms.map(|m| Natural::pow2(Natural::factorial(m))).collect())
    }

    /// `4^m` for `m` in the range.
    pub fn powers_of_four(ms: std::ops::RangeInclusive<u64>) -> Self {
        Schedule::new(ms.map(|m| Natural::pow2(2 * m)).collect())
    }

    /// `m!` for `m` in the range.
    pub fn factorials(ms: std::ops::RangeInclusive<u64>) -> Self {
        Schedule::new(ms.map(|m| Natural::from(Natural::factorial(m))).collect())
    }

    pub fn union(&self, other: &Schedule) -> Self {
        let mut points = self.0.clone();
        points.extend(other.0.iter().cloned());
        Schedule::new(points)
    }

    /// Keeps points `<= horizon`.
    pub fn truncate(&self, horizon: &Natural) -> Self {
        Schedule(self.0.iter().filter(|k| *k <= horizon).cloned().collect())
    }

    pub fn points(&self) -> &[Natural] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<&Natural> {
        self.0.last()
    }
}

impl From<Vec<Natural>> for Schedule {
    fn from(points: Vec<Natural>) -> Self {
        Schedule::new(points)
    }
}

impl FromIterator<Natural> for Schedule {
    fn from_iter<I: IntoIterator<Item = Natural>>(iter: I) -> Self {
        Schedule::new(iter.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_grid_is_sorted_and_ends_at_horizon() {
        let s = Schedule::geometric(1.1, &Natural::from(1_000_000u64));
        assert_eq!(s.points()[0], Natural::one());
        assert_eq!(s.last(), Some(&Natural::from(1_000_000u64)));
        assert!(s.points().windows(2).all(|w| w[0] < w[1]));
        // ln(10^6)/ln(1.1) ~ 145 grid steps, minus collisions at the bottom
        assert!(s.len() > 100 && s.len() < 150);
    }

    #[test]
    fn geometric_grid_is_capped() {
        let huge = Natural::pow2(10_000u32);
        let s = Schedule::geometric(1.1, &huge);
        assert_eq!(s.last(), Some(&geometric_cap()));
    }

    #[test]
    fn named_schedules() {
        let s = Schedule::factorial_powers(1..=3);
        let want: Vec<Natural> = [2u64, 4, 64].into_iter().map(Natural::from).collect();
        assert_eq!(s.points(), &want[..]);
        assert_eq!(Schedule::powers_of_four(0..=2).points()[2], Natural::from(16u64));
        assert_eq!(Schedule::factorials(4..=4).points()[0], Natural::from(24u64));
    }
}
