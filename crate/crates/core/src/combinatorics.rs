//! Multi-indices, constrained compositions and symmetric sums.
//!
//! Positions are 0-based throughout: a support set `{0, 1}` names the first
//! two coordinates.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::special::binomial_u128;

/// An `n`-tuple of nonnegative integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        Self(entries)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `|α|`.
    pub fn total(&self) -> u64 {
        self.0.iter().map(|&a| a as u64).sum()
    }

    /// `|α|_i`, the sum of the first `i` entries.
    pub fn partial(&self, i: usize) -> u64 {
        self.0.iter().take(i).map(|&a| a as u64).sum()
    }

    /// `α! = Π α_k!`.
    pub fn factorial(&self) -> BigUint {
        self.0
            .iter()
            .fold(BigUint::one(), |acc, &a| acc * big_factorial(a))
    }

    /// `s(α)`: positions with a nonzero entry.
    pub fn support(&self) -> Vec<usize> {
        self.positions(|a| a != 0)
    }

    /// `sing(α)`: positions whose entry is exactly 1.
    pub fn singletons(&self) -> Vec<usize> {
        self.positions(|a| a == 1)
    }

    fn positions(&self, keep: impl Fn(u32) -> bool) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &a)| keep(a))
            .map(|(k, _)| k)
            .collect()
    }
}

pub(crate) fn big_factorial(n: u32) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// Which multi-indices [`enumerate`] yields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constraint {
    /// `|α| = total`.
    Total(u32),
    /// `|α| = total` and `|s(α)| = size`.
    TotalSupportSize { total: u32, size: usize },
    /// `|α| = total` and `sing(α) = ∅`.
    NoSingletons(u32),
    /// `|α| = total`, `sing(α) = ∅` and `s(α) = support`.
    NoSingletonsSupport { total: u32, support: Vec<usize> },
    /// `|α| = total` and `s(α) = support`.
    Support { total: u32, support: Vec<usize> },
}

/// Lazily enumerates the `n`-dimensional multi-indices satisfying
/// `constraint`, each once, in ascending lexicographic order.
///
/// Unsatisfiable constraints (including support positions `≥ n`) give an
/// empty stream.
pub fn enumerate(n: usize, constraint: Constraint) -> Compositions {
    Compositions::new(n, constraint)
}

/// Iterator returned by [`enumerate`].
#[derive(Debug, Clone)]
pub struct Compositions {
    total: u32,
    min_part: u32,
    fixed: Option<Vec<bool>>,
    support_size: Option<usize>,
    current: Vec<u32>,
    started: bool,
    done: bool,
}

impl Compositions {
    fn new(n: usize, constraint: Constraint) -> Self {
        let (total, min_part, support, support_size) = match constraint {
            Constraint::Total(t) => (t, 1, None, None),
            Constraint::TotalSupportSize { total, size } => (total, 1, None, Some(size)),
            Constraint::NoSingletons(t) => (t, 2, None, None),
            Constraint::NoSingletonsSupport { total, support } => (total, 2, Some(support), None),
            Constraint::Support { total, support } => (total, 1, Some(support), None),
        };
        let mut done = n == 0;
        let fixed = support.map(|s| {
            let mut mask = vec![false; n];
            for k in s {
                match mask.get_mut(k) {
                    Some(slot) => *slot = true,
                    None => done = true,
                }
            }
            mask
        });
        Self {
            total,
            min_part,
            fixed,
            support_size,
            current: vec![0; n],
            started: false,
            done,
        }
    }

    fn n(&self) -> usize {
        self.current.len()
    }

    fn allowed(&self, pos: usize, v: u32) -> bool {
        match &self.fixed {
            Some(mask) if mask[pos] => v >= self.min_part,
            Some(_) => v == 0,
            None => v == 0 || v >= self.min_part,
        }
    }

    /// Whether positions `from..n` can absorb `remaining` with `nonzero_left`
    /// further nonzero entries still required (if a support size is fixed).
    fn feasible(&self, from: usize, remaining: u32, nonzero_left: Option<usize>) -> bool {
        let slots = self.n() - from;
        let min = self.min_part;
        match &self.fixed {
            Some(mask) => {
                let forced = mask[from..].iter().filter(|&&b| b).count() as u32;
                if forced == 0 {
                    remaining == 0
                } else {
                    remaining >= min * forced
                }
            }
            None => match nonzero_left {
                Some(s) => {
                    if s > slots {
                        false
                    } else if s == 0 {
                        remaining == 0
                    } else {
                        remaining >= min * s as u32
                    }
                }
                None => remaining == 0 || (slots > 0 && remaining >= min),
            },
        }
    }

    fn state_at(&self, pos: usize) -> (u32, Option<usize>) {
        let used: u32 = self.current[..pos].iter().sum();
        let nonzero = self.current[..pos].iter().filter(|&&a| a != 0).count();
        (
            self.total - used,
            self.support_size.map(|s| s.saturating_sub(nonzero)),
        )
    }

    fn next_after(
        &self,
        pos: usize,
        from: Option<u32>,
        remaining: u32,
        left: Option<usize>,
    ) -> Option<u32> {
        if pos + 1 == self.n() {
            // the last entry is forced
            let v = remaining;
            let ok = from.is_none_or(|f| v > f)
                && self.allowed(pos, v)
                && left.is_none_or(|s| s == usize::from(v != 0));
            return ok.then_some(v);
        }
        let start = from.map_or(0, |f| f + 1);
        (start..=remaining).find(|&v| {
            let left_after = left.map(|s| if v != 0 { s.wrapping_sub(1) } else { s });
            self.allowed(pos, v)
                && left_after.is_none_or(|s| s != usize::MAX)
                && self.feasible(pos + 1, remaining - v, left_after)
        })
    }

    /// Fills `pos..n` with the smallest feasible tail.
    fn fill_from(&mut self, pos: usize) -> bool {
        for k in pos..self.n() {
            let (remaining, left) = self.state_at(k);
            match self.next_after(k, None, remaining, left) {
                Some(v) => self.current[k] = v,
                None => return false,
            }
        }
        true
    }
}

impl Iterator for Compositions {
    type Item = MultiIndex;

    fn next(&mut self) -> Option<MultiIndex> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            let (remaining, left) = (self.total, self.support_size);
            if !self.feasible(0, remaining, left) || !self.fill_from(0) {
                self.done = true;
                return None;
            }
            return Some(MultiIndex(self.current.clone()));
        }
        let n = self.n();
        for pos in (0..n.saturating_sub(1)).rev() {
            let (remaining, left) = self.state_at(pos);
            if let Some(v) = self.next_after(pos, Some(self.current[pos]), remaining, left) {
                self.current[pos] = v;
                if self.fill_from(pos + 1) {
                    return Some(MultiIndex(self.current.clone()));
                }
            }
        }
        self.done = true;
        None
    }
}

/// Number of multi-indices with `|α| = r` and a fixed support of size `i`:
/// `C(r-1, r-i)`.
pub fn count_support_compositions(r: u32, i: u32) -> Result<u128> {
    check_range(r, i)?;
    binomial_u128((r - 1) as u64, (r - i) as u64).ok_or_else(overflow)
}

/// Number of multi-indices with `|α| = 2r`, no entry equal to 1 and a fixed
/// support of size `i`: `C(2r-i-1, 2(r-i))`.
pub fn count_no_singleton_compositions(r: u32, i: u32) -> Result<u128> {
    check_range(r, i)?;
    binomial_u128((2 * r - i - 1) as u64, (2 * (r - i)) as u64).ok_or_else(overflow)
}

fn check_range(r: u32, i: u32) -> Result<()> {
    if i == 0 || i > r {
        return Err(Error::OutOfRange(format!(
            "support size {i} must satisfy 1 <= i <= r = {r}"
        )));
    }
    Ok(())
}

fn overflow() -> Error {
    Error::OutOfRange("binomial coefficient overflows 128 bits".into())
}

/// `total! / parts!`, exactly.
pub fn multinomial(total: u32, parts: &MultiIndex) -> Result<BigUint> {
    let got = parts.total();
    if got != total as u64 {
        return Err(Error::TotalMismatch {
            expected: total as u64,
            got,
        });
    }
    Ok(big_factorial(total) / parts.factorial())
}

/// `multinomial` rounded to the nearest float.
pub fn multinomial_f64(total: u32, parts: &MultiIndex) -> Result<f64> {
    Ok(multinomial(total, parts)?.to_f64().unwrap_or(f64::INFINITY))
}

/// `e_r(v)` together with a flag for the empty-sum convention `r > n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricSum {
    pub value: f64,
    /// Set when `r > n`: there are no `r`-subsets and the value is 0.
    pub empty: bool,
}

/// Elementary symmetric polynomial `e_r(v_1..v_n)` by the column recurrence
/// `e_j ← e_j + v_k e_{j-1}`.
pub fn elementary_symmetric(values: &[f64], r: usize) -> SymmetricSum {
    if r > values.len() {
        return SymmetricSum {
            value: 0.0,
            empty: true,
        };
    }
    SymmetricSum {
        value: elementary_symmetric_all(values, r)[r],
        empty: false,
    }
}

/// `e_0..=e_r`.
pub fn elementary_symmetric_all(values: &[f64], r: usize) -> Vec<f64> {
    let mut e = vec![0.0; r + 1];
    e[0] = 1.0;
    for (k, &v) in values.iter().enumerate() {
        for j in (1..=r.min(k + 1)).rev() {
            e[j] += v * e[j - 1];
        }
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    fn collect(n: usize, c: Constraint) -> Vec<Vec<u32>> {
        enumerate(n, c).map(|a| a.entries().to_vec()).collect()
    }

    #[test]
    fn compositions_of_two() {
        assert_eq!(
            collect(2, Constraint::Total(2)),
            vec![vec![0, 2], vec![1, 1], vec![2, 0]]
        );
    }

    #[test]
    fn fixed_support() {
        let got = collect(
            3,
            Constraint::Support {
                total: 3,
                support: vec![0, 1],
            },
        );
        assert_eq!(got, vec![vec![1, 2, 0], vec![2, 1, 0]]);
        assert_eq!(count_support_compositions(3, 2).unwrap(), 2);
    }

    #[test]
    fn no_singleton_fixed_support() {
        let got = collect(
            2,
            Constraint::NoSingletonsSupport {
                total: 6,
                support: vec![0, 1],
            },
        );
        assert_eq!(got, vec![vec![2, 4], vec![3, 3], vec![4, 2]]);
        assert_eq!(count_no_singleton_compositions(3, 2).unwrap(), 3);
    }

    #[test]
    fn closed_form_counts() {
        assert_eq!(count_support_compositions(5, 5).unwrap(), 1);
        assert_eq!(count_support_compositions(6, 2).unwrap(), 5);
        assert_eq!(count_no_singleton_compositions(2, 1).unwrap(), 1);
        assert_eq!(count_no_singleton_compositions(2, 2).unwrap(), 1);
        assert!(count_support_compositions(3, 0).is_err());
        assert!(count_no_singleton_compositions(3, 4).is_err());
    }

    #[test]
    fn unsatisfiable_is_empty() {
        assert_eq!(
            enumerate(2, Constraint::TotalSupportSize { total: 3, size: 3 }).count(),
            0
        );
        assert_eq!(
            enumerate(
                3,
                Constraint::Support {
                    total: 1,
                    support: vec![0, 1]
                }
            )
            .count(),
            0
        );
        assert_eq!(enumerate(3, Constraint::NoSingletons(1)).count(), 0);
        assert_eq!(
            enumerate(
                2,
                Constraint::Support {
                    total: 2,
                    support: vec![5]
                }
            )
            .count(),
            0
        );
        assert_eq!(collect(3, Constraint::Total(0)), vec![vec![0, 0, 0]]);
    }

    #[test]
    fn support_size_with_total_r_is_all_ones() {
        for a in enumerate(5, Constraint::TotalSupportSize { total: 3, size: 3 }) {
            assert!(a.entries().iter().all(|&x| x <= 1));
        }
        assert_eq!(
            enumerate(5, Constraint::TotalSupportSize { total: 3, size: 3 }).count(),
            10
        );
    }

    #[test]
    fn multi_index_derived_values() {
        let a = MultiIndex::new(vec![2, 0, 1, 3]);
        assert_eq!(a.total(), 6);
        assert_eq!(a.partial(2), 2);
        assert_eq!(a.partial(3), 3);
        assert_eq!(a.factorial(), BigUint::from(12u32));
        assert_eq!(a.support(), vec![0, 2, 3]);
        assert_eq!(a.singletons(), vec![2]);
    }

    #[test]
    fn multinomial_examples() {
        assert_eq!(
            multinomial(4, &MultiIndex::new(vec![2, 2])).unwrap(),
            BigUint::from(6u32)
        );
        assert_eq!(
            multinomial(4, &MultiIndex::new(vec![4, 0])).unwrap(),
            BigUint::from(1u32)
        );
        assert_eq!(
            multinomial(8, &MultiIndex::new(vec![2, 2, 2, 2])).unwrap(),
            BigUint::from(2520u32)
        );
        assert!(matches!(
            multinomial(5, &MultiIndex::new(vec![2, 2])),
            Err(Error::TotalMismatch {
                expected: 5,
                got: 4
            })
        ));
        // (24)! overflows u64 but stays exact here
        let big = multinomial(24, &MultiIndex::new(vec![24])).unwrap();
        assert_eq!(big, BigUint::one());
    }

    #[test]
    fn elementary_symmetric_examples() {
        assert_eq!(elementary_symmetric(&[1.0, 1.0, 1.0], 2).value, 3.0);
        assert_eq!(elementary_symmetric(&[1.0, 2.0, 3.0], 2).value, 11.0);
        assert_eq!(elementary_symmetric(&[1.0, 2.0, 3.0], 0).value, 1.0);
        let empty = elementary_symmetric(&[1.0, 2.0], 3);
        assert!(empty.empty);
        assert_eq!(empty.value, 0.0);
    }
}
