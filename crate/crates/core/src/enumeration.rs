//! Deterministic enumeration of the index families in the coefficient formulae.
//!
//! All orders are lexicographic and fixed, so index ranges can be split across
//! workers without changing which terms are visited.

/// `(a_0; a_1, ..., a_{n/2})` with `a_0 + 2 sum_j j a_j = n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DerivTuple {
    pub a0: u32,
    pub higher: Vec<u32>,
}

impl DerivTuple {
    /// The order `n` this tuple decomposes.
    pub fn order(&self) -> u32 {
        self.a0
            + 2 * self
                .higher
                .iter()
                .enumerate()
                .map(|(j, a)| (j as u32 + 1) * a)
                .sum::<u32>()
    }
}

/// All derivative tuples of order `n`, ordered lexicographically in `higher`.
pub fn enum_deriv_tuples(n: u32) -> Vec<DerivTuple> {
    let len = (n / 2) as usize;
    let mut out = Vec::new();
    let mut higher = vec![0u32; len];
    fill_tuples(n, 0, &mut higher, &mut out);
    out
}

fn fill_tuples(remaining: u32, pos: usize, higher: &mut Vec<u32>, out: &mut Vec<DerivTuple>) {
    if pos == higher.len() {
        out.push(DerivTuple { a0: remaining, higher: higher.clone() });
        return;
    }
    let step = 2 * (pos as u32 + 1);
    let mut a = 0;
    while a * step <= remaining {
        higher[pos] = a;
        fill_tuples(remaining - a * step, pos + 1, higher, out);
        a += 1;
    }
    higher[pos] = 0;
}

/// Weak compositions of `total` into `parts` nonnegative parts, lexicographic.
#[derive(Clone, Debug)]
pub struct WeakCompositions {
    current: Option<Vec<u32>>,
}

pub fn enum_weak_compositions(total: u32, parts: usize) -> WeakCompositions {
    assert!(parts >= 1, "a composition needs at least one part");
    let mut first = vec![0; parts];
    first[parts - 1] = total;
    WeakCompositions { current: Some(first) }
}

impl Iterator for WeakCompositions {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let out = self.current.take()?;
        let last = out.len() - 1;
        // lexicographic successor: bump the rightmost position that still has
        // mass to its right, then put all remaining mass in the last part
        let mut suffix = out[last];
        for i in (0..last).rev() {
            if suffix > 0 {
                let mut succ = out.clone();
                succ[i] += 1;
                succ[i + 1..].iter_mut().for_each(|v| *v = 0);
                succ[last] = suffix - 1;
                self.current = Some(succ);
                break;
            }
            suffix += out[i];
        }
        Some(out)
    }
}

/// `r x k` matrix of nonnegative integers with `2 * (row sum) <= bound` on every row.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BoundedRowMatrix {
    pub rows: usize,
    pub cols: usize,
    /// Row-major entries.
    pub entries: Vec<u32>,
}

impl BoundedRowMatrix {
    pub fn row(&self, i: usize) -> &[u32] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_sum(&self, i: usize) -> u32 {
        self.row(i).iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> u32 {
        (0..self.rows).map(|i| self.entries[i * self.cols + j]).sum()
    }
}

/// Every admissible row `(e_1..e_cols)` with `2 sum e <= bound`, lexicographic.
pub fn bounded_rows(cols: usize, bound: u32) -> Vec<Vec<u32>> {
    let cap = bound / 2;
    let mut out = Vec::new();
    let mut row = vec![0u32; cols];
    fill_rows(cap, 0, &mut row, &mut out);
    out
}

fn fill_rows(remaining: u32, pos: usize, row: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if pos == row.len() {
        out.push(row.clone());
        return;
    }
    for e in 0..=remaining {
        row[pos] = e;
        fill_rows(remaining - e, pos + 1, row, out);
    }
    row[pos] = 0;
}

/// Streams all bounded-row matrices in row-major lexicographic order.
///
/// The stream is an odometer over indices into [`bounded_rows`], so the
/// `i`-th matrix is addressable directly via [`BoundedMatrices::starting_at`].
#[derive(Clone, Debug)]
pub struct BoundedMatrices {
    row_set: Vec<Vec<u32>>,
    rows: usize,
    cols: usize,
    digits: Vec<usize>,
    remaining: u128,
    started: bool,
}

pub fn enum_bounded_matrices(rows: usize, cols: usize, bound: u32) -> BoundedMatrices {
    assert!(cols >= 1, "matrices need at least one column");
    let row_set = bounded_rows(cols, bound);
    let remaining = (row_set.len() as u128).pow(rows as u32);
    BoundedMatrices { row_set, rows, cols, digits: vec![0; rows], remaining, started: false }
}

impl BoundedMatrices {
    /// Total number of matrices in the family (`C^rows`).
    pub fn total(&self) -> u128 {
        (self.row_set.len() as u128).pow(self.rows as u32)
    }

    pub fn row_set(&self) -> &[Vec<u32>] {
        &self.row_set
    }

    /// Skips to the `start`-th matrix of the full family.
    pub fn starting_at(mut self, start: u128) -> Self {
        let total = self.total();
        let base = self.row_set.len() as u128;
        let mut idx = start.min(total);
        self.remaining = total - idx;
        self.started = false;
        for d in self.digits.iter_mut().rev() {
            *d = (idx % base) as usize;
            idx /= base;
        }
        self
    }

    /// Row indices (into [`BoundedMatrices::row_set`]) of the next matrix,
    /// without materializing it.
    pub fn next_indices(&mut self) -> Option<&[usize]> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        if std::mem::replace(&mut self.started, true) {
            let base = self.row_set.len();
            for d in self.digits.iter_mut().rev() {
                *d += 1;
                if *d < base {
                    break;
                }
                *d = 0;
            }
        }
        Some(&self.digits)
    }
}

impl Iterator for BoundedMatrices {
    type Item = BoundedRowMatrix;

    fn next(&mut self) -> Option<BoundedRowMatrix> {
        let (rows, cols) = (self.rows, self.cols);
        let digits = self.next_indices()?.to_vec();
        let entries = digits.iter().flat_map(|&d| self.row_set[d].iter().copied()).collect();
        Some(BoundedRowMatrix { rows, cols, entries })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = usize::try_from(self.remaining).unwrap_or(usize::MAX);
        (n, usize::try_from(self.remaining).ok())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::binomial;
    use num_bigint::BigInt;

    #[test]
    fn deriv_tuples_small() {
        assert_eq!(enum_deriv_tuples(0), vec![DerivTuple { a0: 0, higher: vec![] }]);
        assert_eq!(
            enum_deriv_tuples(2),
            vec![
                DerivTuple { a0: 2, higher: vec![0] },
                DerivTuple { a0: 0, higher: vec![1] }
            ]
        );
        assert_eq!(
            enum_deriv_tuples(3),
            vec![
                DerivTuple { a0: 3, higher: vec![0] },
                DerivTuple { a0: 1, higher: vec![1] }
            ]
        );
    }

    fn nested_loop_count(n: u32) -> usize {
        // brute force over a box large enough for every coordinate
        let len = (n / 2) as usize;
        let mut count = 0;
        let mut idx = vec![0u32; len];
        loop {
            let weighted: u32 = idx.iter().enumerate().map(|(j, a)| 2 * (j as u32 + 1) * a).sum();
            if weighted <= n {
                count += 1;
            }
            let mut p = 0;
            loop {
                if p == len {
                    return count;
                }
                idx[p] += 1;
                if idx[p] <= n {
                    break;
                }
                idx[p] = 0;
                p += 1;
            }
        }
    }

    #[test]
    fn deriv_tuple_counts_match_brute_force() {
        for n in 0..=12 {
            let tuples = enum_deriv_tuples(n);
            assert_eq!(tuples.len(), nested_loop_count(n), "n = {n}");
            for t in &tuples {
                assert_eq!(t.order(), n);
                assert_eq!(t.a0 % 2, n % 2);
            }
        }
    }

    #[test]
    fn compositions_examples() {
        let c: Vec<_> = enum_weak_compositions(1, 2).collect();
        assert_eq!(c, vec![vec![0, 1], vec![1, 0]]);
        let c: Vec<_> = enum_weak_compositions(0, 3).collect();
        assert_eq!(c, vec![vec![0, 0, 0]]);
        let c: Vec<_> = enum_weak_compositions(2, 2).collect();
        assert_eq!(c, vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        let c: Vec<_> = enum_weak_compositions(4, 1).collect();
        assert_eq!(c, vec![vec![4]]);
    }

    #[test]
    fn compositions_stars_and_bars() {
        for total in 0..=10u32 {
            for parts in 1..=6usize {
                let all: Vec<_> = enum_weak_compositions(total, parts).collect();
                assert_eq!(
                    BigInt::from(all.len()),
                    binomial(total as u64 + parts as u64 - 1, parts as u64 - 1),
                    "total {total} parts {parts}"
                );
                assert!(all.windows(2).all(|w| w[0] < w[1]), "not strictly lexicographic");
                assert!(all.iter().all(|c| c.iter().sum::<u32>() == total));
            }
        }
    }

    #[test]
    fn bounded_matrices_examples() {
        let empty: Vec<_> = enum_bounded_matrices(0, 3, 5).collect();
        assert_eq!(empty.len(), 1);
        assert!(empty[0].entries.is_empty());

        let m: Vec<_> = enum_bounded_matrices(1, 1, 2).map(|m| m.entries).collect();
        assert_eq!(m, vec![vec![0], vec![1]]);

        let m: Vec<_> = enum_bounded_matrices(1, 2, 3).map(|m| m.entries).collect();
        assert_eq!(m, vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn bounded_matrices_count_and_order() {
        for rows in 0..=3 {
            for cols in 1..=3 {
                for bound in 0..=5 {
                    let c = bounded_rows(cols, bound).len() as u128;
                    let all: Vec<_> = enum_bounded_matrices(rows, cols, bound).collect();
                    assert_eq!(all.len() as u128, c.pow(rows as u32));
                    assert!(all.windows(2).all(|w| w[0].entries < w[1].entries));
                    for m in &all {
                        for i in 0..rows {
                            assert!(2 * m.row_sum(i) <= bound);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn starting_at_resumes_stream() {
        let all: Vec<_> = enum_bounded_matrices(3, 2, 4).collect();
        for start in [0usize, 1, 7, all.len() - 1, all.len()] {
            let tail: Vec<_> = enum_bounded_matrices(3, 2, 4).starting_at(start as u128).collect();
            assert_eq!(tail, all[start..].to_vec());
        }
    }
}
