//! Observation matrices and index subsets.

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// An `n x p` matrix of observations stored row-major.
///
/// Rows keep their position for the lifetime of the dataset, so every
/// [`SubsetIndex`] refers to the same observation no matter which estimator
/// produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    n: usize,
    p: usize,
    scale: f64,
}

impl Dataset {
    /// Builds a dataset from row vectors. Requires `n > p` and finite entries.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let p = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * p);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != p {
                return Err(Error::RaggedRow {
                    row: i,
                    found: row.len(),
                    expected: p,
                });
            }
            values.extend_from_slice(row);
        }
        Self::from_row_major(rows.len(), p, values)
    }

    pub fn from_row_major(n: usize, p: usize, values: Vec<f64>) -> Result<Self> {
        if p == 0 || n <= p {
            return Err(Error::TooFewObservations { n, p });
        }
        assert_eq!(values.len(), n * p, "value buffer does not match n x p");
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / p,
                column: pos % p,
            });
        }
        let scale = spread(&values, n, p);
        Ok(Dataset {
            values,
            n,
            p,
            scale,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.p)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Largest absolute deviation of any coordinate from its column mean.
    /// Used to turn exact-fit tolerances into data units.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Applies `x -> B x + c` to every row.
    pub fn affine_map(&self, b: &[Vec<f64>], shift: &[f64]) -> Result<Dataset> {
        let p = self.p;
        assert!(b.len() == p && shift.len() == p);
        let mut out = Vec::with_capacity(self.values.len());
        for x in self.rows() {
            for (brow, c) in b.iter().zip(shift) {
                out.push(brow.iter().zip(x).map(|(u, v)| u * v).sum::<f64>() + c);
            }
        }
        Dataset::from_row_major(self.n, p, out)
    }

    pub fn scaled(&self, factor: f64) -> Result<Dataset> {
        Dataset::from_row_major(
            self.n,
            self.p,
            self.values.iter().map(|v| v * factor).collect(),
        )
    }
}

fn spread(values: &[f64], n: usize, p: usize) -> f64 {
    let mut mean = vec![0.0; p];
    for row in values.chunks_exact(p) {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let s = values
        .chunks_exact(p)
        .flat_map(|row| row.iter().zip(&mean).map(|(v, m)| (v - m).abs()))
        .fold(0.0, f64::max);
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

/// A strictly increasing set of row indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SubsetIndex {
    indices: Vec<usize>,
}

impl SubsetIndex {
    /// Validates that `indices` is strictly increasing and bounded by `n`.
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::UnsortedSubset);
        }
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(Error::IndexOutOfRange { index: last, n });
            }
        }
        Ok(SubsetIndex { indices })
    }

    /// Sorts and deduplicates arbitrary indices.
    pub fn from_unsorted(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        SubsetIndex { indices }
    }

    pub fn full(n: usize) -> Self {
        SubsetIndex {
            indices: (0..n).collect(),
        }
    }

    pub fn range(range: std::ops::Range<usize>) -> Self {
        SubsetIndex {
            indices: range.collect(),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn intersection_len(&self, other: &SubsetIndex) -> usize {
        let (mut a, mut b) = (self.indices.iter().peekable(), other.indices.iter().peekable());
        let mut count = 0;
        while let (Some(&&x), Some(&&y)) = (a.peek(), b.peek()) {
            match x.cmp(&y) {
                Ordering::Less => {
                    a.next();
                }
                Ordering::Greater => {
                    b.next();
                }
                Ordering::Equal => {
                    count += 1;
                    a.next();
                    b.next();
                }
            }
        }
        count
    }

    /// Membership mask of length `n`.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &i in &self.indices {
            m[i] = true;
        }
        m
    }
}

/// Indices of the `k` smallest scores, ties broken by lower index.
pub fn smallest_k(scores: &[f64], k: usize) -> SubsetIndex {
    let k = k.min(scores.len());
    let mut order: Vec<usize> = (0..scores.len()).collect();
    if k < order.len() && k > 0 {
        order.select_nth_unstable_by(k - 1, |&a, &b| cmp_score(scores, a, b));
    }
    order.truncate(k);
    SubsetIndex::from_unsorted(order)
}

/// Sum of the `k` smallest values.
pub fn sum_smallest_k(values: &[f64], k: usize) -> f64 {
    let k = k.min(values.len());
    if k == 0 {
        return 0.0;
    }
    let mut buf = values.to_vec();
    if k < buf.len() {
        buf.select_nth_unstable_by(k - 1, f64::total_cmp);
    }
    buf[..k].iter().sum()
}

#[inline]
fn cmp_score(scores: &[f64], a: usize, b: usize) -> Ordering {
    scores[a].total_cmp(&scores[b]).then(a.cmp(&b))
}

/// Median with the mean-of-central-pair convention for even counts.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty slice");
    let mut buf = values.to_vec();
    let mid = buf.len() / 2;
    let (lower, upper, _) = buf.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if values.len() % 2 == 1 {
        upper
    } else {
        let lower = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}
