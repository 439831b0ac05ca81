//! Hard-threshold reweighting of a raw subset fit.

use crate::chisq::chisq_quantile;
use crate::data::{median, Dataset, SubsetIndex};
use crate::error::Result;
use crate::moments::LocationScatter;

/// Observations within the consistency-scaled 97.5% chi-square cutoff of `fit`.
pub fn reweight_hard_threshold(data: &Dataset, fit: &LocationScatter) -> Result<SubsetIndex> {
    let d2 = fit.distances_sq(data)?;
    hard_threshold(&d2, data.p())
}

/// `{ i : d2[i] <= chi2(0.975, p) * med(d2) / chi2(0.5, p) }`.
pub fn hard_threshold(d2: &[f64], p: usize) -> Result<SubsetIndex> {
    let cutoff = chisq_quantile(0.975, p)? * median(d2) / chisq_quantile(0.5, p)?;
    Ok(SubsetIndex::from_unsorted(
        d2.iter()
            .enumerate()
            .filter(|(_, &d)| d <= cutoff)
            .map(|(i, _)| i)
            .collect(),
    ))
}
