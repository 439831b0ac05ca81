use nalgebra::DMatrix;

use crate::chisq::chisq_quantile;
use crate::data::{Dataset, SubsetIndex};
use crate::error::{Error, Result};
use crate::moments::LocationScatter;

/// `min_i sqrt(d^2_MD(x_i; truth) / chi2_{0.99,p})` over the outlier rows.
pub fn nu_distance(data: &Dataset, outliers: &SubsetIndex, truth: &LocationScatter) -> Result<f64> {
    if outliers.is_empty() {
        return Err(Error::EmptyOutlierSet);
    }
    if truth.is_singular() {
        return Err(Error::SingularScatter);
    }
    let q = chisq_quantile(0.99, data.p())?;
    let mut min = f64::INFINITY;
    for i in outliers.iter() {
        min = min.min(truth.mahalanobis_sq(data.row(i))?);
    }
    Ok((min / q).sqrt())
}

/// Shape discrepancy `log(l_1 / l_p)` for the extreme eigenvalues of
/// `S^{-1/2} Sigma S^{-1/2}`.
///
/// Normalizing either matrix to unit determinant rescales every eigenvalue
/// by the same factor, so it drops out of the ratio. `S = L L'` gives the
/// same spectrum as `L^{-1} Sigma L^{-T}`.
pub fn bias(fit_scatter: &DMatrix<f64>, truth_scatter: &DMatrix<f64>) -> Result<f64> {
    let p = fit_scatter.nrows();
    if fit_scatter.shape() != (p, p) || truth_scatter.shape() != (p, p) {
        return Err(Error::InvalidParameter("bias needs two p x p matrices".into()));
    }
    let l = fit_scatter.clone().cholesky().ok_or(Error::SingularScatter)?.unpack();
    if truth_scatter.clone().cholesky().is_none() {
        return Err(Error::SingularScatter);
    }
    let a = l.solve_lower_triangular(truth_scatter).ok_or(Error::SingularScatter)?;
    let m = l
        .solve_lower_triangular(&a.transpose())
        .ok_or(Error::SingularScatter)?;
    let m = (&m + m.transpose()) * 0.5;
    let eig = m.symmetric_eigenvalues();
    let hi = eig.max();
    let lo = eig.min();
    if !(lo > 0.0) {
        return Err(Error::SingularScatter);
    }
    Ok(hi.ln() - lo.ln())
}

/// Fraction of the true outliers that ended up inside `h`.
pub fn misclassification(outliers: &SubsetIndex, h: &SubsetIndex) -> Result<f64> {
    if outliers.is_empty() {
        return Err(Error::EmptyOutlierSet);
    }
    Ok(outliers.intersection_len(h) as f64 / outliers.len() as f64)
}
