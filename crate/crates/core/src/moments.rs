//! Subset location/scatter estimates and Mahalanobis distances.

use nalgebra::{DMatrix, DVector};

use crate::data::{Dataset, SubsetIndex};
use crate::error::{Error, Result};

/// Pivots below this fraction of the largest diagonal entry mark the scatter
/// as singular.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// A `(center, scatter)` pair with its Cholesky factor cached.
#[derive(Debug, Clone, PartialEq)]
pub struct LocationScatter {
    center: DVector<f64>,
    scatter: DMatrix<f64>,
    det: f64,
    factor: Option<DMatrix<f64>>,
}

impl LocationScatter {
    /// Wraps a center and a symmetric scatter matrix, factorizing the latter.
    pub fn new(center: DVector<f64>, scatter: DMatrix<f64>) -> Self {
        let p = center.len();
        assert_eq!(scatter.shape(), (p, p), "scatter must be p x p");
        let factor = cholesky(&scatter);
        let det = match &factor {
            Some(l) => l.diagonal().iter().map(|d| d * d).product(),
            None => scatter.clone().lu().determinant().max(0.0),
        };
        LocationScatter {
            center,
            scatter,
            det,
            factor,
        }
    }

    /// Standard model `(0, I_p)`.
    pub fn standard(p: usize) -> Self {
        Self::new(DVector::zeros(p), DMatrix::identity(p, p))
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn scatter(&self) -> &DMatrix<f64> {
        &self.scatter
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn is_singular(&self) -> bool {
        self.factor.is_none()
    }

    /// Lower Cholesky factor, `None` when the scatter is singular.
    pub fn factor(&self) -> Option<&DMatrix<f64>> {
        self.factor.as_ref()
    }

    /// Squared Mahalanobis distance of `x`, by forward substitution on the
    /// cached factor.
    pub fn mahalanobis_sq(&self, x: &[f64]) -> Result<f64> {
        let l = self.factor.as_ref().ok_or(Error::SingularScatter)?;
        let mut work = vec![0.0; self.dim()];
        Ok(forward_norm_sq(l, &self.center, x, &mut work))
    }

    /// Squared distances of every row of `data`.
    pub fn distances_sq(&self, data: &Dataset) -> Result<Vec<f64>> {
        let l = self.factor.as_ref().ok_or(Error::SingularScatter)?;
        let mut work = vec![0.0; self.dim()];
        Ok(data
            .rows()
            .map(|x| forward_norm_sq(l, &self.center, x, &mut work))
            .collect())
    }
}

/// `|| L^{-1} (x - t) ||^2`.
fn forward_norm_sq(l: &DMatrix<f64>, t: &DVector<f64>, x: &[f64], z: &mut [f64]) -> f64 {
    let p = z.len();
    let mut acc = 0.0;
    for i in 0..p {
        let mut v = x[i] - t[i];
        for j in 0..i {
            v -= l[(i, j)] * z[j];
        }
        v /= l[(i, i)];
        z[i] = v;
        acc += v * v;
    }
    acc
}

/// Cholesky factorization with a scale-relative pivot floor.
fn cholesky(s: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let p = s.nrows();
    let max_diag = (0..p).map(|i| s[(i, i)]).fold(0.0, f64::max);
    if max_diag <= 0.0 || !max_diag.is_finite() {
        return None;
    }
    let floor = PIVOT_TOLERANCE * max_diag;
    let mut l = DMatrix::zeros(p, p);
    for j in 0..p {
        let mut pivot = s[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if pivot <= floor {
            return None;
        }
        let d = pivot.sqrt();
        l[(j, j)] = d;
        for i in j + 1..p {
            let mut v = s[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / d;
        }
    }
    Some(l)
}

/// Mean and sample covariance (divisor `|H| - 1`) of the rows in `subset`.
pub fn subset_moments(data: &Dataset, subset: &SubsetIndex) -> Result<LocationScatter> {
    let p = data.p();
    let m = subset.len();
    if m < p + 1 {
        return Err(Error::DegenerateSubset { size: m, p });
    }
    let mut center = DVector::zeros(p);
    for i in subset.iter() {
        for (c, v) in center.iter_mut().zip(data.row(i)) {
            *c += v;
        }
    }
    center /= m as f64;

    let mut scatter = DMatrix::zeros(p, p);
    let mut dev = vec![0.0; p];
    for i in subset.iter() {
        for ((d, v), c) in dev.iter_mut().zip(data.row(i)).zip(center.iter()) {
            *d = v - c;
        }
        for a in 0..p {
            for b in 0..=a {
                scatter[(a, b)] += dev[a] * dev[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..=a {
            let v = scatter[(a, b)] / (m - 1) as f64;
            scatter[(a, b)] = v;
            scatter[(b, a)] = v;
        }
    }
    Ok(LocationScatter::new(center, scatter))
}

/// Squared Mahalanobis distance `(x - t)' S^{-1} (x - t)`.
pub fn mahalanobis_sq(x: &[f64], ls: &LocationScatter) -> Result<f64> {
    ls.mahalanobis_sq(x)
}
