use nalgebra::SymmetricEigen;

use crate::data::{Dataset, SubsetIndex};
use crate::moments::subset_moments;

use super::direction::Direction;

/// Residuals below this fraction of [`Dataset::scale`] count as zero.
pub const EXACT_FIT_RTOL: f64 = 1e-9;

pub(crate) fn residual_tolerance(data: &Dataset) -> f64 {
    EXACT_FIT_RTOL * data.scale()
}

/// Averages of squared projection distances at or below this are zero.
pub(crate) fn zero_distance_sq(data: &Dataset) -> f64 {
    let t = residual_tolerance(data);
    t * t
}

/// Rows whose distance to `d` is within the exact-fit tolerance.
pub fn rows_on_hyperplane(data: &Dataset, d: &Direction) -> Vec<usize> {
    let tol = residual_tolerance(data);
    data.rows()
        .enumerate()
        .filter(|(_, x)| d.residual(x).abs() <= tol)
        .map(|(i, _)| i)
        .collect()
}

/// Returns `d` (with its support recorded) when at least `h` rows lie on it.
pub fn exact_fit_along(data: &Dataset, h: usize, d: &Direction) -> Option<Direction> {
    let on = rows_on_hyperplane(data, d);
    if on.len() < h {
        return None;
    }
    Direction::from_normal(d.normal(), d.offset(), on)
}

/// Looks for `h` or more observations on a common hyperplane, using the rows
/// of `probe` to propose it.
///
/// The proposal is the hyperplane through the probe mean orthogonal to the
/// probe's least-variance axis. Lower-dimensional subspaces are caught too,
/// since any hyperplane containing them is a valid witness.
pub fn detect_exact_fit(data: &Dataset, h: usize, probe: &SubsetIndex) -> Option<Direction> {
    let moments = subset_moments(data, probe).ok()?;
    let eig = SymmetricEigen::new(moments.scatter().clone());
    let (k, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?;
    let normal: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
    let offset: f64 = normal.iter().zip(moments.center().iter()).map(|(a, b)| a * b).sum();
    let candidate = Direction::from_normal(&normal, offset, probe.as_slice().to_vec())?;
    exact_fit_along(data, h, &candidate)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn collinear(count: usize, extra: &[[f64; 2]]) -> Dataset {
        let mut rows: Vec<[f64; 2]> = (0..count).map(|i| [i as f64, 2.0 * i as f64 + 1.0]).collect();
        rows.extend_from_slice(extra);
        Dataset::from_rows(&rows).unwrap()
    }

    const SCATTER: [[f64; 2]; 5] = [[0.3, 7.0], [5.0, -2.0], [-4.0, 3.3], [2.2, 0.1], [9.0, 1.0]];

    #[test]
    fn finds_collinear_majority() {
        let data = collinear(6, &SCATTER);
        let d = detect_exact_fit(&data, 6, &SubsetIndex::range(0..3)).unwrap();
        assert_eq!(d.span_rows(), &[0, 1, 2, 3, 4, 5]);
        for i in 0..6 {
            assert!(d.residual(data.row(i)).abs() < 1e-9);
        }
    }

    #[test]
    fn generic_cloud_has_no_fit() {
        let data = Dataset::from_rows(&SCATTER).unwrap();
        assert!(detect_exact_fit(&data, 3, &SubsetIndex::range(0..4)).is_none());
    }

    #[test]
    fn one_short_of_h_is_rejected() {
        let data = collinear(5, &SCATTER);
        assert!(detect_exact_fit(&data, 6, &SubsetIndex::range(0..3)).is_none());
        assert!(detect_exact_fit(&data, 5, &SubsetIndex::range(0..3)).is_some());
    }

    #[test]
    fn hyperplane_through_origin() {
        let mut rows: Vec<[f64; 2]> = (0..6).map(|i| [i as f64 - 2.0, 3.0 * (i as f64 - 2.0)]).collect();
        rows.extend_from_slice(&SCATTER);
        let data = Dataset::from_rows(&rows).unwrap();
        let d = detect_exact_fit(&data, 6, &SubsetIndex::range(0..3)).unwrap();
        assert!(d.offset().abs() < 1e-12);
        assert!(d.coefficients().is_none() || d.offset() != 0.0);
    }
}
