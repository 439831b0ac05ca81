use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::Rng;

use crate::data::{Dataset, SubsetIndex};
use crate::error::{Error, Result};

/// Redraws allowed per direction before a candidate is declared degenerate.
pub const MAX_DIRECTION_DRAWS: usize = 100;

const SOLVE_PIVOT_TOLERANCE: f64 = 1e-12;

/// A hyperplane `{x : normal' x = offset}` with unit normal.
///
/// Hyperplanes sampled from `p` observations solve `A a = 1_p`; the
/// coefficient vector is then `a = normal / offset`. Hyperplanes recovered by
/// exact-fit detection may pass through the origin and have no such `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    normal: Vec<f64>,
    offset: f64,
    span_rows: Vec<usize>,
}

impl Direction {
    /// Hyperplane `{x : x' a = 1}`; `None` when `a` is zero or non-finite.
    pub fn from_coefficients(a: &[f64], span_rows: Vec<usize>) -> Option<Self> {
        let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return None;
        }
        Some(Direction {
            normal: a.iter().map(|v| v / norm).collect(),
            offset: 1.0 / norm,
            span_rows,
        })
    }

    /// Hyperplane `{x : normal' x = offset}` for any nonzero `normal`.
    pub fn from_normal(normal: &[f64], offset: f64, span_rows: Vec<usize>) -> Option<Self> {
        let norm = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return None;
        }
        Some(Direction {
            normal: normal.iter().map(|v| v / norm).collect(),
            offset: offset / norm,
            span_rows,
        })
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Rows that determined the hyperplane.
    pub fn span_rows(&self) -> &[usize] {
        &self.span_rows
    }

    /// Coefficients `a` with `x' a = 1` on the hyperplane, if it misses the origin.
    pub fn coefficients(&self) -> Option<Vec<f64>> {
        (self.offset != 0.0).then(|| self.normal.iter().map(|v| v / self.offset).collect())
    }

    /// Signed orthogonal distance of `x` to the hyperplane.
    #[inline]
    pub fn residual(&self, x: &[f64]) -> f64 {
        self.normal.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - self.offset
    }

    /// Squared orthogonal distances of every row.
    pub fn distances_sq(&self, data: &Dataset) -> Vec<f64> {
        data.rows()
            .map(|x| {
                let r = self.residual(x);
                r * r
            })
            .collect()
    }
}

/// Squared orthogonal distance `(x' a - 1)^2 / ||a||^2` of `x` to the hyperplane.
#[inline]
pub fn proj_distance_sq(x: &[f64], d: &Direction) -> f64 {
    let r = d.residual(x);
    r * r
}

/// Solves `A a = 1_p` for the rows listed in `rows`; `None` when `A` is
/// numerically singular.
pub fn solve_hyperplane(data: &Dataset, rows: &[usize]) -> Option<Direction> {
    let p = data.p();
    debug_assert_eq!(rows.len(), p);
    let a = DMatrix::from_fn(p, p, |r, c| data.row(rows[r])[c]);
    let lu = a.lu();
    let u = lu.u();
    let pivots = u.diagonal();
    let max = pivots.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = pivots.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if !(max > 0.0) || min <= SOLVE_PIVOT_TOLERANCE * max {
        return None;
    }
    let coef = lu.solve(&DVector::from_element(p, 1.0))?;
    if coef.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Direction::from_coefficients(coef.as_slice(), rows.to_vec())
}

/// Draws `p` distinct members of `subset` uniformly and returns the hyperplane
/// through them, redrawing on singular systems.
///
/// The generator only ever picks positions within `subset`, never
/// coordinates, which keeps the whole search affine equivariant.
pub fn sample_direction<R: Rng + ?Sized>(
    data: &Dataset,
    subset: &SubsetIndex,
    rng: &mut R,
) -> Result<Direction> {
    let p = data.p();
    if subset.len() < p {
        return Err(Error::DegenerateCandidate(subset.clone()));
    }
    let members = subset.as_slice();
    let mut rows = vec![0; p];
    for _ in 0..MAX_DIRECTION_DRAWS {
        for (slot, pos) in rows.iter_mut().zip(index::sample(rng, members.len(), p)) {
            *slot = members[pos];
        }
        if let Some(d) = solve_hyperplane(data, &rows) {
            return Ok(d);
        }
    }
    Err(Error::DegenerateCandidate(subset.clone()))
}

pub fn sample_directions<R: Rng + ?Sized>(
    data: &Dataset,
    subset: &SubsetIndex,
    k: usize,
    rng: &mut R,
) -> Result<Vec<Direction>> {
    (0..k).map(|_| sample_direction(data, subset, rng)).collect()
}
