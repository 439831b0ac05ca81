use crate::data::{smallest_k, sum_smallest_k, Dataset, SubsetIndex};
use crate::error::{Error, Result};

use super::direction::Direction;
use super::exact_fit::zero_distance_sq;

/// The `h` observations closest to the hyperplane, ties by lower index.
pub fn optimal_overlap_subset(data: &Dataset, d: &Direction, h: usize) -> SubsetIndex {
    smallest_k(&d.distances_sq(data), h)
}

/// Incongruence of one subset along one direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionalIncongruence {
    /// `log mean_H d_P^2 - log mean_{H_k} d_P^2`; `+inf` when the optimal
    /// subset sits exactly on the hyperplane but `H` does not.
    pub value: f64,
    /// Set when `h` observations lie on the hyperplane.
    pub exact_fit: bool,
}

fn directional(data: &Dataset, subset: &SubsetIndex, dist: &[f64], h: usize) -> DirectionalIncongruence {
    let tol = zero_distance_sq(data);
    let own = subset.iter().map(|i| dist[i]).sum::<f64>() / subset.len() as f64;
    let best = sum_smallest_k(dist, h) / h as f64;
    if best <= tol {
        let value = if own <= tol { 0.0 } else { f64::INFINITY };
        return DirectionalIncongruence {
            value,
            exact_fit: true,
        };
    }
    DirectionalIncongruence {
        value: own.ln() - best.ln(),
        exact_fit: false,
    }
}

pub fn incongruence_direction(
    data: &Dataset,
    subset: &SubsetIndex,
    d: &Direction,
    h: usize,
) -> DirectionalIncongruence {
    directional(data, subset, &d.distances_sq(data), h)
}

/// Direction-averaged incongruence of a subset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Incongruence {
    pub value: f64,
    /// First direction along which `h` observations lie on the hyperplane.
    pub exact_fit_direction: Option<usize>,
}

/// Mean of [`incongruence_direction`] over `dirs`.
pub fn incongruence(data: &Dataset, subset: &SubsetIndex, dirs: &[Direction], h: usize) -> Incongruence {
    assert!(!dirs.is_empty(), "incongruence needs at least one direction");
    let mut sum = 0.0;
    let mut exact = None;
    for (k, d) in dirs.iter().enumerate() {
        let di = incongruence_direction(data, subset, d, h);
        if di.exact_fit && exact.is_none() {
            exact = Some(k);
        }
        sum += di.value;
    }
    Incongruence {
        value: sum / dirs.len() as f64,
        exact_fit_direction: exact,
    }
}

/// Per-observation outlyingness relative to a candidate subset.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeOutlyingness {
    pub scores: Vec<f64>,
    /// Directions skipped because the subset sits on their hyperplane.
    pub dropped: usize,
}

/// `D_i = mean_k d_P,i^2(a_k) / mean_{j in H} d_P,j^2(a_k)`.
///
/// Directions whose subset average is zero are left out of the mean. If
/// every direction is dropped the candidate is degenerate.
pub fn relative_outlyingness(
    data: &Dataset,
    subset: &SubsetIndex,
    dirs: &[Direction],
) -> Result<RelativeOutlyingness> {
    let tol = zero_distance_sq(data);
    let mut scores = vec![0.0; data.n()];
    let mut used = 0usize;
    let mut dist = vec![0.0; data.n()];
    for d in dirs {
        for (slot, x) in dist.iter_mut().zip(data.rows()) {
            let r = d.residual(x);
            *slot = r * r;
        }
        let denom = subset.iter().map(|i| dist[i]).sum::<f64>() / subset.len() as f64;
        if denom <= tol {
            continue;
        }
        used += 1;
        for (s, v) in scores.iter_mut().zip(&dist) {
            *s += v / denom;
        }
    }
    if used == 0 {
        return Err(Error::DegenerateCandidate(subset.clone()));
    }
    scores.iter_mut().for_each(|s| *s /= used as f64);
    Ok(RelativeOutlyingness {
        scores,
        dropped: dirs.len() - used,
    })
}
