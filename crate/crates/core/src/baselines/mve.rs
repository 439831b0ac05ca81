use super::{exact_fit_result, finish, BaselineResult, Method};
use crate::data::{smallest_k, Dataset};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::moments::{subset_moments, LocationScatter};
use crate::params::AlgoParams;
use crate::pcs::{detect_exact_fit, random_start, Direction};
use crate::rng::substream;

/// Squared-volume proxy of the smallest ellipsoid of shape `fit` holding `h`
/// observations: `det(S) * (h-th smallest d^2)^p`.
pub fn mve_proxy(data: &Dataset, fit: &LocationScatter, h: usize) -> Result<f64> {
    let mut d2 = fit.distances_sq(data)?;
    let (_, kth, _) = d2.select_nth_unstable_by(h - 1, f64::total_cmp);
    Ok(fit.det() * kth.powi(data.p() as i32))
}

enum Start {
    Scored { proxy: f64, fit: LocationScatter },
    ExactFit(Direction),
    Discarded,
}

/// FastMVE-style search: score every random `(p+1)`-subset fit by
/// [`mve_proxy`], keep the smallest, then trim once to the `h` closest rows.
pub fn fastmve_with(data: &Dataset, params: &AlgoParams, execution: Execution) -> Result<BaselineResult> {
    params.validate(data.n(), data.p())?;
    let h = params.h;
    let starts = execution.map(params.starts, |m| {
        let mut rng = substream(params.seed, m as u64);
        let start = random_start(data, &mut rng);
        let Ok(fit) = subset_moments(data, &start) else {
            return Start::Discarded;
        };
        if fit.is_singular() {
            return match detect_exact_fit(data, h, &start) {
                Some(d) => Start::ExactFit(d),
                None => Start::Discarded,
            };
        }
        match mve_proxy(data, &fit, h) {
            Ok(proxy) => Start::Scored { proxy, fit },
            Err(_) => Start::Discarded,
        }
    });
    let mut best: Option<(f64, &LocationScatter)> = None;
    for s in &starts {
        match s {
            Start::ExactFit(d) => return Ok(exact_fit_result(data, Method::Mve, h, d.clone())),
            Start::Scored { proxy, fit } => {
                if best.is_none_or(|(b, _)| *proxy < b) {
                    best = Some((*proxy, fit));
                }
            }
            Start::Discarded => {}
        }
    }
    let (proxy, fit) = best.ok_or_else(|| {
        Error::EstimationFailure("MVE: every start had a singular scatter".into())
    })?;
    let subset = smallest_k(&fit.distances_sq(data)?, h);
    finish(data, Method::Mve, h, subset, Some(proxy))
}

pub fn fastmve_run(data: &Dataset, params: &AlgoParams) -> Result<BaselineResult> {
    fastmve_with(data, params, Execution::default())
}
