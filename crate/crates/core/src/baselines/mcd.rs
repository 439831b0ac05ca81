use super::{exact_fit_result, finish, BaselineResult, Method};
use crate::data::{smallest_k, Dataset, SubsetIndex};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::moments::subset_moments;
use crate::params::AlgoParams;
use crate::pcs::{detect_exact_fit, random_start, Direction};
use crate::rng::substream;

pub const MAX_C_STEPS: usize = 20;
const DET_RTOL: f64 = 1e-9;

/// Determinants visited by one C-step chain, starting with the first
/// `h`-subset fit.
#[derive(Debug, Clone, PartialEq)]
pub struct CStepTrace {
    pub subset: SubsetIndex,
    pub dets: Vec<f64>,
}

pub enum CStepOutcome {
    Converged(CStepTrace),
    ExactFit(Direction),
    Discarded,
}

/// Runs C-steps from `start`: fit, keep the `h` rows with the smallest
/// Mahalanobis distance, refit, until the determinant stops decreasing (relative
/// `1e-9`) or `max_steps` is reached.
pub fn c_steps(data: &Dataset, start: &SubsetIndex, h: usize, max_steps: usize) -> CStepOutcome {
    let Ok(mut fit) = subset_moments(data, start) else {
        return CStepOutcome::Discarded;
    };
    if fit.is_singular() {
        return probe(data, h, start);
    }
    let mut subset = start.clone();
    let mut dets: Vec<f64> = Vec::new();
    for _ in 0..max_steps {
        let d2 = match fit.distances_sq(data) {
            Ok(d2) => d2,
            Err(_) => return CStepOutcome::Discarded,
        };
        let next = smallest_k(&d2, h);
        let next_fit = match subset_moments(data, &next) {
            Ok(f) => f,
            Err(_) => return CStepOutcome::Discarded,
        };
        if next_fit.is_singular() {
            return probe(data, h, &next);
        }
        let det = next_fit.det();
        if let Some(&last) = dets.last() {
            if det >= last * (1.0 - DET_RTOL) {
                if det <= last {
                    subset = next;
                    dets.push(det);
                }
                break;
            }
        }
        dets.push(det);
        subset = next;
        fit = next_fit;
    }
    CStepOutcome::Converged(CStepTrace { subset, dets })
}

fn probe(data: &Dataset, h: usize, subset: &SubsetIndex) -> CStepOutcome {
    match detect_exact_fit(data, h, subset) {
        Some(d) => CStepOutcome::ExactFit(d),
        None => CStepOutcome::Discarded,
    }
}

/// FastMCD-style search: `params.starts` random `(p+1)`-subsets, each
/// refined by C-steps; the smallest final determinant wins.
pub fn fastmcd_with(data: &Dataset, params: &AlgoParams, execution: Execution) -> Result<BaselineResult> {
    params.validate(data.n(), data.p())?;
    let h = params.h;
    let outcomes = execution.map(params.starts, |m| {
        let mut rng = substream(params.seed, m as u64);
        c_steps(data, &random_start(data, &mut rng), h, MAX_C_STEPS)
    });
    let mut best: Option<(f64, &SubsetIndex)> = None;
    for o in &outcomes {
        match o {
            CStepOutcome::ExactFit(d) => return Ok(exact_fit_result(data, Method::Mcd, h, d.clone())),
            CStepOutcome::Converged(trace) => {
                let det = *trace.dets.last().expect("at least one C-step");
                if best.is_none_or(|(b, _)| det < b) {
                    best = Some((det, &trace.subset));
                }
            }
            CStepOutcome::Discarded => {}
        }
    }
    let (det, subset) = best.ok_or_else(|| {
        Error::EstimationFailure("MCD: every start had a singular scatter".into())
    })?;
    finish(data, Method::Mcd, h, subset.clone(), Some(det))
}

pub fn fastmcd_run(data: &Dataset, params: &AlgoParams) -> Result<BaselineResult> {
    fastmcd_with(data, params, Execution::default())
}
