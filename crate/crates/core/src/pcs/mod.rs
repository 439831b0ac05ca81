//! Projection congruent subsets and the FastPCS search.
//!
//! A candidate `h`-subset is scored by how well it overlaps, along random
//! hyperplanes spanned by its own members, with the `h` observations closest
//! to each hyperplane (its *incongruence*). FastPCS grows many random
//! `(p+1)`-subsets to size `h` by concentration and keeps the one with the
//! smallest incongruence. Outlyingness is the Mahalanobis distance to the
//! mean and covariance of that subset.

mod concentrate;
mod direction;
mod exact_fit;
mod incongruence;

use rand::seq::index;
use rand::Rng;

pub use concentrate::{concentrate, stage_size, CandidateState};
pub use direction::{
    proj_distance_sq, sample_direction, sample_directions, solve_hyperplane, Direction,
    MAX_DIRECTION_DRAWS,
};
pub use exact_fit::{detect_exact_fit, exact_fit_along, rows_on_hyperplane, EXACT_FIT_RTOL};
pub use incongruence::{
    incongruence, incongruence_direction, optimal_overlap_subset, relative_outlyingness,
    DirectionalIncongruence, Incongruence, RelativeOutlyingness,
};

use crate::data::{smallest_k, Dataset, SubsetIndex};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::moments::{subset_moments, LocationScatter};
use crate::params::AlgoParams;
use crate::rng::substream;

/// Output of a FastPCS run.
#[derive(Debug, Clone)]
pub struct PcsResult {
    /// The `h` observations with the smallest outlyingness.
    pub h_star: SubsetIndex,
    /// The candidate subset with the lowest incongruence; `fit` is its mean
    /// and covariance.
    pub selected: SubsetIndex,
    pub fit: LocationScatter,
    /// `d_MD,i(t_*, S_*)`, or the distance to the fitted hyperplane under an
    /// exact fit.
    pub outlyingness: Vec<f64>,
    /// Hyperplane holding at least `h` observations, when one was found.
    pub exact_fit: Option<Direction>,
    /// Final incongruence of each candidate, `None` for degenerate ones.
    pub candidate_log: Vec<Option<f64>>,
    /// Ordinal of the winning candidate.
    pub best_candidate: Option<usize>,
}

impl PcsResult {
    pub fn selected_incongruence(&self) -> Option<f64> {
        self.best_candidate.and_then(|m| self.candidate_log[m])
    }
}

enum Outcome {
    Scored { subset: SubsetIndex, value: f64 },
    ExactFit(Direction),
    Degenerate,
}

/// Configurable FastPCS runner.
#[derive(Debug, Clone)]
pub struct FastPcs {
    params: AlgoParams,
    execution: Execution,
    scoring: Option<Vec<Direction>>,
}

impl FastPcs {
    pub fn new(params: AlgoParams) -> Self {
        FastPcs {
            params,
            execution: Execution::default(),
            scoring: None,
        }
    }

    pub fn execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    /// Scores every final candidate along this fixed direction set instead
    /// of a fresh random draw.
    pub fn scoring_directions(mut self, dirs: Vec<Direction>) -> Self {
        assert!(!dirs.is_empty());
        self.scoring = Some(dirs);
        self
    }

    pub fn params(&self) -> &AlgoParams {
        &self.params
    }

    pub fn run(&self, data: &Dataset) -> Result<PcsResult> {
        let params = &self.params;
        params.validate(data.n(), data.p())?;
        let outcomes = self
            .execution
            .map(params.starts, |m| self.candidate(data, m));

        let candidate_log: Vec<Option<f64>> = outcomes
            .iter()
            .map(|o| match o {
                Outcome::Scored { value, .. } => Some(*value),
                Outcome::ExactFit(_) => Some(0.0),
                Outcome::Degenerate => None,
            })
            .collect();

        if let Some((m, d)) = outcomes.iter().enumerate().find_map(|(m, o)| match o {
            Outcome::ExactFit(d) => Some((m, d)),
            _ => None,
        }) {
            return exact_fit_result(data, params.h, d.clone(), candidate_log, Some(m));
        }

        let mut best: Option<(usize, &SubsetIndex, f64)> = None;
        for (m, o) in outcomes.iter().enumerate() {
            if let Outcome::Scored { subset, value } = o {
                if best.is_none_or(|(_, _, v)| *value < v) {
                    best = Some((m, subset, *value));
                }
            }
        }
        let Some((m, selected, _)) = best else {
            return Err(Error::EstimationFailure(
                "every candidate subset was degenerate".into(),
            ));
        };

        let fit = subset_moments(data, selected)?;
        if fit.is_singular() {
            return match detect_exact_fit(data, params.h, selected) {
                Some(d) => exact_fit_result(data, params.h, d, candidate_log, Some(m)),
                None => Err(Error::EstimationFailure(
                    "selected subset has singular scatter but no exact fit".into(),
                )),
            };
        }
        let outlyingness: Vec<f64> = fit.distances_sq(data)?.into_iter().map(f64::sqrt).collect();
        Ok(PcsResult {
            h_star: smallest_k(&outlyingness, params.h),
            selected: selected.clone(),
            fit,
            outlyingness,
            exact_fit: None,
            candidate_log,
            best_candidate: Some(m),
        })
    }

    fn candidate(&self, data: &Dataset, m: usize) -> Outcome {
        let params = &self.params;
        let h = params.h;
        let mut rng = substream(params.seed, m as u64);
        let start = random_start(data, &mut rng);
        let state = match concentrate(data, &start, params, &mut rng) {
            Ok(state) => state,
            Err(Error::DegenerateCandidate(probe)) => return probe_outcome(data, h, &probe),
            Err(_) => return Outcome::Degenerate,
        };
        let fresh;
        let dirs = match &self.scoring {
            Some(d) => d.as_slice(),
            None => match sample_directions(data, &state.subset, params.directions, &mut rng) {
                Ok(d) => {
                    fresh = d;
                    fresh.as_slice()
                }
                Err(_) => return probe_outcome(data, h, &state.subset),
            },
        };
        let inc = incongruence(data, &state.subset, dirs, h);
        if let Some(k) = inc.exact_fit_direction {
            if let Some(d) = exact_fit_along(data, h, &dirs[k]) {
                return Outcome::ExactFit(d);
            }
        }
        Outcome::Scored {
            subset: state.subset,
            value: inc.value,
        }
    }
}

fn probe_outcome(data: &Dataset, h: usize, probe: &SubsetIndex) -> Outcome {
    match detect_exact_fit(data, h, probe) {
        Some(d) => Outcome::ExactFit(d),
        None => Outcome::Degenerate,
    }
}

/// Uniform random `(p+1)`-subset of all rows.
pub fn random_start<R: Rng + ?Sized>(data: &Dataset, rng: &mut R) -> SubsetIndex {
    SubsetIndex::from_unsorted(index::sample(rng, data.n(), data.p() + 1).into_vec())
}

fn exact_fit_result(
    data: &Dataset,
    h: usize,
    direction: Direction,
    candidate_log: Vec<Option<f64>>,
    best_candidate: Option<usize>,
) -> Result<PcsResult> {
    let outlyingness: Vec<f64> = data.rows().map(|x| direction.residual(x).abs()).collect();
    let h_star = smallest_k(&outlyingness, h);
    let fit = subset_moments(data, &h_star)?;
    Ok(PcsResult {
        selected: h_star.clone(),
        h_star,
        fit,
        outlyingness,
        exact_fit: Some(direction),
        candidate_log,
        best_candidate,
    })
}

/// Runs FastPCS with the default (parallel) execution.
pub fn fastpcs_run(data: &Dataset, params: &AlgoParams) -> Result<PcsResult> {
    FastPcs::new(params.clone()).run(data)
}
