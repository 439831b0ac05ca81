//! Subset sizes and tuning parameters shared by every estimator.

use crate::error::{Error, Result};

/// Directions per candidate.
pub const DEFAULT_DIRECTIONS: usize = 25;
/// Concentration stages.
pub const DEFAULT_STAGES: usize = 3;

/// Smallest admissible subset size, `floor((n + p + 1) / 2)`.
pub fn half_sample(n: usize, p: usize) -> usize {
    (n + p + 1) / 2
}

/// Subset size for coverage fraction `alpha`.
///
/// `alpha = 0.5` gives the half-sample size; larger values give
/// `max(ceil(alpha n), floor((n + p + 1) / 2))`.
pub fn default_h(n: usize, p: usize, alpha: f64) -> Result<usize> {
    if n <= p {
        return Err(Error::TooFewObservations { n, p });
    }
    if !(0.5..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in [0.5, 1], got {alpha}"
        )));
    }
    let base = half_sample(n, p);
    if alpha == 0.5 {
        return Ok(base);
    }
    let raw = alpha * n as f64;
    // guard against 0.7 * 100 = 70.00000000000001 style round-off
    let ceil = if (raw - raw.round()).abs() < 1e-9 {
        raw.round()
    } else {
        raw.ceil()
    } as usize;
    Ok(ceil.max(base).min(n))
}

/// Number of random `(p+1)`-subsets needed so that at least one is clean with
/// probability 0.99 when a fraction `eps0` of the data is contaminated.
pub fn num_starts(eps0: f64, p: usize) -> Result<usize> {
    if !(0.0..1.0).contains(&eps0) {
        return Err(Error::InvalidParameter(format!(
            "eps0 must lie in [0, 1), got {eps0}"
        )));
    }
    let clean = (1.0 - eps0).powi(p as i32 + 1);
    if clean >= 1.0 {
        return Ok(1);
    }
    let m = 0.01f64.ln() / (1.0 - clean).ln();
    Ok((m.ceil() as usize).max(1))
}

/// Assumed contamination bound used to size the start count: `4 (1 - alpha) / 5`.
pub fn eps0_for_alpha(alpha: f64) -> f64 {
    4.0 * (1.0 - alpha) / 5.0
}

/// Tuning parameters for one estimator run.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgoParams {
    pub alpha: f64,
    pub h: usize,
    /// Directions per candidate (`K`).
    pub directions: usize,
    /// Concentration stages (`L`).
    pub stages: usize,
    /// Number of random starting subsets (`M_p`).
    pub starts: usize,
    pub seed: u64,
}

impl AlgoParams {
    /// Defaults for an `n x p` problem: `h` from `alpha`, K = 25, L = 3 and the
    /// start count from [`num_starts`] with `eps0 = 4 (1 - alpha) / 5`.
    pub fn new(n: usize, p: usize, alpha: f64) -> Result<Self> {
        let h = default_h(n, p, alpha)?;
        let starts = num_starts(eps0_for_alpha(alpha), p)?;
        Ok(AlgoParams {
            alpha,
            h,
            directions: DEFAULT_DIRECTIONS,
            stages: DEFAULT_STAGES,
            starts,
            seed: 0,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_starts(mut self, starts: usize) -> Self {
        self.starts = starts;
        self
    }

    pub fn with_directions(mut self, k: usize) -> Self {
        self.directions = k;
        self
    }

    pub fn with_stages(mut self, l: usize) -> Self {
        self.stages = l;
        self
    }

    pub fn with_h(mut self, h: usize) -> Self {
        self.h = h;
        self
    }

    pub fn validate(&self, n: usize, p: usize) -> Result<()> {
        if n <= p {
            return Err(Error::TooFewObservations { n, p });
        }
        let lo = half_sample(n, p);
        if self.h < lo || self.h > n {
            return Err(Error::InvalidParameter(format!(
                "h = {} outside [{lo}, {n}]",
                self.h
            )));
        }
        if self.directions == 0 || self.stages == 0 || self.starts == 0 {
            return Err(Error::InvalidParameter(
                "directions, stages and starts must all be at least 1".into(),
            ));
        }
        Ok(())
    }
}
