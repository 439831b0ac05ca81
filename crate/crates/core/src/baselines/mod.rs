//! Simplified affine-equivariant competitors: Stahel-Donoho outlyingness,
//! a FastMCD-style C-step search and a FastMVE-style start scorer.
//!
//! All three share the FastPCS conventions: one substream per start (or
//! direction), ties broken by lower index, and results independent of the
//! execution mode.

mod mcd;
mod mve;
mod sde;

use std::fmt;
use std::str::FromStr;

pub use mcd::{c_steps, fastmcd_run, fastmcd_with, CStepOutcome, CStepTrace, MAX_C_STEPS};
pub use mve::{fastmve_run, fastmve_with, mve_proxy};
pub use sde::{projection_outlyingness, sde_index, sde_outlyingness, sde_with};

use crate::data::{smallest_k, Dataset, SubsetIndex};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::moments::{subset_moments, LocationScatter};
use crate::params::AlgoParams;
use crate::pcs::{detect_exact_fit, Direction, FastPcs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    FastPcs,
    Sde,
    Mcd,
    Mve,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::FastPcs, Method::Sde, Method::Mcd, Method::Mve];

    pub fn name(self) -> &'static str {
        match self {
            Method::FastPcs => "fastpcs",
            Method::Sde => "sde",
            Method::Mcd => "mcd",
            Method::Mve => "mve",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fastpcs" | "pcs" => Ok(Method::FastPcs),
            "sde" => Ok(Method::Sde),
            "mcd" | "fastmcd" => Ok(Method::Mcd),
            "mve" | "fastmve" => Ok(Method::Mve),
            other => Err(Error::InvalidParameter(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BaselineResult {
    pub method: Method,
    pub h_star: SubsetIndex,
    pub fit: LocationScatter,
    /// `d_MD,i(t_*, S_*)`, or hyperplane distance under an exact fit.
    pub outlyingness: Vec<f64>,
    /// Determinant (MCD), volume proxy (MVE); `None` for SDE.
    pub criterion: Option<f64>,
    pub exact_fit: Option<Direction>,
}

/// Fits `subset` and reports Mahalanobis outlyingness, falling back to an
/// exact-fit description when the scatter is singular.
fn finish(
    data: &Dataset,
    method: Method,
    h: usize,
    subset: SubsetIndex,
    criterion: Option<f64>,
) -> Result<BaselineResult> {
    let fit = subset_moments(data, &subset)?;
    if fit.is_singular() {
        let d = detect_exact_fit(data, h, &subset).ok_or_else(|| {
            Error::EstimationFailure(format!("{method}: singular scatter without exact fit"))
        })?;
        return Ok(exact_fit_result(data, method, h, d));
    }
    let outlyingness = fit.distances_sq(data)?.into_iter().map(f64::sqrt).collect();
    Ok(BaselineResult {
        method,
        h_star: subset,
        fit,
        outlyingness,
        criterion,
        exact_fit: None,
    })
}

fn exact_fit_result(data: &Dataset, method: Method, h: usize, d: Direction) -> BaselineResult {
    let outlyingness: Vec<f64> = data.rows().map(|x| d.residual(x).abs()).collect();
    let h_star = smallest_k(&outlyingness, h);
    let fit = subset_moments(data, &h_star).expect("h >= p + 1");
    BaselineResult {
        method,
        h_star,
        fit,
        outlyingness,
        criterion: Some(0.0),
        exact_fit: Some(d),
    }
}

/// Runs `method` with `params`; SDE uses `params.starts` directions.
pub fn run_method(
    method: Method,
    data: &Dataset,
    params: &AlgoParams,
    execution: Execution,
) -> Result<BaselineResult> {
    match method {
        Method::FastPcs => {
            let res = FastPcs::new(params.clone())
                .execution(execution)
                .run(data)?;
            let criterion = res.selected_incongruence();
            Ok(BaselineResult {
                method,
                h_star: res.h_star,
                fit: res.fit,
                outlyingness: res.outlyingness,
                criterion,
                exact_fit: res.exact_fit,
            })
        }
        Method::Sde => sde_with(data, params.starts, params.h, params.seed, execution),
        Method::Mcd => fastmcd_with(data, params, execution),
        Method::Mve => fastmve_with(data, params, execution),
    }
}
