//! Robust multivariate outlier detection with projection congruent subsets.
//!
//! The crate is organised around a shared numerical core ([`data`],
//! [`moments`], [`chisq`], [`params`], [`reweight`]), the FastPCS search in
//! [`pcs`], simplified affine-equivariant competitors in [`baselines`] and a
//! Monte-Carlo contamination lab in [`simlab`]. [`casestudy`] and [`io`]
//! support the command-line front end.
//!
//! ```
//! use fastpcs::{fastpcs_run, AlgoParams, Dataset};
//!
//! let rows: Vec<[f64; 2]> = (0..40)
//!     .map(|i| {
//!         let t = i as f64;
//!         if i < 30 { [(t * 0.7).sin(), (t * 1.3).cos()] } else { [8.0 + 0.01 * t, 8.0] }
//!     })
//!     .collect();
//! let data = Dataset::from_rows(&rows)?;
//! let params = AlgoParams::new(data.n(), data.p(), 0.5)?.with_seed(7);
//! let result = fastpcs_run(&data, &params)?;
//! assert!(result.h_star.iter().all(|i| i < 30));
//! # Ok::<(), fastpcs::Error>(())
//! ```

pub mod baselines;
pub mod casestudy;
pub mod chisq;
pub mod data;
pub mod error;
pub mod exec;
pub mod io;
pub mod moments;
pub mod params;
pub mod pcs;
pub mod reweight;
pub mod rng;
pub mod simlab;

pub use chisq::chisq_quantile;
pub use data::{Dataset, SubsetIndex};
pub use error::{Error, Result};
pub use exec::Execution;
pub use moments::{mahalanobis_sq, subset_moments, LocationScatter};
pub use params::{default_h, num_starts, AlgoParams};
pub use pcs::{fastpcs_run, Direction, FastPcs, PcsResult};
pub use reweight::reweight_hard_threshold;
