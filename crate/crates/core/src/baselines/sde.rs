use rand::seq::index;

use super::{finish, BaselineResult, Method};
use crate::data::{median, smallest_k, Dataset};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::pcs::{solve_hyperplane, Direction, MAX_DIRECTION_DRAWS};
use crate::rng::substream;

const CHUNK: usize = 64;

/// Standardized distance `|x'a - med| / mad` of every row along `d`, or
/// `None` when the projected median absolute deviation vanishes.
pub fn projection_outlyingness(data: &Dataset, d: &Direction) -> Option<Vec<f64>> {
    let z: Vec<f64> = data.rows().map(|x| d.residual(x)).collect();
    let med = median(&z);
    let dev: Vec<f64> = z.iter().map(|v| (v - med).abs()).collect();
    let mad = median(&dev);
    let spread = dev.iter().copied().fold(0.0, f64::max);
    if !(mad > 1e-12 * spread) {
        return None;
    }
    Some(dev.into_iter().map(|v| v / mad).collect())
}

fn random_direction(data: &Dataset, seed: u64, m: usize) -> Option<Direction> {
    let mut rng = substream(seed, m as u64);
    (0..MAX_DIRECTION_DRAWS).find_map(|_| {
        let rows = index::sample(&mut rng, data.n(), data.p()).into_vec();
        solve_hyperplane(data, &rows)
    })
}

/// Stahel-Donoho index `P_M(x_i)`: the largest standardized projection over
/// `directions` hyperplanes through random `p`-subsets of all observations.
pub fn sde_index(data: &Dataset, directions: usize, seed: u64, execution: Execution) -> Result<Vec<f64>> {
    if directions == 0 {
        return Err(Error::InvalidParameter("SDE needs at least one direction".into()));
    }
    let n = data.n();
    let chunks = directions.div_ceil(CHUNK);
    let partial = execution.map(chunks, |c| {
        let mut best = vec![0.0f64; n];
        let mut used = 0usize;
        for m in c * CHUNK..((c + 1) * CHUNK).min(directions) {
            let Some(scores) = random_direction(data, seed, m)
                .and_then(|d| projection_outlyingness(data, &d))
            else {
                continue;
            };
            used += 1;
            for (b, s) in best.iter_mut().zip(scores) {
                *b = b.max(s);
            }
        }
        (best, used)
    });
    let mut outlyingness = vec![0.0f64; n];
    let mut used = 0;
    for (best, u) in partial {
        used += u;
        for (o, b) in outlyingness.iter_mut().zip(best) {
            *o = o.max(b);
        }
    }
    if used == 0 {
        return Err(Error::EstimationFailure(
            "SDE: every projection had zero MAD".into(),
        ));
    }
    Ok(outlyingness)
}

/// SDE fit: `H_*` holds the `h` rows with the smallest index, and the
/// reported outlyingness is the Mahalanobis distance to their moments.
pub fn sde_with(
    data: &Dataset,
    directions: usize,
    h: usize,
    seed: u64,
    execution: Execution,
) -> Result<BaselineResult> {
    let index = sde_index(data, directions, seed, execution)?;
    finish(data, Method::Sde, h, smallest_k(&index, h), None)
}

pub fn sde_outlyingness(data: &Dataset, directions: usize, h: usize, seed: u64) -> Result<BaselineResult> {
    sde_with(data, directions, h, seed, Execution::default())
}
