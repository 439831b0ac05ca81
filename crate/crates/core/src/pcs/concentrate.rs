use rand::Rng;

use crate::data::{smallest_k, Dataset, SubsetIndex};
use crate::error::Result;
use crate::params::AlgoParams;

use super::direction::{sample_directions, Direction};
use super::incongruence::relative_outlyingness;

/// A candidate subset together with a direction set.
///
/// After [`concentrate`] the directions are those of the last stage (drawn
/// before the final trim); scoring replaces them with a fresh draw from the
/// final subset.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateState {
    pub subset: SubsetIndex,
    pub directions: Vec<Direction>,
    pub incongruence: Option<f64>,
}

/// Subset size after concentration stage `stage` of `stages`:
/// `floor((n - p - 1) stage / (2 stages)) + p + 1`, capped at `h`, with the
/// last stage landing exactly on `h`.
pub fn stage_size(n: usize, p: usize, h: usize, stage: usize, stages: usize) -> usize {
    if stage >= stages {
        return h;
    }
    ((n - p - 1) * stage / (2 * stages) + p + 1).min(h)
}

/// Grows `start` to `h` observations in `params.stages` concentration steps,
/// drawing `params.directions` fresh directions from the current subset at
/// each stage.
pub fn concentrate<R: Rng + ?Sized>(
    data: &Dataset,
    start: &SubsetIndex,
    params: &AlgoParams,
    rng: &mut R,
) -> Result<CandidateState> {
    let (n, p) = (data.n(), data.p());
    let mut subset = start.clone();
    let mut directions = Vec::new();
    for stage in 1..=params.stages {
        directions = sample_directions(data, &subset, params.directions, rng)?;
        let scores = relative_outlyingness(data, &subset, &directions)?.scores;
        subset = smallest_k(&scores, stage_size(n, p, params.h, stage, params.stages));
    }
    Ok(CandidateState {
        subset,
        directions,
        incongruence: None,
    })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn schedule_examples() {
        let seq: Vec<usize> = (1..=3).map(|l| stage_size(100, 4, 52, l, 3)).collect();
        assert_eq!(seq, vec![20, 36, 52]);
        assert_eq!(stage_size(103, 10, 57, 3, 3), 57);
        assert_eq!((92 * 3) / 6 + 11, 57);
        // single stage trims straight to h
        assert_eq!(stage_size(100, 4, 52, 1, 1), 52);
        // alpha = 0.75: last stage is forced up to h
        assert_eq!(stage_size(100, 4, 75, 3, 3), 75);
    }

    #[test]
    fn schedule_is_monotone_and_ends_at_h() {
        for n in [10usize, 37, 100, 599] {
            for p in 1..6 {
                if n <= p + 1 {
                    continue;
                }
                let h = (n + p + 1) / 2;
                for stages in 1..6 {
                    let seq: Vec<usize> = (1..=stages).map(|l| stage_size(n, p, h, l, stages)).collect();
                    assert!(seq.windows(2).all(|w| w[0] <= w[1]));
                    assert_eq!(*seq.last().unwrap(), h);
                }
            }
        }
    }

    #[test]
    fn concentration_reaches_h() {
        let rows: Vec<[f64; 2]> = (0..40)
            .map(|i| {
                let t = i as f64;
                [(t * 0.37).sin() * 3.0, (t * 1.13).cos() * 2.0 + 0.01 * t]
            })
            .collect();
        let data = Dataset::from_rows(&rows).unwrap();
        let params = AlgoParams::new(40, 2, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let state = concentrate(&data, &SubsetIndex::from_unsorted(vec![1, 5, 9]), &params, &mut rng).unwrap();
        assert_eq!(state.subset.len(), params.h);
        assert_eq!(state.directions.len(), params.directions);
    }
}
