use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::chisq::chisq_quantile;
use crate::data::{Dataset, SubsetIndex};
use crate::error::{Error, Result};
use crate::moments::LocationScatter;

use super::metrics::nu_distance;

/// Placement of the contaminating component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Config {
    None,
    Shift,
    PointMass,
    BarrowWheel,
}

/// Distribution of both components before shifting and scaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Core {
    Normal,
    Cauchy,
}

impl Config {
    pub fn name(self) -> &'static str {
        match self {
            Config::None => "none",
            Config::Shift => "shift",
            Config::PointMass => "pointmass",
            Config::BarrowWheel => "barrow",
        }
    }

    /// Whether the separation `nu` means anything for this configuration.
    pub fn uses_nu(self) -> bool {
        matches!(self, Config::Shift | Config::PointMass)
    }
}

impl Core {
    pub fn name(self) -> &'static str {
        match self {
            Core::Normal => "normal",
            Core::Cauchy => "cauchy",
        }
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for Core {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Config {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" | "clean" => Ok(Config::None),
            "shift" => Ok(Config::Shift),
            "pointmass" | "point" => Ok(Config::PointMass),
            "barrow" | "barrowwheel" => Ok(Config::BarrowWheel),
            other => Err(Error::InvalidParameter(format!("unknown configuration '{other}'"))),
        }
    }
}

impl FromStr for Core {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" | "gaussian" => Ok(Core::Normal),
            "cauchy" => Ok(Core::Cauchy),
            other => Err(Error::InvalidParameter(format!("unknown core '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContaminationSpec {
    pub config: Config,
    pub eps: f64,
    pub nu: f64,
    pub core: Core,
    pub p: usize,
    pub n: usize,
}

impl ContaminationSpec {
    pub fn new(config: Config, eps: f64, nu: f64, core: Core, p: usize, n: usize) -> Result<Self> {
        let spec = ContaminationSpec { config, eps, nu, core, p, n };
        spec.validate()?;
        Ok(spec)
    }

    pub fn clean(core: Core, p: usize, n: usize) -> Self {
        ContaminationSpec { config: Config::None, eps: 0.0, nu: 0.0, core, p, n }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.eps) {
            return Err(Error::InvalidParameter(format!(
                "eps must lie in [0, 0.5), got {}",
                self.eps
            )));
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(Error::InvalidParameter(format!("nu must be >= 0, got {}", self.nu)));
        }
        if self.p == 0 || self.n <= self.p {
            return Err(Error::TooFewObservations { n: self.n, p: self.p });
        }
        if self.config == Config::BarrowWheel && self.p < 2 {
            return Err(Error::InvalidParameter("Barrow wheel needs p >= 2".into()));
        }
        Ok(())
    }

    /// `floor(eps n + 1/2)`; zero for the clean configuration.
    pub fn outlier_count(&self) -> usize {
        if self.config == Config::None {
            0
        } else {
            (self.eps * self.n as f64 + 0.5).floor() as usize
        }
    }
}

/// A generated sample with its ground truth.
#[derive(Debug, Clone)]
pub struct LabeledSample {
    pub data: Dataset,
    /// Rows drawn from the contaminating component.
    pub outlier_index: SubsetIndex,
    /// Center and scatter of the uncontaminated component.
    pub truth: LocationScatter,
    /// Separation actually achieved, `None` without outliers.
    pub nu_realized: Option<f64>,
}

fn core_draw<R: Rng + ?Sized>(core: Core, p: usize, rng: &mut R) -> Vec<f64> {
    let mut z: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
    if core == Core::Cauchy {
        let w: f64 = rng.sample(StandardNormal);
        let w = w.abs();
        z.iter_mut().for_each(|v| *v /= w);
    }
    z
}

/// Shuffles clean and outlying rows together and records where the outliers
/// landed.
fn assemble<R: Rng + ?Sized>(
    p: usize,
    clean: Vec<Vec<f64>>,
    outliers: Vec<Vec<f64>>,
    rng: &mut R,
) -> Result<(Dataset, SubsetIndex)> {
    let n_clean = clean.len();
    let mut rows: Vec<(bool, Vec<f64>)> = clean
        .into_iter()
        .map(|r| (false, r))
        .chain(outliers.into_iter().map(|r| (true, r)))
        .collect();
    rows.shuffle(rng);
    let outlier_index = SubsetIndex::from_unsorted(
        rows.iter().enumerate().filter(|(_, r)| r.0).map(|(i, _)| i).collect(),
    );
    debug_assert_eq!(rows.len() - outlier_index.len(), n_clean);
    let values: Vec<f64> = rows.into_iter().flat_map(|(_, r)| r).collect();
    let n = values.len() / p;
    Ok((Dataset::from_row_major(n, p, values)?, outlier_index))
}

/// Uncontaminated sample from the standard model.
pub fn gen_clean<R: Rng + ?Sized>(spec: &ContaminationSpec, rng: &mut R) -> Result<LabeledSample> {
    let rows: Vec<Vec<f64>> = (0..spec.n).map(|_| core_draw(spec.core, spec.p, rng)).collect();
    let values: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(LabeledSample {
        data: Dataset::from_row_major(spec.n, spec.p, values)?,
        outlier_index: SubsetIndex::from_unsorted(Vec::new()),
        truth: LocationScatter::standard(spec.p),
        nu_realized: None,
    })
}

/// Moves the outlier batch `z` along the first axis by the smallest shift
/// putting every member at squared distance at least `target` from the
/// origin, so the closest member lands exactly on `target`. When every member
/// already exceeds `target` through its other coordinates the batch is placed
/// as close as it gets.
fn shift_to_separation(batch: &mut [Vec<f64>], target: f64) {
    let rest = |z: &[f64]| z[1..].iter().map(|v| v * v).sum::<f64>();
    let reachable = batch
        .iter()
        .filter(|z| rest(z) <= target)
        .map(|z| -z[0] + (target - rest(z)).sqrt())
        .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.max(d))));
    let delta = match reachable {
        Some(d) => d,
        None => {
            let nearest = batch
                .iter()
                .min_by(|a, b| rest(a).total_cmp(&rest(b)))
                .expect("non-empty batch");
            -nearest[0]
        }
    };
    batch.iter_mut().for_each(|z| z[0] += delta);
}

fn gen_located<R: Rng + ?Sized>(
    spec: &ContaminationSpec,
    spread: f64,
    rng: &mut R,
) -> Result<LabeledSample> {
    spec.validate()?;
    let m = spec.outlier_count();
    if m == 0 {
        return gen_clean(spec, rng);
    }
    let p = spec.p;
    let clean: Vec<Vec<f64>> = (0..spec.n - m).map(|_| core_draw(spec.core, p, rng)).collect();
    let mut outliers: Vec<Vec<f64>> = (0..m)
        .map(|_| core_draw(spec.core, p, rng).into_iter().map(|v| v * spread).collect())
        .collect();
    let target = spec.nu * spec.nu * chisq_quantile(0.99, p)?;
    shift_to_separation(&mut outliers, target);
    let (data, outlier_index) = assemble(p, clean, outliers, rng)?;
    let truth = LocationScatter::standard(p);
    let nu_realized = Some(nu_distance(&data, &outlier_index, &truth)?);
    Ok(LabeledSample { data, outlier_index, truth, nu_realized })
}

/// Shift contamination: outliers share the model scatter and sit at
/// separation `spec.nu` along the first axis.
pub fn gen_shift<R: Rng + ?Sized>(spec: &ContaminationSpec, rng: &mut R) -> Result<LabeledSample> {
    gen_located(spec, 1.0, rng)
}

/// Near point-mass contamination: outlier scatter `1e-4 I`.
pub fn gen_pointmass<R: Rng + ?Sized>(spec: &ContaminationSpec, rng: &mut R) -> Result<LabeledSample> {
    gen_located(spec, 1e-2, rng)
}

/// Uniformly distributed rotation: QR of a Gaussian matrix with the signs
/// of `R`'s diagonal folded into `Q`.
pub fn random_rotation<R: Rng + ?Sized>(p: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(p, p, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..p {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Barrow wheel: a disk flattened along the first axis plus an axle of
/// outliers through it, rotated at random.
pub fn gen_barrow_wheel<R: Rng + ?Sized>(spec: &ContaminationSpec, rng: &mut R) -> Result<LabeledSample> {
    spec.validate()?;
    let p = spec.p;
    if p < 2 {
        return Err(Error::InvalidParameter("Barrow wheel needs p >= 2".into()));
    }
    let m = spec.outlier_count();
    let clean: Vec<Vec<f64>> = (0..spec.n - m)
        .map(|_| {
            let mut z = core_draw(spec.core, p, rng);
            z[0] *= 0.1;
            z
        })
        .collect();
    let outliers: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            let mut z = core_draw(spec.core, p, rng);
            let axle: f64 = rng.sample::<f64, _>(StandardNormal) + 4.0;
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            z.iter_mut().for_each(|v| *v *= 0.1);
            z[0] = sign * axle.abs();
            z
        })
        .collect();
    let q = random_rotation(p, rng);
    let rotate = |rows: Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        rows.into_iter()
            .map(|r| (&q * DVector::from_vec(r)).iter().copied().collect())
            .collect()
    };
    let (data, outlier_index) = assemble(p, rotate(clean), rotate(outliers), rng)?;
    let mut shape = DMatrix::identity(p, p);
    shape[(0, 0)] = 0.01;
    let truth = LocationScatter::new(DVector::zeros(p), &q * shape * q.transpose());
    let nu_realized = if m > 0 {
        Some(nu_distance(&data, &outlier_index, &truth)?)
    } else {
        None
    };
    Ok(LabeledSample { data, outlier_index, truth, nu_realized })
}

/// Dispatches on `spec.config`.
pub fn generate<R: Rng + ?Sized>(spec: &ContaminationSpec, rng: &mut R) -> Result<LabeledSample> {
    match spec.config {
        Config::None => {
            spec.validate()?;
            gen_clean(spec, rng)
        }
        Config::Shift => gen_shift(spec, rng),
        Config::PointMass => gen_pointmass(spec, rng),
        Config::BarrowWheel => gen_barrow_wheel(spec, rng),
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::data::median;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn column(data: &Dataset, j: usize) -> Vec<f64> {
        data.rows().map(|r| r[j]).collect()
    }

    #[test]
    fn normal_mean_near_zero() {
        let s = gen_clean(&ContaminationSpec::clean(Core::Normal, 3, 100_000), &mut rng(1)).unwrap();
        for j in 0..3 {
            let mean = column(&s.data, j).iter().sum::<f64>() / 1e5;
            assert!(mean.abs() < 0.02, "{mean}");
        }
    }

    #[test]
    fn cauchy_median_and_quartiles() {
        let s = gen_clean(&ContaminationSpec::clean(Core::Cauchy, 2, 100_000), &mut rng(2)).unwrap();
        for j in 0..2 {
            assert!(median(&column(&s.data, j)).abs() < 0.05);
        }
        let mut x = column(
            &gen_clean(&ContaminationSpec::clean(Core::Cauchy, 1, 100_000), &mut rng(3)).unwrap().data,
            0,
        );
        x.sort_by(f64::total_cmp);
        let iqr = x[75_000] - x[25_000];
        assert!((iqr - 2.0).abs() < 0.1, "{iqr}");
    }

    #[test]
    fn outlier_count_rounds_half_up() {
        let spec = ContaminationSpec::new(Config::PointMass, 0.4, 3.0, Core::Normal, 2, 100).unwrap();
        assert_eq!(spec.outlier_count(), 40);
        let spec = ContaminationSpec::new(Config::Shift, 0.25, 3.0, Core::Normal, 2, 10).unwrap();
        assert_eq!(spec.outlier_count(), 3);
        let s = gen_pointmass(
            &ContaminationSpec::new(Config::PointMass, 0.4, 3.0, Core::Normal, 2, 100).unwrap(),
            &mut rng(0),
        )
        .unwrap();
        assert_eq!(s.outlier_index.len(), 40);
    }

    #[test]
    fn separation_is_exact() {
        for (seed, config) in [(0, Config::Shift), (1, Config::PointMass), (2, Config::Shift)] {
            for nu in [1.5, 2.0, 4.0, 8.0] {
                let spec = ContaminationSpec::new(config, 0.2, nu, Core::Normal, 4, 100).unwrap();
                let s = generate(&spec, &mut rng(seed)).unwrap();
                let got = nu_distance(&s.data, &s.outlier_index, &s.truth).unwrap();
                assert!((got - nu).abs() <= 1e-6, "{config} nu={nu} got {got}");
                assert_eq!(s.nu_realized, Some(got));
            }
        }
    }

    #[test]
    fn every_outlier_beyond_the_separation_radius() {
        let spec = ContaminationSpec::new(Config::Shift, 0.3, 2.0, Core::Normal, 2, 60).unwrap();
        let s = gen_shift(&spec, &mut rng(9)).unwrap();
        let bound = 4.0 * chisq_quantile(0.99, 2).unwrap();
        for i in s.outlier_index.iter() {
            assert!(s.truth.mahalanobis_sq(s.data.row(i)).unwrap() >= bound * (1.0 - 1e-12));
        }
    }

    #[test]
    fn unreachable_separation_is_reported() {
        // radial spread of 15 Cauchy outliers in p = 8 is far beyond nu = 0.01
        let spec = ContaminationSpec::new(Config::Shift, 0.3, 0.01, Core::Cauchy, 8, 50).unwrap();
        let s = gen_shift(&spec, &mut rng(4)).unwrap();
        assert!(s.nu_realized.unwrap() > 0.01);
    }

    #[test]
    fn pointmass_spread() {
        let p = 3;
        let spec = ContaminationSpec::new(Config::PointMass, 0.4, 5.0, Core::Normal, p, 2000).unwrap();
        let s = gen_pointmass(&spec, &mut rng(5)).unwrap();
        let idx: Vec<usize> = s.outlier_index.iter().collect();
        let mut sum = 0.0;
        let mut count = 0.0;
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a + 1..] {
                let d2: f64 = s.data.row(i).iter().zip(s.data.row(j)).map(|(x, y)| (x - y).powi(2)).sum();
                sum += d2;
                count += 1.0;
            }
        }
        let rms = (sum / count).sqrt();
        let expected = 1e-2 * (2.0 * p as f64).sqrt();
        assert!((rms / expected - 1.0).abs() < 0.05, "{rms} vs {expected}");
    }

    #[test]
    fn eps_zero_is_clean() {
        let spec = ContaminationSpec::new(Config::Shift, 0.0, 3.0, Core::Normal, 2, 20).unwrap();
        let s = generate(&spec, &mut rng(6)).unwrap();
        assert!(s.outlier_index.is_empty());
        assert!(s.nu_realized.is_none());
    }

    #[test]
    fn rotation_is_orthogonal() {
        let q = random_rotation(5, &mut rng(7));
        let err = (&q * q.transpose() - DMatrix::identity(5, 5)).abs().max();
        assert!(err < 1e-12);
    }

    #[test]
    fn barrow_wheel_geometry() {
        let spec = ContaminationSpec::new(Config::BarrowWheel, 0.2, 0.0, Core::Normal, 4, 10_000).unwrap();
        let s = gen_barrow_wheel(&spec, &mut rng(8)).unwrap();
        // undo the rotation through the truth: variance of good rows along its
        // thin axis should be 0.01
        let eig = s.truth.scatter().clone().symmetric_eigen();
        let (k, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let axis = eig.eigenvectors.column(k);
        let good: Vec<f64> = (0..s.data.n())
            .filter(|i| !s.outlier_index.contains(*i))
            .map(|i| s.data.row(i).iter().zip(axis.iter()).map(|(x, a)| x * a).sum())
            .collect();
        let mean = good.iter().sum::<f64>() / good.len() as f64;
        let var = good.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (good.len() - 1) as f64;
        assert!((var - 0.01).abs() < 0.001, "{var}");
    }

    #[test]
    fn barrow_wheel_outliers_far_from_truth() {
        let mut failures = 0;
        for seed in 0..200 {
            let spec = ContaminationSpec::new(Config::BarrowWheel, 0.1, 0.0, Core::Normal, 4, 400).unwrap();
            let s = gen_barrow_wheel(&spec, &mut rng(seed)).unwrap();
            let nu = s.nu_realized.unwrap();
            // nu > 1 means every outlier is beyond the 0.99 chi-square radius
            if nu <= 1.0 {
                failures += 1;
            }
        }
        assert!(failures <= 2, "{failures} of 200");
    }

    #[test]
    fn barrow_wheel_rejects_p1() {
        assert!(ContaminationSpec::new(Config::BarrowWheel, 0.1, 0.0, Core::Normal, 1, 20).is_err());
    }
}
