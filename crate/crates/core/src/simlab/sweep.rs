use std::fmt;
use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baselines::{run_method, Method};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::io::fmt_f64;
use crate::moments::subset_moments;
use crate::params::AlgoParams;
use crate::reweight::reweight_hard_threshold;
use crate::rng::derive_seed;

use super::generate::{generate, Config, ContaminationSpec, Core};
use super::metrics::{bias, misclassification};

/// Largest sample size in an accuracy curve.
pub const ACCURACY_MAX_N: usize = 599;
pub const ACCURACY_DEFAULT_N: [usize; 6] = [100, 200, 300, 400, 500, 599];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Contaminated grid: bias and misclassification per method.
    Sweep,
    /// Clean samples over a grid of `n`: raw and reweighted bias.
    Accuracy,
}

/// How the separation of each replication is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum NuDraw {
    /// Every value is its own grid axis.
    Fixed(Vec<f64>),
    /// One draw per replication, shared by all methods.
    Uniform { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub mode: Mode,
    pub p: Vec<usize>,
    /// Explicit sample sizes; otherwise `n_per_p * p`.
    pub n: Option<Vec<usize>>,
    pub n_per_p: usize,
    pub eps: Vec<f64>,
    pub configs: Vec<Config>,
    pub cores: Vec<Core>,
    pub alpha: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub nu: NuDraw,
    /// Record wall-clock runtimes. Off by default so that output bytes only
    /// depend on the configuration.
    pub timing: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            mode: Mode::Sweep,
            p: vec![4],
            n: None,
            n_per_p: 25,
            eps: vec![0.1],
            configs: vec![Config::Shift],
            cores: vec![Core::Normal],
            alpha: vec![0.5],
            reps: 100,
            seed: 0,
            methods: Method::ALL.to_vec(),
            nu: NuDraw::Uniform { lo: 0.0, hi: 10.0 },
            timing: false,
        }
    }
}

/// One point of the experimental grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub p: usize,
    pub n: usize,
    pub eps: f64,
    pub config: Config,
    pub core: Core,
    pub alpha: f64,
    /// Fixed separation, `None` for drawn or unused ones.
    pub nu: Option<f64>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.reps == 0 {
            return bad("reps must be at least 1");
        }
        if self.methods.is_empty() {
            return bad("no methods requested");
        }
        if self.p.is_empty() || self.p.contains(&0) {
            return bad("p must be a non-empty list of positive dimensions");
        }
        if let Some(e) = self.eps.iter().find(|e| !(0.0..0.5).contains(*e)) {
            return Err(Error::InvalidParameter(format!("eps must lie in [0, 0.5), got {e}")));
        }
        if let Some(a) = self.alpha.iter().find(|a| !(0.5..1.0).contains(*a)) {
            return Err(Error::InvalidParameter(format!("alpha must lie in [0.5, 1), got {a}")));
        }
        match &self.nu {
            NuDraw::Fixed(v) if v.is_empty() || v.iter().any(|x| !(*x >= 0.0 && x.is_finite())) => {
                return bad("nu values must be finite and >= 0");
            }
            NuDraw::Uniform { lo, hi } if !(0.0 <= *lo && lo < hi && hi.is_finite()) => {
                return bad("nu range must satisfy 0 <= lo < hi");
            }
            _ => {}
        }
        if self.mode == Mode::Accuracy {
            if let Some(n) = self.sizes().iter().find(|n| **n > ACCURACY_MAX_N) {
                return Err(Error::InvalidParameter(format!(
                    "accuracy curves stop at n = {ACCURACY_MAX_N}, got {n}"
                )));
            }
        }
        Ok(())
    }

    fn sizes(&self) -> Vec<usize> {
        match (&self.n, self.mode) {
            (Some(n), _) => n.clone(),
            (None, Mode::Accuracy) => ACCURACY_DEFAULT_N.to_vec(),
            (None, Mode::Sweep) => Vec::new(),
        }
    }

    /// Grid cells in canonical order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        let (eps, configs) = match self.mode {
            Mode::Sweep => (self.eps.clone(), self.configs.clone()),
            Mode::Accuracy => (vec![0.0], vec![Config::None]),
        };
        for &p in &self.p {
            let sizes = match &self.n {
                Some(n) => n.clone(),
                None if self.mode == Mode::Accuracy => ACCURACY_DEFAULT_N.to_vec(),
                None => vec![self.n_per_p * p],
            };
            for &n in &sizes {
                for &e in &eps {
                    for &config in &configs {
                        for &core in &self.cores {
                            for &alpha in &self.alpha {
                                let nus: Vec<Option<f64>> = match &self.nu {
                                    NuDraw::Fixed(v) if config.uses_nu() => {
                                        v.iter().map(|x| Some(*x)).collect()
                                    }
                                    _ => vec![None],
                                };
                                for nu in nus {
                                    cells.push(Cell { p, n, eps: e, config, core, alpha, nu });
                                }
                            }
                        }
                    }
                }
            }
        }
        cells
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    ExactFit,
    Failed,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Ok => "ok",
            Status::ExactFit => "exact_fit",
            Status::Failed => "failed",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Method name, suffixed `+rw` for reweighted fits.
    pub method: String,
    pub p: usize,
    pub n: usize,
    pub eps: f64,
    pub config: Config,
    pub core: Core,
    pub alpha: f64,
    /// Realized separation of the replication.
    pub nu: Option<f64>,
    pub rep: usize,
    pub bias: Option<f64>,
    pub misrate: Option<f64>,
    pub runtime: Option<f64>,
    pub seed: u64,
    pub status: Status,
}

pub const SWEEP_COLUMNS: [&str; 14] = [
    "method", "p", "n", "eps", "config", "core", "alpha", "nu", "rep", "bias", "misrate", "runtime",
    "seed", "status",
];

fn job(cfg: &SweepConfig, cell: &Cell, cell_index: usize, rep: usize) -> Vec<SweepRow> {
    let seed = derive_seed(cfg.seed, &[cell_index as u64, rep as u64]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nu = match (cell.nu, &cfg.nu) {
        (Some(nu), _) => nu,
        (None, NuDraw::Uniform { lo, hi }) if cell.config.uses_nu() => rng.random_range(*lo..*hi),
        _ => 0.0,
    };
    let row = |method: String, status: Status| SweepRow {
        method,
        p: cell.p,
        n: cell.n,
        eps: cell.eps,
        config: cell.config,
        core: cell.core,
        alpha: cell.alpha,
        nu: None,
        rep,
        bias: None,
        misrate: None,
        runtime: None,
        seed,
        status,
    };
    let failed_all = |nu: Option<f64>| -> Vec<SweepRow> {
        cfg.methods
            .iter()
            .flat_map(|m| {
                let mut names = vec![m.name().to_string()];
                if cfg.mode == Mode::Accuracy {
                    names.push(format!("{}+rw", m.name()));
                }
                names
            })
            .map(|name| SweepRow { nu, ..row(name, Status::Failed) })
            .collect()
    };
    let sample = match ContaminationSpec::new(cell.config, cell.eps, nu, cell.core, cell.p, cell.n)
        .and_then(|spec| generate(&spec, &mut rng))
    {
        Ok(s) => s,
        Err(_) => return failed_all(None),
    };
    let params = match AlgoParams::new(cell.n, cell.p, cell.alpha) {
        Ok(p) => p.with_seed(seed),
        Err(_) => return failed_all(sample.nu_realized),
    };

    let mut rows = Vec::new();
    for &method in &cfg.methods {
        let start = Instant::now();
        let result = run_method(method, &sample.data, &params, Execution::Sequential);
        let runtime = cfg.timing.then(|| start.elapsed().as_secs_f64());
        let base = SweepRow { nu: sample.nu_realized, runtime, ..row(method.name().into(), Status::Ok) };
        let Ok(fit) = result else {
            rows.push(SweepRow { status: Status::Failed, ..base.clone() });
            if cfg.mode == Mode::Accuracy {
                rows.push(SweepRow { method: format!("{method}+rw"), status: Status::Failed, ..base });
            }
            continue;
        };
        let misrate = if sample.outlier_index.is_empty() {
            None
        } else {
            misclassification(&sample.outlier_index, &fit.h_star).ok()
        };
        let status = if fit.exact_fit.is_some() { Status::ExactFit } else { Status::Ok };
        let raw_bias = bias(fit.fit.scatter(), sample.truth.scatter()).ok();
        rows.push(SweepRow { bias: raw_bias, misrate, status, ..base.clone() });
        if cfg.mode == Mode::Accuracy {
            let rw_bias = reweight_hard_threshold(&sample.data, &fit.fit)
                .and_then(|j| subset_moments(&sample.data, &j))
                .ok()
                .and_then(|ls| bias(ls.scatter(), sample.truth.scatter()).ok());
            let status = if rw_bias.is_some() { status } else { Status::Failed };
            rows.push(SweepRow {
                method: format!("{method}+rw"),
                bias: rw_bias,
                status,
                ..base
            });
        }
    }
    rows
}

/// Runs every cell x replication job; rows come back in canonical order
/// (cell, replication, method) whatever the execution mode.
pub fn run_sweep_with(cfg: &SweepConfig, execution: Execution) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let cells = cfg.cells();
    let reps = cfg.reps;
    let jobs = execution.map(cells.len() * reps, |j| {
        let (c, r) = (j / reps, j % reps);
        job(cfg, &cells[c], c, r)
    });
    Ok(jobs.into_iter().flatten().collect())
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    if cfg.mode != Mode::Sweep {
        return Err(Error::InvalidParameter("run_sweep expects mode=sweep".into()));
    }
    run_sweep_with(cfg, Execution::default())
}

/// Bias on clean samples of growing size, raw and after reweighting.
pub fn accuracy_curve(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    let cfg = SweepConfig { mode: Mode::Accuracy, ..cfg.clone() };
    run_sweep_with(&cfg, Execution::default())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), fmt_f64)
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.method.clone(),
            r.p.to_string(),
            r.n.to_string(),
            r.eps.to_string(),
            r.config.to_string(),
            r.core.to_string(),
            r.alpha.to_string(),
            fmt_opt(r.nu),
            r.rep.to_string(),
            fmt_opt(r.bias),
            fmt_opt(r.misrate),
            fmt_opt(r.runtime),
            r.seed.to_string(),
            r.status.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}
