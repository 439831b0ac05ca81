use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};

use fastpcs::baselines::{run_method, Method};
use fastpcs::casestudy::{
    build_variant, concrete_dataset, groups_separated, reference_separation, run_case_study,
    write_case_study_csv, Variant,
};
use fastpcs::data::median;
use fastpcs::io::{fmt_f64, read_table, write_atomic, DetectReport, ReportRow};
use fastpcs::pcs::rows_on_hyperplane;
use fastpcs::simlab::{accuracy_curve, parse_config, run_sweep, write_sweep_csv, Mode, SweepRow};
use fastpcs::{reweight_hard_threshold, AlgoParams, Execution};

/// Environment variable overriding the worker thread count.
const THREADS_VAR: &str = "FASTPCS_THREADS";

#[derive(Parser)]
#[command(name = "fastpcs", version, about = "Affine equivariant multivariate outlier detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score every row of a numeric CSV file.
    Detect {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value = "fastpcs")]
        method: Method,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a Monte-Carlo sweep described by a key=value file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Outlyingness of the early and late concrete batches.
    Casestudy {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// One of i, ii, iii, iv; all four when omitted.
        #[arg(long)]
        variant: Option<Variant>,
        #[arg(long, value_delimiter = ',', default_value = "fastpcs,sde,mcd,mve")]
        methods: Vec<Method>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn sha256_hex(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .with_context(|| format!("{THREADS_VAR} must be a thread count, got '{value}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring the thread pool")?;
    Ok(())
}

/// Returns true when the data has an exact fit.
fn detect(input: &Path, output: &Path, method: Method, alpha: f64, seed: u64) -> Result<bool> {
    eprintln!("input sha256 {}", sha256_hex(input)?);
    let table = read_table(input)?;
    let data = &table.data;
    let params = AlgoParams::new(data.n(), data.p(), alpha)?.with_seed(seed);
    let fit = run_method(method, data, &params, Execution::Parallel)?;
    let (j_plus, note) = match &fit.exact_fit {
        Some(d) => {
            let on = rows_on_hyperplane(data, d);
            let normal: Vec<String> = d.normal().iter().map(|v| fmt_f64(*v)).collect();
            let note = format!(
                "{} rows on the hyperplane normal=[{}] offset={}",
                on.len(),
                normal.join(" "),
                fmt_f64(d.offset())
            );
            (on, Some(note))
        }
        None => (reweight_hard_threshold(data, &fit.fit)?.as_slice().to_vec(), None),
    };
    let mut in_j_plus = vec![false; data.n()];
    j_plus.iter().for_each(|&i| in_j_plus[i] = true);
    let in_h = fit.h_star.mask(data.n());
    let report = DetectReport {
        method: method.to_string(),
        alpha,
        h: params.h,
        seed,
        exact_fit: note.clone(),
        rows: (0..data.n())
            .map(|i| ReportRow {
                row_id: i + 1,
                outlyingness: fit.outlyingness[i],
                in_h_star: in_h[i],
                in_j_plus: in_j_plus[i],
            })
            .collect(),
    };
    report.write(output)?;
    let flagged = in_j_plus.iter().filter(|f| !**f).count();
    eprintln!("{method}: n={} p={} h={} flagged={flagged}", data.n(), data.p(), params.h);
    if let Some(note) = note {
        eprintln!("exact fit: {note}");
    }
    Ok(fit.exact_fit.is_some())
}

fn fmt_summary(v: &[f64]) -> String {
    if v.is_empty() {
        "NA".into()
    } else {
        format!("{:.3}", median(v))
    }
}

fn simulate(config: &Path, output: &Path) -> Result<()> {
    let text = std::fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let cfg = parse_config(&text).with_context(|| format!("in {}", config.display()))?;
    let rows = match cfg.mode {
        Mode::Sweep => run_sweep(&cfg)?,
        Mode::Accuracy => accuracy_curve(&cfg)?,
    };
    let mut bytes = Vec::new();
    write_sweep_csv(&rows, &mut bytes)?;
    write_atomic(output, &bytes)?;

    let mut cells: BTreeMap<String, Vec<&SweepRow>> = BTreeMap::new();
    for r in &rows {
        let key = format!(
            "p={} n={} eps={} {} {} alpha={} {}",
            r.p, r.n, r.eps, r.config, r.core, r.alpha, r.method
        );
        cells.entry(key).or_default().push(r);
    }
    for (key, rs) in &cells {
        let bias: Vec<f64> = rs.iter().filter_map(|r| r.bias).collect();
        let mis: Vec<f64> = rs.iter().filter_map(|r| r.misrate).collect();
        let failed = rs.iter().filter(|r| r.status == fastpcs::simlab::Status::Failed).count();
        eprintln!(
            "{key}: rows={} median bias={} median misrate={} failed={failed}",
            rs.len(),
            fmt_summary(&bias),
            fmt_summary(&mis)
        );
    }
    Ok(())
}

fn casestudy(input: &Path, output: &Path, variant: Option<Variant>, methods: &[Method], seed: u64) -> Result<()> {
    if methods.is_empty() {
        bail!("no methods given");
    }
    eprintln!("input sha256 {}", sha256_hex(input)?);
    let base = concrete_dataset(&read_table(input)?)?;
    let variants = variant.map_or(Variant::ALL.to_vec(), |v| vec![v]);
    let mut all = Vec::new();
    for v in variants {
        let built = build_variant(&base, v)?;
        let sep = reference_separation(&built)?;
        eprintln!(
            "variant {v}: closest late row d2={:.2} ({:.2} x chi2_0.99)",
            sep.min_d2, sep.ratio
        );
        for &m in methods {
            let rows = run_case_study(&built, &[m], seed, Execution::Parallel)?;
            let verdict = if groups_separated(&rows) { "separated" } else { "overlap" };
            eprintln!("  {m}: {verdict}");
            all.extend(rows);
        }
    }
    let mut bytes = Vec::new();
    write_case_study_csv(&all, &mut bytes)?;
    write_atomic(output, &bytes)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    let outcome = match cli.command {
        Command::Detect { input, output, method, alpha, seed } => {
            detect(&input, &output, method, alpha, seed).map(|exact| if exact { 2 } else { 0 })
        }
        Command::Simulate { config, output } => simulate(&config, &output).map(|_| 0),
        Command::Casestudy { input, output, variant, methods, seed } => {
            casestudy(&input, &output, variant, &methods, seed).map(|_| 0)
        }
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
