use std::collections::HashSet;
use std::str::FromStr;

use crate::baselines::Method;
use crate::error::{Error, Result};

use super::sweep::{Mode, NuDraw, SweepConfig};

fn list<T: FromStr>(value: &str, line: usize, what: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>().map_err(|_| Error::Config {
                line,
                message: format!("cannot parse '{s}' as {what}"),
            })
        })
        .collect::<Result<Vec<T>>>()
        .and_then(|v| {
            if v.is_empty() {
                Err(Error::Config { line, message: format!("empty {what} list") })
            } else {
                Ok(v)
            }
        })
}

fn single<T: FromStr>(value: &str, line: usize, what: &str) -> Result<T> {
    value.trim().parse::<T>().map_err(|_| Error::Config {
        line,
        message: format!("cannot parse '{}' as {what}", value.trim()),
    })
}

fn parse_nu(value: &str, line: usize) -> Result<NuDraw> {
    let v = value.trim();
    if let Some(inner) = v.strip_prefix("uniform(").and_then(|s| s.strip_suffix(')')) {
        let bounds: Vec<f64> = list(inner, line, "number")?;
        if bounds.len() != 2 {
            return Err(Error::Config { line, message: "uniform(lo,hi) needs two bounds".into() });
        }
        return Ok(NuDraw::Uniform { lo: bounds[0], hi: bounds[1] });
    }
    Ok(NuDraw::Fixed(list(v, line, "number")?))
}

/// Parses a flat `key = value` sweep description. `#` starts a comment; list
/// values are comma separated.
///
/// ```text
/// mode = sweep
/// p = 4, 8
/// eps = 0.1, 0.4
/// config = shift
/// nu = uniform(0, 10)
/// reps = 100
/// seed = 1
/// ```
pub fn parse_config(text: &str) -> Result<SweepConfig> {
    let mut cfg = SweepConfig::default();
    let mut seen = HashSet::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Config { line, message: format!("expected key = value, found '{content}'") });
        };
        let key = key.trim().to_ascii_lowercase();
        if !seen.insert(key.clone()) {
            return Err(Error::Config { line, message: format!("duplicate key '{key}'") });
        }
        match key.as_str() {
            "mode" => {
                cfg.mode = match value.trim() {
                    "sweep" => Mode::Sweep,
                    "accuracy" => Mode::Accuracy,
                    other => {
                        return Err(Error::Config { line, message: format!("unknown mode '{other}'") })
                    }
                }
            }
            "p" => cfg.p = list(value, line, "dimension")?,
            "n" => cfg.n = Some(list(value, line, "sample size")?),
            "n_per_p" => cfg.n_per_p = single(value, line, "integer")?,
            "eps" => {
                cfg.eps = list(value, line, "number")?;
                if let Some(e) = cfg.eps.iter().find(|e| !(0.0..0.5).contains(*e)) {
                    return Err(Error::Config { line, message: format!("eps {e} outside [0, 0.5)") });
                }
            }
            "config" | "configs" => cfg.configs = list(value, line, "configuration")?,
            "core" | "cores" => cfg.cores = list(value, line, "core")?,
            "alpha" => {
                cfg.alpha = list(value, line, "number")?;
                if let Some(a) = cfg.alpha.iter().find(|a| !(0.5..1.0).contains(*a)) {
                    return Err(Error::Config { line, message: format!("alpha {a} outside [0.5, 1)") });
                }
            }
            "reps" => cfg.reps = single(value, line, "integer")?,
            "seed" => cfg.seed = single(value, line, "integer")?,
            "methods" => cfg.methods = list::<Method>(value, line, "method")?,
            "nu" => cfg.nu = parse_nu(value, line)?,
            "timing" => cfg.timing = single(value, line, "true or false")?,
            other => {
                return Err(Error::Config { line, message: format!("unknown key '{other}'") });
            }
        }
    }
    cfg.validate().map_err(|e| Error::Config { line: 0, message: e.to_string() })?;
    Ok(cfg)
}
