//! Run configuration: command-line flags merged over a flat `key=value`
//! file. Keys are the long flag names without the leading dashes:
//!
//! ```text
//! # theorem1 manifest
//! seed = 7
//! K = 100,150,200
//! r = 8,16
//! trials = 200
//! rho-grid = 0:0.3:0.01
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;

use super::CliError;
use crate::experiments::rho_grid;

pub const KEYS: [&str; 10] = [
    "seed", "out", "trials", "K", "r", "rho-grid", "budget", "workers", "seeds", "small",
];

/// Parses a flat `key=value` manifest. Blank lines and lines starting
/// with `#` are skipped; unknown or repeated keys are errors.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key=value", no + 1)))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(CliError::Config(format!("line {}: unknown key {key:?}", no + 1)));
        }
        if out.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(CliError::Config(format!("line {}: repeated key {key:?}", no + 1)));
        }
    }
    Ok(out)
}

fn parse_one<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse {v:?}")))
}

pub fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>, CliError> {
    v.split(',').map(|s| parse_one(key, s)).collect()
}

/// `start:stop:step` for an inclusive grid, or an explicit comma list.
pub fn parse_rho_grid(v: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = v.split(':').collect();
    let grid = match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step): (f64, f64, f64) = (
                parse_one("rho-grid", start)?,
                parse_one("rho-grid", stop)?,
                parse_one("rho-grid", step)?,
            );
            if !(step > 0.0) || !(stop >= start) {
                return Err(CliError::Config(format!("rho-grid: bad range {v:?}")));
            }
            rho_grid(start, stop, step)
        }
        [_] => parse_list("rho-grid", v)?,
        _ => return Err(CliError::Config(format!("rho-grid: bad grid {v:?}"))),
    };
    if grid.iter().any(|r| !(0.0..=1.0).contains(r)) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Config(
            "rho-grid: values must be ascending and within [0, 1]".into(),
        ));
    }
    Ok(grid)
}

/// Flags as given on the command line; every field is optional so the
/// manifest can fill the gaps.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub trials: Option<usize>,
    pub k: Option<Vec<usize>>,
    pub r: Option<Vec<usize>>,
    pub rho_grid: Option<String>,
    pub budget: Option<Vec<usize>>,
    pub workers: Option<usize>,
    pub seeds: Option<usize>,
    pub small: bool,
}

/// Resolved settings of one subcommand run. Experiment parameters left
/// unset fall back to per-command defaults.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub seed: u64,
    pub out: PathBuf,
    pub trials: Option<usize>,
    #[serde(rename = "K")]
    pub k: Option<Vec<usize>>,
    pub r: Option<Vec<usize>>,
    pub rho_grid: Option<Vec<f64>>,
    pub budget: Option<Vec<usize>>,
    pub seeds: Option<usize>,
    pub small: bool,
    pub workers: usize,
}

impl RunConfig {
    /// Merges `flags` over the manifest in `file`; the command line wins.
    pub fn resolve(
        command: &str,
        flags: Overrides,
        file: &BTreeMap<String, String>,
    ) -> Result<Self, CliError> {
        let get = |key: &str| file.get(key).map(String::as_str);
        let seed = match flags.seed {
            Some(s) => s,
            None => match get("seed") {
                Some(v) => parse_one("seed", v)?,
                None => return Err(CliError::Config("--seed is required".into())),
            },
        };
        let out = flags
            .out
            .or_else(|| get("out").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("results"));
        let trials = match flags.trials {
            Some(t) => Some(t),
            None => get("trials").map(|v| parse_one("trials", v)).transpose()?,
        };
        let k = match flags.k {
            Some(k) => Some(k),
            None => get("K").map(|v| parse_list("K", v)).transpose()?,
        };
        let r = match flags.r {
            Some(r) => Some(r),
            None => get("r").map(|v| parse_list("r", v)).transpose()?,
        };
        let rho_grid = flags
            .rho_grid
            .as_deref()
            .or(get("rho-grid"))
            .map(parse_rho_grid)
            .transpose()?;
        let budget = match flags.budget {
            Some(b) => Some(b),
            None => get("budget").map(|v| parse_list("budget", v)).transpose()?,
        };
        let seeds = match flags.seeds {
            Some(s) => Some(s),
            None => get("seeds").map(|v| parse_one("seeds", v)).transpose()?,
        };
        let small = flags.small
            || get("small")
                .map(|v| parse_one::<bool>("small", v))
                .transpose()?
                .unwrap_or(false);
        let workers = match flags.workers {
            Some(w) => w,
            None => match get("workers") {
                Some(v) => parse_one("workers", v)?,
                None => std::thread::available_parallelism().map_or(1, |n| n.get()),
            },
        };
        if workers == 0 {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        if trials == Some(0) || seeds == Some(0) {
            return Err(CliError::Config("trials and seeds must be at least 1".into()));
        }
        Ok(Self {
            command: command.to_string(),
            seed,
            out,
            trials,
            k,
            r,
            rho_grid,
            budget,
            seeds,
            small,
            workers,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_parsing() {
        let m = parse_config("# c\n\nseed = 4\nK=1,2\n").unwrap();
        assert_eq!(m["seed"], "4");
        assert_eq!(m["K"], "1,2");
        assert!(parse_config("colour=red").is_err());
        assert!(parse_config("seed=1\nseed=2").is_err());
        assert!(parse_config("seed").is_err());
    }

    #[test]
    fn command_line_wins() {
        let m = parse_config("seed=4\ntrials=9\nr=3").unwrap();
        let flags = Overrides {
            seed: Some(11),
            workers: Some(2),
            ..Overrides::default()
        };
        let c = RunConfig::resolve("theorem1", flags, &m).unwrap();
        assert_eq!(c.seed, 11);
        assert_eq!(c.trials, Some(9));
        assert_eq!(c.r, Some(vec![3]));
        assert_eq!(c.workers, 2);
        assert_eq!(c.k, None);
    }

    #[test]
    fn seed_is_required() {
        let err = RunConfig::resolve("mp", Overrides::default(), &BTreeMap::new());
        assert!(matches!(err, Err(CliError::Config(_))));
    }

    #[test]
    fn rho_grids() {
        assert_eq!(parse_rho_grid("0:0.3:0.01").unwrap().len(), 31);
        assert_eq!(parse_rho_grid("0,0.09").unwrap(), vec![0.0, 0.09]);
        assert!(parse_rho_grid("0.2,0.1").is_err());
        assert!(parse_rho_grid("0:1:0").is_err());
        assert!(parse_rho_grid("a").is_err());
    }
}
