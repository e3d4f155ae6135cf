//! Plain-text trainer checkpoints and trajectory CSVs.
//!
//! A checkpoint is one `key=value` pair per line:
//!
//! ```text
//! format=freqlab-loca-checkpoint-v1
//! rows=6
//! cols=6
//! alpha=1
//! step=4000
//! phase=coefficients_only
//! a=0.12,-0.4,0.05
//! l=1.2:3.9,0:5,4.5:2
//! ```
//!
//! Floats use Rust's shortest round-trip formatting, so reading back a
//! checkpoint reproduces the parameters bit for bit.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use super::trainer::{Phase, TrainerState};
use super::LocaParam;
use crate::error::{Error, Result};
use crate::output::{write_atomic, SCHEMA_VERSION};

const FORMAT: &str = "freqlab-loca-checkpoint-v1";

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Parse(e.to_string())
}


pub fn format_checkpoint(param: &LocaParam, step: usize, phase: Phase) -> String {
    let a: Vec<String> = param.a.iter().map(|v| v.to_string()).collect();
    let l: Vec<String> = param.l.iter().map(|(x, y)| format!("{x}:{y}")).collect();
    format!(
        "format={FORMAT}\nrows={}\ncols={}\nalpha={}\nstep={step}\nphase={}\na={}\nl={}\n",
        param.dims.0,
        param.dims.1,
        param.alpha,
        phase.tag(),
        a.join(","),
        l.join(",")
    )
}

pub fn write_checkpoint(path: &Path, state: &TrainerState) -> Result<()> {
    write_atomic(path, format_checkpoint(&state.param, state.step, state.phase).as_bytes())
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("bad number {s:?}: {e}")))
}

/// Parses a checkpoint into its parameters, step and phase.
pub fn parse_checkpoint(text: &str) -> Result<(LocaParam, usize, Phase)> {
    let mut kv = HashMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", n + 1)))?;
        kv.insert(k.trim(), v.trim());
    }
    let get = |k: &str| {
        kv.get(k)
            .copied()
            .ok_or_else(|| Error::Parse(format!("missing key {k}")))
    };
    if get("format")? != FORMAT {
        return Err(Error::Parse(format!("unsupported format {}", get("format")?)));
    }
    let count = |k: &str| -> Result<usize> {
        get(k)?
            .parse()
            .map_err(|e| Error::Parse(format!("bad {k}: {e}")))
    };
    let dims = (count("rows")?, count("cols")?);
    let alpha = parse_f64(get("alpha")?)?;
    let step = count("step")?;
    let phase = match get("phase")? {
        "alternating" => Phase::Alternating,
        "coefficients_only" => Phase::CoefficientsOnly,
        other => return Err(Error::Parse(format!("unknown phase {other}"))),
    };
    let split = |s: &str| -> Vec<String> {
        if s.is_empty() {
            Vec::new()
        } else {
            s.split(',').map(str::to_owned).collect()
        }
    };
    let a = split(get("a")?)
        .iter()
        .map(|s| parse_f64(s))
        .collect::<Result<Vec<_>>>()?;
    let l = split(get("l")?)
        .iter()
        .map(|s| {
            let (x, y) = s
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("bad location {s:?}")))?;
            Ok((parse_f64(x)?, parse_f64(y)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((LocaParam::new(dims, alpha, a, l)?, step, phase))
}

pub fn read_checkpoint(path: &Path) -> Result<(LocaParam, usize, Phase)> {
    parse_checkpoint(&fs::read_to_string(path).map_err(io_err)?)
}

/// `step,loss,phase` rows of a training run, plus the final loss as step
/// `total`.
pub fn write_loss_csv(path: &Path, state: &TrainerState, extra: &[(&str, String)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["schema_version", "step", "loss", "phase"];
    header.extend(extra.iter().map(|e| e.0));
    w.write_record(&header).map_err(io_err)?;
    let rows = state
        .losses
        .iter()
        .map(|r| (r.step, r.loss, r.phase))
        .chain(std::iter::once((state.step, state.final_loss, state.phase)));
    for (step, loss, phase) in rows {
        let mut rec = vec![
            SCHEMA_VERSION.to_string(),
            step.to_string(),
            format!("{loss:e}"),
            phase.tag().to_string(),
        ];
        rec.extend(extra.iter().map(|e| e.1.clone()));
        w.write_record(&rec).map_err(io_err)?;
    }
    write_atomic(path, &w.into_inner().map_err(io_err)?)
}

/// `step,index,row,col` rows of the continuous location snapshots.
pub fn write_location_csv(path: &Path, state: &TrainerState, extra: &[(&str, String)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["schema_version", "step", "index", "row", "col"];
    header.extend(extra.iter().map(|e| e.0));
    w.write_record(&header).map_err(io_err)?;
    for (step, locs) in &state.location_snapshots {
        for (i, (x, y)) in locs.iter().enumerate() {
            let mut rec = vec![
                SCHEMA_VERSION.to_string(),
                step.to_string(),
                i.to_string(),
                x.to_string(),
                y.to_string(),
            ];
            rec.extend(extra.iter().map(|e| e.1.clone()));
            w.write_record(&rec).map_err(io_err)?;
        }
    }
    write_atomic(path, &w.into_inner().map_err(io_err)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let p = LocaParam::new((6, 7), 0.5, vec![0.1, -2.0 / 3.0], vec![(1.25, 6.0), (0.0, 1e-17)])
            .unwrap();
        let text = format_checkpoint(&p, 12, Phase::Alternating);
        let (q, step, phase) = parse_checkpoint(&text).unwrap();
        assert_eq!(q, p);
        assert_eq!(step, 12);
        assert_eq!(phase, Phase::Alternating);
    }

    #[test]
    fn empty_budget_round_trips() {
        let p = LocaParam::new((3, 3), 1.0, vec![], vec![]).unwrap();
        let (q, _, _) = parse_checkpoint(&format_checkpoint(&p, 0, Phase::CoefficientsOnly)).unwrap();
        assert_eq!(q, p);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_checkpoint("format=other\n").is_err());
        assert!(parse_checkpoint("no equals sign").is_err());
        let p = LocaParam::new((3, 3), 1.0, vec![1.0], vec![(0.0, 0.0)]).unwrap();
        let text = format_checkpoint(&p, 0, Phase::Alternating).replace("a=1", "a=x");
        assert!(parse_checkpoint(&text).is_err());
    }
}
