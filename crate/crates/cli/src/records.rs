//! CSV layouts for training logs and merged learning curves.

use std::fs::File;
use std::path::{Path, PathBuf};

use kanppo_core::ppo::RunRecord;

use crate::error::CliError;

pub const RUN_HEADER: [&str; 7] = [
    "seed",
    "steps",
    "update",
    "mean_return",
    "policy_loss",
    "value_loss",
    "entropy",
];

/// Wall-clock times live in a separate file so the run log stays
/// reproducible byte for byte.
pub const TIMING_HEADER: [&str; 3] = ["seed", "update", "wall_clock_ms"];

pub const CURVE_HEADER: [&str; 7] = ["update", "steps", "seeds", "mean", "std", "min", "max"];

pub fn run_csv_path(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("seed_{seed}.csv"))
}

pub fn timing_csv_path(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("seed_{seed}_timing.csv"))
}

pub fn checkpoint_path(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("seed_{seed}.ckpt"))
}

pub fn last_good_checkpoint_path(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("seed_{seed}_last_good.ckpt"))
}

pub fn curve_csv_path(dir: &Path) -> PathBuf {
    dir.join("curve.csv")
}

/// Shortest round-trip decimal form.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

pub struct RunLog {
    run: csv::Writer<File>,
    timing: csv::Writer<File>,
    path: PathBuf,
}

impl RunLog {
    pub fn create(dir: &Path, seed: u64) -> Result<Self, CliError> {
        let path = run_csv_path(dir, seed);
        let timing_path = timing_csv_path(dir, seed);
        let mut run = csv::Writer::from_path(&path).map_err(|e| CliError::io(&path, e))?;
        let mut timing =
            csv::Writer::from_path(&timing_path).map_err(|e| CliError::io(&timing_path, e))?;
        run.write_record(RUN_HEADER).map_err(|e| CliError::io(&path, e))?;
        timing
            .write_record(TIMING_HEADER)
            .map_err(|e| CliError::io(&timing_path, e))?;
        Ok(Self { run, timing, path })
    }

    pub fn append(&mut self, r: &RunRecord) -> Result<(), CliError> {
        self.run
            .write_record([
                r.seed.to_string(),
                r.steps.to_string(),
                r.update.to_string(),
                fmt_f64(r.mean_return),
                fmt_f64(r.policy_loss),
                fmt_f64(r.value_loss),
                fmt_f64(r.entropy),
            ])
            .map_err(|e| CliError::io(&self.path, e))?;
        self.timing
            .write_record([r.seed.to_string(), r.update.to_string(), format!("{:.3}", r.wall_clock_ms)])
            .map_err(|e| CliError::io(&self.path, e))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.run.flush().map_err(|e| CliError::io(&self.path, e))?;
        self.timing.flush().map_err(|e| CliError::io(&self.path, e))?;
        Ok(())
    }
}

/// `(update, steps, mean_return)` rows of one seed's log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub update: usize,
    pub steps: usize,
    pub mean_return: f64,
}

pub fn read_run_csv(path: &Path) -> Result<Vec<CurvePoint>, CliError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::io(path, e))?;
    let headers = reader.headers().map_err(|e| CliError::io(path, e))?.clone();
    if headers.iter().collect::<Vec<_>>() != RUN_HEADER {
        return Err(CliError::io(path, "unexpected header"));
    }
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| CliError::io(path, e))?;
        let parse_err = |e: &dyn std::fmt::Display| CliError::io(path, format!("row {row:?}: {e}"));
        out.push(CurvePoint {
            steps: row[1].parse().map_err(|e| parse_err(&e))?,
            update: row[2].parse().map_err(|e| parse_err(&e))?,
            mean_return: row[3].parse().map_err(|e| parse_err(&e))?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub update: usize,
    pub steps: usize,
    /// Seeds with a finite return at this update.
    pub seeds: usize,
    pub mean: f64,
    /// Population standard deviation across seeds.
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

/// Aligns runs by update index and summarizes the return across seeds.
pub fn merge_curves(runs: &[Vec<CurvePoint>]) -> Vec<CurveRow> {
    let len = runs.iter().map(Vec::len).max().unwrap_or(0);
    (0..len)
        .map(|i| {
            let points: Vec<&CurvePoint> = runs.iter().filter_map(|r| r.get(i)).collect();
            let vals: Vec<f64> = points
                .iter()
                .map(|p| p.mean_return)
                .filter(|v| v.is_finite())
                .collect();
            let n = vals.len();
            let (mean, std, min, max) = if n == 0 {
                (f64::NAN, f64::NAN, f64::NAN, f64::NAN)
            } else {
                let mean = vals.iter().sum::<f64>() / n as f64;
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
                (
                    mean,
                    var.sqrt(),
                    vals.iter().copied().fold(f64::INFINITY, f64::min),
                    vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                )
            };
            CurveRow {
                update: points[0].update,
                steps: points[0].steps,
                seeds: n,
                mean,
                std,
                min,
                max,
            }
        })
        .collect()
}

pub fn write_curve(path: &Path, rows: &[CurveRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
    w.write_record(CURVE_HEADER).map_err(|e| CliError::io(path, e))?;
    for r in rows {
        w.write_record([
            r.update.to_string(),
            r.steps.to_string(),
            r.seeds.to_string(),
            fmt_f64(r.mean),
            fmt_f64(r.std),
            fmt_f64(r.min),
            fmt_f64(r.max),
        ])
        .map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
