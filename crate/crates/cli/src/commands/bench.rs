use std::io::Write;

use kanppo_core::spline::SplineConfig;
use kanppo_core::timing::{time_actor_pair, TimingMode, TimingRow};

use crate::args::{parse_dims, BenchArgs};
use crate::error::CliError;

const HEADER: [&str; 6] = ["network", "mode", "params", "steps", "total_s", "per_step_s"];

fn to_csv(rows: &[TimingRow]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Runtime(e.to_string());
    w.write_record(HEADER).map_err(err)?;
    for r in rows {
        w.write_record([
            r.network.clone(),
            r.mode.name().to_owned(),
            r.params.to_string(),
            r.steps.to_string(),
            format!("{:.6}", r.total_s),
            format!("{:.9}", r.per_step_s),
        ])
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (obs, act) = parse_dims(&args.dims)
        .ok_or_else(|| CliError::Config(format!("dims: expected IN,OUT, got {:?}", args.dims)))?;
    if args.steps == 0 {
        return Err(CliError::Config("steps: must be at least 1".into()));
    }
    let spline = SplineConfig::new(args.k, args.g, -1.0, 1.0)
        .map_err(|e| CliError::Config(format!("spline: {e}")))?;
    let mode = if args.backward {
        TimingMode::ForwardBackward
    } else {
        TimingMode::Forward
    };
    let rows = time_actor_pair(obs, act, args.steps, spline, mode, 0)?;
    let csv = to_csv(&rows)?;
    if let Some(path) = &args.output {
        std::fs::write(path, &csv).map_err(|e| CliError::io(path, e))?;
    }
    out.write_all(csv.as_bytes())
        .map_err(|e| CliError::Runtime(format!("stdout: {e}")))
}
