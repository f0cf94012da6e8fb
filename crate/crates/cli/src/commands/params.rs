use std::io::Write;

use kanppo_core::envs::{make_env, mujoco_env_dims, BRIDGE_PREFIX, MUJOCO_ENVS};
use kanppo_core::nets::{Architecture, ParamCounts};
use kanppo_core::spline::SplineConfig;

use crate::args::{parse_dims, ParamsArgs};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct ParamRow {
    pub arch: Architecture,
    /// Task name, `IN,OUT` or `average`.
    pub label: String,
    pub counts: ParamCounts,
}

fn resolve_env(name: &str) -> Result<(usize, usize), CliError> {
    if let Ok(dims) = mujoco_env_dims(name) {
        return Ok(dims);
    }
    if name.starts_with(BRIDGE_PREFIX) {
        return Err(CliError::Config(format!(
            "env: {name} is a bridge command; pass --dims instead"
        )));
    }
    let env = make_env(name).map_err(|e| CliError::Config(format!("env: {e}")))?;
    Ok((env.spec().obs_dim, env.spec().act_dim))
}

/// Rows in output order; with `all_envs`, each architecture ends with its
/// `average` row.
pub fn param_rows(args: &ParamsArgs) -> Result<Vec<ParamRow>, CliError> {
    let archs: Vec<Architecture> = if args.arch == "all" {
        Architecture::ALL.to_vec()
    } else {
        vec![args
            .arch
            .parse()
            .map_err(|e: kanppo_core::Error| CliError::Config(format!("arch: {e}")))?]
    };
    let spline = SplineConfig::new(args.k, args.g, -1.0, 1.0)
        .map_err(|e| CliError::Config(format!("spline: {e}")))?;
    let targets: Vec<(String, usize, usize)> = if args.all_envs {
        MUJOCO_ENVS
            .iter()
            .map(|&(n, o, a)| (n.to_owned(), o, a))
            .collect()
    } else if let Some(name) = &args.env {
        let (o, a) = resolve_env(name)?;
        vec![(name.clone(), o, a)]
    } else if let Some(d) = &args.dims {
        let (o, a) = parse_dims(d)
            .ok_or_else(|| CliError::Config(format!("dims: expected IN,OUT, got {d:?}")))?;
        vec![(format!("{o},{a}"), o, a)]
    } else {
        return Err(CliError::Config("one of --env, --dims or --all-envs is required".into()));
    };
    let mut rows = Vec::new();
    for arch in archs {
        let mut counts = Vec::with_capacity(targets.len());
        for (label, o, a) in &targets {
            let c = arch.param_counts(*o, *a, spline);
            counts.push(c);
            rows.push(ParamRow {
                arch,
                label: label.clone(),
                counts: c,
            });
        }
        if args.all_envs {
            rows.push(ParamRow {
                arch,
                label: "average".into(),
                counts: ParamCounts::average(&counts).expect("six tasks"),
            });
        }
    }
    Ok(rows)
}

pub fn cmd_params(args: &ParamsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let rows = param_rows(args)?;
    let w = |out: &mut dyn Write, s: String| {
        writeln!(out, "{s}").map_err(|e| CliError::Runtime(format!("stdout: {e}")))
    };
    w(out, format!("{:<22} {:<20} {:>7} {:>7} {:>7}", "arch", "env", "actor", "critic", "total"))?;
    for r in rows {
        w(
            out,
            format!(
                "{:<22} {:<20} {:>7} {:>7} {:>7}",
                r.arch.name(),
                r.label,
                r.counts.actor,
                r.counts.critic,
                r.counts.total
            ),
        )?;
    }
    Ok(())
}
