//! Reference child for the bridge protocol.
//!
//! Replies to every request with the observation `[id, step_in_episode, 0, ...]`
//! and reward 1 per step. Episodes are truncated after `episode_len` steps.
//! Fault flags make it misbehave on a given request id.

use std::io::{BufRead, Write};

use super::{Handshake, Reply, Request};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StubOptions {
    pub obs_dim: usize,
    pub act_dim: usize,
    pub episode_len: u64,
    /// Answer this request with a non-JSON line.
    pub malformed_after: Option<u64>,
    /// Exit without answering this request.
    pub exit_after: Option<u64>,
    /// Never answer this request.
    pub stall_after: Option<u64>,
}

impl Default for StubOptions {
    fn default() -> Self {
        Self {
            obs_dim: 3,
            act_dim: 1,
            episode_len: 50,
            malformed_after: None,
            exit_after: None,
            stall_after: None,
        }
    }
}

impl StubOptions {
    /// Parses `--obs-dim N --act-dim N --episode-len N --malformed-after N
    /// --exit-after N --stall-after N`.
    pub fn from_args<I: IntoIterator<Item = String>>(args: I) -> Result<Self, String> {
        let mut opts = Self::default();
        let mut args = args.into_iter();
        while let Some(flag) = args.next() {
            let value = args
                .next()
                .ok_or_else(|| format!("{flag} needs a value"))?
                .parse::<u64>()
                .map_err(|e| format!("{flag}: {e}"))?;
            match flag.as_str() {
                "--obs-dim" => opts.obs_dim = value as usize,
                "--act-dim" => opts.act_dim = value as usize,
                "--episode-len" => opts.episode_len = value,
                "--malformed-after" => opts.malformed_after = Some(value),
                "--exit-after" => opts.exit_after = Some(value),
                "--stall-after" => opts.stall_after = Some(value),
                other => return Err(format!("unknown flag {other}")),
            }
        }
        if opts.obs_dim == 0 || opts.act_dim == 0 || opts.episode_len == 0 {
            return Err("dimensions and episode length must be positive".into());
        }
        Ok(opts)
    }
}

/// Serves requests from `input` until EOF. Returns the process exit status:
/// 0 on EOF, 3 on a bad request, 4 on an out-of-order id.
pub fn serve_stub(opts: &StubOptions, input: impl BufRead, mut out: impl Write) -> u8 {
    let handshake = Handshake {
        obs_dim: opts.obs_dim,
        act_dim: opts.act_dim,
        action_low: vec![-1.0; opts.act_dim],
        action_high: vec![1.0; opts.act_dim],
        max_episode_steps: Some(opts.episode_len as usize),
        name: Some("bridge-stub".into()),
    };
    let hs = serde_json::to_string(&handshake).expect("handshake serializes");
    if writeln!(out, "{hs}").and_then(|_| out.flush()).is_err() {
        return 1;
    }
    let mut t = 0u64;
    for (expected_id, line) in (0u64..).zip(input.lines()) {
        let Ok(line) = line else { break };
        let req: Request = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("bridge stub: bad request {line:?}: {e}");
                return 3;
            }
        };
        if req.id != expected_id {
            eprintln!("bridge stub: expected id {expected_id}, got {}", req.id);
            return 4;
        }
        if opts.exit_after == Some(req.id) {
            return 0;
        }
        if opts.stall_after == Some(req.id) {
            std::thread::sleep(std::time::Duration::from_secs(3600));
        }
        if opts.malformed_after == Some(req.id) {
            let _ = writeln!(out, "this is not json {}", req.id).and_then(|_| out.flush());
            continue;
        }
        match req.op.as_str() {
            "reset" => t = 0,
            "step" => {
                let n = req.action.as_ref().map_or(0, Vec::len);
                if n != opts.act_dim {
                    eprintln!("bridge stub: action has {n} entries, expected {}", opts.act_dim);
                    return 3;
                }
                t += 1;
            }
            other => {
                eprintln!("bridge stub: unknown op {other}");
                return 3;
            }
        }
        let mut obs = vec![0.0; opts.obs_dim];
        obs[0] = req.id as f64;
        if opts.obs_dim > 1 {
            obs[1] = t as f64;
        }
        let is_step = req.op == "step";
        let reply = Reply {
            id: req.id,
            obs,
            reward: if is_step { 1.0 } else { 0.0 },
            terminated: false,
            truncated: is_step && t >= opts.episode_len,
        };
        let text = serde_json::to_string(&reply).expect("reply serializes");
        if writeln!(out, "{text}").and_then(|_| out.flush()).is_err() {
            break;
        }
    }
    0
}
