//! External environments over line-delimited JSON on a child's stdio.
//!
//! On start the child writes a handshake line
//! `{"obs_dim":3,"act_dim":1,"action_low":[-2.0],"action_high":[2.0]}`
//! (optionally with `"max_episode_steps"` and `"name"`). Each request is
//! one line, `{"id":n,"op":"reset"}` or `{"id":n,"op":"step","action":[..]}`,
//! answered by exactly one line
//! `{"id":n,"obs":[..],"reward":r,"terminated":b,"truncated":b}` carrying
//! the same id. Ids start at 0 and increase by one per request; only one
//! request is in flight at a time.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{Env, EnvSpec, StepResult};
use crate::error::{BridgeError, Error, Result};
use crate::numcore::Rng;

const DEFAULT_MAX_STEPS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Handshake {
    pub obs_dim: usize,
    pub act_dim: usize,
    pub action_low: Vec<f64>,
    pub action_high: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_episode_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: u64,
    pub op: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reply {
    pub id: u64,
    pub obs: Vec<f64>,
    #[serde(default)]
    pub reward: f64,
    #[serde(default)]
    pub terminated: bool,
    #[serde(default)]
    pub truncated: bool,
}

pub struct BridgeEnv {
    spec: EnvSpec,
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    timeout: Duration,
    next_id: u64,
    active: bool,
}

fn protocol(line: &str, reason: impl Into<String>) -> Error {
    BridgeError::Protocol {
        line: line.to_owned(),
        reason: reason.into(),
    }
    .into()
}

impl BridgeEnv {
    /// Spawns `argv[0]` with the remaining arguments and reads its handshake.
    pub fn spawn(argv: &[String], timeout: Duration) -> Result<Self> {
        let (program, args) = argv
            .split_first()
            .ok_or_else(|| Error::InvalidArgument("bridge command is empty".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|source| BridgeError::Spawn {
                command: argv.join(" "),
                source,
            })?;
        let stdout = child.stdout.take().expect("piped stdout");
        let stdin = child.stdin.take();
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        let mut env = Self {
            spec: EnvSpec {
                name: argv.join(" "),
                obs_dim: 0,
                act_dim: 0,
                action_low: Vec::new(),
                action_high: Vec::new(),
                max_episode_steps: DEFAULT_MAX_STEPS,
            },
            child,
            stdin,
            lines: rx,
            timeout,
            next_id: 0,
            active: false,
        };
        let line = env.read_line()?;
        let hs: Handshake = serde_json::from_str(&line)
            .map_err(|e| protocol(&line, format!("bad handshake: {e}")))?;
        env.spec = EnvSpec {
            name: hs.name.unwrap_or_else(|| argv.join(" ")),
            obs_dim: hs.obs_dim,
            act_dim: hs.act_dim,
            action_low: hs.action_low,
            action_high: hs.action_high,
            max_episode_steps: hs.max_episode_steps.unwrap_or(DEFAULT_MAX_STEPS),
        };
        env.spec
            .validate()
            .map_err(|e| protocol(&line, format!("bad handshake: {e}")))?;
        Ok(env)
    }

    /// Number of requests sent so far (also the id of the next one).
    pub fn requests_sent(&self) -> u64 {
        self.next_id
    }

    fn read_line(&mut self) -> Result<String> {
        match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => Err(e.into()),
            Err(RecvTimeoutError::Timeout) => Err(BridgeError::Timeout {
                millis: self.timeout.as_millis() as u64,
            }
            .into()),
            Err(RecvTimeoutError::Disconnected) => {
                let status = self
                    .child
                    .wait()
                    .map(|s| s.to_string())
                    .unwrap_or_else(|e| e.to_string());
                Err(BridgeError::ChildExited { status }.into())
            }
        }
    }

    fn round_trip(&mut self, op: &str, action: Option<Vec<f64>>) -> Result<Reply> {
        let id = self.next_id;
        self.next_id += 1;
        let request = Request {
            id,
            op: op.to_owned(),
            action,
        };
        let mut payload = serde_json::to_string(&request).expect("request serializes");
        payload.push('\n');
        let stdin = self.stdin.as_mut().expect("stdin open while env lives");
        if stdin.write_all(payload.as_bytes()).and_then(|_| stdin.flush()).is_err() {
            let status = self
                .child
                .wait()
                .map(|s| s.to_string())
                .unwrap_or_else(|e| e.to_string());
            return Err(BridgeError::ChildExited { status }.into());
        }
        let line = self.read_line()?;
        let reply: Reply = serde_json::from_str(&line)
            .map_err(|e| protocol(&line, format!("malformed reply: {e}")))?;
        if reply.id != id {
            return Err(protocol(&line, format!("expected id {id}, got {}", reply.id)));
        }
        if reply.obs.len() != self.spec.obs_dim {
            return Err(protocol(
                &line,
                format!("expected {} observation values, got {}", self.spec.obs_dim, reply.obs.len()),
            ));
        }
        if !reply.reward.is_finite() || reply.obs.iter().any(|v| !v.is_finite()) {
            return Err(protocol(&line, "non-finite observation or reward"));
        }
        Ok(reply)
    }
}

impl Env for BridgeEnv {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    /// The child owns its own initial-state randomness; `rng` is unused.
    fn reset(&mut self, _rng: &mut Rng) -> Result<Vec<f64>> {
        let reply = self.round_trip("reset", None)?;
        self.active = true;
        Ok(reply.obs)
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        if !self.active {
            return Err(Error::EpisodeEnded);
        }
        let action = self.spec.clip_action(action)?;
        let reply = self.round_trip("step", Some(action))?;
        let terminated = reply.terminated;
        let truncated = reply.truncated && !terminated;
        if terminated || truncated {
            self.active = false;
        }
        Ok(StepResult {
            obs: reply.obs,
            reward: reply.reward,
            terminated,
            truncated,
        })
    }
}

impl Drop for BridgeEnv {
    fn drop(&mut self) {
        // Closing stdin lets a well-behaved child exit on EOF.
        self.stdin.take();
        match self.child.try_wait() {
            Ok(Some(_)) => {}
            _ => {
                thread::sleep(Duration::from_millis(20));
                if !matches!(self.child.try_wait(), Ok(Some(_))) {
                    let _ = self.child.kill();
                }
                let _ = self.child.wait();
            }
        }
    }
}
