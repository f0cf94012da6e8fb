//! Plain-text checkpoint format.
//!
//! ```text
//! kanppo-checkpoint 1
//! network actor 1
//! kan 17 6 2 3 bff0000000000000 3ff0000000000000
//! values 510
//! 3fb99999... 3fc33333... ...
//! vector log_std 6
//! 0000000000000000 ...
//! end
//! ```
//!
//! Every real number is written as the 16-digit hex of its IEEE-754 bit
//! pattern, so a save/load cycle is bit-exact.

use std::fmt::Write as _;

use super::{Activation, DenseLayer, KanLayer, Layer, LayerKind, Network};
use crate::error::{Error, Result};
use crate::spline::SplineConfig;

pub const MAGIC: &str = "kanppo-checkpoint";
pub const VERSION: u32 = 1;
const PER_LINE: usize = 8;

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

#[derive(Debug, Default)]
pub struct CheckpointWriter {
    out: String,
}

impl CheckpointWriter {
    pub fn new() -> Self {
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC} {VERSION}");
        Self { out }
    }

    pub fn network(&mut self, name: &str, net: &Network) -> &mut Self {
        let _ = writeln!(self.out, "network {name} {}", net.layers().len());
        for layer in net.layers() {
            match layer {
                LayerKind::Dense(d) => {
                    let _ = writeln!(
                        self.out,
                        "dense {} {} {}",
                        d.n_in(),
                        d.n_out(),
                        d.activation().name()
                    );
                }
                LayerKind::Kan(k) => {
                    let c = k.config();
                    let _ = writeln!(
                        self.out,
                        "kan {} {} {} {} {:016x} {:016x}",
                        k.n_in(),
                        k.n_out(),
                        c.order,
                        c.grid,
                        c.range_min.to_bits(),
                        c.range_max.to_bits()
                    );
                }
            }
        }
        self.values("values", &net.params());
        self
    }

    pub fn vector(&mut self, name: &str, values: &[f64]) -> &mut Self {
        self.values(&format!("vector {name}"), values);
        self
    }

    pub fn integer(&mut self, name: &str, value: u64) -> &mut Self {
        let _ = writeln!(self.out, "int {name} {value}");
        self
    }

    fn values(&mut self, head: &str, values: &[f64]) {
        let _ = writeln!(self.out, "{head} {}", values.len());
        for chunk in values.chunks(PER_LINE) {
            let line: Vec<String> = chunk.iter().map(|v| format!("{:016x}", v.to_bits())).collect();
            let _ = writeln!(self.out, "{}", line.join(" "));
        }
    }

    pub fn finish(mut self) -> String {
        self.out.push_str("end\n");
        self.out
    }
}

pub struct CheckpointReader<'a> {
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> CheckpointReader<'a> {
    pub fn new(text: &'a str) -> Result<Self> {
        let mut reader = Self {
            lines: text.lines().enumerate().peekable(),
        };
        let head = reader.next_tokens()?;
        match head.as_slice() {
            [magic, version] if *magic == MAGIC => {
                let v: u32 = version.parse().map_err(|_| bad("bad version field"))?;
                if v != VERSION {
                    return Err(bad(format!("unsupported version {v} (expected {VERSION})")));
                }
            }
            _ => return Err(bad("missing checkpoint header")),
        }
        Ok(reader)
    }

    fn next_tokens(&mut self) -> Result<Vec<&'a str>> {
        loop {
            let (_, line) = self.lines.next().ok_or_else(|| bad("unexpected end of file"))?;
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if !tokens.is_empty() {
                return Ok(tokens);
            }
        }
    }

    fn expect(&mut self, keyword: &str, name: &str) -> Result<Vec<&'a str>> {
        let tokens = self.next_tokens()?;
        if tokens.first() != Some(&keyword) || (!name.is_empty() && tokens.get(1) != Some(&name)) {
            return Err(bad(format!("expected `{keyword} {name}`, found `{}`", tokens.join(" "))));
        }
        Ok(tokens)
    }

    fn read_values(&mut self, count: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            for tok in self.next_tokens()? {
                out.push(parse_hex(tok)?);
            }
        }
        if out.len() != count {
            return Err(bad(format!("expected {count} values, found {}", out.len())));
        }
        Ok(out)
    }

    pub fn network(&mut self, name: &str) -> Result<Network> {
        let head = self.expect("network", name)?;
        let n_layers = parse_usize(head.get(2).copied())?;
        let mut layers = Vec::with_capacity(n_layers);
        for _ in 0..n_layers {
            let t = self.next_tokens()?;
            let layer = match t.as_slice() {
                ["dense", n_in, n_out, act] => {
                    let act = Activation::from_name(act)
                        .ok_or_else(|| bad(format!("unknown activation `{act}`")))?;
                    LayerKind::Dense(DenseLayer::zeros(
                        parse_usize(Some(n_in))?,
                        parse_usize(Some(n_out))?,
                        act,
                    ))
                }
                ["kan", n_in, n_out, order, grid, lo, hi] => {
                    let config = SplineConfig::new(
                        parse_usize(Some(order))?,
                        parse_usize(Some(grid))?,
                        parse_hex(lo)?,
                        parse_hex(hi)?,
                    )?;
                    LayerKind::Kan(KanLayer::zeros(
                        parse_usize(Some(n_in))?,
                        parse_usize(Some(n_out))?,
                        config,
                    ))
                }
                other => return Err(bad(format!("bad layer line `{}`", other.join(" ")))),
            };
            layers.push(layer);
        }
        let mut net = Network::from_layers(layers)?;
        let head = self.expect("values", "")?;
        let count = parse_usize(head.get(1).copied())?;
        if count != net.count_params() {
            return Err(bad(format!(
                "network `{name}` declares {count} values but its layers hold {}",
                net.count_params()
            )));
        }
        let values = self.read_values(count)?;
        net.set_params(&values)?;
        Ok(net)
    }

    pub fn vector(&mut self, name: &str) -> Result<Vec<f64>> {
        let head = self.expect("vector", name)?;
        let count = parse_usize(head.get(2).copied())?;
        self.read_values(count)
    }

    pub fn integer(&mut self, name: &str) -> Result<u64> {
        let head = self.expect("int", name)?;
        head.get(2)
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad(format!("bad integer `{name}`")))
    }

    pub fn finish(mut self) -> Result<()> {
        self.expect("end", "")?;
        Ok(())
    }
}

fn parse_usize(tok: Option<&str>) -> Result<usize> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| bad(format!("expected a count, found {tok:?}")))
}

fn parse_hex(tok: &str) -> Result<f64> {
    if tok.len() != 16 {
        return Err(bad(format!("bad value `{tok}`")));
    }
    u64::from_str_radix(tok, 16)
        .map(f64::from_bits)
        .map_err(|_| bad(format!("bad value `{tok}`")))
}

/// Single-network checkpoint.
pub fn save_network(net: &Network) -> String {
    let mut w = CheckpointWriter::new();
    w.network("net", net);
    w.finish()
}

pub fn load_network(text: &str) -> Result<Network> {
    let mut r = CheckpointReader::new(text)?;
    let net = r.network("net")?;
    r.finish()?;
    Ok(net)
}
