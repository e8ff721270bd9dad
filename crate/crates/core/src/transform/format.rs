//! Line-oriented text serialization of a [`TransformSet`].
//!
//! ```text
//! UNIPAN-TRANSFORM v1
//! target: uniform
//! epsilon: 1e-7
//! bands: 2
//! m: 3
//! n: 10000
//! seed: 42
//! band 0: 0.1 0.5 0.9
//! band 1: 3 4 7.25
//! ```

use std::fs;
use std::path::Path;

use super::{QuantileTransform, TargetDistribution, TargetKind, TransformSet};
use crate::error::{Error, Result};
use crate::fmt::shortest;

pub const TRANSFORM_MAGIC: &str = "UNIPAN-TRANSFORM v1";

const HEADER_KEYS: [&str; 6] = ["target", "epsilon", "bands", "m", "n", "seed"];

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::TransformParse {
        line,
        msg: msg.into(),
    }
}

impl TransformSet {
    pub fn to_text(&self) -> String {
        let target = self.target();
        let mut out = String::new();
        out.push_str(TRANSFORM_MAGIC);
        out.push('\n');
        out.push_str(&format!("target: {}\n", target.kind().name()));
        out.push_str(&format!("epsilon: {}\n", shortest(target.epsilon())));
        out.push_str(&format!("bands: {}\n", self.bands()));
        out.push_str(&format!("m: {}\n", self.m()));
        out.push_str(&format!("n: {}\n", self.n_sampled()));
        out.push_str(&format!("seed: {}\n", self.seed()));
        for t in self.transforms() {
            out.push_str(&format!("band {}:", t.band_index()));
            for &q in t.quantiles() {
                out.push(' ');
                out.push_str(&shortest(q));
            }
            out.push('\n');
        }
        out
    }

    /// Strict parse: fixed key order, no unknown keys, no blank lines.
    pub fn from_text(text: &str) -> Result<Self> {
        let body = text.strip_suffix('\n').unwrap_or(text);
        let lines: Vec<&str> = body.split('\n').collect();

        if lines.first().copied() != Some(TRANSFORM_MAGIC) {
            return Err(parse_err(1, format!("expected `{TRANSFORM_MAGIC}`")));
        }
        let mut values = [""; 6];
        for (k, key) in HEADER_KEYS.iter().enumerate() {
            let lineno = k + 2;
            let line = lines
                .get(k + 1)
                .ok_or_else(|| parse_err(lineno, format!("missing `{key}`")))?;
            let (found, value) = line
                .split_once(": ")
                .ok_or_else(|| parse_err(lineno, "expected `key: value`"))?;
            if found != *key {
                return Err(if HEADER_KEYS.contains(&found) {
                    parse_err(
                        lineno,
                        format!("key `{found}` out of order, expected `{key}`"),
                    )
                } else {
                    parse_err(lineno, format!("unknown key `{found}`"))
                });
            }
            values[k] = value;
        }

        let kind: TargetKind = values[0]
            .parse()
            .map_err(|_| parse_err(2, format!("unknown target `{}`", values[0])))?;
        let epsilon: f64 = values[1]
            .parse()
            .map_err(|_| parse_err(3, "epsilon is not a number"))?;
        let target =
            TargetDistribution::new(kind, epsilon).map_err(|e| parse_err(3, e.to_string()))?;
        let bands: usize = values[2]
            .parse()
            .map_err(|_| parse_err(4, "bands is not an unsigned integer"))?;
        let m: usize = values[3]
            .parse()
            .map_err(|_| parse_err(5, "m is not an unsigned integer"))?;
        let n: usize = values[4]
            .parse()
            .map_err(|_| parse_err(6, "n is not an unsigned integer"))?;
        let seed: u64 = values[5]
            .parse()
            .map_err(|_| parse_err(7, "seed is not a u64"))?;
        if bands == 0 {
            return Err(parse_err(4, "bands must be at least 1"));
        }
        if m < 2 {
            return Err(parse_err(5, "m must be at least 2"));
        }

        let band_lines = &lines[1 + HEADER_KEYS.len()..];
        if band_lines.len() != bands {
            return Err(parse_err(
                8,
                format!("expected {bands} band lines, found {}", band_lines.len()),
            ));
        }
        let mut transforms = Vec::with_capacity(bands);
        for (b, line) in band_lines.iter().enumerate() {
            let lineno = 8 + b;
            let prefix = format!("band {b}:");
            let rest = line
                .strip_prefix(&prefix)
                .ok_or_else(|| parse_err(lineno, format!("expected `{prefix}`")))?;
            let rest = rest
                .strip_prefix(' ')
                .ok_or_else(|| parse_err(lineno, "missing quantiles"))?;
            let quantiles = rest
                .split(' ')
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|_| parse_err(lineno, format!("bad quantile `{tok}`")))
                })
                .collect::<Result<Vec<f64>>>()?;
            if quantiles.len() != m {
                return Err(parse_err(
                    lineno,
                    format!("expected {m} quantiles, found {}", quantiles.len()),
                ));
            }
            let t = QuantileTransform::new(quantiles, target, b)
                .map_err(|e| parse_err(lineno, e.to_string()))?;
            transforms.push(t);
        }
        TransformSet::new(transforms, n, seed)
    }

    pub fn write_to(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read_from(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        TransformSet::from_text(&text)
    }
}
