//! Text and JSON forms of [`CfExpansion`].
//!
//! Text: a header line `a0=<int> tail=<exact|truncated:d>` followed by one
//! quotient per line. JSON: `{"a0": "...", "tail": "...", "quotients": [...]}`
//! with integers as decimal strings.

use std::io::{BufRead, Write};

use num_bigint::{BigInt, BigUint};
use serde::{Deserialize, Serialize};

use super::{CfExpansion, ContFracError, Tail};

fn parse_tail(s: &str) -> Option<Tail> {
    if s == "exact" {
        return Some(Tail::Exact);
    }
    let d = s.strip_prefix("truncated:")?.parse().ok()?;
    Some(Tail::Truncated { precision: d })
}

fn format_err(line: usize, message: impl Into<String>) -> ContFracError {
    ContFracError::Format {
        line,
        message: message.into(),
    }
}

impl CfExpansion {
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "a0={} tail={}", self.a0, self.tail)?;
        for q in &self.quotients {
            writeln!(w, "{q}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii")
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self, ContFracError> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| format_err(1, "missing header"))??;
        let mut a0 = None;
        let mut tail = None;
        for field in header.split_whitespace() {
            match field.split_once('=') {
                Some(("a0", v)) => a0 = v.parse::<BigInt>().ok(),
                Some(("tail", v)) => tail = parse_tail(v),
                _ => return Err(format_err(1, format!("unexpected header field `{field}`"))),
            }
        }
        let a0 = a0.ok_or_else(|| format_err(1, "header needs a0=<integer>"))?;
        let tail = tail.ok_or_else(|| format_err(1, "header needs tail=<exact|truncated:d>"))?;
        let mut quotients = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            let q: BigUint = t
                .parse()
                .map_err(|_| format_err(i + 2, format!("`{t}` is not a positive integer")))?;
            quotients.push(q);
        }
        Self::new(a0, quotients, tail)
    }

    pub fn from_text(s: &str) -> Result<Self, ContFracError> {
        Self::read_text(s.as_bytes())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CfJson {
    pub a0: String,
    pub tail: String,
    pub quotients: Vec<String>,
}

impl From<&CfExpansion> for CfJson {
    fn from(cf: &CfExpansion) -> Self {
        Self {
            a0: cf.a0.to_string(),
            tail: cf.tail.to_string(),
            quotients: cf.quotients.iter().map(ToString::to_string).collect(),
        }
    }
}

impl TryFrom<CfJson> for CfExpansion {
    type Error = ContFracError;

    fn try_from(j: CfJson) -> Result<Self, ContFracError> {
        let a0 = j.a0.parse().map_err(|_| format_err(0, "a0 is not an integer"))?;
        let tail = parse_tail(&j.tail).ok_or_else(|| format_err(0, "bad tail"))?;
        let quotients = j
            .quotients
            .iter()
            .enumerate()
            .map(|(i, q)| {
                q.parse()
                    .map_err(|_| format_err(0, format!("quotient {} is not an integer", i + 1)))
            })
            .collect::<Result<_, _>>()?;
        Self::new(a0, quotients, tail)
    }
}

impl Serialize for CfExpansion {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CfJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for CfExpansion {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        CfJson::deserialize(d)?
            .try_into()
            .map_err(serde::de::Error::custom)
    }
}
