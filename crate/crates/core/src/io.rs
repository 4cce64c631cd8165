//! File formats.
//!
//! Vectors come as CSV (one entry per line, `re` or `re,im`, `#` comments)
//! or as raw little-endian `f64` data after a one-line JSON header
//! `{"n": <entries>, "complex": <bool>}`; complex data interleaves `re, im`.
//!
//! Every emitted file carries the tool name, version, full run config and
//! seed: JSON as `{"meta": .., "result": ..}`, CSV as a leading
//! `# qampenc <version> config=<json>` comment line.

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TOOL: &str = "qampenc";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct BinaryHeader {
    n: usize,
    complex: bool,
}

/// Read a vector in either format; a leading `{` selects the binary one.
pub fn read_vector(bytes: &[u8]) -> Result<Vec<Complex64>> {
    if bytes.first() == Some(&b'{') {
        read_vector_binary(bytes)
    } else {
        read_vector_csv(bytes)
    }
}

fn read_vector_csv(bytes: &[u8]) -> Result<Vec<Complex64>> {
    let text =
        std::str::from_utf8(bytes).map_err(|e| Error::parse(e.valid_up_to(), "not UTF-8"))?;
    let mut out = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let start = offset;
        offset += line.len();
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split(',').map(str::trim).collect();
        if fields.len() > 2 {
            return Err(Error::parse(start, "expected `re` or `re,im`"));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(start, format!("bad number `{s}`")))
        };
        let re = num(fields[0])?;
        let im = fields.get(1).map(|s| num(s)).transpose()?.unwrap_or(0.0);
        out.push(Complex64::new(re, im));
    }
    if out.is_empty() {
        return Err(Error::parse(0, "no entries"));
    }
    Ok(out)
}

fn read_vector_binary(bytes: &[u8]) -> Result<Vec<Complex64>> {
    let end = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::parse(bytes.len(), "missing newline after header"))?;
    let header: BinaryHeader = serde_json::from_slice(&bytes[..end])
        .map_err(|e| Error::parse(e.column().saturating_sub(1), format!("bad header: {e}")))?;
    let per = if header.complex { 2 } else { 1 };
    let data = &bytes[end + 1..];
    let need = header.n * per * 8;
    if data.len() != need {
        return Err(Error::parse(
            end + 1 + data.len().min(need),
            format!("expected {need} data bytes, found {}", data.len()),
        ));
    }
    let vals: Vec<f64> = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    if let Some(i) = vals.iter().position(|v| !v.is_finite()) {
        return Err(Error::parse(end + 1 + 8 * i, "non-finite value"));
    }
    Ok(if header.complex {
        vals.chunks_exact(2)
            .map(|p| Complex64::new(p[0], p[1]))
            .collect()
    } else {
        vals.into_iter().map(Complex64::from).collect()
    })
}

pub fn write_vector_binary(v: &[Complex64], complex: bool) -> Vec<u8> {
    let header = BinaryHeader {
        n: v.len(),
        complex,
    };
    let mut out = serde_json::to_vec(&header).expect("header serializes");
    out.push(b'\n');
    for a in v {
        out.extend(a.re.to_le_bytes());
        if complex {
            out.extend(a.im.to_le_bytes());
        }
    }
    out
}

/// CSV vector with `{:?}` floats, which round-trip exactly.
pub fn write_vector_csv(v: &[Complex64], complex: bool) -> String {
    v.iter()
        .map(|a| {
            if complex {
                format!("{:?},{:?}\n", a.re, a.im)
            } else {
                format!("{:?}\n", a.re)
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
}

impl Meta {
    pub fn new(config: &impl Serialize, seed: Option<u64>) -> Result<Self> {
        Ok(Meta {
            tool: TOOL.into(),
            version: VERSION.into(),
            config: serde_json::to_value(config)?,
            seed,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub meta: Meta,
    pub result: T,
}

pub fn to_json<T: Serialize>(meta: Meta, result: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Envelope { meta, result })?;
    s.push('\n');
    Ok(s)
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<Envelope<T>> {
    Ok(serde_json::from_str(text)?)
}

pub fn to_csv<T: Serialize>(meta: &Meta, rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(format!(
        "# {} {} config={}\n{}",
        meta.tool,
        meta.version,
        serde_json::to_string(&meta.config)?,
        String::from_utf8(body).expect("csv output is UTF-8")
    ))
}

/// Parse a CSV written by [`to_csv`], returning the config and the rows.
pub fn from_csv<T: DeserializeOwned>(text: &str) -> Result<(serde_json::Value, Vec<T>)> {
    let first = text.lines().next().unwrap_or("");
    let config = first
        .strip_prefix(&format!("# {TOOL} "))
        .and_then(|rest| rest.split_once(" config="))
        .ok_or_else(|| Error::parse(0, "missing metadata header"))?
        .1;
    let config = serde_json::from_str(config)?;
    let rows = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
        .deserialize()
        .collect::<std::result::Result<_, _>>()?;
    Ok((config, rows))
}
