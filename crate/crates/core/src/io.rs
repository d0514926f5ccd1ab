//! JSON files for signals, level sets and frequency choices, and CSV ratio
//! tables.
//!
//! Numbers are written as strings: integers as `n`, other dyadic rationals
//! as `num/den`, floats in shortest round-trip decimal form.

use std::io::Write;
use std::path::Path;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::dyadic::MAX_LEVELS;
use crate::error::{Error, Result};
use crate::number::{parse_rational, Dyadic, Scalar};
use crate::signal::{FrequencyChoice, LevelSet, Signal, ValueKind};

/// A signal read from a file: exact when every entry was a dyadic rational.
#[derive(Clone, Debug, PartialEq)]
pub enum AnySignal {
    Exact(Signal<Dyadic>),
    Float(Signal<f64>),
}

impl AnySignal {
    pub fn levels(&self) -> u32 {
        match self {
            AnySignal::Exact(s) => s.levels(),
            AnySignal::Float(s) => s.levels(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, AnySignal::Exact(_))
    }

    pub fn to_f64(&self) -> Signal<f64> {
        match self {
            AnySignal::Exact(s) => s.to_f64(),
            AnySignal::Float(s) => s.clone(),
        }
    }
}

/// A signal file together with its `"domain"` tag (`None` for time samples).
#[derive(Clone, Debug, PartialEq)]
pub struct SignalFile {
    pub signal: AnySignal,
    pub domain: Option<String>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

enum Entry {
    Exact(Dyadic),
    Float(f64),
}

fn parse_entry(v: &Value) -> Result<Entry> {
    match v {
        Value::String(s) => match parse_rational(s)? {
            Some((n, d)) => match s.parse::<Dyadic>() {
                Ok(x) => Ok(Entry::Exact(x)),
                Err(_) if s.contains('/') => Ok(Entry::Float(ratio_to_f64(&n, &d))),
                Err(_) => Ok(Entry::Float(s.trim().parse().map_err(|_| bad(format!("malformed number `{s}`")))?)),
            },
            None => Ok(Entry::Float(s.trim().parse().map_err(|_| bad(format!("malformed number `{s}`")))?)),
        },
        Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(Entry::Exact(Dyadic::from_int(i))),
            None => Ok(Entry::Float(n.as_f64().ok_or_else(|| bad("number out of range"))?)),
        },
        _ => Err(bad(format!("expected a number, found {v}"))),
    }
}

fn ratio_to_f64(n: &BigInt, d: &BigInt) -> f64 {
    match (n.to_f64(), d.to_f64()) {
        (Some(a), Some(b)) if b.is_finite() && a.is_finite() => a / b,
        _ => f64::NAN,
    }
}

fn flatten_cell(v: &Value, kind: ValueKind, dim: usize, out: &mut Vec<Value>) -> Result<()> {
    match (kind, dim) {
        (ValueKind::Vector, 1) if !v.is_array() => out.push(v.clone()),
        (ValueKind::Vector, _) => {
            let row = v.as_array().ok_or_else(|| bad("vector sample must be an array"))?;
            if row.len() != dim {
                return Err(bad(format!("vector sample has {} entries, expected {dim}", row.len())));
            }
            out.extend(row.iter().cloned());
        }
        (ValueKind::Matrix, _) => {
            let rows = v.as_array().ok_or_else(|| bad("matrix sample must be an array of rows"))?;
            if rows.len() != dim {
                return Err(bad(format!("matrix sample has {} rows, expected {dim}", rows.len())));
            }
            for r in rows {
                let r = r.as_array().ok_or_else(|| bad("matrix row must be an array"))?;
                if r.len() != dim {
                    return Err(bad(format!("matrix row has {} entries, expected {dim}", r.len())));
                }
                out.extend(r.iter().cloned());
            }
        }
    }
    Ok(())
}

fn get_u64(obj: &Map<String, Value>, key: &str) -> Result<u64> {
    obj.get(key)
        .and_then(Value::as_u64)
        .ok_or_else(|| bad(format!("missing or invalid `{key}`")))
}

fn levels_of(obj: &Map<String, Value>) -> Result<u32> {
    let l = get_u64(obj, "levels")?;
    match u32::try_from(l) {
        Ok(l) if l <= MAX_LEVELS => Ok(l),
        _ => Err(Error::LevelsOutOfRange(l.min(u32::MAX as u64) as u32, MAX_LEVELS)),
    }
}

pub fn signal_from_json(v: &Value) -> Result<SignalFile> {
    let obj = v.as_object().ok_or_else(|| bad("signal file must be a JSON object"))?;
    let levels = levels_of(obj)?;
    let dim = obj.get("dim").map(|_| get_u64(obj, "dim")).transpose()?.unwrap_or(1) as usize;
    let kind: ValueKind = match obj.get("kind") {
        Some(Value::String(s)) => s.parse()?,
        Some(_) => return Err(bad("`kind` must be a string")),
        None => ValueKind::Vector,
    };
    let domain = match obj.get("domain") {
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(bad("`domain` must be a string")),
        None => None,
    };
    let values = obj
        .get("values")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing `values` array"))?;
    let mut flat = Vec::new();
    for cell in values {
        flatten_cell(cell, kind, dim, &mut flat)?;
    }
    let entries = flat.iter().map(parse_entry).collect::<Result<Vec<_>>>()?;
    let signal = if entries.iter().all(|e| matches!(e, Entry::Exact(_))) {
        let data = entries
            .into_iter()
            .map(|e| match e {
                Entry::Exact(x) => x,
                Entry::Float(_) => unreachable!(),
            })
            .collect();
        AnySignal::Exact(Signal::new(levels, dim, kind, data)?)
    } else {
        let data = entries
            .into_iter()
            .map(|e| match e {
                Entry::Exact(x) => x.to_f64(),
                Entry::Float(x) => x,
            })
            .collect();
        AnySignal::Float(Signal::new(levels, dim, kind, data)?)
    };
    Ok(SignalFile { signal, domain })
}

fn cell_json<T: Scalar>(v: &[T], kind: ValueKind, dim: usize) -> Value {
    let s = |x: &T| Value::String(x.to_string());
    match (kind, dim) {
        (ValueKind::Vector, 1) => s(&v[0]),
        (ValueKind::Vector, _) => Value::Array(v.iter().map(s).collect()),
        (ValueKind::Matrix, _) => Value::Array(v.chunks(dim).map(|r| Value::Array(r.iter().map(s).collect())).collect()),
    }
}

pub fn signal_to_json<T: Scalar>(f: &Signal<T>, domain: Option<&str>) -> Value {
    let mut obj = Map::new();
    obj.insert("levels".into(), json!(f.levels()));
    obj.insert("dim".into(), json!(f.dim()));
    obj.insert("kind".into(), json!(f.kind()));
    if let Some(d) = domain {
        obj.insert("domain".into(), json!(d));
    }
    let values = (0..f.n_cells()).map(|j| cell_json(f.cell(j), f.kind(), f.dim())).collect();
    obj.insert("values".into(), Value::Array(values));
    Value::Object(obj)
}

pub fn any_signal_to_json(f: &AnySignal, domain: Option<&str>) -> Value {
    match f {
        AnySignal::Exact(s) => signal_to_json(s, domain),
        AnySignal::Float(s) => signal_to_json(s, domain),
    }
}

/// `{"levels": L, "cells": [j, ...]}`; `"cells"` may also be a bit string of
/// length `2^L` on input.
pub fn level_set_from_json(v: &Value) -> Result<LevelSet> {
    let obj = v.as_object().ok_or_else(|| bad("level set file must be a JSON object"))?;
    let levels = levels_of(obj)?;
    match obj.get("cells") {
        Some(Value::Array(a)) => {
            let idx = a
                .iter()
                .map(|x| x.as_u64().map(|x| x as usize).ok_or_else(|| bad("cell index must be a non-negative integer")))
                .collect::<Result<Vec<_>>>()?;
            LevelSet::from_indices(levels, &idx)
        }
        Some(Value::String(s)) => {
            if s.len() != 1usize << levels || !s.chars().all(|c| c == '0' || c == '1') {
                return Err(bad(format!("bit string must have 2^{levels} binary digits")));
            }
            let bits = s.as_bytes();
            Ok(LevelSet::from_fn(levels, |j| bits[j] == b'1'))
        }
        _ => Err(bad("missing `cells`")),
    }
}

pub fn level_set_to_json(s: &LevelSet) -> Value {
    json!({"levels": s.levels(), "cells": s.indices()})
}

/// `{"levels": L, "N": [n_0, ...]}` with `0 ≤ n_j ≤ 2^L`.
pub fn nfun_from_json(v: &Value) -> Result<FrequencyChoice> {
    let obj = v.as_object().ok_or_else(|| bad("frequency choice file must be a JSON object"))?;
    let levels = levels_of(obj)?;
    let values = obj
        .get("N")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing `N` array"))?
        .iter()
        .map(|x| x.as_u64().ok_or_else(|| bad("N values must be non-negative integers")))
        .collect::<Result<Vec<_>>>()?;
    FrequencyChoice::new(levels, values)
}

pub fn nfun_to_json(n: &FrequencyChoice) -> Value {
    json!({"levels": n.levels(), "N": n.values()})
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string(v: &impl Serialize) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json(path: &Path, v: &impl Serialize) -> Result<()> {
    std::fs::write(path, to_json_string(v)?)?;
    Ok(())
}

/// One row of a ratio table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioRow {
    #[serde(rename = "L")]
    pub levels: u32,
    pub q: f64,
    pub norm: String,
    pub ratio_name: String,
    pub value: f64,
}

pub fn write_csv<W: Write>(out: W, rows: &[RatioRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signal_round_trip() {
        let v = json!({"levels": 1, "dim": 2, "kind": "vector", "values": [["1/2", "-3"], ["0.25", 1]]});
        let f = signal_from_json(&v).unwrap();
        assert!(f.signal.is_exact());
        let back = any_signal_to_json(&f.signal, None);
        assert_eq!(back["values"], json!([["1/2", "-3"], ["1/4", "1"]]));
        assert_eq!(signal_from_json(&back).unwrap(), f);

        let m = json!({"levels": 0, "dim": 2, "kind": "matrix", "values": [[["1", "0"], ["0", "1/3"]]]});
        let f = signal_from_json(&m).unwrap();
        assert!(!f.signal.is_exact());
        let s = json!({"levels": 1, "values": ["1", "2"], "domain": "walsh"});
        assert_eq!(signal_from_json(&s).unwrap().domain.as_deref(), Some("walsh"));
    }

    #[test]
    fn malformed_signals() {
        for v in [
            json!({"levels": 1, "values": ["1"]}),
            json!({"levels": 1, "values": ["1", "x"]}),
            json!({"levels": 1, "dim": 2, "values": [["1"], ["2", "3"]]}),
            json!({"values": ["1"]}),
            json!({"levels": 40, "values": []}),
            json!([1, 2]),
        ] {
            assert!(signal_from_json(&v).is_err(), "{v}");
        }
    }

    #[test]
    fn sets_and_nfun() {
        let s = level_set_from_json(&json!({"levels": 2, "cells": "0110"})).unwrap();
        assert_eq!(s.indices(), vec![1, 2]);
        assert_eq!(level_set_from_json(&level_set_to_json(&s)).unwrap(), s);
        assert!(level_set_from_json(&json!({"levels": 2, "cells": [4]})).is_err());
        let n = nfun_from_json(&json!({"levels": 1, "N": [0, 2]})).unwrap();
        assert_eq!(nfun_from_json(&nfun_to_json(&n)).unwrap(), n);
        assert!(nfun_from_json(&json!({"levels": 1, "N": [0, 3]})).is_err());
    }

    #[test]
    fn csv_rows() {
        let mut buf = Vec::new();
        let rows = [RatioRow {
            levels: 4,
            q: 2.0,
            norm: "euclidean".into(),
            ratio_name: "tile_type".into(),
            value: 0.5,
        }];
        write_csv(&mut buf, &rows).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "L,q,norm,ratio_name,value\n4,2.0,euclidean,tile_type,0.5\n");
    }
}
