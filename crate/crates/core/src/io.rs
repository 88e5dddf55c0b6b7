//! Path serialization: JSON lines (one record per line) and a compact
//! little-endian binary format.
//!
//! Floats in JSON lines are written with 17 significant digits so that a
//! round trip is exact. Infinite coordinates are written as the strings
//! `"inf"` and `"-inf"`.
//!
//! The binary layout is
//!
//! ```text
//! magic "SLEPATH\0" | version u32 | params hash u64 | force points u32
//! | records u64 | derivative flag u8 | params JSON (u32 length + bytes)
//! | records: t, Re W, Im W, (Re V^j, Im V^j)*, [(Re log g', Im log g')*]
//! | stop reason code u8 + index u64 + time f64 | increments (u64 count + f64s)
//! ```

use std::io::{BufRead, Read, Write};

use num_complex::Complex64;
use serde_json::Value;

use crate::domain::Point;
use crate::error::{Result, SleError};
use crate::process::{PathSample, SleParams, Stop, StopReason};

const MAGIC: &[u8; 8] = b"SLEPATH\0";
const VERSION: u32 = 1;

/// Output format for path dumps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathFormat {
    Jsonl,
    Binary,
}

impl std::str::FromStr for PathFormat {
    type Err = SleError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "jsonl" | "json-lines" | "json_lines" => Ok(PathFormat::Jsonl),
            "bin" | "binary" => Ok(PathFormat::Binary),
            other => Err(SleError::Parse(format!("unknown path format {other:?}"))),
        }
    }
}

/// 64-bit FNV-1a.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Hash of the canonical JSON form of the parameters.
pub fn params_hash(params: &SleParams) -> Result<u64> {
    Ok(fnv1a(serde_json::to_string(params)?.as_bytes()))
}

/// A float with 17 significant digits, or a quoted infinity.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "\"nan\"".into()
    } else if x > 0.0 {
        "\"inf\"".into()
    } else {
        "\"-inf\"".into()
    }
}

fn fmt_pair(re: f64, im: f64) -> String {
    format!("[{},{}]", fmt_f64(re), fmt_f64(im))
}

fn value_f64(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| SleError::Parse(format!("bad number {n}"))),
        Value::String(s) => match s.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            _ => Err(SleError::Parse(format!("bad float {s:?}"))),
        },
        other => Err(SleError::Parse(format!("expected a float, got {other}"))),
    }
}

fn value_pair(v: &Value) -> Result<(f64, f64)> {
    match v.as_array().map(Vec::as_slice) {
        Some([a, b]) => Ok((value_f64(a)?, value_f64(b)?)),
        _ => Err(SleError::Parse(format!("expected [re, im], got {v}"))),
    }
}

/// Write a path as JSON lines: a header, one line per record, and a
/// trailer with the Brownian increments.
pub fn write_jsonl<W: Write>(sample: &PathSample, mut out: W) -> Result<()> {
    let with_d = !sample.log_derivatives.is_empty() && sample.log_derivatives.iter().all(|l| l.len() == sample.len());
    let header = serde_json::json!({
        "kind": "header",
        "params": sample.params,
        "params_hash": params_hash(&sample.params)?,
        "records": sample.len(),
        "stopped_at": sample.stopped_at,
        "derivatives": with_d,
    });
    writeln!(out, "{header}")?;
    for i in 0..sample.len() {
        let v: Vec<String> = sample
            .v
            .iter()
            .map(|tr| {
                let (re, im) = tr[i].parts();
                fmt_pair(re, im)
            })
            .collect();
        write!(
            out,
            "{{\"t\":{},\"w\":{},\"v\":[{}]",
            fmt_f64(sample.times[i]),
            fmt_pair(sample.w[i].re, sample.w[i].im),
            v.join(",")
        )?;
        if with_d {
            let d: Vec<String> = sample.log_derivatives.iter().map(|tr| fmt_pair(tr[i].re, tr[i].im)).collect();
            write!(out, ",\"log_d\":[{}]", d.join(","))?;
        }
        writeln!(out, "}}")?;
    }
    let db: Vec<String> = sample.brownian_increments.iter().map(|&x| fmt_f64(x)).collect();
    writeln!(out, "{{\"kind\":\"increments\",\"db\":[{}]}}", db.join(","))?;
    out.flush()?;
    Ok(())
}

/// Read a path written by [`write_jsonl`].
pub fn read_jsonl<R: BufRead>(input: R) -> Result<PathSample> {
    let mut lines = input.lines();
    let header: Value = match lines.next() {
        Some(line) => serde_json::from_str(&line?)?,
        None => return Err(SleError::Parse("empty path file".into())),
    };
    if header["kind"] != "header" {
        return Err(SleError::Parse("missing header line".into()));
    }
    let params: SleParams = serde_json::from_value(header["params"].clone())?;
    if header["params_hash"].as_u64() != Some(params_hash(&params)?) {
        return Err(SleError::Parse("parameter hash mismatch".into()));
    }
    let stopped_at: Stop = serde_json::from_value(header["stopped_at"].clone())?;
    let m = params.force_points.len();
    let mut sample = PathSample {
        params,
        times: Vec::new(),
        w: Vec::new(),
        v: vec![Vec::new(); m],
        log_derivatives: vec![Vec::new(); m],
        brownian_increments: Vec::new(),
        stopped_at,
    };
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Value = serde_json::from_str(&line)?;
        if rec["kind"] == "increments" {
            let db = rec["db"].as_array().ok_or_else(|| SleError::Parse("bad increments".into()))?;
            sample.brownian_increments = db.iter().map(value_f64).collect::<Result<_>>()?;
            continue;
        }
        sample.times.push(value_f64(&rec["t"])?);
        let (re, im) = value_pair(&rec["w"])?;
        sample.w.push(Complex64::new(re, im));
        let v = rec["v"].as_array().ok_or_else(|| SleError::Parse("missing force points".into()))?;
        if v.len() != m {
            return Err(SleError::Parse(format!("{} force points in a record, expected {m}", v.len())));
        }
        for (tr, p) in sample.v.iter_mut().zip(v) {
            let (re, im) = value_pair(p)?;
            tr.push(Point::from_parts(re, im));
        }
        if let Some(d) = rec.get("log_d").and_then(Value::as_array) {
            for (tr, p) in sample.log_derivatives.iter_mut().zip(d) {
                let (re, im) = value_pair(p)?;
                tr.push(Complex64::new(re, im));
            }
        }
    }
    Ok(sample)
}

fn stop_code(reason: StopReason) -> (u8, u64) {
    match reason {
        StopReason::TimeLimit => (0, 0),
        StopReason::Collision { index } => (1, index as u64),
        StopReason::Swallowed { index } => (2, index as u64),
        StopReason::TargetReached => (3, 0),
        StopReason::CapacityLimit => (4, 0),
    }
}

fn stop_from_code(code: u8, index: u64) -> Result<StopReason> {
    let index = index as usize;
    Ok(match code {
        0 => StopReason::TimeLimit,
        1 => StopReason::Collision { index },
        2 => StopReason::Swallowed { index },
        3 => StopReason::TargetReached,
        4 => StopReason::CapacityLimit,
        other => return Err(SleError::Parse(format!("unknown stop code {other}"))),
    })
}

/// Write a path in the binary format.
pub fn write_binary<W: Write>(sample: &PathSample, mut out: W) -> Result<()> {
    let params_json = serde_json::to_string(&sample.params)?;
    let with_d = !sample.log_derivatives.is_empty() && sample.log_derivatives.iter().all(|l| l.len() == sample.len());
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&fnv1a(params_json.as_bytes()).to_le_bytes())?;
    out.write_all(&(sample.v.len() as u32).to_le_bytes())?;
    out.write_all(&(sample.len() as u64).to_le_bytes())?;
    out.write_all(&[with_d as u8])?;
    out.write_all(&(params_json.len() as u32).to_le_bytes())?;
    out.write_all(params_json.as_bytes())?;
    let put = |x: f64, out: &mut W| out.write_all(&x.to_le_bytes());
    for i in 0..sample.len() {
        put(sample.times[i], &mut out)?;
        put(sample.w[i].re, &mut out)?;
        put(sample.w[i].im, &mut out)?;
        for tr in &sample.v {
            let (re, im) = tr[i].parts();
            put(re, &mut out)?;
            put(im, &mut out)?;
        }
        if with_d {
            for tr in &sample.log_derivatives {
                put(tr[i].re, &mut out)?;
                put(tr[i].im, &mut out)?;
            }
        }
    }
    let (code, index) = stop_code(sample.stopped_at.reason);
    out.write_all(&[code])?;
    out.write_all(&index.to_le_bytes())?;
    put(sample.stopped_at.time, &mut out)?;
    out.write_all(&(sample.brownian_increments.len() as u64).to_le_bytes())?;
    for &x in &sample.brownian_increments {
        put(x, &mut out)?;
    }
    out.flush()?;
    Ok(())
}

fn read_array<const N: usize, R: Read>(input: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    input.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_f64<R: Read>(input: &mut R) -> Result<f64> {
    Ok(f64::from_le_bytes(read_array(input)?))
}

/// Read a path written by [`write_binary`].
pub fn read_binary<R: Read>(mut input: R) -> Result<PathSample> {
    if &read_array::<8, _>(&mut input)? != MAGIC {
        return Err(SleError::Parse("not a binary path file".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut input)?);
    if version != VERSION {
        return Err(SleError::Parse(format!("unsupported version {version}")));
    }
    let hash = u64::from_le_bytes(read_array(&mut input)?);
    let m = u32::from_le_bytes(read_array(&mut input)?) as usize;
    let n = u64::from_le_bytes(read_array(&mut input)?) as usize;
    let with_d = read_array::<1, _>(&mut input)?[0] != 0;
    let len = u32::from_le_bytes(read_array(&mut input)?) as usize;
    let mut json = vec![0u8; len];
    input.read_exact(&mut json)?;
    if fnv1a(&json) != hash {
        return Err(SleError::Parse("parameter hash mismatch".into()));
    }
    let params: SleParams = serde_json::from_slice(&json)?;
    if params.force_points.len() != m {
        return Err(SleError::Parse("force point count does not match the parameters".into()));
    }
    let mut sample = PathSample {
        params,
        times: Vec::with_capacity(n),
        w: Vec::with_capacity(n),
        v: vec![Vec::with_capacity(n); m],
        log_derivatives: vec![Vec::new(); m],
        brownian_increments: Vec::new(),
        stopped_at: Stop { time: 0.0, reason: StopReason::TimeLimit },
    };
    for _ in 0..n {
        sample.times.push(read_f64(&mut input)?);
        let re = read_f64(&mut input)?;
        let im = read_f64(&mut input)?;
        sample.w.push(Complex64::new(re, im));
        for tr in sample.v.iter_mut() {
            let re = read_f64(&mut input)?;
            let im = read_f64(&mut input)?;
            tr.push(Point::from_parts(re, im));
        }
        if with_d {
            for tr in sample.log_derivatives.iter_mut() {
                let re = read_f64(&mut input)?;
                let im = read_f64(&mut input)?;
                tr.push(Complex64::new(re, im));
            }
        }
    }
    let code = read_array::<1, _>(&mut input)?[0];
    let index = u64::from_le_bytes(read_array(&mut input)?);
    let time = read_f64(&mut input)?;
    sample.stopped_at = Stop { time, reason: stop_from_code(code, index)? };
    let count = u64::from_le_bytes(read_array(&mut input)?) as usize;
    sample.brownian_increments = (0..count).map(|_| read_f64(&mut input)).collect::<Result<_>>()?;
    Ok(sample)
}

pub fn write_path<W: Write>(sample: &PathSample, format: PathFormat, out: W) -> Result<()> {
    match format {
        PathFormat::Jsonl => write_jsonl(sample, out),
        PathFormat::Binary => write_binary(sample, out),
    }
}
