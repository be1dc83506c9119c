//! File formats: canonical instance text/JSON, packings, certificates.
//!
//! Canonical instance text:
//!
//! ```text
//! d n
//! b_1 ... b_d
//! a_1 ... a_d start end      (n rows)
//! ```
//!
//! Row `i` (1-based) implicitly has request id `i`. A row whose request
//! carries another id is written with an `id:` prefix, e.g. `17: 2 1 3`,
//! so reduced instances keep their original ids. Blank lines and lines
//! starting with `#` are ignored by the reader.

use std::fmt::Write as _;
use std::io::{self, BufRead, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{Metrics, RemovalBudget};
use crate::model::{
    validate_instance, Instance, RawInstance, RawRequest, RequestId, ValidateOptions, Validated,
    ValidationErrors,
};
use crate::packing::{Packing, PackingError};
use crate::rational::{Fraction, ParseRationalError, Rational};
use crate::reduction::ReductionCertificate;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid instance: {0}")]
    Invalid(#[from] ValidationErrors),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Packing(#[from] PackingError),
    #[error(transparent)]
    Number(#[from] ParseRationalError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        message: message.into(),
    }
}

/// Writes the canonical text form.
pub fn write_instance_text(instance: &Instance, mut out: impl Write) -> io::Result<()> {
    out.write_all(instance_to_text(instance).as_bytes())
}

pub fn instance_to_text(instance: &Instance) -> String {
    let mut s = String::with_capacity(32 + instance.len() * 16);
    let _ = writeln!(s, "{} {}", instance.dimension(), instance.len());
    push_joined(&mut s, instance.capacity().components());
    s.push('\n');
    for (i, r) in instance.requests().iter().enumerate() {
        if r.id.0 as usize != i + 1 {
            let _ = write!(s, "{}: ", r.id);
        }
        push_joined(&mut s, r.demand.components());
        let _ = writeln!(s, " {} {}", r.start, r.end);
    }
    s
}

fn push_joined(s: &mut String, values: &[u64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{v}");
    }
}

pub fn instance_to_json(instance: &Instance) -> String {
    let mut s = serde_json::to_string_pretty(&instance.to_raw()).expect("raw instance serializes");
    s.push('\n');
    s
}

/// Parses canonical text, or the JSON variant when the input starts with `{`.
pub fn parse_instance(text: &str, options: ValidateOptions) -> Result<Validated, FormatError> {
    if text.trim_start().starts_with('{') {
        let raw: RawInstance = serde_json::from_str(text)?;
        return Ok(validate_instance(raw, options)?);
    }

    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (line, header) = lines
        .next()
        .ok_or_else(|| syntax(1, "missing header `d n`"))?;
    let header = parse_ints(line, header)?;
    let [d, n] = header[..] else {
        return Err(syntax(
            line,
            format!("header needs 2 fields `d n`, found {}", header.len()),
        ));
    };
    if d < 1 {
        return Err(syntax(line, "dimension must be at least 1"));
    }
    if n < 0 {
        return Err(syntax(line, "request count must be non-negative"));
    }
    let (d, n) = (d as usize, n as usize);

    let (line, cap) = lines
        .next()
        .ok_or_else(|| syntax(line + 1, "missing capacity line"))?;
    let capacity = parse_ints(line, cap)?;
    if capacity.len() != d {
        return Err(syntax(
            line,
            format!("expected {d} capacity values, found {}", capacity.len()),
        ));
    }

    let mut requests = Vec::with_capacity(n);
    for (line, row) in lines {
        if requests.len() == n {
            return Err(syntax(
                line,
                format!("more than the {n} request rows announced in the header"),
            ));
        }
        let (id, body) = match row.split_once(':') {
            Some((id, body)) => {
                let id: u32 = id
                    .trim()
                    .parse()
                    .map_err(|_| syntax(line, format!("bad request id `{}`", id.trim())))?;
                (Some(id), body)
            }
            None => (None, row),
        };
        let fields = parse_ints(line, body)?;
        if fields.len() != d + 2 {
            return Err(syntax(
                line,
                format!(
                    "expected {} fields ({d} demands, start, end), found {}",
                    d + 2,
                    fields.len()
                ),
            ));
        }
        requests.push(RawRequest {
            id,
            demand: fields[..d].to_vec(),
            start: fields[d],
            end: fields[d + 1],
        });
    }
    if requests.len() != n {
        return Err(syntax(
            text.lines().count(),
            format!("header announces {n} requests, found {}", requests.len()),
        ));
    }
    Ok(validate_instance(
        RawInstance { capacity, requests },
        options,
    )?)
}

fn parse_ints(line: usize, s: &str) -> Result<Vec<i128>, FormatError> {
    s.split_whitespace()
        .map(|tok| {
            tok.parse::<i128>()
                .map_err(|_| syntax(line, format!("`{tok}` is not an integer")))
        })
        .collect()
}

pub fn read_instance(
    mut input: impl Read,
    options: ValidateOptions,
) -> Result<Validated, FormatError> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    parse_instance(&text, options)
}

/// 64-bit FNV-1a of the canonical text, as 16 hex digits.
pub fn fingerprint(instance: &Instance) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in instance_to_text(instance).bytes() {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

#[derive(Debug, Serialize, Deserialize)]
struct AssignmentRecord {
    request_id: u32,
    bin: u32,
}

/// CSV with header `request_id,bin`, rows in ascending id order.
pub fn packing_to_csv(packing: &Packing) -> String {
    let mut s = String::from("request_id,bin\n");
    for (id, bin) in packing.assignments() {
        let _ = writeln!(s, "{id},{bin}");
    }
    s
}

pub fn packing_from_csv(input: impl Read) -> Result<Packing, FormatError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut pairs = Vec::new();
    for record in reader.deserialize() {
        let rec: AssignmentRecord = record?;
        pairs.push((RequestId(rec.request_id), rec.bin));
    }
    Ok(Packing::from_assignment(pairs)?)
}

pub fn packing_to_json(packing: &Packing) -> String {
    let records: Vec<AssignmentRecord> = packing
        .assignments()
        .map(|(id, bin)| AssignmentRecord {
            request_id: id.0,
            bin,
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&records).expect("records serialize");
    s.push('\n');
    s
}

pub fn packing_from_json(input: impl Read) -> Result<Packing, FormatError> {
    let records: Vec<AssignmentRecord> = serde_json::from_reader(input)?;
    Ok(Packing::from_assignment(
        records
            .into_iter()
            .map(|r| (RequestId(r.request_id), r.bin)),
    )?)
}

/// Reads either packing format, sniffing JSON by a leading `[`.
pub fn read_packing(mut input: impl BufRead) -> Result<Packing, FormatError> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    if text.trim_start().starts_with('[') {
        packing_from_json(text.as_bytes())
    } else {
        packing_from_csv(text.as_bytes())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct MetricsFile {
    lower_bound: Fraction,
    k_del: u64,
    removable: u64,
    n: u64,
    n_prime: u64,
    removed_utilization: Option<Fraction>,
    remaining_ratio: Option<Fraction>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CertificateFile {
    epsilon: Fraction,
    lower_bound: Fraction,
    k_del: u64,
    deletion_bins: Vec<Vec<u32>>,
    original_n: u64,
    reduced_fingerprint: String,
    priority_rule: String,
    removal_budget: RemovalBudget,
    metrics: MetricsFile,
}

pub fn certificate_to_json(cert: &ReductionCertificate) -> String {
    let m = &cert.metrics;
    let file = CertificateFile {
        epsilon: cert.epsilon.into(),
        lower_bound: cert.lower_bound.into(),
        k_del: cert.k_del,
        deletion_bins: cert
            .deletion_bins
            .iter()
            .map(|bin| bin.iter().map(|id| id.0).collect())
            .collect(),
        original_n: cert.original_n,
        reduced_fingerprint: cert.reduced_fingerprint.clone(),
        priority_rule: cert.priority_rule.clone(),
        removal_budget: cert.removal_budget,
        metrics: MetricsFile {
            lower_bound: m.lower_bound.into(),
            k_del: m.k_del,
            removable: m.removable,
            n: m.n,
            n_prime: m.n_prime,
            removed_utilization: m.removed_utilization.map(Into::into),
            remaining_ratio: m.remaining_ratio.map(Into::into),
        },
    };
    let mut s = serde_json::to_string_pretty(&file).expect("certificate serializes");
    s.push('\n');
    s
}

pub fn certificate_from_json(input: impl Read) -> Result<ReductionCertificate, FormatError> {
    let file: CertificateFile = serde_json::from_reader(input)?;
    let opt = |f: Option<Fraction>| f.map(Rational::try_from).transpose();
    let m = file.metrics;
    Ok(ReductionCertificate {
        epsilon: file.epsilon.try_into()?,
        lower_bound: file.lower_bound.try_into()?,
        k_del: file.k_del,
        deletion_bins: file
            .deletion_bins
            .into_iter()
            .map(|bin| bin.into_iter().map(RequestId).collect())
            .collect(),
        original_n: file.original_n,
        reduced_fingerprint: file.reduced_fingerprint,
        priority_rule: file.priority_rule,
        removal_budget: file.removal_budget,
        metrics: Metrics {
            lower_bound: m.lower_bound.try_into()?,
            k_del: m.k_del,
            removable: m.removable,
            n: m.n,
            n_prime: m.n_prime,
            removed_utilization: opt(m.removed_utilization)?,
            remaining_ratio: opt(m.remaining_ratio)?,
        },
    })
}
