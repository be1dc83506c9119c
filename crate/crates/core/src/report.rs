//! Per-epsilon reduction reports and their CSV form.
//!
//! Header: `eps,L,k_del,T,h,n,tau,U,R,K,seconds`. `eps` and `L` are exact
//! (integer, terminating decimal or `p/q`), `R` and `K` are rounded to six
//! decimals and undefined values are written as `nan`.

use std::io::{Read, Write};
use std::time::Instant;

use crate::format::FormatError;
use crate::model::{compute_stats, Instance};
use crate::packing::PriorityRule;
use crate::rational::{format_decimal, parse_rational, Rational};
use crate::reduction::{reduce, Reduction, ReductionError, ReductionOptions};

pub const SWEEP_HEADER: [&str; 11] = [
    "eps", "L", "k_del", "T", "h", "n", "tau", "U", "R", "K", "seconds",
];

const RATIO_PLACES: u32 = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub eps: Rational,
    pub lower_bound: Rational,
    pub k_del: u64,
    /// Horizon, height, size and type count of the reduced instance.
    pub horizon: u64,
    pub height: usize,
    pub n: usize,
    pub types: usize,
    pub removable: u64,
    pub removed_utilization: Option<Rational>,
    pub remaining_ratio: Option<Rational>,
    pub seconds: f64,
}

impl SweepRow {
    pub fn from_reduction(reduction: &Reduction, seconds: f64) -> Self {
        let cert = &reduction.certificate;
        let stats = compute_stats(&reduction.instance);
        Self {
            eps: cert.epsilon,
            lower_bound: cert.lower_bound,
            k_del: cert.k_del,
            horizon: stats.horizon,
            height: stats.height,
            n: stats.n,
            types: stats.types,
            removable: cert.metrics.removable,
            removed_utilization: cert.metrics.removed_utilization,
            remaining_ratio: cert.metrics.remaining_ratio,
            seconds,
        }
    }

    fn fields(&self) -> [String; 11] {
        let ratio = |r: &Option<Rational>| match r {
            Some(v) => format_decimal(v, RATIO_PLACES),
            None => "nan".to_string(),
        };
        [
            render_exact(&self.eps),
            render_exact(&self.lower_bound),
            self.k_del.to_string(),
            self.horizon.to_string(),
            self.height.to_string(),
            self.n.to_string(),
            self.types.to_string(),
            self.removable.to_string(),
            ratio(&self.removed_utilization),
            ratio(&self.remaining_ratio),
            format!("{:.3}", self.seconds),
        ]
    }
}

/// Integer, terminating decimal, or `p/q`.
pub fn render_exact(value: &Rational) -> String {
    if value.is_integer() {
        return value.to_integer().to_string();
    }
    let mut den = *value.denom();
    let mut places = 0;
    for p in [2, 5] {
        while den % p == 0 {
            den /= p;
        }
    }
    if den != 1 {
        return format!("{}/{}", value.numer(), value.denom());
    }
    let mut scaled = *value;
    while !scaled.is_integer() {
        scaled *= Rational::from_integer(10);
        places += 1;
    }
    format_decimal(value, places)
}

/// Runs one reduction and records the reduced instance's statistics.
/// With `timing` off the seconds column is zero, so output is reproducible.
pub fn sweep_row(
    instance: &Instance,
    eps: Rational,
    rule: &dyn PriorityRule,
    options: ReductionOptions,
    timing: bool,
) -> Result<SweepRow, ReductionError> {
    let started = Instant::now();
    let reduction = reduce(instance, eps, rule, options)?;
    let seconds = if timing {
        started.elapsed().as_secs_f64()
    } else {
        0.0
    };
    Ok(SweepRow::from_reduction(&reduction, seconds))
}

/// `from, from + step, ...` up to and including `to`.
pub fn eps_grid(from: Rational, to: Rational, step: Rational) -> Vec<Rational> {
    let mut out = Vec::new();
    if step <= Rational::from_integer(0) {
        return out;
    }
    let mut eps = from;
    while eps <= to {
        out.push(eps);
        eps += step;
    }
    out
}

pub fn write_sweep_csv(rows: &[SweepRow], out: impl Write) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut buf = Vec::new();
    write_sweep_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

pub fn read_sweep_csv(input: impl Read) -> Result<Vec<SweepRow>, FormatError> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().ne(SWEEP_HEADER) {
        return Err(FormatError::Syntax {
            line: 1,
            message: format!("expected header `{}`", SWEEP_HEADER.join(",")),
        });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let bad = |what: &str| FormatError::Syntax {
            line,
            message: format!("bad {what} value"),
        };
        let int = |i: usize| -> Result<u64, FormatError> {
            record[i].parse().map_err(|_| bad(SWEEP_HEADER[i]))
        };
        let ratio = |i: usize| -> Result<Option<Rational>, FormatError> {
            match &record[i] {
                "nan" => Ok(None),
                s => Ok(Some(parse_rational(s)?)),
            }
        };
        if record.len() != SWEEP_HEADER.len() {
            return Err(bad("row length"));
        }
        rows.push(SweepRow {
            eps: parse_rational(&record[0])?,
            lower_bound: parse_rational(&record[1])?,
            k_del: int(2)?,
            horizon: int(3)?,
            height: int(4)? as usize,
            n: int(5)? as usize,
            types: int(6)? as usize,
            removable: int(7)?,
            removed_utilization: ratio(8)?,
            remaining_ratio: ratio(9)?,
            seconds: record[10].parse().map_err(|_| bad("seconds"))?,
        });
    }
    Ok(rows)
}
