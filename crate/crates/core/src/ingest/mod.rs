//! Loading canonical files and converting VM traces into instances.

mod schema;

use std::collections::{BTreeSet, HashMap};
use std::io::Read;

use thiserror::Error;

use crate::format::{read_instance, FormatError};
use crate::model::{Instance, Request, ValidateOptions, ValidationErrors};
use crate::rational::{ceil, parse_rational, Rational};

pub use schema::{
    Column, DemandColumn, FlavorRule, FlavorSource, Layout, MissingEnd, TimeMode, TraceSchema,
};

/// Reads an instance in canonical text (or JSON) form.
pub fn load_canonical(input: impl Read, options: ValidateOptions) -> Result<Instance, FormatError> {
    Ok(read_instance(input, options)?.instance)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    pub line: u64,
    pub message: String,
}

impl std::fmt::Display for RowError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub rows: usize,
    pub requests: usize,
    /// Requests whose end is not after their start.
    pub dropped_empty: usize,
    pub dropped_missing_end: usize,
    /// Delete events without a matching create.
    pub unmatched_deletes: usize,
    pub errors: Vec<RowError>,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("schema: {0}")]
    Schema(String),
    #[error("{count} malformed rows (limit {limit}); first: {first}")]
    TooManyErrors {
        count: usize,
        limit: usize,
        first: RowError,
    },
    #[error("invalid instance after scaling: {0}")]
    Invalid(#[from] ValidationErrors),
    #[error("invalid CSV: {0}")]
    Csv(#[from] csv::Error),
}

struct Rules {
    scales: Vec<Rational>,
    capacity: Vec<u64>,
    flavor_multipliers: HashMap<String, Vec<Rational>>,
}

fn exact(what: &str, s: &str) -> Result<Rational, IngestError> {
    parse_rational(s).map_err(|e| IngestError::Schema(format!("{what}: {e}")))
}

impl Rules {
    fn new(schema: &TraceSchema) -> Result<Self, IngestError> {
        let d = schema.dimension();
        if d == 0 {
            return Err(IngestError::Schema(
                "at least one demand column is required".into(),
            ));
        }
        if schema.capacity.len() != d {
            return Err(IngestError::Schema(format!(
                "{} capacity values for {d} demand columns",
                schema.capacity.len()
            )));
        }
        let one = Rational::from_integer(1);
        let scales = schema
            .demands
            .iter()
            .map(|c| {
                let s = exact("scale", &c.scale)?;
                if s < one {
                    return Err(IngestError::Schema(format!("scale {} is below 1", c.scale)));
                }
                Ok(s)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut capacity = Vec::with_capacity(d);
        for (raw, scale) in schema.capacity.iter().zip(&scales) {
            let b = exact("capacity", raw)? * scale;
            if !b.is_integer()
                || b <= Rational::from_integer(0)
                || b > Rational::from_integer(u64::MAX as i128)
            {
                return Err(IngestError::Schema(format!(
                    "capacity {raw} does not scale to a positive integer"
                )));
            }
            capacity.push(b.to_integer() as u64);
        }
        let mut flavor_multipliers = HashMap::new();
        for rule in &schema.flavor_rules {
            if rule.multipliers.len() != d {
                return Err(IngestError::Schema(format!(
                    "flavor rule has {} multipliers for {d} dimensions",
                    rule.multipliers.len()
                )));
            }
            let m = rule
                .multipliers
                .iter()
                .map(|s| exact("multiplier", s))
                .collect::<Result<Vec<_>, _>>()?;
            for name in &rule.flavors {
                flavor_multipliers.insert(name.clone(), m.clone());
            }
        }
        Ok(Self {
            scales,
            capacity,
            flavor_multipliers,
        })
    }

    fn demand(&self, raw: &[Rational], flavor: Option<&str>) -> Result<Vec<u64>, String> {
        let multipliers = flavor.and_then(|f| self.flavor_multipliers.get(f));
        raw.iter()
            .enumerate()
            .map(|(j, &v)| {
                let mut scaled = v * self.scales[j];
                if let Some(m) = multipliers {
                    scaled *= m[j];
                }
                u64::try_from(ceil(&scaled)).map_err(|_| format!("demand {v} out of range"))
            })
            .collect()
    }
}

fn resolve(column: &Column, header: Option<&csv::StringRecord>) -> Result<usize, IngestError> {
    match column {
        Column::Index(i) => Ok(*i),
        Column::Name(name) => header
            .and_then(|h| h.iter().position(|c| c == name))
            .ok_or_else(|| IngestError::Schema(format!("column `{name}` not found in header"))),
    }
}

fn field<'r>(record: &'r csv::StringRecord, index: usize, what: &str) -> Result<&'r str, String> {
    record
        .get(index)
        .ok_or_else(|| format!("missing {what} column (index {index})"))
}

fn number(record: &csv::StringRecord, index: usize, what: &str) -> Result<Rational, String> {
    let s = field(record, index, what)?;
    parse_rational(s).map_err(|_| format!("{what} `{s}` is not a number"))
}

/// Flavor names from templates use the raw values, integers without a
/// decimal point.
fn render_template(template: &str, raw: &[Rational]) -> String {
    let mut out = template.to_string();
    for (i, v) in raw.iter().enumerate() {
        out = out.replace(&format!("{{{i}}}"), &v.to_string());
    }
    out
}

struct Row {
    line: u64,
    start: Rational,
    end: Option<Rational>,
    demand: Vec<Rational>,
    flavor: Option<String>,
}

/// Parses the trace, scales demands with ceiling rounding, maps times to
/// integers and validates the result against the scaled capacity.
pub fn ingest_trace(
    input: impl Read,
    schema: &TraceSchema,
) -> Result<(Instance, IngestReport), IngestError> {
    let rules = Rules::new(schema)?;
    let delimiter = u8::try_from(schema.delimiter)
        .map_err(|_| IngestError::Schema("delimiter must be a single-byte character".into()))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(schema.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = if schema.has_header {
        Some(reader.headers()?.clone())
    } else {
        None
    };
    let demand_cols = schema
        .demands
        .iter()
        .map(|c| resolve(&c.column, header.as_ref()))
        .collect::<Result<Vec<_>, _>>()?;
    let flavor_col = match &schema.flavor {
        Some(FlavorSource::Column(c)) => Some(resolve(c, header.as_ref())?),
        _ => None,
    };

    let mut report = IngestReport::default();
    let mut rows: Vec<Row> = Vec::new();
    let fail = |report: &mut IngestReport, line: u64, message: String| -> Result<(), IngestError> {
        report.errors.push(RowError { line, message });
        if report.errors.len() > schema.max_errors {
            return Err(IngestError::TooManyErrors {
                count: report.errors.len(),
                limit: schema.max_errors,
                first: report.errors[0].clone(),
            });
        }
        Ok(())
    };

    let read_demand =
        |record: &csv::StringRecord| -> Result<(Vec<Rational>, Option<String>), String> {
            let demand = demand_cols
                .iter()
                .map(|&c| {
                    let v = number(record, c, "demand")?;
                    if v < Rational::from_integer(0) {
                        return Err(format!("negative demand {v}"));
                    }
                    Ok(v)
                })
                .collect::<Result<Vec<_>, _>>()?;
            let flavor = match (&schema.flavor, flavor_col) {
                (Some(FlavorSource::Template(t)), _) => Some(render_template(t, &demand)),
                (_, Some(c)) => Some(field(record, c, "flavor")?.to_string()),
                _ => None,
            };
            Ok((demand, flavor))
        };

    match &schema.layout {
        Layout::Interval { start, end } => {
            let (sc, ec) = (
                resolve(start, header.as_ref())?,
                resolve(end, header.as_ref())?,
            );
            for record in reader.records() {
                let record = record?;
                let line = record.position().map_or(0, |p| p.line());
                report.rows += 1;
                let parsed = (|| {
                    let start = number(&record, sc, "start")?;
                    let end = match field(&record, ec, "end")? {
                        "" => None,
                        _ => Some(number(&record, ec, "end")?),
                    };
                    let (demand, flavor) = read_demand(&record)?;
                    Ok::<_, String>(Row {
                        line,
                        start,
                        end,
                        demand,
                        flavor,
                    })
                })();
                match parsed {
                    Ok(row) => rows.push(row),
                    Err(message) => fail(&mut report, line, message)?,
                }
            }
        }
        Layout::Events {
            id,
            time,
            event,
            create,
            delete,
        } => {
            let ic = resolve(id, header.as_ref())?;
            let tc = resolve(time, header.as_ref())?;
            let kc = resolve(event, header.as_ref())?;
            let mut open: HashMap<String, usize> = HashMap::new();
            for record in reader.records() {
                let record = record?;
                let line = record.position().map_or(0, |p| p.line());
                report.rows += 1;
                let outcome = (|| {
                    let key = field(&record, ic, "id")?.to_string();
                    let t = number(&record, tc, "time")?;
                    let kind = field(&record, kc, "event")?;
                    if kind == create {
                        if open.contains_key(&key) {
                            return Err(format!("request `{key}` created twice"));
                        }
                        let (demand, flavor) = read_demand(&record)?;
                        open.insert(key, rows.len());
                        rows.push(Row {
                            line,
                            start: t,
                            end: None,
                            demand,
                            flavor,
                        });
                    } else if kind == delete {
                        match open.remove(&key) {
                            Some(pos) => rows[pos].end = Some(t),
                            None => report.unmatched_deletes += 1,
                        }
                    } else {
                        return Err(format!("unknown event `{kind}`"));
                    }
                    Ok(())
                })();
                if let Err(message) = outcome {
                    fail(&mut report, line, message)?;
                }
            }
        }
    }

    // missing ends
    let horizon = rows
        .iter()
        .flat_map(|r| std::iter::once(r.start).chain(r.end))
        .max();
    let mut kept = Vec::with_capacity(rows.len());
    for mut row in rows {
        if row.end.is_none() {
            match schema.missing_end {
                MissingEnd::Drop => {
                    report.dropped_missing_end += 1;
                    continue;
                }
                MissingEnd::Horizon => row.end = horizon,
            }
        }
        if row.end.is_some_and(|e| e <= row.start) {
            report.dropped_empty += 1;
            continue;
        }
        kept.push(row);
    }

    let to_time: Box<dyn Fn(Rational) -> Result<u64, String>> = match &schema.time {
        TimeMode::Rank => {
            let values: Vec<Rational> = kept
                .iter()
                .flat_map(|r| [r.start, r.end.expect("ends resolved")])
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            Box::new(move |t| Ok(values.binary_search(&t).expect("time collected") as u64))
        }
        TimeMode::Scale { factor, shift } => {
            let factor = exact("time factor", factor)?;
            let shift = exact("time shift", shift)?;
            if factor <= Rational::from_integer(0) {
                return Err(IngestError::Schema("time factor must be positive".into()));
            }
            Box::new(move |t| {
                let v = t * factor + shift;
                if !v.is_integer()
                    || v < Rational::from_integer(0)
                    || v > Rational::from_integer(u64::MAX as i128)
                {
                    return Err(format!("time {t} does not map to a non-negative integer"));
                }
                Ok(v.to_integer() as u64)
            })
        }
    };

    let mut requests = Vec::with_capacity(kept.len());
    for row in kept {
        let built = (|| {
            let demand = rules.demand(&row.demand, row.flavor.as_deref())?;
            let start = to_time(row.start)?;
            let end = to_time(row.end.expect("ends resolved"))?;
            Ok::<_, String>((demand, start, end))
        })();
        match built {
            Ok((demand, start, end)) => {
                let id = u32::try_from(requests.len() + 1)
                    .map_err(|_| IngestError::Schema("more than 2^32 - 1 requests".into()))?;
                requests.push(Request::new(id, demand, start, end));
            }
            Err(message) => fail(&mut report, row.line, message)?,
        }
    }
    report.requests = requests.len();
    let instance = Instance::new(rules.capacity, requests)?;
    Ok((instance, report))
}
