//! File formats: samples CSV, model JSON, trace JSON lines, benchmark spec
//! JSON and the benchmark result tables. Coordinates are one-based in every
//! file and zero-based in memory.

use std::fmt::Write as _;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use gauge_core::bcg::TraceRecord;
use gauge_core::{AtomicModel, SampleSet, Shape, SignVertex};
use serde::{Deserialize, Serialize};

use crate::experiments::{AggregateRow, BenchSpec, Method, TrialRow};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: std::io::Error },
    #[error("{source_name}: line {line}: {msg}")]
    Line { source_name: String, line: u64, msg: String },
    #[error("{source_name}: {msg}")]
    Format { source_name: String, msg: String },
    #[error(transparent)]
    Core(#[from] gauge_core::Error),
}

pub type Result<T, E = IoError> = std::result::Result<T, E>;

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| IoError::File { path: path.to_path_buf(), source })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| IoError::File { path: path.to_path_buf(), source })
}

fn display_name(path: &Path) -> String {
    path.display().to_string()
}

// ---------------------------------------------------------------- samples

/// Reads `x1,...,xp,y` rows. Without an explicit shape, each mode's size is
/// the largest coordinate seen.
pub fn read_samples(path: &Path, shape: Option<&Shape>) -> Result<SampleSet> {
    let file = fs::File::open(path).map_err(|source| IoError::File { path: path.to_path_buf(), source })?;
    parse_samples(file, &display_name(path), shape)
}

pub fn parse_samples<R: Read>(reader: R, source_name: &str, shape: Option<&Shape>) -> Result<SampleSet> {
    let line_err = |line: u64, msg: String| IoError::Line { source_name: source_name.to_string(), line, msg };
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| line_err(1, e.to_string()))?.clone();
    let order = header.len().saturating_sub(1);
    let expected: Vec<String> = (1..=order).map(|k| format!("x{k}")).chain(["y".to_string()]).collect();
    if order == 0 || header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(line_err(1, format!("expected header {}", expected.join(","))));
    }
    if let Some(s) = shape {
        if s.order() != order {
            return Err(line_err(1, format!("file has {order} coordinate columns but shape {s} has order {}", s.order())));
        }
    }

    let mut rows: Vec<(Vec<usize>, f64)> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            line_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let mut coords = Vec::with_capacity(order);
        for k in 0..order {
            let field = &record[k];
            let c: usize = field
                .parse()
                .map_err(|_| line_err(line, format!("x{}: {field:?} is not a positive integer", k + 1)))?;
            if c == 0 {
                return Err(line_err(line, format!("x{}: coordinates are one-based", k + 1)));
            }
            if let Some(s) = shape {
                if c > s.dims()[k] {
                    return Err(line_err(line, format!("x{}: {c} exceeds mode size {}", k + 1, s.dims()[k])));
                }
            }
            coords.push(c - 1);
        }
        let field = &record[order];
        let y: f64 = field.parse().map_err(|_| line_err(line, format!("y: {field:?} is not a number")))?;
        if !y.is_finite() {
            return Err(line_err(line, format!("y: {field:?} is not finite")));
        }
        rows.push((coords, y));
    }
    if rows.is_empty() {
        return Err(IoError::Format { source_name: source_name.to_string(), msg: "no sample rows".into() });
    }
    let shape = match shape {
        Some(s) => s.clone(),
        None => {
            let mut dims = vec![0usize; order];
            for (c, _) in &rows {
                for (d, &x) in dims.iter_mut().zip(c) {
                    *d = (*d).max(x + 1);
                }
            }
            Shape::new(dims)?
        }
    };
    Ok(SampleSet::ingest(shape, rows)?)
}

/// Rows in ingestion order. Floats in every table use the shortest
/// representation that parses back to the same value.
pub fn format_samples(samples: &SampleSet) -> String {
    let p = samples.shape().order();
    let mut out = String::new();
    for k in 1..=p {
        let _ = write!(out, "x{k},");
    }
    out.push_str("y\n");
    for (x, y) in samples.rows() {
        for &c in x.coords() {
            let _ = write!(out, "{},", c + 1);
        }
        let _ = writeln!(out, "{y:?}");
    }
    out
}

// ---------------------------------------------------------------- models

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub shape: Vec<usize>,
    pub lambda: f64,
    pub terms: Vec<TermFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermFile {
    pub weight: f64,
    pub signs: Vec<Vec<i8>>,
}

impl From<&AtomicModel> for ModelFile {
    fn from(m: &AtomicModel) -> Self {
        ModelFile {
            shape: m.shape().dims().to_vec(),
            lambda: m.lambda(),
            terms: m.terms().iter().map(|(w, v)| TermFile { weight: *w, signs: v.signs().to_vec() }).collect(),
        }
    }
}

impl ModelFile {
    pub fn into_model(self) -> gauge_core::Result<AtomicModel> {
        let shape = Shape::new(self.shape)?;
        let terms = self
            .terms
            .into_iter()
            .map(|t| SignVertex::new(&shape, t.signs).map(|v| (t.weight, v)))
            .collect::<gauge_core::Result<Vec<_>>>()?;
        AtomicModel::new(shape, self.lambda, terms)
    }
}

pub fn format_model(model: &AtomicModel) -> String {
    let mut s = serde_json::to_string_pretty(&ModelFile::from(model)).expect("model serializes");
    s.push('\n');
    s
}

pub fn parse_model(text: &str, source_name: &str) -> Result<AtomicModel> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| IoError::Line {
        source_name: source_name.to_string(),
        line: e.line() as u64,
        msg: e.to_string(),
    })?;
    Ok(file.into_model()?)
}

pub fn read_model(path: &Path) -> Result<AtomicModel> {
    parse_model(&read_text(path)?, &display_name(path))
}

// ---------------------------------------------------------------- traces

#[derive(Serialize)]
struct TraceLine<'a> {
    iteration: usize,
    phase: &'a str,
    objective: f64,
    phi: f64,
    active_size: usize,
    oracle_seconds: f64,
}

/// One JSON object per line.
pub fn format_trace(trace: &[TraceRecord]) -> String {
    let mut out = String::new();
    for r in trace {
        let line = TraceLine {
            iteration: r.iteration,
            phase: r.phase.as_str(),
            objective: r.objective,
            phi: r.phi,
            active_size: r.active_size,
            oracle_seconds: r.oracle_seconds,
        };
        out.push_str(&serde_json::to_string(&line).expect("trace serializes"));
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------- benchmarks

pub fn read_bench_spec(path: &Path) -> Result<BenchSpec> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| IoError::Line {
        source_name: display_name(path),
        line: e.line() as u64,
        msg: e.to_string(),
    })
}

pub const TRIAL_HEADER: &str = "trial,seed,method,nmse,seconds,iterations,oracle_calls,error";
pub const AGGREGATE_HEADER: &str = "method,trials,failures,nmse_mean,nmse_median,nmse_std,seconds_mean";

fn csv_line(fields: &[String]) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(fields).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

pub fn format_trials(rows: &[TrialRow]) -> String {
    let mut out = format!("{TRIAL_HEADER}\n");
    for r in rows {
        out.push_str(&csv_line(&[
            r.trial.to_string(),
            r.seed.to_string(),
            r.method.as_str().to_string(),
            r.nmse.map_or(String::new(), |v| format!("{v:?}")),
            format!("{:?}", r.seconds),
            r.iterations.to_string(),
            r.oracle_calls.to_string(),
            r.error.clone().unwrap_or_default(),
        ]));
    }
    out
}

pub fn parse_trials(text: &str, source_name: &str) -> Result<Vec<TrialRow>> {
    let line_err = |line: u64, msg: String| IoError::Line { source_name: source_name.to_string(), line, msg };
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| line_err(1, e.to_string()))?;
    if header.iter().ne(TRIAL_HEADER.split(',')) {
        return Err(line_err(1, format!("expected header {TRIAL_HEADER}")));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| line_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |col: &str| line_err(line, format!("bad {col} field"));
        let method = match &rec[2] {
            "gauge" => Method::Gauge,
            "als" => Method::Als,
            "naive" => Method::Naive,
            _ => return Err(bad("method")),
        };
        rows.push(TrialRow {
            trial: rec[0].parse().map_err(|_| bad("trial"))?,
            seed: rec[1].parse().map_err(|_| bad("seed"))?,
            method,
            nmse: if rec[3].is_empty() { None } else { Some(rec[3].parse().map_err(|_| bad("nmse"))?) },
            seconds: rec[4].parse().map_err(|_| bad("seconds"))?,
            iterations: rec[5].parse().map_err(|_| bad("iterations"))?,
            oracle_calls: rec[6].parse().map_err(|_| bad("oracle_calls"))?,
            error: if rec[7].is_empty() { None } else { Some(rec[7].to_string()) },
        });
    }
    Ok(rows)
}

pub fn format_aggregates(rows: &[AggregateRow]) -> String {
    let mut out = format!("{AGGREGATE_HEADER}\n");
    for a in rows {
        out.push_str(&csv_line(&[
            a.method.as_str().to_string(),
            a.trials.to_string(),
            a.failures.to_string(),
            format!("{:?}", a.nmse_mean),
            format!("{:?}", a.nmse_median),
            format!("{:?}", a.nmse_std),
            format!("{:?}", a.seconds_mean),
        ]));
    }
    out
}

/// `%.{digits}g`-style formatting: fixed notation for moderate exponents,
/// scientific otherwise, trailing zeros removed.
pub fn format_significant(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0".into() } else { v.to_string() };
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_round_trip() {
        let text = "x1,x2,y\n1,2,0.5\n2,1,-1.0\n1,2,0.25\n";
        let s = parse_samples(text.as_bytes(), "t", None).unwrap();
        assert_eq!(s.shape().dims(), &[2, 2]);
        assert_eq!(s.n(), 3);
        assert_eq!(s.unique().len(), 2);
        assert_eq!(format_samples(&s), text);
    }

    #[test]
    fn sample_errors_name_the_line() {
        let cases = [
            ("x1,x2,y\n1,2,0.5\n0,1,1\n", "line 3"),
            ("x1,x2,y\n1,2,0.5\n1,abc,1\n", "line 3"),
            ("x1,x2,y\n1,2,nan\n", "line 2"),
            ("x1,x2,y\n1,2,0.5\n1,2\n", "line 3"),
            ("a,b,y\n1,2,0.5\n", "line 1"),
        ];
        for (text, needle) in cases {
            let e = parse_samples(text.as_bytes(), "f.csv", None).unwrap_err().to_string();
            assert!(e.contains(needle) && e.starts_with("f.csv"), "{text:?}: {e}");
        }
        let shape = Shape::new(vec![2, 2]).unwrap();
        let e = parse_samples("x1,x2,y\n1,3,0\n".as_bytes(), "f", Some(&shape)).unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        assert!(parse_samples("x1,x2,x3,y\n1,1,1,0\n".as_bytes(), "f", Some(&shape)).is_err());
        assert!(parse_samples("x1,y\n".as_bytes(), "f", None).is_err());
    }

    #[test]
    fn model_round_trip() {
        let shape = Shape::new(vec![2, 3]).unwrap();
        let v = SignVertex::new(&shape, vec![vec![1, -1], vec![1, 1, -1]]).unwrap();
        let m = AtomicModel::new(shape.clone(), 1.5, vec![(0.25, v), (0.5, SignVertex::ones(&shape))]).unwrap();
        let text = format_model(&m);
        assert_eq!(parse_model(&text, "m").unwrap(), m);
        assert!(parse_model(r#"{"shape":[2],"lambda":1,"terms":[{"weight":1,"signs":[[1,2]]}]}"#, "m").is_err());
        assert!(parse_model("{", "m").is_err());
    }

    #[test]
    fn significant_digits() {
        assert_eq!(format_significant(0.0, 12), "0");
        assert_eq!(format_significant(1.0, 12), "1");
        assert_eq!(format_significant(0.123456789012345, 12), "0.123456789012");
        assert_eq!(format_significant(1.5e-7, 12), "1.5e-07");
        assert_eq!(format_significant(123.0, 12), "123");
        assert_eq!(format_significant(-2.0 / 3.0, 12), "-0.666666666667");
        assert_eq!(format_significant(3e15, 12), "3e+15");
    }

    #[test]
    fn trials_round_trip() {
        let rows = vec![
            TrialRow { trial: 0, seed: 3, method: Method::Gauge, nmse: Some(0.1 + 0.2), seconds: 0.0, iterations: 4, oracle_calls: 2, error: None },
            TrialRow { trial: 1, seed: 4, method: Method::Als, nmse: None, seconds: 1.5, iterations: 0, oracle_calls: 0, error: Some("x, \"y\"".into()) },
        ];
        assert_eq!(parse_trials(&format_trials(&rows), "t").unwrap(), rows);
    }
}
