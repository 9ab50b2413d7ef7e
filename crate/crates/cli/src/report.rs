//! Report records and their JSON / CSV renderings.
//!
//! Floats are written as `{:.16e}` (17 significant digits); NaN and the
//! infinities become the strings `"NaN"`, `"inf"`, `"-inf"`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use palmshift_core::Verdict;
use serde_json::Value;

use crate::CliError;

pub const CSV_HEADER: &str = "experiment,statistic,estimate,std_error,verdict,censored,n_samples,seed";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Consistent,
    Inconsistent,
    Withheld,
    Pass,
    Fail,
    /// Reported value without a verdict of its own.
    Info,
}

impl Outcome {
    pub fn name(&self) -> &'static str {
        match self {
            Outcome::Consistent => "consistent",
            Outcome::Inconsistent => "inconsistent",
            Outcome::Withheld => "withheld",
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::Info => "info",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Outcome::Consistent,
            Outcome::Inconsistent,
            Outcome::Withheld,
            Outcome::Pass,
            Outcome::Fail,
            Outcome::Info,
        ]
        .into_iter()
        .find(|o| o.name() == s)
    }

    pub fn is_success(&self) -> bool {
        matches!(self, Outcome::Consistent | Outcome::Pass | Outcome::Info)
    }

    pub fn check(ok: bool) -> Self {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

impl From<Verdict> for Outcome {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Consistent => Outcome::Consistent,
            Verdict::Inconsistent => Outcome::Inconsistent,
            Verdict::Withheld => Outcome::Withheld,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StatisticRecord {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub verdict: Outcome,
    pub censored: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRecord {
    pub name: String,
    pub kind: String,
    pub seed: u64,
    pub n_samples: usize,
    pub config: BTreeMap<String, String>,
    pub statistics: Vec<StatisticRecord>,
    /// Wall-clock seconds; only recorded on request so reports stay
    /// reproducible byte for byte.
    pub duration_secs: Option<f64>,
}

impl ReportRecord {
    pub fn is_success(&self) -> bool {
        self.statistics.iter().all(|s| s.verdict.is_success())
    }
}

pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:.16e}")
    }
}

fn json_float(x: f64) -> String {
    if x.is_finite() {
        format_float(x)
    } else {
        format!("\"{}\"", format_float(x))
    }
}

fn json_str(s: &str) -> String {
    Value::String(s.to_string()).to_string()
}

/// One JSON object on one line, fields in a fixed order.
pub fn to_json_line(r: &ReportRecord) -> String {
    let mut out = String::new();
    let _ = write!(
        out,
        "{{\"experiment\":{},\"kind\":{},\"seed\":{},\"n_samples\":{},\"config\":{{",
        json_str(&r.name),
        json_str(&r.kind),
        r.seed,
        r.n_samples
    );
    let entries: Vec<String> = r
        .config
        .iter()
        .map(|(k, v)| format!("{}:{}", json_str(k), json_str(v)))
        .collect();
    out.push_str(&entries.join(","));
    out.push_str("},\"statistics\":[");
    let stats: Vec<String> = r
        .statistics
        .iter()
        .map(|s| {
            format!(
                "{{\"name\":{},\"estimate\":{},\"std_error\":{},\"verdict\":{},\"censored\":{}}}",
                json_str(&s.name),
                json_float(s.estimate),
                json_float(s.std_error),
                json_str(s.verdict.name()),
                s.censored
            )
        })
        .collect();
    out.push_str(&stats.join(","));
    out.push(']');
    if let Some(d) = r.duration_secs {
        let _ = write!(out, ",\"duration_secs\":{}", json_float(d));
    }
    out.push('}');
    out
}

fn bad(msg: &str) -> CliError {
    CliError::Report(msg.to_string())
}

fn float_of(v: &Value) -> Result<f64, CliError> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| bad("number out of range")),
        Value::String(s) => match s.as_str() {
            "NaN" => Ok(f64::NAN),
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            _ => Err(bad("unknown float string")),
        },
        _ => Err(bad("expected a float")),
    }
}

fn field<'a>(obj: &'a serde_json::Map<String, Value>, k: &str) -> Result<&'a Value, CliError> {
    obj.get(k).ok_or_else(|| CliError::Report(format!("missing field `{k}`")))
}

fn string_of(v: &Value) -> Result<String, CliError> {
    v.as_str().map(str::to_string).ok_or_else(|| bad("expected a string"))
}

fn u64_of(v: &Value) -> Result<u64, CliError> {
    v.as_u64().ok_or_else(|| bad("expected an unsigned integer"))
}

/// Parses one line written by [`to_json_line`].
pub fn from_json_line(line: &str) -> Result<ReportRecord, CliError> {
    let v: Value = serde_json::from_str(line).map_err(|e| CliError::Report(e.to_string()))?;
    let obj = v.as_object().ok_or_else(|| bad("expected an object"))?;
    let config = field(obj, "config")?
        .as_object()
        .ok_or_else(|| bad("`config` must be an object"))?
        .iter()
        .map(|(k, v)| Ok((k.clone(), string_of(v)?)))
        .collect::<Result<_, CliError>>()?;
    let statistics = field(obj, "statistics")?
        .as_array()
        .ok_or_else(|| bad("`statistics` must be an array"))?
        .iter()
        .map(|s| {
            let s = s.as_object().ok_or_else(|| bad("statistic must be an object"))?;
            Ok(StatisticRecord {
                name: string_of(field(s, "name")?)?,
                estimate: float_of(field(s, "estimate")?)?,
                std_error: float_of(field(s, "std_error")?)?,
                verdict: Outcome::parse(&string_of(field(s, "verdict")?)?).ok_or_else(|| bad("unknown verdict"))?,
                censored: u64_of(field(s, "censored")?)? as usize,
            })
        })
        .collect::<Result<_, CliError>>()?;
    Ok(ReportRecord {
        name: string_of(field(obj, "experiment")?)?,
        kind: string_of(field(obj, "kind")?)?,
        seed: u64_of(field(obj, "seed")?)?,
        n_samples: u64_of(field(obj, "n_samples")?)? as usize,
        config,
        statistics,
        duration_secs: obj.get("duration_secs").map(float_of).transpose()?,
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Data rows, one per statistic, without the header.
pub fn to_csv_rows(r: &ReportRecord) -> String {
    let mut out = String::new();
    for s in &r.statistics {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            csv_field(&r.name),
            csv_field(&s.name),
            format_float(s.estimate),
            format_float(s.std_error),
            s.verdict.name(),
            s.censored,
            r.n_samples,
            r.seed
        );
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Renders a batch of reports.
pub fn emit(reports: &[ReportRecord], format: Format) -> String {
    match format {
        Format::Json => reports.iter().map(|r| to_json_line(r) + "\n").collect(),
        Format::Csv => {
            let mut out = format!("{CSV_HEADER}\n");
            for r in reports {
                out.push_str(&to_csv_rows(r));
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record() -> ReportRecord {
        ReportRecord {
            name: "demo, \"quoted\"".into(),
            kind: "mass-flow".into(),
            seed: u64::MAX,
            n_samples: 10,
            config: BTreeMap::from([("shift.delta".into(), "0.1".into())]),
            statistics: vec![
                StatisticRecord {
                    name: "a".into(),
                    estimate: 0.1 + 0.2,
                    std_error: f64::NAN,
                    verdict: Outcome::Consistent,
                    censored: 3,
                },
                StatisticRecord {
                    name: "b".into(),
                    estimate: -1e-300,
                    std_error: f64::INFINITY,
                    verdict: Outcome::Info,
                    censored: 0,
                },
            ],
            duration_secs: Some(1.5),
        }
    }

    #[test]
    fn json_round_trip() {
        let r = record();
        let line = to_json_line(&r);
        assert!(!line.contains('\n'));
        let back = from_json_line(&line).unwrap();
        assert!(back.statistics[0].std_error.is_nan());
        // NaN != NaN, so compare the rendering
        assert_eq!(to_json_line(&back), line);
        assert_eq!(back.statistics[0].estimate, 0.1 + 0.2);
        assert_eq!(back.seed, u64::MAX);
    }

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(format_float(0.25), "2.5000000000000000e-1");
        assert_eq!(format_float(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn csv_header_and_quoting() {
        let mut r = record();
        let out = emit(std::slice::from_ref(&r), Format::Csv);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert!(lines[1].starts_with("\"demo, \"\"quoted\"\"\",a,3.0000000000000004e-1,NaN,consistent,3,10,"));
        r.statistics.clear();
        assert_eq!(emit(&[r], Format::Csv), format!("{CSV_HEADER}\n"));
    }
}
