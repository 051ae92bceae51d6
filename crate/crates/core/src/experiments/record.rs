use std::io::Write;
use std::path::Path;

use serde::ser::{Serialize, SerializeStruct, Serializer};

use super::config::OutputFormat;
use crate::error::Result;

/// Floor applied to `sigma * stderr` so exact (stderr 0) estimates compare at rounding level.
pub const SIGMA_FLOOR: f64 = 1e-9;

/// Acceptance rule attached to a record.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Check {
    /// `|estimate - reference| <= max(sigmas * stderr, SIGMA_FLOOR)`.
    WithinSigma { sigmas: f64 },
    /// `|estimate - reference| <= tol`.
    Absolute { tol: f64 },
    AtMost { bound: f64 },
    AtLeast { bound: f64 },
    InWindow { lo: f64, hi: f64 },
    /// `[lo - sigmas * stderr, hi + sigmas * stderr]`.
    InWindowSigma { lo: f64, hi: f64, sigmas: f64 },
    /// Reported only.
    Informational,
    /// The statistic is undefined or unbounded at this grid point; flagged, never failed.
    Degenerate,
}

impl Check {
    pub fn evaluate(&self, estimate: f64, stderr: f64, reference: Option<f64>) -> bool {
        match *self {
            Check::WithinSigma { sigmas } => reference.is_some_and(|r| {
                (estimate - r).abs() <= (sigmas * stderr).max(SIGMA_FLOOR)
            }),
            Check::Absolute { tol } => reference.is_some_and(|r| (estimate - r).abs() <= tol),
            Check::AtMost { bound } => estimate <= bound,
            Check::AtLeast { bound } => estimate >= bound,
            Check::InWindow { lo, hi } => (lo..=hi).contains(&estimate),
            Check::InWindowSigma { lo, hi, sigmas } => {
                (lo - sigmas * stderr..=hi + sigmas * stderr).contains(&estimate)
            }
            Check::Informational | Check::Degenerate => true,
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            Check::WithinSigma { sigmas } => format!("|est-ref| <= {} sigma", format_number(sigmas)),
            Check::Absolute { tol } => format!("|est-ref| <= {}", format_number(tol)),
            Check::AtMost { bound } => format!("est <= {}", format_number(bound)),
            Check::AtLeast { bound } => format!("est >= {}", format_number(bound)),
            Check::InWindow { lo, hi } => format!("est in [{}, {}]", format_number(lo), format_number(hi)),
            Check::InWindowSigma { lo, hi, sigmas } => format!("est in [{}, {}] +- {} sigma", format_number(lo), format_number(hi), format_number(sigmas)),
            Check::Informational => "informational".into(),
            Check::Degenerate => "flagged: degenerate".into(),
        }
    }
}

/// One reported statistic.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRecord {
    pub experiment: String,
    /// `key=value` pairs joined by `;`.
    pub parameters: String,
    pub statistic: String,
    pub estimate: f64,
    /// 0 for exact computations.
    pub stderr: f64,
    pub analytic_reference: Option<f64>,
    pub check: Check,
    pub pass: bool,
    pub wall_time_ms: f64,
}

impl ResultRecord {
    pub fn new(
        experiment: &str,
        parameters: impl Into<String>,
        statistic: impl Into<String>,
        estimate: f64,
        stderr: f64,
        analytic_reference: Option<f64>,
        check: Check,
    ) -> Self {
        Self {
            experiment: experiment.to_string(),
            parameters: parameters.into(),
            statistic: statistic.into(),
            estimate,
            stderr,
            analytic_reference,
            check,
            pass: check.evaluate(estimate, stderr, analytic_reference),
            wall_time_ms: 0.0,
        }
    }

    pub fn exact(
        experiment: &str,
        parameters: impl Into<String>,
        statistic: impl Into<String>,
        estimate: f64,
        analytic_reference: Option<f64>,
        check: Check,
    ) -> Self {
        Self::new(experiment, parameters, statistic, estimate, 0.0, analytic_reference, check)
    }
}

/// Canonical text for a number: shortest round-trip form (exponent notation outside
/// `[1e-4, 1e15)`), `inf`/`-inf`/`nan` for non-finite values.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else if x == 0.0 {
        "0".into()
    } else if (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

const COLUMNS: [&str; 8] = [
    "experiment",
    "parameters",
    "statistic",
    "estimate",
    "stderr",
    "analytic_reference",
    "check",
    "pass",
];

struct Number(f64);

impl Serialize for Number {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&format_number(self.0))
        }
    }
}

struct JsonRecord<'a> {
    record: &'a ResultRecord,
    timings: bool,
}

impl Serialize for JsonRecord<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let r = self.record;
        let mut st = s.serialize_struct("ResultRecord", 9)?;
        st.serialize_field("experiment", &r.experiment)?;
        st.serialize_field("parameters", &r.parameters)?;
        st.serialize_field("statistic", &r.statistic)?;
        st.serialize_field("estimate", &Number(r.estimate))?;
        st.serialize_field("stderr", &Number(r.stderr))?;
        st.serialize_field("analytic_reference", &r.analytic_reference.map(Number))?;
        st.serialize_field("check", &r.check.describe())?;
        st.serialize_field("pass", &r.pass)?;
        if self.timings {
            st.serialize_field("wall_time_ms", &Number(r.wall_time_ms))?;
        } else {
            st.skip_field("wall_time_ms")?;
        }
        st.end()
    }
}

/// Writes records as CSV or JSON. `wall_time_ms` is included only with `timings`.
pub fn write_results(records: &[ResultRecord], format: OutputFormat, timings: bool, out: impl Write) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let mut header: Vec<&str> = COLUMNS.to_vec();
            if timings {
                header.push("wall_time_ms");
            }
            w.write_record(&header)?;
            for r in records {
                let mut row = vec![
                    r.experiment.clone(),
                    r.parameters.clone(),
                    r.statistic.clone(),
                    format_number(r.estimate),
                    format_number(r.stderr),
                    r.analytic_reference.map(format_number).unwrap_or_default(),
                    r.check.describe(),
                    r.pass.to_string(),
                ];
                if timings {
                    row.push(format!("{:.3}", r.wall_time_ms));
                }
                w.write_record(&row)?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            let rows: Vec<JsonRecord> = records.iter().map(|record| JsonRecord { record, timings }).collect();
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, &rows)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Writes records to `path`.
pub fn emit_results(records: &[ResultRecord], format: OutputFormat, timings: bool, path: &Path) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_results(records, format, timings, file)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn render(records: &[ResultRecord], format: OutputFormat, timings: bool) -> String {
        let mut buf = Vec::new();
        write_results(records, format, timings, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn empty_csv_is_header_only() {
        assert_eq!(
            render(&[], OutputFormat::Csv, false),
            "experiment,parameters,statistic,estimate,stderr,analytic_reference,check,pass\n"
        );
        assert_eq!(render(&[], OutputFormat::Json, false), "[]\n");
    }

    #[test]
    fn exact_record_has_zero_stderr_field() {
        let r = ResultRecord::exact("x", "N=6;r=2", "distance", 0.25, Some(0.25), Check::Absolute { tol: 1e-10 });
        assert!(r.pass);
        let text = render(&[r.clone()], OutputFormat::Csv, false);
        let line = text.lines().nth(1).unwrap();
        assert_eq!(line, "x,N=6;r=2,distance,0.25,0,0.25,|est-ref| <= 1e-10,true");
        let json: serde_json::Value = serde_json::from_str(&render(&[r], OutputFormat::Json, false)).unwrap();
        assert_eq!(json[0]["stderr"], serde_json::json!(0.0));
        assert!(json[0].get("wall_time_ms").is_none());
    }

    #[test]
    fn non_finite_values_and_timings() {
        let mut r = ResultRecord::exact("x", "", "shots", f64::INFINITY, None, Check::Degenerate);
        r.wall_time_ms = 1.5;
        assert!(r.pass);
        let text = render(&[r.clone()], OutputFormat::Csv, true);
        assert!(text.lines().next().unwrap().ends_with(",wall_time_ms"));
        assert!(text.lines().nth(1).unwrap().starts_with("x,,shots,inf,0,,"));
        let json: serde_json::Value = serde_json::from_str(&render(&[r], OutputFormat::Json, true)).unwrap();
        assert_eq!(json[0]["estimate"], "inf");
        assert_eq!(json[0]["analytic_reference"], serde_json::Value::Null);
        assert_eq!(json[0]["wall_time_ms"], 1.5);
    }

    #[test]
    fn number_formats() {
        assert_eq!(format_number(0.25), "0.25");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(1e-10), "1e-10");
        assert_eq!(format_number(3.5e20), "3.5e20");
        assert_eq!(format_number(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_number(f64::NAN), "nan");
        let x = 0.1 + 0.2;
        assert_eq!(format_number(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn checks_are_pure_functions_of_inputs() {
        let w = Check::WithinSigma { sigmas: 3.0 };
        assert!(w.evaluate(1.0, 0.1, Some(1.29)));
        assert!(!w.evaluate(1.0, 0.1, Some(1.31)));
        assert!(w.evaluate(1.0, 0.0, Some(1.0 + 1e-12)));
        assert!(!w.evaluate(1.0, 0.1, None));
        assert!(Check::InWindowSigma { lo: 0.0, hi: 1.0, sigmas: 3.0 }.evaluate(1.2, 0.1, None));
        assert!(!Check::InWindow { lo: 0.0, hi: 1.0 }.evaluate(1.2, 0.0, None));
        assert!(Check::AtMost { bound: 0.1 }.evaluate(0.1, 0.0, None));
        assert!(!Check::AtLeast { bound: 0.01 }.evaluate(0.001, 0.0, None));
    }

    #[test]
    fn emits_to_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let r = ResultRecord::exact("x", "", "s", 1.0, None, Check::Informational);
        emit_results(&[r], OutputFormat::Csv, false, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 2);
        assert!(emit_results(&[], OutputFormat::Csv, false, &dir.path().join("missing/out.csv")).is_err());
    }
}
