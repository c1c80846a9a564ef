//! Line-oriented and tabular files: optimizer traces, trial logs, ASR and simulation tables.

use std::io::{self, BufRead, Write};

use anamorph_core::metrics::{AsrCurve, AucReport, Trial};
use anamorph_core::optimizer::Candidate;
use anamorph_core::vanet::SimReport;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// One optimizer evaluation as persisted in the trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceLine {
    pub d: f64,
    pub w: f64,
    pub h: f64,
    pub loss: f64,
}

impl From<&Candidate> for TraceLine {
    fn from(c: &Candidate) -> Self {
        Self { d: c.d, w: c.w, h: c.h, loss: c.loss }
    }
}

pub fn write_trace<W: Write>(mut out: W, trace: &[Candidate]) -> io::Result<()> {
    for c in trace {
        serde_json::to_writer(&mut out, &TraceLine::from(c))?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_trace<R: BufRead>(input: R) -> Result<Vec<TraceLine>, FormatError> {
    read_jsonl(input, |_: &TraceLine| Ok(()))
}

/// Parses trial records, one JSON object per line; blank lines are skipped. Detections are
/// validated like protocol frames.
pub fn read_trials<R: BufRead>(input: R) -> Result<Vec<Trial>, FormatError> {
    read_jsonl(input, |t: &Trial| t.detection.as_ref().map_or(Ok(()), |d| d.validate().map_err(|e| e.to_string())))
}

pub fn write_trials<W: Write>(mut out: W, trials: &[Trial]) -> io::Result<()> {
    for t in trials {
        serde_json::to_writer(&mut out, t)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

fn read_jsonl<T, R>(input: R, check: impl Fn(&T) -> Result<(), String>) -> Result<Vec<T>, FormatError>
where
    T: serde::de::DeserializeOwned,
    R: BufRead,
{
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| FormatError::Parse { line: i + 1, message };
        let v = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        check(&v).map_err(parse_err)?;
        out.push(v);
    }
    Ok(out)
}

/// Summary written next to the ASR table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AucSummary {
    pub auc: f64,
    pub range: (i32, i32),
    pub per_bin: std::collections::BTreeMap<i32, f64>,
}

impl AucSummary {
    pub fn new(report: &AucReport, curve: &AsrCurve) -> Self {
        let (lo, hi) = report.range_m;
        let per_bin = curve.bins.range(lo..=hi).map(|(b, v)| (*b, *v)).collect();
        Self { auc: report.auc, range: report.range_m, per_bin }
    }
}

pub const SIM_CSV_HEADER: &str = "axis_value,mean_paoi_ms,p95_paoi_ms,drops";

/// `axis_value,mean_paoi_ms,p95_paoi_ms,drops` rows; runs without any age peak leave the
/// two statistics empty.
pub fn sim_csv(rows: &[(u64, &SimReport)]) -> String {
    let mut s = format!("{SIM_CSV_HEADER}\n");
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for (value, r) in rows {
        s.push_str(&format!("{value},{},{},{}\n", opt(r.mean_paoi_ms), opt(r.p95_paoi_ms), r.dropped));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use anamorph_core::vanet::{run, ScenarioConfig};

    #[test]
    fn trace_lines_have_four_keys() {
        let c = Candidate { d: 6.0, w: 1.8, h: 0.5, loss: 0.25, decal_id: "g00000".into() };
        let mut buf = Vec::new();
        write_trace(&mut buf, &[c.clone(), c]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), r#"{"d":6.0,"w":1.8,"h":0.5,"loss":0.25}"#);
        let back = read_trace(text.as_bytes()).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0], TraceLine { d: 6.0, w: 1.8, h: 0.5, loss: 0.25 });
    }

    #[test]
    fn trials_parse_and_validate() {
        let text = concat!(
            r#"{"distance_bin_m":3,"sample_index":0,"seed_index":1,"detection":{"class":"car","confidence":0.9,"bbox":[0.1,0.1,0.2,0.2]}}"#,
            "\n\n",
            r#"{"distance_bin_m":4,"sample_index":2,"seed_index":0,"detection":null}"#,
            "\n",
            r#"{"distance_bin_m":5,"sample_index":2,"seed_index":0}"#,
        );
        let t = read_trials(text.as_bytes()).unwrap();
        assert_eq!(t.len(), 3);
        assert!(t[0].succeeded("car") && t[1].detection.is_none() && t[2].detection.is_none());
        let mut buf = Vec::new();
        write_trials(&mut buf, &t).unwrap();
        assert_eq!(read_trials(buf.as_slice()).unwrap(), t);

        let bad = r#"{"distance_bin_m":3,"sample_index":0,"seed_index":1,"detection":{"class":"car","confidence":2,"bbox":[0.1,0.1,0.2,0.2]}}"#;
        let bad = format!("\n{bad}");
        assert!(matches!(read_trials(bad.as_bytes()), Err(FormatError::Parse { line: 2, .. })));
        assert!(matches!(read_trials("{}\n".as_bytes()), Err(FormatError::Parse { line: 1, .. })));
    }

    #[test]
    fn sim_rows() {
        let empty = run(&ScenarioConfig::default()).unwrap();
        let one = run(&ScenarioConfig { n_vehicles: 1, speed_mps: 0.0, rsu_position_m: 0.0, duration_s: 5.0, ..Default::default() }).unwrap();
        let csv = sim_csv(&[(0, &empty), (1, &one)]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], SIM_CSV_HEADER);
        assert_eq!(lines[1], "0,,,0");
        assert!(lines[2].starts_with("1,1000.1666"));
    }
}
