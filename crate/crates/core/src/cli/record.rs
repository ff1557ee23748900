//! Result records and their CSV and JSON-lines writers.

use std::io::Write;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::ed::InequalityCertificate;
use crate::{Error, Result};

/// Floats as JSON numbers, with non-finite values as the strings
/// `"NaN"`, `"inf"` and `"-inf"`.
mod float {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&v.to_string())
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(v) => Ok(v),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    /// A size budget refused the work unit.
    Refused,
    Error,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Refused => "refused",
            Status::Error => "error",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Input {
    pub name: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Output {
    pub name: String,
    #[serde(with = "float")]
    pub value: f64,
    /// How a value tied to a named constant was obtained.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub name: String,
    #[serde(with = "float")]
    pub min_slack: f64,
    pub passed: bool,
    pub witness: String,
}

impl From<&InequalityCertificate> for CertificateSummary {
    fn from(c: &InequalityCertificate) -> Self {
        CertificateSummary { name: c.name.clone(), min_slack: c.min_slack, passed: c.passed, witness: c.witness.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub command: String,
    pub status: Status,
    pub inputs: Vec<Input>,
    pub outputs: Vec<Output>,
    pub certificates: Vec<CertificateSummary>,
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}

impl ResultRecord {
    pub fn passed(&self) -> bool {
        self.status == Status::Ok && self.certificates.iter().all(|c| c.passed)
    }

    pub fn output(&self, name: &str) -> Option<f64> {
        self.outputs.iter().find(|o| o.name == name).map(|o| o.value)
    }

    pub fn input(&self, name: &str) -> Option<&str> {
        self.inputs.iter().find(|i| i.name == name).map(|i| i.value.as_str())
    }
}

/// One line per record.
pub fn write_json_lines<W: Write>(records: &[ResultRecord], mut w: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(|e| Error::Serde(e.to_string()))?;
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_json_lines(text: &str) -> Result<Vec<ResultRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| Error::Serde(e.to_string())))
        .collect()
}

/// Shortest round-trip text: plain notation for moderate magnitudes,
/// scientific otherwise.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

fn push_unique(header: &mut Vec<String>, name: String) {
    if !header.contains(&name) {
        header.push(name);
    }
}

/// Column names: `command, status`, then inputs, outputs, and `<cert>_slack`,
/// `<cert>_pass` pairs in order of first appearance, then `message` and
/// `wall_time` when any record carries them.
pub fn csv_header(records: &[ResultRecord]) -> Vec<String> {
    let mut header = vec!["command".to_string(), "status".to_string()];
    for r in records {
        for i in &r.inputs {
            push_unique(&mut header, i.name.clone());
        }
    }
    for r in records {
        for o in &r.outputs {
            push_unique(&mut header, o.name.clone());
        }
    }
    for r in records {
        for c in &r.certificates {
            push_unique(&mut header, format!("{}_slack", c.name));
            push_unique(&mut header, format!("{}_pass", c.name));
        }
    }
    if records.iter().any(|r| r.message.is_some()) {
        header.push("message".into());
    }
    if records.iter().any(|r| r.wall_time.is_some()) {
        header.push("wall_time".into());
    }
    header
}

fn csv_row(r: &ResultRecord, header: &[String]) -> Vec<String> {
    header
        .iter()
        .map(|col| match col.as_str() {
            "command" => r.command.clone(),
            "status" => r.status.as_str().to_string(),
            "message" => r.message.clone().unwrap_or_default(),
            "wall_time" => r.wall_time.map(format_float).unwrap_or_default(),
            _ => {
                if let Some(v) = r.input(col) {
                    return v.to_string();
                }
                if let Some(v) = r.output(col) {
                    return format_float(v);
                }
                for c in &r.certificates {
                    if col.strip_suffix("_slack") == Some(c.name.as_str()) {
                        return format_float(c.min_slack);
                    }
                    if col.strip_suffix("_pass") == Some(c.name.as_str()) {
                        return c.passed.to_string();
                    }
                }
                String::new()
            }
        })
        .collect()
}

/// RFC 4180 CSV. Floats use the shortest text that parses back to the same value.
pub fn write_csv<W: Write>(records: &[ResultRecord], w: W) -> Result<()> {
    let header = csv_header(records);
    let mut out = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Serde(e.to_string());
    out.write_record(&header).map_err(io)?;
    for r in records {
        out.write_record(csv_row(r, &header)).map_err(io)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ResultRecord {
        ResultRecord {
            command: "free-energy".into(),
            status: Status::Ok,
            inputs: vec![Input { name: "beta".into(), value: "2".into() }],
            outputs: vec![
                Output { name: "Z".into(), value: 3.0000000000000004, provenance: None },
                Output { name: "f".into(), value: f64::NEG_INFINITY, provenance: Some("measured, \"quoted\"".into()) },
            ],
            certificates: vec![CertificateSummary { name: "c".into(), min_slack: 0.1, passed: true, witness: "x=1".into() }],
            notes: vec!["a, b".into()],
            message: None,
            wall_time: None,
        }
    }

    #[test]
    fn json_round_trip_keeps_non_finite() {
        let mut buf = Vec::new();
        write_json_lines(&[sample()], &mut buf).unwrap();
        let back = read_json_lines(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, vec![sample()]);
    }

    #[test]
    fn csv_columns() {
        let mut buf = Vec::new();
        write_csv(&[sample()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "command,status,beta,Z,f,c_slack,c_pass");
        assert_eq!(lines.next().unwrap(), "free-energy,ok,2,3.0000000000000004,-inf,0.1,true");
    }

    #[test]
    fn float_text_round_trips() {
        for v in [0.0, -0.0, 1.5e-300, 3.2e-7, 1e-4, 12345.678, 9.99e14, 1e15, -2.5e22, f64::MAX] {
            let t = format_float(v);
            assert_eq!(t.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{t}");
        }
        assert_eq!(format_float(3.2e-7), "3.2e-7");
    }
}
