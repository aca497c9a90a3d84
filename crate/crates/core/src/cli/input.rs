//! Study records from CSV or JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::power_prior::{Study, StudyPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Original,
    Replication,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EffectType {
    /// Standardized mean difference; the standard error may be derived from
    /// the total sample size through `se² ≈ 4/n`.
    Smd,
    /// Log odds ratio.
    Logor,
    Other,
}

/// One row of input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyRecord {
    pub id: String,
    pub role: Role,
    pub effect_type: EffectType,
    pub estimate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub se: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
}

impl StudyRecord {
    /// Checks the record and returns the study it describes.
    pub fn to_study(&self) -> Result<Study> {
        let ctx = |msg: String| Error::Validation(format!("record '{}': {msg}", self.id));
        if self.id.trim().is_empty() {
            return Err(Error::Validation("record id must not be empty".into()));
        }
        if !self.estimate.is_finite() {
            return Err(ctx(format!("estimate must be finite, got {}", self.estimate)));
        }
        let se = match (self.effect_type, self.se, self.n) {
            (EffectType::Smd, Some(_), Some(_)) => {
                return Err(ctx("give either se or n for an smd record, not both".into()))
            }
            (EffectType::Smd, None, Some(n)) => {
                if n < 2 {
                    return Err(ctx(format!("n must be at least 2, got {n}")));
                }
                (4.0 / n as f64).sqrt()
            }
            (_, Some(se), None) => se,
            (EffectType::Smd, None, None) => return Err(ctx("smd records need se or n".into())),
            (_, None, _) => return Err(ctx("se is required for this effect type".into())),
            (_, Some(_), Some(_)) => {
                return Err(ctx("n only determines se for smd records; give se alone".into()))
            }
        };
        if !(se > 0.0 && se.is_finite()) {
            return Err(ctx(format!("se must be positive and finite, got {se}")));
        }
        Ok(Study { estimate: self.estimate, se })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Csv,
    Json,
}

fn detect_format(path: &Path, text: &str) -> InputFormat {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase) {
        Some(e) if e == "csv" => InputFormat::Csv,
        Some(e) if e == "json" => InputFormat::Json,
        _ => match text.trim_start().chars().next() {
            Some('[') | Some('{') => InputFormat::Json,
            _ => InputFormat::Csv,
        },
    }
}

pub fn read_records(path: &Path) -> Result<Vec<StudyRecord>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
    match detect_format(path, &text) {
        InputFormat::Csv => parse_csv(&text),
        InputFormat::Json => parse_json(&text),
    }
}

/// CSV with header `id,role,effect_type,estimate,se,n`; `se` or `n` may be
/// left empty.
pub fn parse_csv(text: &str) -> Result<Vec<StudyRecord>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse(format!("CSV header: {e}")))?
        .clone();
    for required in ["id", "role", "effect_type", "estimate"] {
        if !headers.iter().any(|h| h == required) {
            return Err(Error::Parse(format!("CSV header is missing column '{required}'")));
        }
    }
    let mut out = Vec::new();
    for row in reader.deserialize::<StudyRecord>() {
        let rec = row.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            Error::Parse(format!("CSV line {line}: {}", csv_error_detail(&e)))
        })?;
        out.push(rec);
    }
    Ok(out)
}

fn csv_error_detail(e: &csv::Error) -> String {
    match e.kind() {
        csv::ErrorKind::Deserialize { err, .. } => match err.field() {
            Some(i) => format!("field {}: {}", i + 1, err.kind()),
            None => err.kind().to_string(),
        },
        _ => e.to_string(),
    }
}

/// A JSON array of records, an object with a `records` array, or a report
/// produced by this tool (records under `input.records`).
pub fn parse_json(text: &str) -> Result<Vec<StudyRecord>> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("JSON line {}, column {}: {e}", e.line(), e.column())))?;
    let records = match &value {
        serde_json::Value::Array(_) => value,
        serde_json::Value::Object(map) => {
            if let Some(r) = map.get("records") {
                r.clone()
            } else if let Some(r) = map.get("input").and_then(|i| i.get("records")) {
                r.clone()
            } else {
                return Err(Error::Parse(
                    "JSON object has neither 'records' nor 'input.records'".into(),
                ));
            }
        }
        _ => return Err(Error::Parse("JSON input must be an array or an object".into())),
    };
    let arr = records
        .as_array()
        .ok_or_else(|| Error::Parse("'records' must be an array".into()))?;
    arr.iter()
        .enumerate()
        .map(|(i, v)| {
            serde_json::from_value(v.clone())
                .map_err(|e| Error::Parse(format!("JSON record {}: {e}", i + 1)))
        })
        .collect()
}

/// The single original record.
pub fn select_original(records: &[StudyRecord]) -> Result<(&StudyRecord, Study)> {
    let originals: Vec<&StudyRecord> = records.iter().filter(|r| r.role == Role::Original).collect();
    match originals.as_slice() {
        [one] => Ok((one, one.to_study()?)),
        [] => Err(Error::Validation("input has no original record".into())),
        many => Err(Error::Validation(format!(
            "input has {} original records; exactly one is required",
            many.len()
        ))),
    }
}

/// Exactly one original and one replication record.
pub fn select_pair(records: &[StudyRecord]) -> Result<StudyPair> {
    let (_, original) = select_original(records)?;
    let reps: Vec<&StudyRecord> = records.iter().filter(|r| r.role == Role::Replication).collect();
    let replication = match reps.as_slice() {
        [one] => one.to_study()?,
        [] => return Err(Error::Validation("input has no replication record".into())),
        many => {
            return Err(Error::Validation(format!(
                "input has {} replication records; exactly one is required",
                many.len()
            )))
        }
    };
    Ok(StudyPair {
        original,
        replication,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSV: &str = "id,role,effect_type,estimate,se,n\n\
                       labels,original,smd,0.21,0.05,\n\
                       rep3,replication,smd,0.44,,2500\n";

    #[test]
    fn csv_with_sample_size() {
        let recs = parse_csv(CSV).unwrap();
        assert_eq!(recs.len(), 2);
        let p = select_pair(&recs).unwrap();
        assert_eq!(p.original.se, 0.05);
        assert!((p.replication.se - 0.04).abs() < 1e-15);
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let bad = "id,role,effect_type,estimate,se,n\nx,original,smd,abc,0.1,\n";
        match parse_csv(bad) {
            Err(Error::Parse(m)) => assert!(m.contains("line 2"), "{m}"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_csv("id,role\nx,original\n").is_err());
    }

    #[test]
    fn json_shapes() {
        let arr = r#"[{"id":"o","role":"original","effect_type":"smd","estimate":0.21,"se":0.05}]"#;
        assert_eq!(parse_json(arr).unwrap().len(), 1);
        let obj = format!(r#"{{"records":{arr}}}"#);
        assert_eq!(parse_json(&obj).unwrap().len(), 1);
        let report = format!(r#"{{"command":"test","input":{{"records":{arr}}}}}"#);
        assert_eq!(parse_json(&report).unwrap().len(), 1);
        assert!(parse_json(r#"{"x":1}"#).is_err());
    }

    #[test]
    fn record_validation() {
        let mut r = StudyRecord {
            id: "a".into(),
            role: Role::Original,
            effect_type: EffectType::Smd,
            estimate: 0.2,
            se: Some(0.1),
            n: Some(100),
        };
        assert!(r.to_study().is_err());
        r.effect_type = EffectType::Logor;
        r.n = None;
        assert!(r.to_study().is_ok());
        r.se = None;
        assert!(r.to_study().is_err());
        r.se = Some(-1.0);
        assert!(r.to_study().is_err());
    }

    #[test]
    fn multiple_originals_rejected() {
        let two = "id,role,effect_type,estimate,se,n\n\
                   a,original,smd,0.2,0.1,\n\
                   b,original,smd,0.3,0.1,\n\
                   c,replication,smd,0.1,0.1,\n";
        assert!(matches!(select_pair(&parse_csv(two).unwrap()), Err(Error::Validation(_))));
    }
}
