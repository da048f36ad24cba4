//! Experiment reports: full JSON, and a records-only CSV that is
//! byte-identical across runs with the same configuration and seed.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

pub const CSV_HEADER: [&str; 7] = ["experiment", "n", "r", "q", "metric", "value", "witness"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub experiment: String,
    pub n: usize,
    pub r: Option<f64>,
    pub q: Option<u8>,
    pub metric: String,
    pub value: f64,
    pub witness: String,
}

impl Record {
    pub fn new(experiment: &str, n: usize, metric: &str, value: f64) -> Self {
        Self {
            experiment: experiment.into(),
            n,
            r: None,
            q: None,
            metric: metric.into(),
            value,
            witness: String::new(),
        }
    }

    pub fn r(mut self, r: f64) -> Self {
        self.r = Some(r);
        self
    }

    pub fn q(mut self, q: Option<u8>) -> Self {
        self.q = q;
        self
    }

    pub fn witness(mut self, w: impl Into<String>) -> Self {
        self.witness = w.into();
        self
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        let mut s = format!("{} n={}", self.experiment, self.n);
        if let Some(r) = self.r {
            s += &format!(" r={r}");
        }
        if let Some(q) = self.q {
            s += &format!(" q={q}");
        }
        s += &format!(" {}={}", self.metric, self.value);
        if !self.witness.is_empty() {
            s += &format!(" [{}]", self.witness);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timestamps {
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub parameters: BTreeMap<String, Value>,
    pub records: Vec<Record>,
    pub timestamps: Timestamps,
}

fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

impl ExperimentReport {
    pub fn start(name: &str) -> Self {
        let t = now_ms();
        Self {
            name: name.into(),
            parameters: BTreeMap::new(),
            records: Vec::new(),
            timestamps: Timestamps { started_unix_ms: t, finished_unix_ms: t },
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.parameters.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn push(&mut self, record: Record) {
        self.records.push(record);
    }

    pub fn finish(mut self) -> Self {
        self.timestamps.finished_unix_ms = now_ms();
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for rec in &self.records {
            w.write_record([
                rec.experiment.clone(),
                rec.n.to_string(),
                rec.r.map(|r| r.to_string()).unwrap_or_default(),
                rec.q.map(|q| q.to_string()).unwrap_or_default(),
                rec.metric.clone(),
                rec.value.to_string(),
                rec.witness.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut rep = ExperimentReport::start("demo").param("seed", 7u64);
        rep.push(Record::new("demo", 8, "ratio", 5.5).r(2.0).q(Some(1)).witness("a,b"));
        rep.push(Record::new("demo", 4, "phi_max", 0.25));
        let csv = rep.finish().to_csv();
        assert_eq!(
            csv,
            "experiment,n,r,q,metric,value,witness\ndemo,8,2,1,ratio,5.5,\"a,b\"\ndemo,4,,,phi_max,0.25,\n"
        );
    }

    #[test]
    fn json_echoes_parameters() {
        let rep = ExperimentReport::start("demo").param("seed", 42u64).param("n_list", vec![4, 8]).finish();
        let v: Value = serde_json::from_str(&rep.to_json()).unwrap();
        assert_eq!(v["parameters"]["seed"], 42);
        assert_eq!(v["parameters"]["n_list"], serde_json::json!([4, 8]));
        assert!(v["timestamps"]["finished_unix_ms"].as_u64().unwrap() >= v["timestamps"]["started_unix_ms"].as_u64().unwrap());
    }

    #[test]
    fn summary_line() {
        let r = Record::new("x", 3, "m", 1.5).r(2.0).witness("w");
        assert_eq!(r.summary(), "x n=3 r=2 m=1.5 [w]");
    }
}
