use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

use crate::catalog::Op;
use crate::config::{ExperimentConfig, Run};
use crate::error::{LabError, LabResult};
use crate::exec::Parallel;

/// A CSV table produced by an experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.to_string(), header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push<I, V>(&mut self, row: I)
    where
        I: IntoIterator<Item = V>,
        V: ToString,
    {
        let row: Vec<String> = row.into_iter().map(|v| v.to_string()).collect();
        debug_assert_eq!(row.len(), self.header.len(), "row width in table {}", self.name);
        self.rows.push(row);
    }
}

/// What an experiment driver returns: named metrics, data tables and free-text notes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    pub metrics: BTreeMap<String, f64>,
    pub tables: Vec<Table>,
    pub notes: Vec<String>,
}

impl Outcome {
    pub fn metric(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.insert(name.into(), value);
    }

    pub fn flag(&mut self, name: impl Into<String>, value: bool) {
        self.metric(name, if value { 1.0 } else { 0.0 });
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub threshold: String,
    pub metric: String,
    pub value: f64,
    pub op: Op,
    pub limit: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultEnvelope {
    pub experiment: String,
    pub criterion: u8,
    pub claim: String,
    pub version: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub metrics: BTreeMap<String, f64>,
    pub verdicts: Vec<Verdict>,
    pub pass: bool,
    pub runtime_seconds: f64,
    pub notes: Vec<String>,
    pub files: Vec<String>,
}

/// One verdict per threshold in effect; a metric the driver did not produce is an error.
pub fn judge(run: &Run, outcome: &Outcome) -> LabResult<Vec<Verdict>> {
    let mut out = Vec::new();
    for t in run.entry.thresholds_for(&run.model) {
        let value = *outcome
            .metrics
            .get(t.metric)
            .ok_or_else(|| LabError::Encode(format!("{} produced no metric `{}`", run.entry.id, t.metric)))?;
        let limit = run.thresholds[t.key];
        out.push(Verdict { threshold: t.key.to_string(), metric: t.metric.to_string(), value, op: t.op, limit, pass: t.op.holds(value, limit) });
    }
    Ok(out)
}

/// Runs the experiment and assembles its envelope; files are written separately.
pub fn execute(run: &Run) -> LabResult<(ResultEnvelope, Outcome)> {
    let start = Instant::now();
    let outcome = (run.entry.run)(run, &Parallel)?;
    let runtime_seconds = start.elapsed().as_secs_f64();
    let verdicts = judge(run, &outcome)?;
    let envelope = ResultEnvelope {
        experiment: run.entry.id.to_string(),
        criterion: run.entry.criterion,
        claim: run.entry.claim.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: run.seed,
        config: run.echo(),
        metrics: outcome.metrics.clone(),
        pass: verdicts.iter().all(|v| v.pass),
        verdicts,
        runtime_seconds,
        notes: outcome.notes.clone(),
        files: Vec::new(),
    };
    Ok((envelope, outcome))
}
