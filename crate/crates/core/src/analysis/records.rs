use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One JSON line per copy or trial.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub seed: u64,
    pub n: usize,
    pub gadget: String,
    pub params: BTreeMap<String, f64>,
    pub classification: Option<String>,
    pub lengths: BTreeMap<String, f64>,
    pub frequencies: BTreeMap<String, f64>,
}

impl ExperimentRecord {
    pub fn new(experiment: &str, seed: u64, n: usize, gadget: &str) -> Self {
        ExperimentRecord { experiment: experiment.into(), seed, n, gadget: gadget.into(), ..Default::default() }
    }

    pub fn to_json_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Per `(experiment, n, seed)`: the record count, the count of each
/// classification, and the mean of every length and frequency column.
pub fn write_csv_summary<W: Write>(records: &[ExperimentRecord], out: W) -> Result<()> {
    let mut groups: BTreeMap<(String, usize, u64), Vec<&ExperimentRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.experiment.clone(), r.n, r.seed)).or_default().push(r);
    }
    let classes: BTreeSet<String> = records.iter().filter_map(|r| r.classification.clone()).collect();
    let lengths: BTreeSet<String> = records.iter().flat_map(|r| r.lengths.keys().cloned()).collect();
    let freqs: BTreeSet<String> = records.iter().flat_map(|r| r.frequencies.keys().cloned()).collect();

    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["experiment".to_string(), "n".into(), "seed".into(), "records".into()];
    header.extend(classes.iter().map(|c| format!("count_{c}")));
    header.extend(lengths.iter().map(|c| format!("mean_length_{c}")));
    header.extend(freqs.iter().map(|c| format!("mean_frequency_{c}")));
    w.write_record(&header)?;

    let mean = |rs: &[&ExperimentRecord], pick: &dyn Fn(&ExperimentRecord) -> Option<f64>| -> String {
        let v: Vec<f64> = rs.iter().filter_map(|r| pick(r)).collect();
        if v.is_empty() {
            String::new()
        } else {
            (v.iter().sum::<f64>() / v.len() as f64).to_string()
        }
    };
    for ((exp, n, seed), rs) in &groups {
        let mut row = vec![exp.clone(), n.to_string(), seed.to_string(), rs.len().to_string()];
        for c in &classes {
            row.push(rs.iter().filter(|r| r.classification.as_ref() == Some(c)).count().to_string());
        }
        for c in &lengths {
            row.push(mean(rs, &|r| r.lengths.get(c).copied()));
        }
        for c in &freqs {
            row.push(mean(rs, &|r| r.frequencies.get(c).copied()));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
