//! CSV outputs of a run and the summary table across runs.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::{DailyMetrics, SimResult, Summary};
use crate::error::{Error, Result};

pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const EVENTS_FILE: &str = "events.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";

const TIMESERIES_HEADER: &str = "day,susceptible,no_symptoms,symptomatic,infected_total,recovered,phase";
const EVENTS_HEADER: &str = "day,timestep,site_id,infectee,infector,generation";

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub fn write_timeseries(result: &SimResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{TIMESERIES_HEADER}").map_err(io)?;
    for m in &result.series {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            m.day,
            m.susceptible,
            m.infected_no_symptoms,
            m.infected_symptomatic,
            m.infected_total,
            m.recovered,
            m.phase.label()
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_timeseries(path: impl AsRef<Path>) -> Result<Vec<DailyMetrics>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let bad = |reason: String| Error::Snapshot {
            file: TIMESERIES_FILE,
            row: i + 1,
            reason,
        };
        let num = |idx: usize| -> Result<u32> {
            rec.get(idx)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| bad(format!("column {idx} is not a count")))
        };
        let phase = rec.get(6).unwrap_or_default();
        out.push(DailyMetrics {
            day: num(0)?,
            susceptible: num(1)?,
            infected_no_symptoms: num(2)?,
            infected_symptomatic: num(3)?,
            infected_total: num(4)?,
            recovered: num(5)?,
            phase: crate::intervention::Phase::parse(phase)
                .ok_or_else(|| bad(format!("unknown phase `{phase}`")))?,
        });
    }
    Ok(out)
}

pub fn write_events(result: &SimResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{EVENTS_HEADER}").map_err(io)?;
    for e in &result.events {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            e.day, e.timestep, e.site, e.infectee, e.infector, e.generation
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

/// One line of the run summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub label: String,
    pub max_infected: u32,
    pub not_infected: u32,
    pub recovered_removed: u32,
    pub day_of_peak: u32,
    /// Fixed at four decimals so files compare byte for byte.
    pub r0_estimate: String,
    pub seed: u64,
}

impl SummaryRow {
    pub fn from_result(result: &SimResult) -> SummaryRow {
        SummaryRow::from_summary(&result.label, result.seed, &result.summary, result.r0.value)
    }

    pub fn from_summary(label: &str, seed: u64, s: &Summary, r0: f64) -> SummaryRow {
        SummaryRow {
            label: label.to_string(),
            max_infected: s.max_infected,
            not_infected: s.not_infected_final,
            recovered_removed: s.recovered_final,
            day_of_peak: s.day_of_peak,
            r0_estimate: format!("{r0:.4}"),
            seed,
        }
    }

    pub fn r0(&self) -> f64 {
        self.r0_estimate.parse().unwrap_or(f64::NAN)
    }
}

pub fn write_summary(rows: &[SummaryRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    if rows.is_empty() {
        w.write_record([
            "label",
            "max_infected",
            "not_infected",
            "recovered_removed",
            "day_of_peak",
            "r0_estimate",
            "seed",
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    for row in rows {
        w.serialize(row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_summary(path: impl AsRef<Path>) -> Result<Vec<SummaryRow>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    r.deserialize()
        .collect::<std::result::Result<Vec<SummaryRow>, _>>()
        .map_err(|e| Error::csv(path, e))
}

/// Writes timeseries, events and a one-row summary into `dir`.
pub fn write_run(result: &SimResult, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_timeseries(result, dir.join(TIMESERIES_FILE))?;
    write_events(result, dir.join(EVENTS_FILE))?;
    write_summary(&[SummaryRow::from_result(result)], dir.join(SUMMARY_FILE))
}

/// Mean, min and max of each numeric summary column across runs.
pub fn write_aggregate(rows: &[SummaryRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    type Column = (&'static str, fn(&SummaryRow) -> f64);
    let columns: [Column; 5] = [
        ("max_infected", |r| f64::from(r.max_infected)),
        ("not_infected", |r| f64::from(r.not_infected)),
        ("recovered_removed", |r| f64::from(r.recovered_removed)),
        ("day_of_peak", |r| f64::from(r.day_of_peak)),
        ("r0_estimate", SummaryRow::r0),
    ];
    let mut out = String::from("column,mean,min,max,runs\n");
    for (name, get) in columns {
        let values: Vec<f64> = rows.iter().map(get).collect();
        let n = values.len().max(1) as f64;
        let mean = values.iter().sum::<f64>() / n;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (min, max) = if values.is_empty() { (0.0, 0.0) } else { (min, max) };
        writeln!(out, "{name},{mean:.4},{min:.4},{max:.4},{}", values.len()).expect("string write");
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Fixed-width rendering of summary rows.
pub fn format_table(rows: &[SummaryRow]) -> String {
    let width = rows
        .iter()
        .map(|r| r.label.len())
        .max()
        .unwrap_or(0)
        .max("Scenario".len());
    let mut out = format!(
        "{:<width$}  {:>12}  {:>12}  {:>17}  {:>8}  {:>7}  {:>6}\n",
        "Scenario", "Max Infected", "Not Infected", "Recovered/Removed", "Peak Day", "R0", "Seed"
    );
    for r in rows {
        writeln!(
            out,
            "{:<width$}  {:>12}  {:>12}  {:>17}  {:>8}  {:>7}  {:>6}",
            r.label,
            r.max_infected,
            r.not_infected,
            r.recovered_removed,
            r.day_of_peak,
            r.r0_estimate,
            r.seed
        )
        .expect("string write");
    }
    out
}

/// Projects a simulated count onto the real population.
pub fn scale_up(sim_count: u64, sim_population: u64, real_population: u64) -> Result<u64> {
    if sim_population == 0 {
        return Err(Error::Domain("scale-up from an empty simulated population".into()));
    }
    Ok((sim_count as f64 * real_population as f64 / sim_population as f64).round() as u64)
}
