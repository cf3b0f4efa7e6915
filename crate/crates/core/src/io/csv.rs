//! CSV schemas for traces, decisions, metrics, sweeps and input frames.
//!
//! Booleans are `0`/`1`. Floats use Rust's shortest round-trip formatting.
//! Undefined cells (an infeasible pair residual, the first frame's step
//! change, an undefined rate) are empty.
//!
//! Decision columns, shared by `trace.csv` and `detect` output:
//!
//! ```text
//! residual_<first>_<second>...  aggregate  delta_<i>...  spatial_alarm
//! temporal_alarm_<i>...  infeasibility_alarm  fused
//! ```

use std::io::{Read, Write};

use crate::detector::{AlarmDecision, Pairing};
use crate::geometry::SensorLayout;
use crate::harness::{Latency, RunMetrics, TraceRow};
use crate::sensing::MeasurementFrame;

use super::IoError;

fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Pair labels in residual order for a layout and pairing.
fn pair_labels(layout: &SensorLayout, pairing: Pairing) -> Vec<String> {
    let mut labels: Vec<String> = layout
        .corroborators()
        .map(|i| format!("residual_{}_{}", layout.reference(), i))
        .collect();
    if pairing == Pairing::AllPairs {
        let others: Vec<usize> = layout.corroborators().collect();
        for (n, &i) in others.iter().enumerate() {
            for &j in &others[n + 1..] {
                labels.push(format!("residual_{i}_{j}"));
            }
        }
    }
    labels
}

pub fn decision_header(layout: &SensorLayout, pairing: Pairing) -> Vec<String> {
    let n = layout.sensor_count();
    let mut h = pair_labels(layout, pairing);
    h.push("aggregate".into());
    h.extend((0..n).map(|i| format!("delta_{i}")));
    h.push("spatial_alarm".into());
    h.extend((0..n).map(|i| format!("temporal_alarm_{i}")));
    h.push("infeasibility_alarm".into());
    h.push("fused".into());
    h
}

pub fn decision_cells(d: &AlarmDecision) -> Vec<String> {
    let mut row: Vec<String> = d.residuals.pairs.iter().map(|p| opt(p.value)).collect();
    row.push(d.residuals.aggregate.to_string());
    row.extend(d.temporal.iter().map(|t| opt(t.delta)));
    row.push(flag(d.spatial_alarm));
    row.extend(d.temporal.iter().map(|t| flag(t.alarm)));
    row.push(flag(d.infeasibility_alarm));
    row.push(flag(d.fused));
    row
}

pub fn trace_header(layout: &SensorLayout, pairing: Pairing) -> Vec<String> {
    let mut h = vec!["run_index".to_string()];
    h.extend((0..layout.sensor_count()).map(|i| format!("range_{i}")));
    h.extend(decision_header(layout, pairing));
    h.push("attacked".into());
    h
}

pub fn write_trace<W: Write>(
    out: W,
    layout: &SensorLayout,
    pairing: Pairing,
    rows: &[TraceRow],
) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trace_header(layout, pairing))?;
    for r in rows {
        let mut cells = vec![r.frame.run_index.to_string()];
        cells.extend(r.frame.ranges.iter().map(|v| v.to_string()));
        cells.extend(decision_cells(&r.decision));
        cells.push(flag(r.frame.any_attacked()));
        w.write_record(cells)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_decisions<W: Write>(
    out: W,
    layout: &SensorLayout,
    pairing: Pairing,
    decisions: &[AlarmDecision],
) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["run_index".to_string()];
    header.extend(decision_header(layout, pairing));
    w.write_record(header)?;
    for d in decisions {
        let mut cells = vec![d.run_index.to_string()];
        cells.extend(decision_cells(d));
        w.write_record(cells)?;
    }
    w.flush()?;
    Ok(())
}

pub const METRICS_HEADER: [&str; 13] = [
    "runs",
    "attacked_runs",
    "clean_runs",
    "false_positive_rate",
    "detection_rate",
    "spatial_threshold",
    "temporal_threshold",
    "chi_squared_threshold",
    "baseline_runs",
    "baseline_mean",
    "baseline_std",
    "detection_latency",
    "per_sensor_detection",
];

pub fn metrics_cells(m: &RunMetrics) -> Vec<String> {
    let latency = m
        .detection_latency
        .iter()
        .map(Latency::to_string)
        .collect::<Vec<_>>()
        .join(";");
    let per_sensor = m
        .per_sensor_detection
        .iter()
        .map(|r| opt(*r))
        .collect::<Vec<_>>()
        .join(";");
    vec![
        m.runs.to_string(),
        m.attacked_runs.to_string(),
        m.clean_runs.to_string(),
        opt(m.false_positive_rate),
        opt(m.detection_rate),
        m.threshold_used.to_string(),
        m.temporal_threshold_used.to_string(),
        m.chi_squared_threshold.to_string(),
        m.baseline.map(|b| b.count.to_string()).unwrap_or_default(),
        opt(m.baseline.map(|b| b.mean)),
        opt(m.baseline.map(|b| b.std)),
        latency,
        per_sensor,
    ]
}

pub fn write_metrics<W: Write>(out: W, m: &RunMetrics) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(METRICS_HEADER)?;
    w.write_record(metrics_cells(m))?;
    w.flush()?;
    Ok(())
}

pub fn write_sweep<W: Write>(
    out: W,
    param: &str,
    values: &[f64],
    results: &[RunMetrics],
) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["parameter", "value"];
    header.extend(METRICS_HEADER);
    w.write_record(header)?;
    for (v, m) in values.iter().zip(results) {
        let mut cells = vec![param.to_string(), v.to_string()];
        cells.extend(metrics_cells(m));
        w.write_record(cells)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads frames from a CSV with a `run_index` column and `range_<i>` for
/// every sensor. Other columns are ignored, so a `trace.csv` can be replayed
/// directly.
pub fn read_frames<R: Read>(input: R, sensor_count: usize) -> Result<Vec<MeasurementFrame>, IoError> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| IoError::Frames(format!("missing column `{name}`")))
    };
    let run_col = column("run_index")?;
    let range_cols = (0..sensor_count)
        .map(|i| column(&format!("range_{i}")))
        .collect::<Result<Vec<_>, _>>()?;

    let mut frames = Vec::new();
    for (n, record) in rdr.records().enumerate() {
        let record = record?;
        let row = n + 2;
        let cell = |c: usize| record.get(c).unwrap_or("").trim();
        let run_index = cell(run_col).parse::<u64>().map_err(|_| {
            IoError::Frames(format!("row {row}: bad run_index `{}`", cell(run_col)))
        })?;
        let ranges = range_cols
            .iter()
            .map(|&c| {
                cell(c)
                    .parse::<f64>()
                    .map_err(|_| IoError::Frames(format!("row {row}: bad range `{}`", cell(c))))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let frame = MeasurementFrame::new(run_index, ranges)
            .map_err(|e| IoError::Frames(format!("row {row}: {e}")))?;
        frames.push(frame);
    }
    Ok(frames)
}
