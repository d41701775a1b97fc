//! Per-decision trace rows and their CSV form.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::rl::Action;

pub const TRACE_HEADER: &str = "t_s,s_m,d_m,steering_rad,speed_mps,action,rollout_id";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub s: f64,
    pub d: f64,
    /// Kept in memory for geometry replays; not exported.
    pub heading: f64,
    pub steering: f64,
    pub speed: f64,
    pub action: Action,
    pub rollout_id: usize,
}

pub fn trace_to_csv(rows: &[TraceRow]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{:.6},{:.6},{:.6},{:.6},{:.6},{},{}",
            r.t,
            r.s,
            r.d,
            r.steering,
            r.speed,
            r.action.code(),
            r.rollout_id
        );
    }
    out
}

pub fn export_trace(rows: &[TraceRow], path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, trace_to_csv(rows))?;
    Ok(())
}

/// Parses an exported trace; `heading` is not stored and reads back as 0.
pub fn parse_trace(text: &str) -> Result<Vec<TraceRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(TRACE_HEADER) {
        return Err(Error::Validation("trace header missing".into()));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = |what: &str| Error::Validation(format!("trace row {}: {what}", i + 1));
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 7 {
                return Err(bad("expected 7 columns"));
            }
            let num = |k: usize| cols[k].parse::<f64>().map_err(|_| bad("bad number"));
            let code = cols[5].parse::<u8>().map_err(|_| bad("bad action"))?;
            Ok(TraceRow {
                t: num(0)?,
                s: num(1)?,
                d: num(2)?,
                heading: 0.0,
                steering: num(3)?,
                speed: num(4)?,
                action: Action::from_code(code).ok_or_else(|| bad("unknown action code"))?,
                rollout_id: cols[6].parse().map_err(|_| bad("bad roll-out id"))?,
            })
        })
        .collect()
}

/// Maximal runs of rows with `d` beyond `boundary`, as index ranges.
pub fn excursions(rows: &[TraceRow], boundary: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, r) in rows.iter().enumerate() {
        match (r.d > boundary, start) {
            (true, None) => start = Some(i),
            (false, Some(b)) => {
                out.push(b..i);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(b) = start {
        out.push(b..rows.len());
    }
    out
}
