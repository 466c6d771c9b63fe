//! CSV serialization for jump records and sampled series.
//!
//! Floats are written with 17 significant digits so parsing returns the exact
//! same `f64` (lossless round trip, usable for golden files).

use crate::einstein::{JumpEvent, JumpKind};
use crate::driven::DrivenTrajectoryPoint;
use crate::error::{Error, Result};
use crate::mode::{ClassifiedJumpEvent, ModeTrajectoryPoint};

/// Lossless decimal formatting of a double (17 significant digits).
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(line: usize, field: &str, s: &str) -> Result<f64> {
    s.parse::<f64>().map_err(|_| Error::CsvParse {
        line,
        message: format!("field '{field}': '{s}' is not a number"),
    })
}

fn parse_i64(line: usize, field: &str, s: &str) -> Result<i64> {
    s.parse::<i64>().map_err(|_| Error::CsvParse {
        line,
        message: format!("field '{field}': '{s}' is not an integer"),
    })
}

fn parse_kind(line: usize, s: &str) -> Result<JumpKind> {
    match s {
        "up" => Ok(JumpKind::Up),
        "down" => Ok(JumpKind::Down),
        other => Err(Error::CsvParse {
            line,
            message: format!("field 'kind': expected up or down, got '{other}'"),
        }),
    }
}

fn parse_bool(line: usize, s: &str) -> Result<bool> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(Error::CsvParse {
            line,
            message: format!("field 'anomalous': expected true or false, got '{other}'"),
        }),
    }
}

fn split_row(line_no: usize, line: &str, n: usize) -> Result<Vec<&str>> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != n {
        return Err(Error::CsvParse {
            line: line_no,
            message: format!("expected {n} fields, got {}", fields.len()),
        });
    }
    Ok(fields)
}

fn check_header(text: &str, expected: &str) -> Result<()> {
    match text.lines().next() {
        Some(h) if h == expected => Ok(()),
        other => Err(Error::CsvParse {
            line: 1,
            message: format!("expected header '{expected}', got {other:?}"),
        }),
    }
}

pub fn events_to_csv(events: &[JumpEvent]) -> String {
    let mut out = String::from("t,kind\n");
    for e in events {
        out.push_str(&fmt_g17(e.time));
        out.push(',');
        out.push_str(e.kind.as_str());
        out.push('\n');
    }
    out
}

pub fn events_from_csv(text: &str) -> Result<Vec<JumpEvent>> {
    check_header(text, "t,kind")?;
    text.lines()
        .enumerate()
        .skip(1)
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let f = split_row(i + 1, l, 2)?;
            Ok(JumpEvent { time: parse_f64(i + 1, "t", f[0])?, kind: parse_kind(i + 1, f[1])? })
        })
        .collect()
}

pub fn driven_series_to_csv(series: &[DrivenTrajectoryPoint]) -> String {
    let mut out = String::from("t,pe,coh_re,coh_im\n");
    for p in series {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_g17(p.t),
            fmt_g17(p.pe),
            fmt_g17(p.coh_re),
            fmt_g17(p.coh_im)
        ));
    }
    out
}

pub fn driven_series_from_csv(text: &str) -> Result<Vec<DrivenTrajectoryPoint>> {
    check_header(text, "t,pe,coh_re,coh_im")?;
    text.lines()
        .enumerate()
        .skip(1)
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let f = split_row(i + 1, l, 4)?;
            Ok(DrivenTrajectoryPoint {
                t: parse_f64(i + 1, "t", f[0])?,
                pe: parse_f64(i + 1, "pe", f[1])?,
                coh_re: parse_f64(i + 1, "coh_re", f[2])?,
                coh_im: parse_f64(i + 1, "coh_im", f[3])?,
            })
        })
        .collect()
}

pub fn mode_series_to_csv(series: &[ModeTrajectoryPoint]) -> String {
    let mut out = String::from("t,n_expect,pe\n");
    for p in series {
        out.push_str(&format!("{},{},{}\n", fmt_g17(p.t), fmt_g17(p.n_expect), fmt_g17(p.pe)));
    }
    out
}

pub fn mode_series_from_csv(text: &str) -> Result<Vec<ModeTrajectoryPoint>> {
    check_header(text, "t,n_expect,pe")?;
    text.lines()
        .enumerate()
        .skip(1)
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let f = split_row(i + 1, l, 3)?;
            Ok(ModeTrajectoryPoint {
                t: parse_f64(i + 1, "t", f[0])?,
                n_expect: parse_f64(i + 1, "n_expect", f[1])?,
                pe: parse_f64(i + 1, "pe", f[2])?,
            })
        })
        .collect()
}

pub fn mode_events_to_csv(events: &[ClassifiedJumpEvent]) -> String {
    let mut out = String::from("t,kind,n_before,n_after,anomalous\n");
    for e in events {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_g17(e.time),
            e.kind.as_str(),
            e.n_before,
            e.n_after,
            e.anomalous
        ));
    }
    out
}

pub fn mode_events_from_csv(text: &str) -> Result<Vec<ClassifiedJumpEvent>> {
    check_header(text, "t,kind,n_before,n_after,anomalous")?;
    text.lines()
        .enumerate()
        .skip(1)
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let f = split_row(i + 1, l, 5)?;
            Ok(ClassifiedJumpEvent {
                time: parse_f64(i + 1, "t", f[0])?,
                kind: parse_kind(i + 1, f[1])?,
                n_before: parse_i64(i + 1, "n_before", f[2])?,
                n_after: parse_i64(i + 1, "n_after", f[3])?,
                anomalous: parse_bool(i + 1, f[4])?,
            })
        })
        .collect()
}
