use std::io::{BufRead, Write};

use super::{Status, SubjectRecord};
use crate::design::Group;
use crate::{Error, Result};

pub const CSV_HEADER: &str = "id,group,entry,time,status";
pub const CSV_HEADER_WITH_CENSOR: &str = "id,group,entry,time,status,censor_time";

/// Write records in the dataset CSV format. The `censor_time` column is only
/// emitted when `with_censor_time` is set and every record carries one.
pub fn write_csv<W: Write>(records: &[SubjectRecord], mut out: W, with_censor_time: bool) -> Result<()> {
    let with_censor = with_censor_time && records.iter().all(|r| r.censor_time.is_some());
    if with_censor_time && !with_censor {
        return Err(Error::MissingColumn("censor_time"));
    }
    writeln!(out, "{}", if with_censor { CSV_HEADER_WITH_CENSOR } else { CSV_HEADER })?;
    for r in records {
        write!(
            out,
            "{},{},{},{},{}",
            r.id,
            r.group.index(),
            r.entry,
            r.time,
            r.status.code()
        )?;
        if with_censor {
            write!(out, ",{}", r.censor_time.unwrap_or(f64::NAN))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[derive(Clone, Copy)]
struct Columns {
    id: usize,
    group: usize,
    entry: usize,
    time: usize,
    status: usize,
    censor_time: Option<usize>,
    width: usize,
}

fn parse_header(line: &str) -> Result<Columns> {
    let names: Vec<&str> = line.split(',').map(str::trim).collect();
    let find = |name: &'static str| names.iter().position(|n| *n == name);
    if let Some(unknown) = names
        .iter()
        .find(|n| !matches!(**n, "id" | "group" | "entry" | "time" | "status" | "censor_time"))
    {
        return Err(Error::Parse {
            line: 1,
            reason: format!("unknown column `{unknown}`"),
        });
    }
    let need = |name: &'static str| find(name).ok_or(Error::MissingColumn(name));
    Ok(Columns {
        id: need("id")?,
        group: need("group")?,
        entry: need("entry")?,
        time: need("time")?,
        status: need("status")?,
        censor_time: find("censor_time"),
        width: names.len(),
    })
}

fn field<T: std::str::FromStr>(cells: &[&str], idx: usize, name: &str, line: usize) -> Result<T> {
    cells[idx].trim().parse().map_err(|_| Error::Parse {
        line,
        reason: format!("cannot parse `{name}` from `{}`", cells[idx]),
    })
}

/// Parse the dataset CSV format. Line numbers in errors are 1-based and
/// count the header.
pub fn read_csv<R: BufRead>(input: R) -> Result<Vec<SubjectRecord>> {
    let mut lines = input.lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => return Err(Error::EmptyInput("dataset file is empty")),
    };
    let cols = parse_header(header.trim_start_matches('\u{feff}'))?;
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != cols.width {
            return Err(Error::Parse {
                line: line_no,
                reason: format!("expected {} fields, found {}", cols.width, cells.len()),
            });
        }
        let bad = |reason: String| Error::Parse { line: line_no, reason };
        let id: u64 = field(&cells, cols.id, "id", line_no)?;
        let group_code: u8 = field(&cells, cols.group, "group", line_no)?;
        let group = Group::from_index(group_code)
            .ok_or_else(|| bad(format!("group must be 0 or 1, got {group_code}")))?;
        let entry: f64 = field(&cells, cols.entry, "entry", line_no)?;
        let time: f64 = field(&cells, cols.time, "time", line_no)?;
        let status_code: u8 = field(&cells, cols.status, "status", line_no)?;
        let status = Status::from_code(status_code)
            .ok_or_else(|| bad(format!("status must be 0, 1 or 2, got {status_code}")))?;
        if !(time.is_finite() && time >= 0.0) {
            return Err(bad(format!("time must be finite and >= 0, got {time}")));
        }
        if !(entry.is_finite() && entry >= 0.0) {
            return Err(bad(format!("entry must be finite and >= 0, got {entry}")));
        }
        let censor_time = match cols.censor_time {
            Some(idx) => {
                let c: f64 = field(&cells, idx, "censor_time", line_no)?;
                if c.is_nan() || c < time {
                    return Err(bad(format!("censor_time {c} precedes time {time}")));
                }
                Some(c)
            }
            None => None,
        };
        records.push(SubjectRecord {
            id,
            group,
            entry,
            time,
            status,
            censor_time,
        });
    }
    Ok(records)
}
