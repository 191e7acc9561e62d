use std::collections::HashMap;
use std::io::{Read, Write};

use super::{MobilityError, RaceTrace, VelocityFrame};
use crate::graph::{Position, RiderPositions};

pub const POSITION_HEADER: [&str; 4] = ["time_s", "rider_id", "s_m", "d_m"];
pub const VELOCITY_HEADER: [&str; 3] = ["time_s", "rider_id", "v_mps"];

/// Cells of a `time, rider, values...` table laid out on a full grid.
struct Grid {
    times: Vec<f64>,
    rider_ids: Vec<u64>,
    /// `cells[time_index][rider_index]`
    cells: Vec<Vec<Vec<f64>>>,
}

fn malformed(line: u64, message: impl Into<String>) -> MobilityError {
    MobilityError::Malformed {
        line,
        message: message.into(),
    }
}

/// Reads a grid table. With `dt`, times are snapped to `t0 + k·dt` and
/// off-grid or missing times are errors; without it, the distinct times
/// present define the grid.
fn read_grid<R: Read>(source: R, header: &[&str], dt: Option<f64>) -> Result<Grid, MobilityError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(source);
    let found = reader.headers().map_err(|e| malformed(1, e.to_string()))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(MobilityError::Header {
            found: found.iter().collect::<Vec<_>>().join(","),
            expected: header.join(","),
        });
    }
    let values = header.len() - 2;

    struct Row {
        line: u64,
        time: f64,
        rider: u64,
        values: Vec<f64>,
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            malformed(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(malformed(
                line,
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
        let num = |i: usize| -> Result<f64, MobilityError> {
            let v: f64 = record[i]
                .parse()
                .map_err(|_| malformed(line, format!("{}: not a number: {:?}", header[i], &record[i])))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(malformed(line, format!("{}: non-finite value", header[i])))
            }
        };
        let rider: u64 = record[1]
            .parse()
            .map_err(|_| malformed(line, format!("rider_id: not a non-negative integer: {:?}", &record[1])))?;
        rows.push(Row {
            line,
            time: num(0)?,
            rider,
            values: (0..values).map(|i| num(i + 2)).collect::<Result<_, _>>()?,
        });
    }
    if rows.is_empty() {
        return Err(MobilityError::Empty);
    }

    let mut rider_index: HashMap<u64, usize> = HashMap::new();
    let mut rider_ids = Vec::new();
    for row in &rows {
        rider_index.entry(row.rider).or_insert_with(|| {
            rider_ids.push(row.rider);
            rider_ids.len() - 1
        });
    }

    let mut slot_of_row = Vec::with_capacity(rows.len());
    let times: Vec<f64> = match dt {
        Some(dt) => {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(MobilityError::InvalidParams(format!("dt must be positive, got {dt}")));
            }
            let t0 = rows.iter().map(|r| r.time).fold(f64::INFINITY, f64::min);
            let mut last = 0usize;
            for row in &rows {
                let k = ((row.time - t0) / dt).round();
                let snapped = t0 + k * dt;
                if (row.time - snapped).abs() > 1e-6 * dt.max(1.0) || k > u32::MAX as f64 {
                    return Err(MobilityError::OffGrid {
                        line: row.line,
                        time: row.time,
                        dt,
                    });
                }
                slot_of_row.push(k as usize);
                last = last.max(k as usize);
            }
            (0..=last).map(|k| t0 + k as f64 * dt).collect()
        }
        None => {
            let mut distinct: Vec<f64> = rows.iter().map(|r| r.time).collect();
            distinct.sort_by(f64::total_cmp);
            distinct.dedup();
            for row in &rows {
                slot_of_row.push(distinct.partition_point(|&t| t < row.time));
            }
            distinct
        }
    };

    let n = rider_ids.len();
    let mut first_line: Vec<Vec<Option<u64>>> = vec![vec![None; n]; times.len()];
    let mut cells = vec![vec![Vec::new(); n]; times.len()];
    for (row, &k) in rows.into_iter().zip(&slot_of_row) {
        let r = rider_index[&row.rider];
        if let Some(first) = first_line[k][r] {
            return Err(MobilityError::DuplicateCell {
                line: row.line,
                first_line: first,
                time: row.time,
                rider: row.rider,
            });
        }
        first_line[k][r] = Some(row.line);
        cells[k][r] = row.values;
    }
    for (k, time_cells) in first_line.iter().enumerate() {
        if let Some(r) = time_cells.iter().position(Option::is_none) {
            return Err(MobilityError::GridGap {
                time: times[k],
                rider: rider_ids[r],
            });
        }
    }
    Ok(Grid {
        times,
        rider_ids,
        cells,
    })
}

/// Parses a position CSV (`time_s,rider_id,s_m,d_m`) sampled every `dt`
/// seconds. Riders are indexed in order of first appearance.
pub fn ingest_trace<R: Read>(source: R, dt: f64) -> Result<RaceTrace, MobilityError> {
    let grid = read_grid(source, &POSITION_HEADER, Some(dt))?;
    let frames = grid
        .times
        .iter()
        .zip(grid.cells)
        .map(|(&time, cells)| RiderPositions {
            time,
            pos: cells.iter().map(|c| Position::new(c[0], c[1])).collect(),
        })
        .collect();
    Ok(RaceTrace {
        dt,
        rider_ids: grid.rider_ids,
        frames,
        breakaways: Vec::new(),
    })
}

/// Parses a velocity CSV (`time_s,rider_id,v_mps`). Returns rider ids in
/// first-appearance order alongside the frames.
pub fn read_velocity_csv<R: Read>(source: R) -> Result<(Vec<u64>, Vec<VelocityFrame>), MobilityError> {
    let grid = read_grid(source, &VELOCITY_HEADER, None)?;
    let frames = grid
        .times
        .iter()
        .zip(grid.cells)
        .map(|(&time, cells)| VelocityFrame {
            time,
            x: cells.iter().map(|c| c[0]).collect(),
        })
        .collect();
    Ok((grid.rider_ids, frames))
}

pub fn write_position_csv<W: Write>(out: W, trace: &RaceTrace) -> Result<(), MobilityError> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| MobilityError::Io(e.into());
    w.write_record(POSITION_HEADER).map_err(io)?;
    for frame in &trace.frames {
        for (id, p) in trace.rider_ids.iter().zip(&frame.pos) {
            w.write_record([frame.time.to_string(), id.to_string(), p.s.to_string(), p.d.to_string()])
                .map_err(io)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_velocity_csv<W: Write>(out: W, rider_ids: &[u64], frames: &[VelocityFrame]) -> Result<(), MobilityError> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| MobilityError::Io(e.into());
    w.write_record(VELOCITY_HEADER).map_err(io)?;
    for frame in frames {
        for (id, v) in rider_ids.iter().zip(&frame.x) {
            w.write_record([frame.time.to_string(), id.to_string(), v.to_string()])
                .map_err(io)?;
        }
    }
    w.flush()?;
    Ok(())
}
