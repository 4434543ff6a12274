//! Case-file readers.
//!
//! The MATPOWER reader understands the subset of the format needed for a
//! DC model:
//!
//! | block          | columns used (1-based)                                       |
//! |----------------|--------------------------------------------------------------|
//! | `mpc.baseMVA`  | scalar                                                       |
//! | `mpc.bus`      | 1 `BUS_I`, 2 `BUS_TYPE` (3 = slack, 4 = isolated), 3 `PD`     |
//! | `mpc.gen`      | 1 `GEN_BUS`, 8 `GEN_STATUS`, 9 `PMAX`, 10 `PMIN`              |
//! | `mpc.branch`   | 1 `F_BUS`, 2 `T_BUS`, 4 `BR_X`, 6 `RATE_A`, 9 `TAP`, 10 `SHIFT`, 11 `BR_STATUS` |
//! | `mpc.gencost`  | 1 `MODEL` (must be 2), 4 `NCOST`, then coefficients          |
//!
//! Out-of-service generators and branches are skipped, isolated buses are
//! dropped, and branches with a nonzero phase shift are rejected. A branch
//! with a tap ratio `t` contributes reactance `x * t`. Polynomial costs keep
//! only the linear coefficient; a nonzero quadratic term is dropped with a
//! warning. Every other block (`bus_name`, `gentype`, ...) is ignored.

use std::collections::HashMap;

use crate::error::{Error, Result};

use super::network::{Branch, Bus, Generator, Network};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseFormat {
    MatpowerSubset,
    NativeJson,
}

pub fn parse_network(text: &str, format: CaseFormat) -> Result<Network> {
    let net = match format {
        CaseFormat::MatpowerSubset => parse_matpower(text)?,
        CaseFormat::NativeJson => parse_json(text)?,
    };
    net.validate()?;
    Ok(net)
}

fn parse_json(text: &str) -> Result<Network> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

#[derive(Debug)]
struct MatrixRow {
    line: usize,
    values: Vec<f64>,
}

#[derive(Debug, Default)]
struct RawCase {
    base_mva: Option<(usize, f64)>,
    matrices: HashMap<String, (usize, Vec<MatrixRow>)>,
}

enum State {
    Outside,
    Matrix { name: String, start: usize },
    Skip { closer: char },
}

fn strip_comment(line: &str) -> &str {
    match line.find('%') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_number(tok: &str, line: usize, column: usize) -> Result<f64> {
    let v = match tok {
        "Inf" | "inf" => Ok(f64::INFINITY),
        "-Inf" | "-inf" => Ok(f64::NEG_INFINITY),
        _ => tok.parse::<f64>(),
    };
    v.map_err(|_| Error::Parse {
        line,
        column,
        message: format!("invalid number '{tok}'"),
    })
}

/// Reads matrix rows from `body` (text between brackets on one line),
/// pushing completed rows into `rows` and partial content into `pending`.
fn scan_matrix_text(
    body: &str,
    line_no: usize,
    col_offset: usize,
    rows: &mut Vec<MatrixRow>,
    pending: &mut Vec<f64>,
) -> Result<()> {
    let mut tok_start: Option<usize> = None;
    let flush = |start: &mut Option<usize>, end: usize, pending: &mut Vec<f64>| -> Result<()> {
        if let Some(s) = start.take() {
            let tok = &body[s..end];
            pending.push(parse_number(tok, line_no, col_offset + s + 1)?);
        }
        Ok(())
    };
    for (i, ch) in body.char_indices() {
        match ch {
            ' ' | '\t' | ',' | '\r' => flush(&mut tok_start, i, pending)?,
            ';' => {
                flush(&mut tok_start, i, pending)?;
                if !pending.is_empty() {
                    rows.push(MatrixRow {
                        line: line_no,
                        values: std::mem::take(pending),
                    });
                }
            }
            _ => {
                if tok_start.is_none() {
                    tok_start = Some(i);
                }
            }
        }
    }
    flush(&mut tok_start, body.len(), pending)?;
    // A newline also terminates a row.
    if !pending.is_empty() {
        rows.push(MatrixRow {
            line: line_no,
            values: std::mem::take(pending),
        });
    }
    Ok(())
}

fn scan(text: &str) -> Result<RawCase> {
    let mut raw = RawCase::default();
    let mut state = State::Outside;
    let mut rows: Vec<MatrixRow> = Vec::new();
    let mut pending: Vec<f64> = Vec::new();

    for (idx, full_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(full_line);
        match &state {
            State::Skip { closer } => {
                if line.contains(*closer) {
                    state = State::Outside;
                }
            }
            State::Matrix { name, start } => {
                let (body, done) = match line.find(']') {
                    Some(i) => (&line[..i], true),
                    None => (line, false),
                };
                scan_matrix_text(body, line_no, 0, &mut rows, &mut pending)?;
                if done {
                    raw.matrices
                        .insert(name.clone(), (*start, std::mem::take(&mut rows)));
                    state = State::Outside;
                }
            }
            State::Outside => {
                let trimmed = line.trim();
                let Some(rest) = trimmed.strip_prefix("mpc.") else {
                    continue;
                };
                let Some(eq) = rest.find('=') else {
                    continue;
                };
                let name = rest[..eq].trim().to_string();
                let value = rest[eq + 1..].trim();
                let value_col = line.find('=').map(|i| i + 2).unwrap_or(1);
                if let Some(after) = value.strip_prefix('[') {
                    let body_offset = line.find('[').map(|i| i + 1).unwrap_or(0);
                    match after.find(']') {
                        Some(i) => {
                            scan_matrix_text(&after[..i], line_no, body_offset, &mut rows, &mut pending)?;
                            raw.matrices
                                .insert(name, (line_no, std::mem::take(&mut rows)));
                        }
                        None => {
                            scan_matrix_text(after, line_no, body_offset, &mut rows, &mut pending)?;
                            state = State::Matrix {
                                name,
                                start: line_no,
                            };
                        }
                    }
                } else if value.starts_with('{') {
                    if !value.contains('}') {
                        state = State::Skip { closer: '}' };
                    }
                } else if name == "baseMVA" {
                    let tok = value.trim_end_matches(';').trim();
                    raw.base_mva = Some((line_no, parse_number(tok, line_no, value_col)?));
                }
            }
        }
    }
    if let State::Matrix { name, start } = state {
        return Err(Error::Parse {
            line: start,
            column: 1,
            message: format!("matrix mpc.{name} is not closed"),
        });
    }
    Ok(raw)
}

fn column(row: &MatrixRow, col: usize, block: &str, row_no: usize) -> Result<f64> {
    row.values.get(col).copied().ok_or_else(|| Error::Parse {
        line: row.line,
        column: 1,
        message: format!(
            "{block} row {row_no} has {} columns, need at least {}",
            row.values.len(),
            col + 1
        ),
    })
}

fn as_id(v: f64, row: &MatrixRow, what: &str) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        Err(Error::Parse {
            line: row.line,
            column: 1,
            message: format!("{what} '{v}' is not a valid bus id"),
        })
    }
}

fn parse_matpower(text: &str) -> Result<Network> {
    let raw = scan(text)?;
    let missing = |what: &str| Error::Parse {
        line: 1,
        column: 1,
        message: format!("missing mpc.{what}"),
    };
    let (_, base_mva) = raw.base_mva.ok_or_else(|| missing("baseMVA"))?;
    let (_, bus_rows) = raw.matrices.get("bus").ok_or_else(|| missing("bus"))?;
    let (_, gen_rows) = raw.matrices.get("gen").ok_or_else(|| missing("gen"))?;
    let (_, branch_rows) = raw.matrices.get("branch").ok_or_else(|| missing("branch"))?;
    let (_, cost_rows) = raw.matrices.get("gencost").ok_or_else(|| missing("gencost"))?;
    let mut warnings = Vec::new();

    let mut buses = Vec::new();
    let mut slack: Option<usize> = None;
    let mut isolated = Vec::new();
    for (k, row) in bus_rows.iter().enumerate() {
        let id = as_id(column(row, 0, "bus", k + 1)?, row, "BUS_I")?;
        let kind = column(row, 1, "bus", k + 1)?;
        let pd = column(row, 2, "bus", k + 1)?;
        if kind == 4.0 {
            isolated.push(id);
            continue;
        }
        if kind == 3.0 {
            if let Some(prev) = slack {
                return Err(Error::UnsupportedFeature(format!(
                    "multiple reference buses ({prev} and {id})"
                )));
            }
            slack = Some(id);
        }
        buses.push(Bus { id, load_mw: pd });
    }
    let slack_bus = slack.ok_or_else(|| Error::Parse {
        line: bus_rows.first().map(|r| r.line).unwrap_or(1),
        column: 1,
        message: "no reference bus (type 3) in mpc.bus".into(),
    })?;
    let known: std::collections::HashSet<usize> = buses.iter().map(|b| b.id).collect();

    if cost_rows.len() < gen_rows.len() {
        return Err(Error::Parse {
            line: cost_rows.last().map(|r| r.line).unwrap_or(1),
            column: 1,
            message: format!(
                "mpc.gencost has {} rows for {} generators",
                cost_rows.len(),
                gen_rows.len()
            ),
        });
    }
    let mut generators = Vec::new();
    for (k, (row, cost)) in gen_rows.iter().zip(cost_rows).enumerate() {
        let bus = as_id(column(row, 0, "gen", k + 1)?, row, "GEN_BUS")?;
        let status = column(row, 7, "gen", k + 1)?;
        let pmax = column(row, 8, "gen", k + 1)?;
        let pmin = column(row, 9, "gen", k + 1)?;
        if status <= 0.0 {
            continue;
        }
        if !known.contains(&bus) {
            return Err(Error::Parse {
                line: row.line,
                column: 1,
                message: format!("gen row {} references missing bus {bus}", k + 1),
            });
        }
        let model = column(cost, 0, "gencost", k + 1)?;
        if model != 2.0 {
            return Err(Error::UnsupportedFeature(format!(
                "gencost row {} uses model {model}; only polynomial (2) is supported",
                k + 1
            )));
        }
        let ncost = column(cost, 3, "gencost", k + 1)? as usize;
        let coeffs: Vec<f64> = (0..ncost)
            .map(|i| column(cost, 4 + i, "gencost", k + 1))
            .collect::<Result<_>>()?;
        let linear = if ncost >= 2 { coeffs[ncost - 2] } else { 0.0 };
        let higher = &coeffs[..ncost.saturating_sub(2)];
        if higher.iter().any(|c| *c != 0.0) {
            let msg = format!(
                "generator {} at bus {bus}: nonzero higher-order cost terms {higher:?} dropped",
                k + 1
            );
            log::warn!("{msg}");
            warnings.push(msg);
        }
        generators.push(Generator {
            bus,
            pmin_mw: pmin,
            pmax_mw: pmax,
            cost_per_mwh: linear,
        });
    }

    let mut branches = Vec::new();
    for (k, row) in branch_rows.iter().enumerate() {
        let from = as_id(column(row, 0, "branch", k + 1)?, row, "F_BUS")?;
        let to = as_id(column(row, 1, "branch", k + 1)?, row, "T_BUS")?;
        let x = column(row, 3, "branch", k + 1)?;
        let rate = column(row, 5, "branch", k + 1)?;
        let tap = row.values.get(8).copied().unwrap_or(0.0);
        let shift = row.values.get(9).copied().unwrap_or(0.0);
        let status = row.values.get(10).copied().unwrap_or(1.0);
        if status <= 0.0 {
            continue;
        }
        for b in [from, to] {
            if !known.contains(&b) {
                return Err(Error::Parse {
                    line: row.line,
                    column: 1,
                    message: format!("branch row {} references missing bus {b}", k + 1),
                });
            }
        }
        if shift != 0.0 {
            return Err(Error::UnsupportedFeature(format!(
                "branch row {} is a phase shifter (shift {shift})",
                k + 1
            )));
        }
        let ratio = if tap == 0.0 { 1.0 } else { tap };
        branches.push(Branch {
            from,
            to,
            reactance_pu: x * ratio,
            rate_mw: rate,
        });
    }
    if !isolated.is_empty() {
        warnings.push(format!("isolated buses {isolated:?} dropped"));
    }

    Ok(Network {
        base_mva,
        slack_bus,
        buses,
        generators,
        branches,
        warnings,
    })
}
