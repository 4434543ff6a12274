//! Summary lines and the per-case results table.

use std::collections::BTreeMap;

use activeset::discovery::TerminatedBy;
use activeset::sampling::DistributionKind;
use anyhow::{bail, Result};

use crate::files::{EvalFile, ResultFile};

/// Four decimals with trailing zeros dropped, keeping at least one.
pub fn fmt_rate(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0');
    if s.ends_with('.') {
        format!("{s}0")
    } else {
        s.to_string()
    }
}

pub fn summary_line(file: &ResultFile) -> String {
    let r = &file.result;
    let mut line = format!(
        "K={} M={} W={} R={}",
        r.k_observed(),
        r.m,
        r.window,
        fmt_rate(r.rate)
    );
    if r.terminated_by == TerminatedBy::MaxM {
        line.push_str(" (stopped at max M)");
    }
    line
}

#[derive(Debug, Clone)]
pub struct TableInput {
    pub result: ResultFile,
    pub eval: Option<EvalFile>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn kind_name(k: DistributionKind) -> &'static str {
    match k {
        DistributionKind::Normal => "normal",
        DistributionKind::Uniform => "uniform",
    }
}

/// One row per case and one block of five columns per distribution present
/// in the inputs. Rows are ordered by K_M of the first block.
pub fn build_table(inputs: &[TableInput]) -> Result<Table> {
    if inputs.is_empty() {
        bail!("no runs to tabulate");
    }
    let mut kinds: Vec<DistributionKind> = inputs.iter().map(|i| i.result.distribution.kind).collect();
    kinds.sort_by_key(|k| kind_name(*k));
    kinds.dedup();

    let mut order: Vec<String> = Vec::new();
    let mut cells: BTreeMap<(String, &'static str), &TableInput> = BTreeMap::new();
    for input in inputs {
        let case = input.result.case.name.clone();
        if let Some(eval) = &input.eval {
            if eval.case != input.result.case {
                bail!("evaluation for {} paired with a result for {}", eval.case.name, case);
            }
        }
        if !order.contains(&case) {
            order.push(case.clone());
        }
        let slot = (case.clone(), kind_name(input.result.distribution.kind));
        if cells.insert(slot, input).is_some() {
            bail!("two {} runs for {case}", kind_name(input.result.distribution.kind));
        }
    }

    let mut header = vec!["case".to_string()];
    for k in &kinds {
        for col in ["K_M", "M", "W_M", "R", "P(p*)"] {
            header.push(if kinds.len() > 1 {
                format!("{col} ({})", kind_name(*k))
            } else {
                col.to_string()
            });
        }
    }

    let sort_k = |case: &String| {
        kinds
            .iter()
            .find_map(|k| cells.get(&(case.clone(), kind_name(*k))))
            .map_or(usize::MAX, |i| i.result.result.k_observed())
    };
    let mut cases = order;
    cases.sort_by_key(|c| sort_k(c));

    let rows = cases
        .iter()
        .map(|case| {
            let mut row = vec![case.clone()];
            for k in &kinds {
                match cells.get(&(case.clone(), kind_name(*k))) {
                    Some(input) => {
                        let r = &input.result.result;
                        row.push(r.k_observed().to_string());
                        row.push(r.m.to_string());
                        row.push(r.window.to_string());
                        row.push(fmt_rate(r.rate));
                        row.push(match &input.eval {
                            Some(e) if r.terminated_by == TerminatedBy::StoppingRule => {
                                fmt_rate(e.report.success_probability)
                            }
                            _ => "-".into(),
                        });
                    }
                    None => row.extend(std::iter::repeat_n("-".to_string(), 5)),
                }
            }
            row
        })
        .collect();
    Ok(Table { header, rows })
}

impl Table {
    pub fn to_markdown(&self) -> String {
        let widths: Vec<usize> = (0..self.header.len())
            .map(|c| {
                self.rows
                    .iter()
                    .map(|r| r[c].len())
                    .chain([self.header[c].len(), 3])
                    .max()
                    .unwrap_or(3)
            })
            .collect();
        let line = |cells: &[String]| {
            let inner: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s:<w$}"))
                .collect();
            format!("| {} |\n", inner.join(" | "))
        };
        let mut out = line(&self.header);
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        out.push_str(&line(&rule));
        for row in &self.rows {
            out.push_str(&line(row));
        }
        out
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_format() {
        assert_eq!(fmt_rate(0.0), "0.0");
        assert_eq!(fmt_rate(1.0), "1.0");
        assert_eq!(fmt_rate(0.01), "0.01");
        assert_eq!(fmt_rate(0.0038464), "0.0038");
    }
}
