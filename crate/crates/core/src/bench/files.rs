//! Trace CSV files, the wide plot-data table and certificate sidecars.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{certify, Certificate, CertifyConfig, EnergyReport};
use crate::error::{Error, Result};
use crate::solvers::next_t;
use crate::trace::TraceRow;

pub const CSV_HEADER: [&str; 9] = [
    "algorithm",
    "k",
    "t_k",
    "objective",
    "gap_ref",
    "dx",
    "dy",
    "energy",
    "elapsed_s",
];

/// 17 significant digits, which round-trips every finite `f64`.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Parse {
            line,
            message: format!("{kind:?}"),
        },
    }
}

/// Writes rows of a single algorithm as CSV.
pub fn write_csv(rows: &[TraceRow], out: impl Write) -> Result<()> {
    if let Some(first) = rows.first() {
        if let Some(other) = rows.iter().find(|r| r.algorithm != first.algorithm) {
            return Err(Error::InvalidArgument(format!(
                "rows mix algorithms '{}' and '{}'",
                first.algorithm, other.algorithm
            )));
        }
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_error)?;
    for r in rows {
        w.write_record([
            r.algorithm.clone(),
            r.k.to_string(),
            fmt_opt(r.t_k),
            fmt_f64(r.objective),
            fmt_opt(r.gap_ref),
            fmt_f64(r.dx),
            fmt_opt(r.dy),
            fmt_opt(r.energy),
            fmt_f64(r.elapsed_s),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(rows: &[TraceRow], path: impl AsRef<Path>) -> Result<()> {
    write_csv(rows, BufWriter::new(File::create(path)?))
}

pub fn parse_csv(input: impl Read) -> Result<Vec<TraceRow>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header = r.headers().map_err(csv_error)?;
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header '{}'", CSV_HEADER.join(",")),
        });
    }
    r.deserialize().map(|row| row.map_err(csv_error)).collect()
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<TraceRow>> {
    parse_csv(BufReader::new(File::open(path)?))
}

/// One series of the plot-data table.
pub struct PlotSeries<'a> {
    pub name: &'a str,
    pub rows: &'a [TraceRow],
}

/// Tab-separated wide table: `k`, then `<name>_gap` (objective minus
/// `f_star`) and `<name>_elapsed_s` for every series. Cells are empty where
/// a series has no row at that `k`.
pub fn write_plotdata(series: &[PlotSeries<'_>], f_star: f64, mut out: impl Write) -> Result<()> {
    let mut header = vec!["k".to_string()];
    for s in series {
        header.push(format!("{}_gap", s.name));
        header.push(format!("{}_elapsed_s", s.name));
    }
    writeln!(out, "{}", header.join("\t"))?;
    let mut ks: Vec<usize> = series
        .iter()
        .flat_map(|s| s.rows.iter().map(|r| r.k))
        .collect();
    ks.sort_unstable();
    ks.dedup();
    let mut cursors = vec![0usize; series.len()];
    for k in ks {
        let mut line = vec![k.to_string()];
        for (s, c) in series.iter().zip(cursors.iter_mut()) {
            while *c < s.rows.len() && s.rows[*c].k < k {
                *c += 1;
            }
            match s.rows.get(*c).filter(|r| r.k == k) {
                Some(r) => {
                    line.push(fmt_f64(r.objective - f_star));
                    line.push(fmt_f64(r.elapsed_s));
                }
                None => line.extend([String::new(), String::new()]),
            }
        }
        writeln!(out, "{}", line.join("\t"))?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualDistances {
    pub k: usize,
    /// `||y_k - y*||^2`
    pub dual_dist_sq: f64,
    /// `||v_k - y*||^2`
    pub v_dist_sq: f64,
}

/// Everything needed besides the CSV trace to rerun the certificates of an
/// IAPD run. `dual[i]` belongs to the CSV row with the same `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateState {
    pub algorithm: String,
    pub config: CertifyConfig,
    /// Report at the initial state, which carries `E_1`.
    pub initial: EnergyReport,
    pub dual: Vec<DualDistances>,
}

impl CertificateState {
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, self)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        writeln!(w)?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let r = BufReader::new(File::open(path)?);
        serde_json::from_reader(r).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })
    }

    /// Rebuilds the energy reports from CSV rows. CSV row `k` (completed
    /// iterations) is the state with index `k + 1`.
    pub fn reports(&self, rows: &[TraceRow]) -> Result<Vec<EnergyReport>> {
        if rows.len() != self.dual.len() {
            return Err(Error::InvalidArgument(format!(
                "trace has {} rows but the state has {} entries",
                rows.len(),
                self.dual.len()
            )));
        }
        let missing =
            |k: usize, col: &str| Error::InvalidArgument(format!("row k={k} has no {col}"));
        let mut reports = vec![self.initial.clone()];
        for (i, (row, d)) in rows.iter().zip(&self.dual).enumerate() {
            if row.algorithm != self.algorithm {
                return Err(Error::InvalidArgument(format!(
                    "row k={} belongs to '{}', state is for '{}'",
                    row.k, row.algorithm, self.algorithm
                )));
            }
            if row.k != d.k {
                return Err(Error::InvalidArgument(format!(
                    "row k={} does not match state entry k={}",
                    row.k, d.k
                )));
            }
            let t_k = row.t_k.ok_or_else(|| missing(row.k, "t_k"))?;
            let t_next = match rows.get(i + 1) {
                Some(next) if next.k == row.k + 1 => {
                    next.t_k.ok_or_else(|| missing(next.k, "t_k"))?
                }
                _ => next_t(t_k, self.config.a),
            };
            let energy = row.energy.ok_or_else(|| missing(row.k, "energy"))?;
            let gap_ref = row.gap_ref.ok_or_else(|| missing(row.k, "gap_ref"))?;
            let base = self.initial.energy;
            reports.push(EnergyReport {
                k: row.k + 1,
                t_k,
                t_next,
                energy,
                i1: t_k * t_k * gap_ref,
                i2: f64::NAN,
                i3: f64::NAN,
                i4: f64::NAN,
                gap_ref,
                bound_gap: base / (t_k * t_k),
                dual_dist_sq: d.dual_dist_sq,
                dual_bound: 2.0 * base / (self.config.mu_g * t_k * t_k),
                v_dist_sq: d.v_dist_sq,
                v_bound: 2.0 * self.config.beta * base / (t_next * t_next),
                dx: row.dx,
                dy: row.dy.ok_or_else(|| missing(row.k, "dy"))?,
            });
        }
        Ok(reports)
    }

    pub fn certify(&self, rows: &[TraceRow]) -> Result<Certificate> {
        Ok(certify(&self.reports(rows)?, &self.config))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(k: usize) -> TraceRow {
        TraceRow {
            algorithm: "pda".into(),
            k,
            t_k: None,
            objective: 1.0 / 3.0,
            gap_ref: Some(-2.5e-300),
            dx: 0.1,
            dy: Some(f64::MIN_POSITIVE),
            energy: None,
            elapsed_s: 0.25,
        }
    }

    #[test]
    fn header_only_and_one_row() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "algorithm,k,t_k,objective,gap_ref,dx,dy,energy,elapsed_s\n"
        );
        let mut buf = Vec::new();
        write_csv(&[row(1)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.ends_with('\n') && !text.contains('\r'));
        assert!(text.contains("3.3333333333333331e-1"));
    }

    #[test]
    fn round_trip_is_exact() {
        let rows = vec![row(1), row(2)];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        assert_eq!(parse_csv(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn mixed_algorithms_rejected() {
        let mut other = row(2);
        other.algorithm = "apda".into();
        assert!(write_csv(&[row(1), other], Vec::new()).is_err());
    }

    #[test]
    fn bad_header_and_bad_cell() {
        assert!(parse_csv("a,b\n".as_bytes()).is_err());
        let text = "algorithm,k,t_k,objective,gap_ref,dx,dy,energy,elapsed_s\npda,x,,1,,1,,,0\n";
        match parse_csv(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn plotdata_aligns_series() {
        let a = vec![row(1), row(2)];
        let b = vec![row(2)];
        let mut buf = Vec::new();
        write_plotdata(
            &[
                PlotSeries {
                    name: "a",
                    rows: &a,
                },
                PlotSeries {
                    name: "b",
                    rows: &b,
                },
            ],
            0.0,
            &mut buf,
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "k\ta_gap\ta_elapsed_s\tb_gap\tb_elapsed_s");
        assert!(lines[1].ends_with("\t\t"));
        assert_eq!(lines[2].split('\t').count(), 5);
    }
}
