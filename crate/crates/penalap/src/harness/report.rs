//! CSV and flat-text report files.

use std::io::{Read, Write};

use crate::convection::ProfilePoint;
use crate::error::{Error, Result};

pub const ERROR_HEADER: [&str; 8] = ["problem", "n", "h", "eta", "err_linf", "err_l1", "err_l2", "runtime_s"];

/// One solver run compared against its closed-form oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub problem: String,
    /// Points per direction (`nx` in 2D).
    pub n: usize,
    pub h: f64,
    pub eta: f64,
    pub err_linf: f64,
    pub err_l1: f64,
    pub err_l2: f64,
    pub runtime_s: f64,
    /// Not part of the CSV row; filled in by sweeps.
    pub fitted_order: Option<f64>,
}

impl ErrorReport {
    /// Row for a failed sweep cell: all errors NaN.
    pub fn failed(problem: &str, n: usize, h: f64, eta: f64) -> Self {
        Self {
            problem: problem.to_string(),
            n,
            h,
            eta,
            err_linf: f64::NAN,
            err_l1: f64::NAN,
            err_l2: f64::NAN,
            runtime_s: f64::NAN,
            fitted_order: None,
        }
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

pub fn write_error_csv<W: Write>(out: W, rows: &[ErrorReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ERROR_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.problem.clone(),
            r.n.to_string(),
            fmt_f64(r.h),
            fmt_f64(r.eta),
            fmt_f64(r.err_linf),
            fmt_f64(r.err_l1),
            fmt_f64(r.err_l2),
            fmt_f64(r.runtime_s),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_error_csv<R: Read>(input: R) -> Result<Vec<ErrorReport>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers().map_err(csv_err)?.clone();
    if header.iter().ne(ERROR_HEADER) {
        return Err(Error::Io(format!("unexpected header {header:?}")));
    }
    let f = |s: &str| s.parse::<f64>().map_err(|_| Error::Io(format!("bad number `{s}`")));
    rd.records()
        .map(|rec| {
            let rec = rec.map_err(csv_err)?;
            Ok(ErrorReport {
                problem: rec[0].to_string(),
                n: rec[1].parse().map_err(|_| Error::Io(format!("bad n `{}`", &rec[1])))?,
                h: f(&rec[2])?,
                eta: f(&rec[3])?,
                err_linf: f(&rec[4])?,
                err_l1: f(&rec[5])?,
                err_l2: f(&rec[6])?,
                runtime_s: f(&rec[7])?,
                fitted_order: None,
            })
        })
        .collect()
}

/// A sweep cell that raised an error.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub n: usize,
    pub h: f64,
    pub eta: f64,
    pub error: String,
}

pub fn write_failures_csv<W: Write>(out: W, rows: &[Failure]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "h", "eta", "error"]).map_err(csv_err)?;
    for r in rows {
        w.write_record([r.n.to_string(), fmt_f64(r.h), fmt_f64(r.eta), r.error.clone()]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Fitted orders for one `eta` column of a sweep; NaN where fewer than
/// three cells succeeded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderFit {
    pub eta: f64,
    pub points: usize,
    pub order_linf: f64,
    pub order_l1: f64,
    pub order_l2: f64,
}

pub fn write_orders_csv<W: Write>(out: W, rows: &[OrderFit]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["eta", "points", "order_linf", "order_l1", "order_l2"]).map_err(csv_err)?;
    for r in rows {
        w.write_record([fmt_f64(r.eta), r.points.to_string(), fmt_f64(r.order_linf), fmt_f64(r.order_l1), fmt_f64(r.order_l2)])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_profile_csv<W: Write>(out: W, profile: &[ProfilePoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["theta_deg", "phi"]).map_err(csv_err)?;
    for p in profile {
        w.write_record([fmt_f64(p.theta_deg), fmt_f64(p.phi)]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_profile_csv<R: Read>(input: R) -> Result<Vec<ProfilePoint>> {
    let mut rd = csv::Reader::from_reader(input);
    rd.records()
        .map(|rec| {
            let rec = rec.map_err(csv_err)?;
            let f = |s: &str| s.parse::<f64>().map_err(|_| Error::Io(format!("bad number `{s}`")));
            Ok(ProfilePoint { theta_deg: f(&rec[0])?, phi: f(&rec[1])? })
        })
        .collect()
}

/// Generic numeric table with a header row.
pub fn write_table_csv<W: Write>(out: W, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.into_iter().map(fmt_f64)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `key = value` lines in the given order.
pub fn write_summary<W: Write>(mut out: W, entries: &[(&str, String)]) -> Result<()> {
    for (k, v) in entries {
        writeln!(out, "{k} = {v}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![-1e300..1e300f64, -1.0..1.0f64, 1e-300..1e-200f64]
    }

    #[test]
    fn header_is_fixed() {
        let mut buf = Vec::new();
        write_error_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "problem,n,h,eta,err_linf,err_l1,err_l2,runtime_s\n");
    }

    #[test]
    fn nan_rows_round_trip() {
        let r = ErrorReport::failed("heat1d", 64, 0.1, 1e-3);
        let mut buf = Vec::new();
        write_error_csv(&mut buf, std::slice::from_ref(&r)).unwrap();
        let back = read_error_csv(buf.as_slice()).unwrap();
        assert!(back[0].err_l2.is_nan());
        assert_eq!(back[0].n, 64);
    }

    #[test]
    fn failures_quote_commas() {
        let mut buf = Vec::new();
        let f = Failure { n: 8, h: 0.5, eta: 1e-3, error: "bad, very bad".into() };
        write_failures_csv(&mut buf, &[f]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.contains("\"bad, very bad\""));
    }

    #[test]
    fn profile_round_trip() {
        let p = vec![ProfilePoint { theta_deg: 0.0, phi: 0.7 }, ProfilePoint { theta_deg: 90.0, phi: 0.123_456_789_012_345_68 }];
        let mut buf = Vec::new();
        write_profile_csv(&mut buf, &p).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("theta_deg,phi\n"));
        assert_eq!(read_profile_csv(buf.as_slice()).unwrap(), p);
    }

    proptest! {
        #[test]
        fn error_csv_round_trips(n in 1usize..100000, vals in proptest::collection::vec(finite(), 7), name in "[a-z0-9-]{1,20}") {
            let r = ErrorReport {
                problem: name,
                n,
                h: vals[0].abs(),
                eta: vals[1].abs(),
                err_linf: vals[2],
                err_l1: vals[3],
                err_l2: vals[4],
                runtime_s: vals[5],
                fitted_order: None,
            };
            let mut buf = Vec::new();
            write_error_csv(&mut buf, std::slice::from_ref(&r)).unwrap();
            prop_assert_eq!(read_error_csv(buf.as_slice()).unwrap(), vec![r]);
        }
    }
}
