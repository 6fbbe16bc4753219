//! CSV output and number formatting for sweeps.

use std::io::Write;

use crate::error::{Error, Result};
use crate::flow::FlowPoint;
use crate::spectrum::SpectrumPoint;

pub const SPECTRUM_HEADER: [&str; 8] = ["alpha", "b", "q_c", "regime", "n", "k", "res_G1", "res_dG1"];
pub const FLOW_HEADER: [&str; 9] = ["alpha", "B", "q_c", "regime", "n", "k", "res_G1", "res_dG1", "base_b"];

/// Nine significant digits, in the style of C's `%.9g`.
pub fn sig9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(sig9).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn spectrum_fields(p: &SpectrumPoint, b: f64) -> Vec<String> {
    vec![sig9(p.alpha), sig9(b), opt(p.q_c), p.regime.to_string(), p.n.to_string(), p.k.to_string(), sig9(p.res_g1), opt(p.res_dg1)]
}

pub fn write_spectrum_csv<W: Write>(out: W, points: &[SpectrumPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SPECTRUM_HEADER).map_err(csv_err)?;
    for p in points {
        w.write_record(spectrum_fields(p, p.b)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_flow_csv<W: Write>(out: W, points: &[FlowPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FLOW_HEADER).map_err(csv_err)?;
    for p in points {
        let mut fields = spectrum_fields(&p.base, p.big_b);
        fields.push(sig9(p.base.b));
        w.write_record(fields).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Generic table writer used for the smaller reports.
pub fn write_table<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
