//! Diagnostics CSV: one row per [`FunctionalReport`], 17 significant digits.

use std::path::Path;

use crate::error::{Error, Result};
use crate::functionals::FunctionalReport;

pub const HEADER: [&str; 10] = [
    "t", "M", "E", "Fpsi", "Znorm", "Xnorm", "Hs0", "Linf_u", "Linf_ux", "Linf_uy",
];

fn csv_err(e: csv::Error) -> Error {
    Error::Diagnostics(e.to_string())
}

/// Rows must be nonempty and strictly increasing in `t`.
pub fn check_rows(reports: &[FunctionalReport]) -> Result<()> {
    if reports.is_empty() {
        return Err(crate::error::invalid("reports", "no rows to write"));
    }
    for (i, w) in reports.windows(2).enumerate() {
        if !(w[1].t > w[0].t) {
            return Err(crate::error::invalid(
                "reports",
                format!(
                    "t not strictly increasing at row {}: {} after {}",
                    i + 1,
                    w[1].t,
                    w[0].t
                ),
            ));
        }
    }
    Ok(())
}

pub fn diagnostics_to_string(reports: &[FunctionalReport]) -> Result<String> {
    check_rows(reports)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER).map_err(csv_err)?;
    for r in reports {
        w.write_record(r.values().iter().map(|x| format!("{x:.16e}")))
            .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("ascii"))
}

pub fn write_diagnostics(reports: &[FunctionalReport], path: &Path) -> Result<()> {
    std::fs::write(path, diagnostics_to_string(reports)?)?;
    Ok(())
}

pub fn read_diagnostics(path: &Path) -> Result<Vec<FunctionalReport>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = r.headers().map_err(csv_err)?.clone();
    if header.iter().ne(HEADER) {
        return Err(Error::Diagnostics(format!("header mismatch: {header:?}")));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let mut vals = [0.0; 10];
        for (v, field) in vals.iter_mut().zip(rec.iter()) {
            *v = field
                .parse()
                .map_err(|e| Error::Diagnostics(format!("value `{field}`: {e}")))?;
        }
        out.push(FunctionalReport::from_values(vals));
    }
    Ok(out)
}
