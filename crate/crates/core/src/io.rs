//! CSV and JSON writers for reports, series and fields.
//!
//! CSV files use `,` separators, `.` decimals and LF line endings; floats are
//! written in shortest round-trip form.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::equilibrium::{DensityField, Equilibrium};
use crate::error::Result;
use crate::kinetic::{DiagnosticsRow, DiagnosticsSeries};

/// Column order of diagnostics CSV files.
pub const DIAGNOSTICS_HEADER: [&str; 8] = ["t", "mass", "E", "DE_a", "DE_z", "DE_az", "L1", "min_f"];

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn write_diagnostics_csv(path: &Path, series: &DiagnosticsSeries) -> Result<()> {
    let mut w = writer(path)?;
    for row in &series.rows {
        w.serialize(row)?;
    }
    if series.rows.is_empty() {
        w.write_record(DIAGNOSTICS_HEADER)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_diagnostics_csv(path: &Path) -> Result<Vec<DiagnosticsRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// `x,rho_inf` rows plus a `<stem>.json` sidecar with `{Z, residual, iterations}`.
pub fn write_equilibrium(dir: &Path, stem: &str, eq: &Equilibrium) -> Result<()> {
    let mut w = writer(&dir.join(format!("{stem}.csv")))?;
    w.write_record(["x", "rho_inf"])?;
    for (x, r) in eq.f_inf.grid().x().iter().zip(&eq.rho_inf) {
        w.write_record([x.to_string(), r.to_string()])?;
    }
    w.flush()?;
    write_json(&dir.join(format!("{stem}.json")), &eq.header())
}

/// `x,v,f` rows in `x`-major order.
pub fn write_density_csv(path: &Path, f: &DensityField) -> Result<()> {
    let g = f.grid();
    let mut w = writer(path)?;
    w.write_record(["x", "v", "f"])?;
    for (i, x) in g.x().iter().enumerate() {
        for (j, v) in g.v().iter().enumerate() {
            w.write_record([x.to_string(), v.to_string(), f.at(i, j).to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Two-column `x,<name>` table.
pub fn write_profile_csv(path: &Path, name: &str, x: &[f64], values: &[f64]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["x", name])?;
    for (a, b) in x.iter().zip(values) {
        w.write_record([a.to_string(), b.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetic::DiagnosticsSeries;

    #[test]
    fn diagnostics_round_trip_with_fixed_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let mut s = DiagnosticsSeries::new(0.0, 0.0);
        s.push(DiagnosticsRow {
            t: 0.1,
            mass: 1.0,
            energy: -2.5,
            de_a: 1e-17,
            de_z: 0.3,
            de_az: 0.3,
            l1: 0.01,
            min_f: 0.0,
        });
        write_diagnostics_csv(&path, &s).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("t,mass,E,DE_a,DE_z,DE_az,L1,min_f\n"));
        assert!(!text.contains('\r'));
        assert_eq!(read_diagnostics_csv(&path).unwrap(), s.rows);
    }
}
