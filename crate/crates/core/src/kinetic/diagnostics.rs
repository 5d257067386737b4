use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One sampled time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    /// Mass before the end-of-step renormalization.
    pub mass: f64,
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "DE_a")]
    pub de_a: f64,
    #[serde(rename = "DE_z")]
    pub de_z: f64,
    #[serde(rename = "DE_az")]
    pub de_az: f64,
    #[serde(rename = "L1")]
    pub l1: f64,
    pub min_f: f64,
}

/// Time series of a run plus the equilibrium reference values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSeries {
    pub rows: Vec<DiagnosticsRow>,
    /// `E(f∞)` with the same quadrature.
    pub energy_inf: f64,
    /// `DE_az(f∞)` with the same stencils.
    pub de_az_inf: f64,
    /// Set when `E` rose by more than [`ENERGY_INCREASE_TOL`] between samples.
    pub energy_increase: bool,
    /// `max |mass − 1|` over the rows.
    pub max_mass_drift: f64,
}

pub const ENERGY_INCREASE_TOL: f64 = 1e-8;

impl DiagnosticsSeries {
    pub fn new(energy_inf: f64, de_az_inf: f64) -> Self {
        Self {
            rows: Vec::new(),
            energy_inf,
            de_az_inf,
            energy_increase: false,
            max_mass_drift: 0.0,
        }
    }

    pub fn push(&mut self, row: DiagnosticsRow) {
        if let Some(prev) = self.rows.last() {
            if row.energy > prev.energy + ENERGY_INCREASE_TOL {
                self.energy_increase = true;
            }
        }
        self.max_mass_drift = self.max_mass_drift.max((row.mass - 1.0).abs());
        self.rows.push(row);
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn field(&self, field: RateField) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| match field {
                RateField::EnergyGap => r.energy - self.energy_inf,
                RateField::DeAz => r.de_az,
                RateField::L1 => r.l1,
            })
            .collect()
    }

    pub fn min_f(&self) -> f64 {
        self.rows.iter().map(|r| r.min_f).fold(f64::INFINITY, f64::min)
    }
}

/// `max_k |(E_{k+1} − E_{k−1})/(t_{k+1} − t_{k−1}) + DE_a,k| / max(DE_a,k, 1e−12)`
/// over interior rows.
pub fn check_energy_identity(series: &DiagnosticsSeries) -> Result<f64> {
    let rows = &series.rows;
    if rows.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "energy identity needs at least 3 rows, got {}",
            rows.len()
        )));
    }
    Ok(rows
        .windows(3)
        .map(|w| {
            let dedt = (w[2].energy - w[0].energy) / (w[2].t - w[0].t);
            (dedt + w[1].de_a).abs() / w[1].de_a.max(1e-12)
        })
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DissipationVerdict {
    Holds,
    Violated,
    Inapplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissipationReport {
    pub lambda: f64,
    pub tol: f64,
    pub verdict: DissipationVerdict,
    /// `DE_az(t) ≤ DE_az(0) e^{−2λt} (1 + tol)` on every row.
    pub dissipation_holds: bool,
    /// `E(t) − E∞ ≤ e^{−2λt} [DE_az(0) − DE_az∞] (1 + tol) / (2λ)` on every row.
    pub energy_holds: bool,
    /// Largest `lhs / rhs` seen for each bound.
    pub worst_dissipation_ratio: f64,
    pub worst_energy_ratio: f64,
    /// First violating time, if any.
    pub first_violation: Option<f64>,
}

pub const DISSIPATION_TOL: f64 = 0.1;
/// Absolute slack on `DE_az`: the level a run started at `f∞` settles to.
pub const DE_FLOOR: f64 = 1e-8;
/// Absolute slack on `E − E∞`, matching the monotonicity tolerance.
pub const GAP_FLOOR: f64 = 1e-8;

pub fn check_dissipation_inequality(series: &DiagnosticsSeries, lambda: f64) -> DissipationReport {
    check_dissipation_inequality_with_tol(series, lambda, DISSIPATION_TOL)
}

pub fn check_dissipation_inequality_with_tol(
    series: &DiagnosticsSeries,
    lambda: f64,
    tol: f64,
) -> DissipationReport {
    let mut report = DissipationReport {
        lambda,
        tol,
        verdict: DissipationVerdict::Inapplicable,
        dissipation_holds: false,
        energy_holds: false,
        worst_dissipation_ratio: 0.0,
        worst_energy_ratio: 0.0,
        first_violation: None,
    };
    let Some(first) = series.rows.first() else {
        return report;
    };
    if !(lambda > 0.0) {
        return report;
    }
    let t0 = first.t;
    let de0 = first.de_az;
    let excess0 = (de0 - series.de_az_inf).max(0.0);
    let (mut diss_ok, mut energy_ok) = (true, true);
    for r in &series.rows {
        let decay = (-2.0 * lambda * (r.t - t0)).exp();
        let d_rhs = de0 * decay * (1.0 + tol);
        let e_lhs = r.energy - series.energy_inf;
        let e_rhs = excess0 * decay * (1.0 + tol) / (2.0 * lambda);
        report.worst_dissipation_ratio = report.worst_dissipation_ratio.max(r.de_az / d_rhs.max(DE_FLOOR));
        report.worst_energy_ratio = report.worst_energy_ratio.max(e_lhs / e_rhs.max(GAP_FLOOR));
        let ok_d = r.de_az <= d_rhs + DE_FLOOR;
        let ok_e = e_lhs <= e_rhs + GAP_FLOOR;
        if (!ok_d || !ok_e) && report.first_violation.is_none() {
            report.first_violation = Some(r.t);
        }
        diss_ok &= ok_d;
        energy_ok &= ok_e;
    }
    report.dissipation_holds = diss_ok;
    report.energy_holds = energy_ok;
    report.verdict = if diss_ok && energy_ok {
        DissipationVerdict::Holds
    } else {
        DissipationVerdict::Violated
    };
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateField {
    #[serde(rename = "E_gap")]
    EnergyGap,
    #[serde(rename = "DE_az")]
    DeAz,
    #[serde(rename = "L1")]
    L1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    /// Positive decay constant `−slope`.
    pub rate: f64,
    pub r_squared: f64,
    pub points: usize,
}

pub const FIT_FLOOR: f64 = 1e-14;

/// Least-squares slope of `log(max(y, 1e−14))` against `t` on `t ∈ [t0, t1]`.
pub fn fit_exponential(ts: &[f64], ys: &[f64], window: (f64, f64)) -> Result<RateFit> {
    if ts.len() != ys.len() {
        return Err(Error::InvalidInput("time and value arrays differ in length".into()));
    }
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .zip(ys)
        .filter(|(t, _)| **t >= window.0 && **t <= window.1)
        .map(|(t, y)| (*t, y.max(FIT_FLOOR).ln()))
        .collect();
    if pts.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "rate fit needs at least 4 points in [{}, {}], got {}",
            window.0,
            window.1,
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sty: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if stt == 0.0 {
        return Err(Error::InvalidInput("rate fit window has a single distinct time".into()));
    }
    let slope = sty / stt;
    let r_squared = if syy == 0.0 { 1.0 } else { sty * sty / (stt * syy) };
    Ok(RateFit {
        rate: -slope,
        r_squared,
        points: pts.len(),
    })
}

pub fn fit_rate(series: &DiagnosticsSeries, field: RateField, window: (f64, f64)) -> Result<RateFit> {
    fit_exponential(&series.times(), &series.field(field), window)
}
