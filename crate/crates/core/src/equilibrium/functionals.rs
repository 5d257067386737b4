//! Free energy, its first variation, the two Fisher-type functionals, the
//! energy-gap identity and the CKP lower bound, all by grid quadrature.

use serde::{Deserialize, Serialize};

use super::fixed_point::Equilibrium;
use super::grid::{DensityField, ModelTables};
use crate::error::{Error, Result};
use crate::model::{DirectionPair, Kernel, Potential};

/// Positivity floor inside logarithms.
pub const F_FLOOR: f64 = 1e-300;

#[inline]
fn ln_floor(f: f64) -> f64 {
    f.max(F_FLOOR).ln()
}

/// `B(s) = s / (e^s − 1)`, with `B(0) = 1`.
#[inline]
pub fn bernoulli(s: f64) -> f64 {
    if s.abs() < 1e-10 {
        1.0 - 0.5 * s
    } else {
        s / s.exp_m1()
    }
}

fn tables(f: &DensityField, kernel: &dyn Kernel, potential: &dyn Potential) -> Result<ModelTables> {
    ModelTables::new(kernel, potential, f.grid())
}

/// `E(f) = ∫ f log f + ∫ ½v² f + ½∬ W ρ ρ' + ∫ U ρ`, with `0 log 0 = 0`.
pub fn free_energy(f: &DensityField, kernel: &dyn Kernel, potential: &dyn Potential) -> Result<f64> {
    f.check_nonnegative()?;
    Ok(free_energy_tables(f, &tables(f, kernel, potential)?))
}

/// The four parts of `E(f)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyParts {
    pub entropy: f64,
    pub kinetic: f64,
    pub interaction: f64,
    pub confinement: f64,
}

impl EnergyParts {
    pub fn total(&self) -> f64 {
        self.entropy + self.kinetic + self.interaction + self.confinement
    }
}

pub fn energy_parts_tables(f: &DensityField, t: &ModelTables) -> EnergyParts {
    let g = f.grid();
    let nv = g.nv();
    let mut entropy = 0.0;
    let mut kinetic = 0.0;
    for row in f.values().chunks(nv) {
        for j in 0..nv {
            let fv = row[j];
            let w = g.wv()[j];
            if fv > 0.0 {
                entropy += w * fv * fv.ln();
            }
            kinetic += w * 0.5 * g.v()[j] * g.v()[j] * fv;
        }
    }
    let rho = f.x_marginal();
    let confinement = g.hx() * rho.iter().zip(&t.u).map(|(r, u)| r * u).sum::<f64>();
    EnergyParts {
        entropy: entropy * g.hx(),
        kinetic: kinetic * g.hx(),
        interaction: t.half_quadratic(&rho, &rho),
        confinement,
    }
}

pub fn free_energy_tables(f: &DensityField, t: &ModelTables) -> f64 {
    energy_parts_tables(f, t).total()
}

/// `ξ = log f + 1 + ½v² + W⊛ρ + U`, `x`-major.
pub fn variation(f: &DensityField, kernel: &dyn Kernel, potential: &dyn Potential) -> Result<Vec<f64>> {
    Ok(variation_tables(f, &tables(f, kernel, potential)?))
}

pub fn variation_tables(f: &DensityField, t: &ModelTables) -> Vec<f64> {
    let g = f.grid();
    let nv = g.nv();
    let conv = t.convolve(&f.x_marginal());
    let mut xi = Vec::with_capacity(g.len());
    for (i, row) in f.values().chunks(nv).enumerate() {
        let base = 1.0 + conv[i] + t.u[i];
        for j in 0..nv {
            xi.push(ln_floor(row[j]) + 0.5 * g.v()[j] * g.v()[j] + base);
        }
    }
    xi
}

/// `DE_a = ∫ |∂_v ξ|² f`.
///
/// Uses the half-node stencil matched to the collision flux:
/// per velocity cell, `B(δ) f_j (e^{Δξ} − 1) Δξ / hv` with
/// `δ = hv · v_{j+½}` and `Δξ = ξ_{j+1} − ξ_j`. It is nonnegative cell by
/// cell and vanishes exactly on discrete Maxwellians.
pub fn fisher_a(f: &DensityField) -> f64 {
    let g = f.grid();
    let nv = g.nv();
    let hv = g.hv();
    let mut total = 0.0;
    for row in f.values().chunks(nv) {
        for j in 0..nv - 1 {
            let vh = 0.5 * (g.v()[j] + g.v()[j + 1]);
            let delta = hv * vh;
            let (a, b) = (row[j].max(F_FLOOR), row[j + 1].max(F_FLOOR));
            let lr = (b / a).ln() + delta;
            total += bernoulli(delta) * a * lr.exp_m1() * lr / hv;
        }
    }
    total * g.hx()
}

/// `DE_z = ∫ |z1 ∂_x ξ + z2 ∂_v ξ|² f` with centered differences, periodic
/// in `x` and one-sided at `±vmax`.
pub fn fisher_z(f: &DensityField, kernel: &dyn Kernel, potential: &dyn Potential, dir: &DirectionPair) -> Result<f64> {
    Ok(fisher_z_tables(f, &tables(f, kernel, potential)?, dir))
}

pub fn fisher_z_tables(f: &DensityField, t: &ModelTables, dir: &DirectionPair) -> f64 {
    if dir.z1 == 0.0 && dir.z2 == 0.0 {
        return 0.0;
    }
    let xi = variation_tables(f, t);
    fisher_z_from_variation(f, &xi, dir)
}

pub(crate) fn fisher_z_from_variation(f: &DensityField, xi: &[f64], dir: &DirectionPair) -> f64 {
    let g = f.grid();
    let (nx, nv) = (g.nx(), g.nv());
    let (hx, hv) = (g.hx(), g.hv());
    let mut total = 0.0;
    for i in 0..nx {
        let ip = (i + 1) % nx;
        let im = (i + nx - 1) % nx;
        for j in 0..nv {
            let dx = (xi[g.idx(ip, j)] - xi[g.idx(im, j)]) / (2.0 * hx);
            let dv = if j == 0 {
                (xi[g.idx(i, 1)] - xi[g.idx(i, 0)]) / hv
            } else if j == nv - 1 {
                (xi[g.idx(i, j)] - xi[g.idx(i, j - 1)]) / hv
            } else {
                (xi[g.idx(i, j + 1)] - xi[g.idx(i, j - 1)]) / (2.0 * hv)
            };
            let s = dir.z1 * dx + dir.z2 * dv;
            total += g.wv()[j] * f.at(i, j) * s * s;
        }
    }
    total * hx
}

/// `∫ |f − g|`.
pub fn l1_distance(f: &DensityField, g: &DensityField) -> Result<f64> {
    if f.grid() != g.grid() {
        return Err(Error::InvalidInput("densities live on different grids".into()));
    }
    let grid = f.grid();
    let nv = grid.nv();
    let mut s = 0.0;
    for (k, (a, b)) in f.values().iter().zip(g.values()).enumerate() {
        s += grid.wv()[k % nv] * (a - b).abs();
    }
    Ok(s * grid.hx())
}

/// `∫ f log(f / g)` with the shared floor.
pub fn kl_divergence(f: &DensityField, g: &DensityField) -> Result<f64> {
    if f.grid() != g.grid() {
        return Err(Error::InvalidInput("densities live on different grids".into()));
    }
    let grid = f.grid();
    let nv = grid.nv();
    let mut s = 0.0;
    for (k, (a, b)) in f.values().iter().zip(g.values()).enumerate() {
        if *a > 0.0 {
            s += grid.wv()[k % nv] * a * (a.ln() - ln_floor(*b));
        }
    }
    Ok(s * grid.hx())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyGap {
    /// `E(f) − E(f∞)`.
    pub direct_gap: f64,
    /// `KL(f ‖ f∞)`.
    pub kl_term: f64,
    /// `½ ∬ W (ρ − ρ∞)(ρ' − ρ∞')`.
    pub quad_term: f64,
    /// `|direct_gap − kl_term − quad_term|`.
    pub defect: f64,
    /// `defect / max(|direct_gap|, 1e-300)`.
    pub relative_defect: f64,
}

/// Both sides of `E(f) − E(f∞) = KL(f‖f∞) + ½∬W(f − f∞)(f − f∞)`.
pub fn energy_gap_identity(
    f: &DensityField,
    eq: &Equilibrium,
    kernel: &dyn Kernel,
    potential: &dyn Potential,
) -> Result<EnergyGap> {
    f.check_nonnegative()?;
    let t = tables(f, kernel, potential)?;
    let direct_gap = free_energy_tables(f, &t) - free_energy_tables(&eq.f_inf, &t);
    let kl_term = kl_divergence(f, &eq.f_inf)?;
    let drho: Vec<f64> = f.x_marginal().iter().zip(&eq.rho_inf).map(|(a, b)| a - b).collect();
    let quad_term = t.half_quadratic(&drho, &drho);
    let defect = (direct_gap - kl_term - quad_term).abs();
    Ok(EnergyGap {
        direct_gap,
        kl_term,
        quad_term,
        defect,
        relative_defect: defect / direct_gap.abs().max(1e-300),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CkpVerdict {
    Holds,
    Violated,
    /// `C_W ≥ 1`: the bound carries no information.
    Inapplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CkpReport {
    pub gap: f64,
    pub l1: f64,
    pub c_w: f64,
    /// `((1 − C_W)/2) ‖f − f∞‖²_{L¹}`.
    pub lower_bound: f64,
    pub verdict: CkpVerdict,
}

/// Slack in the CKP comparison.
pub const CKP_SLACK: f64 = 1e-9;

/// `E(f) − E(f∞) ≥ ((1 − C_W)/2) ‖f − f∞‖²_{L¹}`.
pub fn ckp_check(
    f: &DensityField,
    eq: &Equilibrium,
    kernel: &dyn Kernel,
    potential: &dyn Potential,
    c_w: f64,
) -> Result<CkpReport> {
    f.check_nonnegative()?;
    let t = tables(f, kernel, potential)?;
    let gap = free_energy_tables(f, &t) - free_energy_tables(&eq.f_inf, &t);
    let l1 = l1_distance(f, &eq.f_inf)?;
    let lower_bound = 0.5 * (1.0 - c_w) * l1 * l1;
    let verdict = if c_w >= 1.0 {
        CkpVerdict::Inapplicable
    } else if gap >= lower_bound - CKP_SLACK {
        CkpVerdict::Holds
    } else {
        CkpVerdict::Violated
    };
    Ok(CkpReport {
        gap,
        l1,
        c_w,
        lower_bound,
        verdict,
    })
}

/// `C_W = max |W|` over the `x` nodes of the grid.
pub fn kernel_sup(kernel: &dyn Kernel, grid: &super::grid::PhaseGrid) -> Result<f64> {
    let t = ModelTables::new(kernel, &crate::model::PotentialSpec::Zero, grid)?;
    Ok(t.sup_abs_w())
}

/// Reconstructed `L¹` constant `√(1/(λ(1 − C_W)))` obtained by chaining the
/// energy decay bound with CKP. `None` unless `λ > 0` and `C_W < 1`.
pub fn derived_constant(lambda: f64, c_w: f64) -> Option<f64> {
    (lambda > 0.0 && c_w < 1.0).then(|| (1.0 / (lambda * (1.0 - c_w))).sqrt())
}
