use serde::{Deserialize, Serialize};

use super::functionals::free_energy_tables;
use super::grid::{DensityField, ModelTables, PhaseGrid};
use crate::error::{Error, Result};
use crate::model::{Kernel, Potential};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixedPointOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// `θ` in `ρ ← θ T(ρ) + (1 − θ) ρ`.
    pub damping: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 10_000,
            damping: 0.5,
        }
    }
}

/// Self-consistent Gibbs state.
#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    /// `x`-marginal of `f_inf`.
    pub rho_inf: Vec<f64>,
    pub f_inf: DensityField,
    /// `f_inf = exp(−½v² − U − W⊛ρ)/Z`.
    pub z: f64,
    /// `‖ρ − T(ρ)‖_∞` at the last iterate.
    pub residual: f64,
    pub iterations: usize,
    /// Sup-norm residual after each application of `T`.
    pub history: Vec<f64>,
    pub free_energy: f64,
}

/// Metadata written next to an equilibrium CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumHeader {
    #[serde(rename = "Z")]
    pub z: f64,
    pub residual: f64,
    pub iterations: usize,
}

impl Equilibrium {
    pub fn header(&self) -> EquilibriumHeader {
        EquilibriumHeader {
            z: self.z,
            residual: self.residual,
            iterations: self.iterations,
        }
    }
}

/// `exp(−U − W⊛ρ)` normalized on the `x` grid, plus its normalizer.
fn gibbs_map(tables: &ModelTables, rho: &[f64], hx: f64) -> (Vec<f64>, f64) {
    let conv = tables.convolve(rho);
    let expo: Vec<f64> = tables.u.iter().zip(&conv).map(|(u, c)| -u - c).collect();
    let shift = expo.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = expo.iter().map(|e| (e - shift).exp()).collect();
    let zx = out.iter().sum::<f64>() * hx;
    for r in &mut out {
        *r /= zx;
    }
    // normalizer of exp(−U − W⊛ρ) itself
    (out, zx * shift.exp())
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Damped Picard iteration for `ρ = T(ρ) ∝ exp(−U − W⊛ρ)` starting from
/// `ρ ∝ exp(−U)`.
pub fn fixed_point(
    kernel: &dyn Kernel,
    potential: &dyn Potential,
    grid: &PhaseGrid,
    opts: &FixedPointOptions,
) -> Result<Equilibrium> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "damping must lie in (0, 1], got {}",
            opts.damping
        )));
    }
    let tables = ModelTables::new(kernel, potential, grid)?;
    let hx = grid.hx();
    let zero = vec![0.0; grid.nx()];
    let (mut rho, _) = gibbs_map(&tables, &zero, hx);
    let mut history = Vec::new();
    let theta = opts.damping;
    for k in 1..=opts.max_iter {
        let (t_rho, zx) = gibbs_map(&tables, &rho, hx);
        let residual = sup_diff(&rho, &t_rho);
        history.push(residual);
        if !residual.is_finite() {
            return Err(Error::NonConvergence {
                iterations: k,
                residual,
            });
        }
        if residual <= opts.tol {
            return Ok(assemble(&tables, grid, t_rho, zx, residual, k, history));
        }
        for (r, t) in rho.iter_mut().zip(&t_rho) {
            *r = theta * t + (1.0 - theta) * *r;
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        residual: history.last().copied().unwrap_or(f64::NAN),
    })
}

fn assemble(
    tables: &ModelTables,
    grid: &PhaseGrid,
    t_rho: Vec<f64>,
    zx: f64,
    residual: f64,
    iterations: usize,
    history: Vec<f64>,
) -> Equilibrium {
    // f_inf is the Gibbs form built from the last iterate, so its marginal
    // is T(ρ) exactly
    let gauss: Vec<f64> = grid.v().iter().map(|v| (-0.5 * v * v).exp()).collect();
    let zv: f64 = gauss.iter().zip(grid.wv()).map(|(g, w)| g * w).sum();
    let g: Vec<f64> = gauss.iter().map(|x| x / zv).collect();
    let f_inf = DensityField::from_product(grid.clone(), &t_rho, &g)
        .expect("grid-shaped factors");
    let free_energy = free_energy_tables(&f_inf, tables);
    Equilibrium {
        rho_inf: f_inf.x_marginal(),
        f_inf,
        z: zx * zv,
        residual,
        iterations,
        history,
        free_energy,
    }
}
