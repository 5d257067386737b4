use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::collision::CollisionStep;
use super::diagnostics::{DiagnosticsRow, DiagnosticsSeries};
use super::interp::{self, Interpolation};
use crate::equilibrium::functionals::{
    fisher_a, fisher_z_from_variation, free_energy_tables, l1_distance, variation_tables,
};
use crate::equilibrium::{DensityField, Equilibrium, ModelTables, PhaseGrid, PhaseGridSpec};
use crate::error::{Error, Result};
use crate::model::{DirectionPair, Kernel, Potential};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Transport {
    #[default]
    SemiLagrangian,
    Upwind,
}

/// Initial density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    /// The precomputed `f∞`.
    Equilibrium,
    /// Product Gaussian, wrapped on a torus.
    Gaussian {
        x0: f64,
        sigma_x: f64,
        v0: f64,
        sigma_v: f64,
    },
    /// `ρ∞(x) (1 + a cos(k x̃)) N(v − v0, 1)` with `x̃` rescaled to `[0, 2π)`.
    Perturbed {
        amplitude: f64,
        mode: u32,
        #[serde(default)]
        v0: f64,
    },
}

fn default_stride() -> usize {
    10
}

fn default_dir() -> DirectionPair {
    DirectionPair::new(1.0, 0.3)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub grid: PhaseGridSpec,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub transport: Transport,
    #[serde(default)]
    pub interpolation: Interpolation,
    /// Diagnostics every `stride` steps, plus the final step.
    #[serde(default = "default_stride")]
    pub stride: usize,
    /// Direction used for `DE_z`.
    #[serde(default = "default_dir")]
    pub dir: DirectionPair,
    pub initial: InitialCondition,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
}

impl SolverConfig {
    pub fn new(grid: PhaseGridSpec, dt: f64, t_end: f64, initial: InitialCondition) -> Self {
        Self {
            grid,
            dt,
            t_end,
            transport: Transport::default(),
            interpolation: Interpolation::default(),
            stride: default_stride(),
            dir: default_dir(),
            initial,
            snapshot_times: Vec::new(),
        }
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive and finite, got {}", self.dt));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be positive and finite, got {}", self.t_end));
        }
        if self.steps() == 0 {
            return bad("t_end is shorter than one step".into());
        }
        if self.stride == 0 {
            return bad("stride must be at least 1".into());
        }
        if !(self.dir.z1.is_finite() && self.dir.z2.is_finite()) {
            return bad("direction must be finite".into());
        }
        if let Some(t) = self.snapshot_times.iter().find(|t| !(**t >= 0.0 && **t <= self.t_end)) {
            return bad(format!("snapshot time {t} outside [0, {}]", self.t_end));
        }
        match self.initial {
            InitialCondition::Gaussian { sigma_x, sigma_v, x0, v0 } => {
                if !(sigma_x > 0.0 && sigma_v > 0.0 && x0.is_finite() && v0.is_finite()) {
                    return bad("gaussian initial condition needs positive widths".into());
                }
            }
            InitialCondition::Perturbed { amplitude, v0, .. } => {
                if !(amplitude.abs() < 1.0 && v0.is_finite()) {
                    return bad(format!("perturbation amplitude must lie in (−1, 1), got {amplitude}"));
                }
            }
            InitialCondition::Equilibrium => {}
        }
        Ok(())
    }
}

/// Diagnostics, final state and requested snapshots of a run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub series: DiagnosticsSeries,
    pub final_state: DensityField,
    pub snapshots: Vec<(f64, DensityField)>,
}

/// Strang-split integrator bound to one model and grid.
pub struct KineticSolver {
    config: SolverConfig,
    grid: PhaseGrid,
    tables: ModelTables,
    collision: CollisionStep,
}

impl KineticSolver {
    pub fn new(config: &SolverConfig, grid: PhaseGrid, kernel: &dyn Kernel, potential: &dyn Potential) -> Result<Self> {
        config.validate()?;
        if grid.spec() != config.grid {
            return Err(Error::Config(format!(
                "solver grid {:?} does not match configured grid {:?}",
                grid.spec(),
                config.grid
            )));
        }
        let tables = ModelTables::new(kernel, potential, &grid)?;
        if config.transport == Transport::Upwind {
            let tau = 0.5 * config.dt;
            let cx = grid.vmax() * tau / grid.hx();
            if cx > 1.0 {
                return Err(Error::Config(format!(
                    "upwind transport needs vmax·dt/2/hx ≤ 1, got {cx:.3}"
                )));
            }
        }
        let collision = CollisionStep::new(&grid, config.dt)?;
        Ok(Self {
            config: config.clone(),
            grid,
            tables,
            collision,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn tables(&self) -> &ModelTables {
        &self.tables
    }

    pub fn initial_state(&self, eq: &Equilibrium) -> Result<DensityField> {
        self.check_equilibrium(eq)?;
        let g = &self.grid;
        let mut f = match self.config.initial {
            InitialCondition::Equilibrium => eq.f_inf.clone(),
            InitialCondition::Gaussian { x0, sigma_x, v0, sigma_v } => {
                let dom = *g.domain();
                DensityField::from_fn(g.clone(), |x, v| {
                    let mut dx = x - x0;
                    if dom.is_torus() {
                        let l = dom.length();
                        dx -= l * (dx / l).round();
                    }
                    (-0.5 * (dx / sigma_x).powi(2) - 0.5 * ((v - v0) / sigma_v).powi(2)).exp()
                })
            }
            InitialCondition::Perturbed { amplitude, mode, v0 } => {
                let (lo, len) = (g.domain().lower(), g.domain().length());
                let rho: Vec<f64> = g
                    .x()
                    .iter()
                    .zip(&eq.rho_inf)
                    .map(|(x, r)| {
                        let xt = 2.0 * std::f64::consts::PI * (x - lo) / len;
                        r * (1.0 + amplitude * (mode as f64 * xt).cos())
                    })
                    .collect();
                let gv: Vec<f64> = g.v().iter().map(|v| (-0.5 * (v - v0).powi(2)).exp()).collect();
                DensityField::from_product(g.clone(), &rho, &gv)?
            }
        };
        f.normalize()?;
        Ok(f)
    }

    fn check_equilibrium(&self, eq: &Equilibrium) -> Result<()> {
        if eq.f_inf.grid() != &self.grid {
            return Err(Error::InvalidInput("equilibrium was computed on a different grid".into()));
        }
        Ok(())
    }

    /// Free transport `∂_t f + v ∂_x f = 0` over `tau`, exact per velocity row
    /// up to interpolation.
    pub fn transport_x(&self, f: &mut DensityField, tau: f64) {
        let (nx, nv) = (self.grid.nx(), self.grid.nv());
        let hx = self.grid.hx();
        let v = self.grid.v();
        let order = self.config.interpolation;
        let upwind = self.config.transport == Transport::Upwind;
        let src = f.values();
        let rows: Vec<Vec<f64>> = (0..nv)
            .into_par_iter()
            .map(|j| {
                let row: Vec<f64> = (0..nx).map(|i| src[i * nv + j]).collect();
                let mut out = vec![0.0; nx];
                let shift = v[j] * tau / hx;
                if upwind {
                    interp::upwind_periodic(&row, shift, &mut out);
                } else {
                    interp::shift_periodic(&row, shift, order, &mut out);
                }
                out
            })
            .collect();
        let dst = f.values_mut();
        for (j, row) in rows.iter().enumerate() {
            for (i, x) in row.iter().enumerate() {
                dst[i * nv + j] = *x;
            }
        }
    }

    /// `∂_t f = ∂_x Φ ∂_v f` over `tau` with the force `∂_x Φ` held fixed.
    pub fn transport_v(&self, f: &mut DensityField, force: &[f64], tau: f64) -> Result<()> {
        let nv = self.grid.nv();
        let hv = self.grid.hv();
        let order = self.config.interpolation;
        let upwind = self.config.transport == Transport::Upwind;
        if upwind {
            if let Some(c) = force.iter().map(|a| a.abs() * tau / hv).find(|c| *c > 1.0) {
                return Err(Error::Instability {
                    substep: "v-force",
                    t: f64::NAN,
                    detail: format!("upwind CFL number {c:.3} exceeds 1"),
                });
            }
        }
        f.values_mut()
            .par_chunks_mut(nv)
            .zip(force.par_iter())
            .for_each(|(col, &a)| {
                let src = col.to_vec();
                let shift = -a * tau / hv;
                if upwind {
                    interp::upwind_zero_extended(&src, shift, col);
                } else {
                    interp::shift_zero_extended(&src, shift, order, col);
                }
            });
        Ok(())
    }

    pub fn collide(&self, f: &mut DensityField) {
        let nv = self.grid.nv();
        let wv = self.grid.wv();
        f.values_mut()
            .par_chunks_mut(nv)
            .for_each(|col| self.collision.apply(col, wv));
    }

    /// One Strang step from time `t`; returns the mass before renormalizing.
    pub fn step(&self, f: &mut DensityField, t: f64) -> Result<f64> {
        let tau = 0.5 * self.config.dt;
        self.transport_x(f, tau);
        guard(f, "x-transport", t)?;
        let force = self.tables.force(&f.x_marginal());
        self.transport_v(f, &force, tau).map_err(|e| with_time(e, t))?;
        guard(f, "v-force", t)?;
        self.collide(f);
        guard(f, "collision", t)?;
        self.transport_v(f, &force, tau).map_err(|e| with_time(e, t))?;
        guard(f, "v-force", t)?;
        self.transport_x(f, tau);
        let mass = guard(f, "x-transport", t)?;
        f.normalize()?;
        Ok(mass)
    }

    pub fn diagnostics(&self, f: &DensityField, eq: &Equilibrium, t: f64, mass: f64) -> Result<DiagnosticsRow> {
        let xi = variation_tables(f, &self.tables);
        let de_a = fisher_a(f);
        let de_z = fisher_z_from_variation(f, &xi, &self.config.dir);
        Ok(DiagnosticsRow {
            t,
            mass,
            energy: free_energy_tables(f, &self.tables),
            de_a,
            de_z,
            de_az: de_a + de_z,
            l1: l1_distance(f, &eq.f_inf)?,
            min_f: f.min_value(),
        })
    }

    /// Integrates the configured initial condition to `t_end`.
    pub fn run(&self, eq: &Equilibrium) -> Result<RunOutput> {
        let f0 = self.initial_state(eq)?;
        self.run_from(f0, eq)
    }

    pub fn run_from(&self, mut f: DensityField, eq: &Equilibrium) -> Result<RunOutput> {
        self.check_equilibrium(eq)?;
        if f.grid() != &self.grid {
            return Err(Error::InvalidInput("initial state lives on a different grid".into()));
        }
        let dt = self.config.dt;
        let n = self.config.steps();
        let xi_inf = variation_tables(&eq.f_inf, &self.tables);
        let de_az_inf = fisher_a(&eq.f_inf) + fisher_z_from_variation(&eq.f_inf, &xi_inf, &self.config.dir);
        let mut series = DiagnosticsSeries::new(eq.free_energy, de_az_inf);
        let snap_steps: Vec<usize> = self
            .config
            .snapshot_times
            .iter()
            .map(|t| (t / dt).round() as usize)
            .collect();
        let mut snapshots = Vec::new();
        let mass0 = f.mass();
        series.push(self.diagnostics(&f, eq, 0.0, mass0)?);
        if snap_steps.contains(&0) {
            snapshots.push((0.0, f.clone()));
        }
        for k in 1..=n {
            let t_prev = (k - 1) as f64 * dt;
            let mass = self.step(&mut f, t_prev)?;
            let t = k as f64 * dt;
            if k % self.config.stride == 0 || k == n {
                series.push(self.diagnostics(&f, eq, t, mass)?);
            }
            if snap_steps.contains(&k) {
                snapshots.push((t, f.clone()));
            }
        }
        Ok(RunOutput {
            series,
            final_state: f,
            snapshots,
        })
    }
}

fn with_time(e: Error, t: f64) -> Error {
    match e {
        Error::Instability { substep, detail, .. } => Error::Instability { substep, t, detail },
        other => other,
    }
}

/// Rejects NaN and non-positive mass; returns the mass.
fn guard(f: &DensityField, substep: &'static str, t: f64) -> Result<f64> {
    if f.values().iter().any(|x| !x.is_finite()) {
        return Err(Error::Instability {
            substep,
            t,
            detail: "non-finite density".into(),
        });
    }
    let mass = f.mass();
    if !(mass > 0.0) {
        return Err(Error::Instability {
            substep,
            t,
            detail: format!("mass {mass:e}"),
        });
    }
    Ok(mass)
}

/// Builds a solver on the grid of `eq` and runs it.
pub fn run(config: &SolverConfig, kernel: &dyn Kernel, potential: &dyn Potential, eq: &Equilibrium) -> Result<RunOutput> {
    let solver = KineticSolver::new(config, eq.f_inf.grid().clone(), kernel, potential)?;
    solver.run(eq)
}
