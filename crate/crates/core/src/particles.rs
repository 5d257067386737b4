//! Euler–Maruyama simulation of the N-particle mean-field Langevin system.
//!
//! Each particle owns a ChaCha8 stream (`seed`, stream = particle index), so
//! trajectories do not depend on the thread count.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{DensityField, PhaseGrid};
use crate::error::{Error, Result};
use crate::model::{Kernel, PositionDomain, Potential};

/// Stream id reserved for drawing initial conditions.
const INIT_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone)]
pub struct ParticleState {
    domain: PositionDomain,
    /// `N × d`, row-major, always inside the domain.
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
    pub t: f64,
    pub steps: u64,
    seed: u64,
    rngs: Vec<ChaCha8Rng>,
}

impl ParticleState {
    pub fn new(domain: PositionDomain, positions: Vec<f64>, velocities: Vec<f64>, seed: u64) -> Result<Self> {
        domain.validate()?;
        let d = domain.dim;
        if positions.len() != velocities.len() || positions.len() % d != 0 {
            return Err(Error::InvalidInput(format!(
                "positions ({}) and velocities ({}) must both be N × {d}",
                positions.len(),
                velocities.len()
            )));
        }
        let n = positions.len() / d;
        if n < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 particles, got {n}")));
        }
        if positions.iter().chain(&velocities).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("initial particle state is not finite".into()));
        }
        let positions = positions.into_iter().map(|x| domain.wrap(x)).collect();
        let rngs = (0..n as u64)
            .map(|i| {
                let mut r = ChaCha8Rng::seed_from_u64(seed);
                r.set_stream(i);
                r
            })
            .collect();
        Ok(Self {
            domain,
            positions,
            velocities,
            t: 0.0,
            steps: 0,
            seed,
            rngs,
        })
    }

    /// Draws `n` particles from a grid density: a cell is chosen with
    /// probability `f · weight`, then the point is uniform inside it.
    pub fn sample(f: &DensityField, n: usize, seed: u64) -> Result<Self> {
        let g = f.grid();
        let nv = g.nv();
        let weights: Vec<f64> = (0..g.len()).map(|k| f.values()[k].max(0.0) * g.weight(k % nv)).collect();
        let dist = WeightedIndex::new(&weights)
            .map_err(|e| Error::InvalidInput(format!("cannot sample from density: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(INIT_STREAM);
        let (hx, hv, vmax) = (g.hx(), g.hv(), g.vmax());
        let mut pos = Vec::with_capacity(n);
        let mut vel = Vec::with_capacity(n);
        for _ in 0..n {
            let k = dist.sample(&mut rng);
            let (i, j) = (k / nv, k % nv);
            let ux: f64 = rng.random::<f64>() - 0.5;
            let uv: f64 = rng.random::<f64>() - 0.5;
            pos.push(g.x()[i] + ux * hx);
            vel.push((g.v()[j] + uv * hv).clamp(-vmax, vmax));
        }
        Self::new(*g.domain(), pos, vel, seed)
    }

    pub fn len(&self) -> usize {
        self.positions.len() / self.domain.dim
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.domain.dim
    }

    pub fn domain(&self) -> &PositionDomain {
        &self.domain
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn velocity_variance(&self) -> f64 {
        let n = self.velocities.len() as f64;
        let m = self.velocities.iter().sum::<f64>() / n;
        self.velocities.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)
    }
}

fn drift(state: &ParticleState, kernel: &dyn Kernel, potential: &dyn Potential) -> Vec<f64> {
    let d = state.dim();
    let mut g = kernel.mean_grad_x(&state.positions, d);
    potential.add_grad(&state.positions, d, &mut g);
    g
}

/// One Euler–Maruyama step with standard normal noise from the per-particle
/// streams.
pub fn em_step(state: &mut ParticleState, kernel: &dyn Kernel, potential: &dyn Potential, dt: f64) -> Result<()> {
    check_dt(dt)?;
    let d = state.dim();
    let force = drift(state, kernel, potential);
    let scale = (2.0 * dt).sqrt();
    let domain = state.domain;
    state
        .positions
        .par_chunks_mut(d)
        .zip(state.velocities.par_chunks_mut(d))
        .zip(force.par_chunks(d))
        .zip(state.rngs.par_iter_mut())
        .for_each(|(((x, v), f), rng)| {
            for k in 0..d {
                let xi: f64 = rng.sample(StandardNormal);
                let vk = v[k];
                x[k] = domain.wrap(x[k] + vk * dt);
                v[k] = vk - vk * dt - f[k] * dt + scale * xi;
            }
        });
    finish(state, dt)
}

/// Same update with the noise supplied by the caller (`N × d` values).
pub fn em_step_with_noise(
    state: &mut ParticleState,
    kernel: &dyn Kernel,
    potential: &dyn Potential,
    dt: f64,
    noise: &[f64],
) -> Result<()> {
    check_dt(dt)?;
    if noise.len() != state.velocities.len() {
        return Err(Error::InvalidInput("noise must have one entry per velocity component".into()));
    }
    let force = drift(state, kernel, potential);
    let scale = (2.0 * dt).sqrt();
    for k in 0..state.positions.len() {
        let vk = state.velocities[k];
        state.positions[k] = state.domain.wrap(state.positions[k] + vk * dt);
        state.velocities[k] = vk - vk * dt - force[k] * dt + scale * noise[k];
    }
    finish(state, dt)
}

fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("dt must be positive, got {dt}")))
    }
}

fn finish(state: &mut ParticleState, dt: f64) -> Result<()> {
    state.steps += 1;
    state.t = state.steps as f64 * dt;
    if state.positions.iter().chain(&state.velocities).any(|x| !x.is_finite()) {
        return Err(Error::Instability {
            substep: "euler-maruyama",
            t: state.t,
            detail: "non-finite particle state".into(),
        });
    }
    Ok(())
}

fn default_dt() -> f64 {
    1e-3
}

/// Particle run settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleConfig {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub seed: u64,
    pub t_end: f64,
    /// Snapshot times; the final time is always included.
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
}

impl ParticleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("need at least 2 particles, got {}", self.n)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite() && self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config("particle dt and t_end must be positive".into()));
        }
        if let Some(t) = self.snapshot_times.iter().find(|t| !(**t >= 0.0 && **t <= self.t_end)) {
            return Err(Error::Config(format!("snapshot time {t} outside [0, {}]", self.t_end)));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// Histograms on the bins of a phase grid.
#[derive(Debug, Clone)]
pub struct ParticleSnapshot {
    pub t: f64,
    /// Density of `x` per grid bin, integrating to one with weight `hx`.
    pub x_marginal: Vec<f64>,
    /// `(x, v)` density per grid cell; particles beyond `±vmax` are dropped.
    pub phase: DensityField,
    pub v_mean: f64,
    pub v_variance: f64,
}

impl ParticleSnapshot {
    pub fn from_state(state: &ParticleState, grid: &PhaseGrid) -> Result<Self> {
        if state.dim() != 1 {
            return Err(Error::InvalidInput("histograms need d = 1".into()));
        }
        let (nx, nv) = (grid.nx(), grid.nv());
        let (hx, hv, vmax) = (grid.hx(), grid.hv(), grid.vmax());
        let lo = grid.x()[0];
        let n = state.len() as f64;
        let mut xm = vec![0.0; nx];
        let mut phase = vec![0.0; grid.len()];
        for (x, v) in state.positions.iter().zip(&state.velocities) {
            let i = (((x - lo) / hx).round() as i64).rem_euclid(nx as i64) as usize;
            xm[i] += 1.0;
            if v.abs() <= vmax {
                let j = ((v + vmax) / hv).round() as usize;
                phase[grid.idx(i, j.min(nv - 1))] += 1.0;
            }
        }
        for c in &mut xm {
            *c /= n * hx;
        }
        for (k, c) in phase.iter_mut().enumerate() {
            *c /= n * grid.weight(k % nv);
        }
        let v_mean = state.velocities.iter().sum::<f64>() / n;
        Ok(Self {
            t: state.t,
            x_marginal: xm,
            phase: DensityField::new(grid.clone(), phase)?,
            v_mean,
            v_variance: state.velocity_variance(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct ParticleRun {
    pub snapshots: Vec<ParticleSnapshot>,
    pub final_state: ParticleState,
}

/// Samples `config.n` particles from `f0` and integrates to `t_end`.
pub fn simulate(
    config: &ParticleConfig,
    f0: &DensityField,
    kernel: &dyn Kernel,
    potential: &dyn Potential,
) -> Result<ParticleRun> {
    config.validate()?;
    let grid = f0.grid();
    let mut state = ParticleState::sample(f0, config.n, config.seed)?;
    let n = config.steps();
    let mut snap_steps: Vec<usize> = config
        .snapshot_times
        .iter()
        .map(|t| (t / config.dt).round() as usize)
        .collect();
    snap_steps.push(n);
    let mut snapshots = Vec::new();
    if snap_steps.contains(&0) {
        snapshots.push(ParticleSnapshot::from_state(&state, grid)?);
    }
    for k in 1..=n {
        em_step(&mut state, kernel, potential, config.dt)?;
        if snap_steps.contains(&k) {
            snapshots.push(ParticleSnapshot::from_state(&state, grid)?);
        }
    }
    Ok(ParticleRun {
        snapshots,
        final_state: state,
    })
}

/// `Σ hx |a_i − b_i|` for two `x`-densities on the same bins.
pub fn marginal_l1(a: &[f64], b: &[f64], hx: f64) -> f64 {
    hx * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{KernelSpec, PotentialSpec};
    use approx::assert_relative_eq;

    fn grid() -> PhaseGrid {
        PhaseGrid::new(PositionDomain::unit_torus(), 32, 33, 6.0).unwrap()
    }

    #[test]
    fn zero_noise_is_deterministic_decay() {
        let dom = PositionDomain::unit_torus();
        let mut s = ParticleState::new(dom, vec![1.0, 2.0], vec![0.5, -1.0], 1).unwrap();
        let dt = 1e-3;
        for _ in 0..1000 {
            em_step_with_noise(&mut s, &KernelSpec::Zero, &PotentialSpec::Zero, dt, &[0.0, 0.0]).unwrap();
        }
        assert_relative_eq!(s.velocities[0], 0.5 * (1.0 - dt).powi(1000), epsilon = 1e-14);
        assert_relative_eq!(s.velocities[0], 0.5 * (-1.0f64).exp(), max_relative = 1e-3);
        assert_relative_eq!(s.t, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn self_interaction_term_vanishes() {
        let k = KernelSpec::difference(1.0, 1.0);
        assert_eq!(k.grad_x(&[0.7], &[0.7])[0], 0.0);
    }

    #[test]
    fn same_seed_same_bits() {
        let f0 = DensityField::from_fn(grid(), |x, v| (x.cos() + 2.0) * (-0.5 * v * v).exp());
        let cfg = ParticleConfig {
            n: 200,
            dt: 1e-2,
            seed: 7,
            t_end: 0.5,
            snapshot_times: vec![],
        };
        let k = KernelSpec::difference(0.3, 1.0);
        let p = PotentialSpec::Cosine { kappa: 1.0 };
        let a = simulate(&cfg, &f0, &k, &p).unwrap();
        let b = simulate(&cfg, &f0, &k, &p).unwrap();
        assert_eq!(a.final_state.positions, b.final_state.positions);
        assert_eq!(a.final_state.velocities, b.final_state.velocities);
        let c = simulate(&ParticleConfig { seed: 8, ..cfg }, &f0, &k, &p).unwrap();
        assert_ne!(a.final_state.velocities, c.final_state.velocities);
    }

    #[test]
    fn histogram_masses() {
        let f0 = DensityField::from_fn(grid(), |_, v| (-0.5 * v * v).exp());
        let s = ParticleState::sample(&f0, 5000, 3).unwrap();
        let snap = ParticleSnapshot::from_state(&s, &grid()).unwrap();
        assert_relative_eq!(snap.x_marginal.iter().sum::<f64>() * grid().hx(), 1.0, epsilon = 1e-12);
        assert!((snap.phase.mass() - 1.0).abs() < 1e-12);
        assert!(s.positions.iter().all(|x| (0.0..2.0 * std::f64::consts::PI).contains(x)));
    }

    #[test]
    fn rejects_bad_input() {
        let dom = PositionDomain::unit_torus();
        assert!(ParticleState::new(dom, vec![0.0], vec![0.0], 0).is_err());
        assert!(ParticleState::new(dom, vec![0.0, 1.0], vec![0.0], 0).is_err());
        let mut s = ParticleState::new(dom, vec![0.0, 1.0], vec![0.0, 0.0], 0).unwrap();
        assert!(em_step(&mut s, &KernelSpec::Zero, &PotentialSpec::Zero, 0.0).is_err());
    }
}
