use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Kernel, PositionDomain, Potential};

/// Smallest accepted velocity cutoff.
pub const MIN_VMAX: f64 = 5.0;
pub const DEFAULT_VMAX: f64 = 6.0;

fn default_vmax() -> f64 {
    DEFAULT_VMAX
}

/// Grid resolution as written in config files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGridSpec {
    pub nx: usize,
    pub nv: usize,
    #[serde(default = "default_vmax")]
    pub vmax: f64,
}

/// Tensor grid on `D × [−vmax, vmax]` for `d = 1`.
///
/// `x` nodes are periodic with spacing `hx = length/nx`; `v` nodes include
/// both endpoints. Quadrature is uniform in `x` and trapezoid in `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    domain: PositionDomain,
    nx: usize,
    nv: usize,
    vmax: f64,
    hx: f64,
    hv: f64,
    x: Vec<f64>,
    v: Vec<f64>,
    wv: Vec<f64>,
}

impl PhaseGrid {
    pub fn new(domain: PositionDomain, nx: usize, nv: usize, vmax: f64) -> Result<Self> {
        domain.validate()?;
        if domain.dim != 1 {
            return Err(Error::InvalidInput(format!(
                "phase-space grids are one-dimensional in x, got d = {}",
                domain.dim
            )));
        }
        if nx < 3 || nv < 3 {
            return Err(Error::InvalidInput(format!(
                "need at least 3 nodes per axis, got nx = {nx}, nv = {nv}"
            )));
        }
        if !(vmax >= MIN_VMAX && vmax.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "vmax must be at least {MIN_VMAX}, got {vmax}"
            )));
        }
        let hx = domain.length() / nx as f64;
        let hv = 2.0 * vmax / (nv - 1) as f64;
        let x = (0..nx).map(|i| domain.lower() + i as f64 * hx).collect();
        let v = (0..nv).map(|j| -vmax + j as f64 * hv).collect();
        let mut wv = vec![hv; nv];
        wv[0] = 0.5 * hv;
        wv[nv - 1] = 0.5 * hv;
        Ok(Self {
            domain,
            nx,
            nv,
            vmax,
            hx,
            hv,
            x,
            v,
            wv,
        })
    }

    pub fn from_spec(domain: PositionDomain, spec: &PhaseGridSpec) -> Result<Self> {
        Self::new(domain, spec.nx, spec.nv, spec.vmax)
    }

    pub fn spec(&self) -> PhaseGridSpec {
        PhaseGridSpec {
            nx: self.nx,
            nv: self.nv,
            vmax: self.vmax,
        }
    }

    pub fn domain(&self) -> &PositionDomain {
        &self.domain
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn nv(&self) -> usize {
        self.nv
    }
    pub fn vmax(&self) -> f64 {
        self.vmax
    }
    pub fn hx(&self) -> f64 {
        self.hx
    }
    pub fn hv(&self) -> f64 {
        self.hv
    }
    pub fn x(&self) -> &[f64] {
        &self.x
    }
    pub fn v(&self) -> &[f64] {
        &self.v
    }
    /// Trapezoid weights in `v`.
    pub fn wv(&self) -> &[f64] {
        &self.wv
    }
    pub fn len(&self) -> usize {
        self.nx * self.nv
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    /// Flat index, `x`-major.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.nv + j
    }
    /// Quadrature weight of node `(i, j)`.
    #[inline]
    pub fn weight(&self, j: usize) -> f64 {
        self.hx * self.wv[j]
    }
}

/// Nonnegative density on a [`PhaseGrid`], stored `x`-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    grid: PhaseGrid,
    values: Vec<f64>,
}

impl DensityField {
    pub fn new(grid: PhaseGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "density has {} values for a grid of {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: PhaseGrid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for &x in grid.x() {
            for &v in grid.v() {
                values.push(f(x, v));
            }
        }
        Self { grid, values }
    }

    /// `ρ(x) · g(v)`.
    pub fn from_product(grid: PhaseGrid, rho: &[f64], g: &[f64]) -> Result<Self> {
        if rho.len() != grid.nx() || g.len() != grid.nv() {
            return Err(Error::InvalidInput("factor lengths do not match the grid".into()));
        }
        let values = rho.iter().flat_map(|r| g.iter().map(move |gv| r * gv)).collect();
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn mass(&self) -> f64 {
        let nv = self.grid.nv();
        self.values
            .chunks(nv)
            .map(|row| row.iter().zip(self.grid.wv()).map(|(f, w)| f * w).sum::<f64>())
            .sum::<f64>()
            * self.grid.hx()
    }

    /// Scale to unit quadrature mass; returns the mass before scaling.
    pub fn normalize(&mut self) -> Result<f64> {
        let m = self.mass();
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::InvalidInput(format!("cannot normalize a density of mass {m}")));
        }
        for f in &mut self.values {
            *f /= m;
        }
        Ok(m)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// First negative (or NaN) entry as an error.
    pub fn check_nonnegative(&self) -> Result<()> {
        let nv = self.grid.nv();
        match self.values.iter().position(|f| !(*f >= 0.0)) {
            None => Ok(()),
            Some(k) => Err(Error::NegativeDensity {
                i: k / nv,
                j: k % nv,
                value: self.values[k],
            }),
        }
    }

    /// `ρ(x_i) = Σ_j w_j f(x_i, v_j)`.
    pub fn x_marginal(&self) -> Vec<f64> {
        self.values
            .chunks(self.grid.nv())
            .map(|row| row.iter().zip(self.grid.wv()).map(|(f, w)| f * w).sum())
            .collect()
    }

    /// `∫ f dx` at each velocity node.
    pub fn v_marginal(&self) -> Vec<f64> {
        let nv = self.grid.nv();
        let mut out = vec![0.0; nv];
        for row in self.values.chunks(nv) {
            for (o, f) in out.iter_mut().zip(row) {
                *o += f * self.grid.hx();
            }
        }
        out
    }

    /// `∫ v f` divided by the mass.
    pub fn mean_velocity(&self) -> f64 {
        let nv = self.grid.nv();
        let mut m1 = 0.0;
        for row in self.values.chunks(nv) {
            for j in 0..nv {
                m1 += row[j] * self.grid.v()[j] * self.grid.wv()[j];
            }
        }
        m1 * self.grid.hx() / self.mass()
    }
}

/// Kernel and potential sampled on the `x` nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelTables {
    nx: usize,
    hx: f64,
    /// `U(x_i)`.
    pub u: Vec<f64>,
    /// `U'(x_i)`.
    pub du: Vec<f64>,
    /// `W(x_i, x_k)`, row-major.
    pub w: Vec<f64>,
    /// `∂_x W(x_i, x_k)`, row-major.
    pub gw: Vec<f64>,
}

impl ModelTables {
    pub fn new(kernel: &dyn Kernel, potential: &dyn Potential, grid: &PhaseGrid) -> Result<Self> {
        let nx = grid.nx();
        let xs = grid.x();
        let mut u = Vec::with_capacity(nx);
        let mut du = Vec::with_capacity(nx);
        let mut w = Vec::with_capacity(nx * nx);
        let mut gw = Vec::with_capacity(nx * nx);
        let bad = |quantity, x: f64, y: Option<f64>| Error::Evaluation {
            quantity,
            x: vec![x],
            y: y.into_iter().collect(),
        };
        for &x in xs {
            let uv = potential.eval(&[x]);
            let g = potential.grad(&[x])[0];
            if !uv.is_finite() {
                return Err(bad("U", x, None));
            }
            if !g.is_finite() {
                return Err(bad("grad U", x, None));
            }
            u.push(uv);
            du.push(g);
            for &y in xs {
                let wv = kernel.eval(&[x], &[y]);
                let gv = kernel.grad_x(&[x], &[y])[0];
                if !wv.is_finite() {
                    return Err(bad("W", x, Some(y)));
                }
                if !gv.is_finite() {
                    return Err(bad("grad_x W", x, Some(y)));
                }
                w.push(wv);
                gw.push(gv);
            }
        }
        Ok(Self {
            nx,
            hx: grid.hx(),
            u,
            du,
            w,
            gw,
        })
    }

    /// `(W⊛ρ)(x_i) = Σ_k hx W(x_i, x_k) ρ_k`.
    pub fn convolve(&self, rho: &[f64]) -> Vec<f64> {
        matvec(&self.w, rho, self.nx, self.hx)
    }

    /// `∂_x (U + W⊛ρ)(x_i)`.
    pub fn force(&self, rho: &[f64]) -> Vec<f64> {
        let mut f = matvec(&self.gw, rho, self.nx, self.hx);
        for (fi, d) in f.iter_mut().zip(&self.du) {
            *fi += d;
        }
        f
    }

    /// `½ Σ_i Σ_k hx² a_i W_ik b_k`.
    pub fn half_quadratic(&self, a: &[f64], b: &[f64]) -> f64 {
        let wb = self.convolve(b);
        0.5 * self.hx * a.iter().zip(&wb).map(|(x, y)| x * y).sum::<f64>()
    }

    /// `max |W(x_i, x_k)|` over the nodes.
    pub fn sup_abs_w(&self) -> f64 {
        self.w.iter().fold(0.0, |m, w| m.max(w.abs()))
    }
}

fn matvec(m: &[f64], v: &[f64], n: usize, scale: f64) -> Vec<f64> {
    m.chunks(n)
        .map(|row| scale * row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{KernelSpec, PotentialSpec};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn grid_geometry() {
        let g = PhaseGrid::new(PositionDomain::unit_torus(), 8, 5, 6.0).unwrap();
        assert_relative_eq!(g.hx() * 8.0, 2.0 * PI);
        assert_eq!(g.v(), &[-6.0, -3.0, 0.0, 3.0, 6.0]);
        assert_eq!(g.wv(), &[1.5, 3.0, 3.0, 3.0, 1.5]);
        let line = PhaseGrid::new(PositionDomain::line(6.0, 1).unwrap(), 4, 5, 6.0).unwrap();
        assert_eq!(line.x(), &[-6.0, -3.0, 0.0, 3.0]);
    }

    #[test]
    fn grid_rejects_bad_input() {
        let t = PositionDomain::unit_torus();
        assert!(PhaseGrid::new(t, 8, 9, 4.0).is_err());
        assert!(PhaseGrid::new(t, 2, 9, 6.0).is_err());
        assert!(PhaseGrid::new(PositionDomain::torus(1.0, 2).unwrap(), 8, 9, 6.0).is_err());
    }

    #[test]
    fn mass_and_marginals() {
        let g = PhaseGrid::new(PositionDomain::unit_torus(), 16, 65, 6.0).unwrap();
        let mut f = DensityField::from_fn(g, |x, v| (1.0 + 0.5 * x.cos()) * (-0.5 * v * v).exp());
        f.normalize().unwrap();
        assert_relative_eq!(f.mass(), 1.0, epsilon = 1e-14);
        let rho = f.x_marginal();
        let total: f64 = rho.iter().sum::<f64>() * f.grid().hx();
        assert_relative_eq!(total, 1.0, epsilon = 1e-14);
        let vm: f64 = f.v_marginal().iter().zip(f.grid().wv()).map(|(a, b)| a * b).sum();
        assert_relative_eq!(vm, 1.0, epsilon = 1e-14);
        assert!(f.mean_velocity().abs() < 1e-15);
    }

    #[test]
    fn negative_entry_is_located() {
        let g = PhaseGrid::new(PositionDomain::unit_torus(), 4, 5, 6.0).unwrap();
        let mut f = DensityField::from_fn(g, |_, _| 1.0);
        let k = f.grid().idx(2, 3);
        f.values_mut()[k] = -1e-3;
        match f.check_nonnegative() {
            Err(Error::NegativeDensity { i: 2, j: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn convolution_of_uniform_density() {
        let g = PhaseGrid::new(PositionDomain::unit_torus(), 32, 5, 6.0).unwrap();
        let t = ModelTables::new(&KernelSpec::difference(0.3, 1.0), &PotentialSpec::Zero, &g).unwrap();
        let rho = vec![1.0 / (2.0 * PI); 32];
        for c in t.convolve(&rho) {
            assert!(c.abs() < 1e-15);
        }
        assert_relative_eq!(t.sup_abs_w(), 0.3);
    }
}
