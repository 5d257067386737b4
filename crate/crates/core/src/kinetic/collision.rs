//! Implicit velocity Fokker–Planck step `∂_t f = ∂_v (v f + ∂_v f)`.
//!
//! Fluxes use the exponentially fitted (Chang–Cooper / Scharfetter–Gummel)
//! face formula `F = (B(δ) f_j − B(−δ) f_{j+1}) / hv` with `δ = hv v_{j+½}`,
//! zero flux at `±vmax`, and control volumes equal to the trapezoid weights.
//! The backward-Euler matrix has columns summing to those weights, so
//! `Σ w_j f_j` is conserved exactly, and it is an M-matrix, so positivity is
//! preserved for every `dt`.

use crate::equilibrium::functionals::bernoulli;
use crate::equilibrium::PhaseGrid;
use crate::error::{Error, Result};

/// Factored tridiagonal system for one velocity column.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionStep {
    dt: f64,
    lower: Vec<f64>,
    /// Modified super-diagonal after forward elimination.
    upper_star: Vec<f64>,
    /// Reciprocal pivots.
    inv_pivot: Vec<f64>,
}

impl CollisionStep {
    pub fn new(grid: &PhaseGrid, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
        }
        let (diag, lower, upper) = assemble(grid, dt);
        let n = diag.len();
        let mut upper_star = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let mut prev_c = 0.0;
        for j in 0..n {
            let pivot = diag[j] - lower[j] * prev_c;
            inv_pivot[j] = 1.0 / pivot;
            prev_c = upper[j] * inv_pivot[j];
            upper_star[j] = prev_c;
        }
        Ok(Self {
            dt,
            lower,
            upper_star,
            inv_pivot,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Solves `M f_new = w ⊙ f_old` in place.
    pub fn apply(&self, column: &mut [f64], weights: &[f64]) {
        let n = column.len();
        let mut prev = 0.0;
        for j in 0..n {
            let rhs = weights[j] * column[j] - self.lower[j] * prev;
            prev = rhs * self.inv_pivot[j];
            column[j] = prev;
        }
        for j in (0..n - 1).rev() {
            column[j] -= self.upper_star[j] * column[j + 1];
        }
    }
}

/// Diagonal, sub-diagonal (`lower[j] = M_{j,j−1}`) and super-diagonal
/// (`upper[j] = M_{j,j+1}`).
fn assemble(grid: &PhaseGrid, dt: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let nv = grid.nv();
    let hv = grid.hv();
    let v = grid.v();
    let mut diag: Vec<f64> = grid.wv().to_vec();
    let mut lower = vec![0.0; nv];
    let mut upper = vec![0.0; nv];
    for j in 0..nv - 1 {
        let delta = hv * 0.5 * (v[j] + v[j + 1]);
        let (bp, bm) = (bernoulli(delta), bernoulli(-delta));
        diag[j] += dt * bp / hv;
        upper[j] = -dt * bm / hv;
        diag[j + 1] += dt * bm / hv;
        lower[j + 1] = -dt * bp / hv;
    }
    (diag, lower, upper)
}

/// Dense copy of the backward-Euler matrix, for tests and inspection.
pub fn dense_matrix(grid: &PhaseGrid, dt: f64) -> Vec<Vec<f64>> {
    let (diag, lower, upper) = assemble(grid, dt);
    let n = diag.len();
    let mut m = vec![vec![0.0; n]; n];
    for j in 0..n {
        m[j][j] = diag[j];
        if j > 0 {
            m[j][j - 1] = lower[j];
        }
        if j + 1 < n {
            m[j][j + 1] = upper[j];
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PositionDomain;
    use approx::assert_relative_eq;

    fn grid(nv: usize) -> PhaseGrid {
        PhaseGrid::new(PositionDomain::unit_torus(), 4, nv, 6.0).unwrap()
    }

    #[test]
    fn columns_sum_to_weights_and_signs_are_m_matrix() {
        let g = grid(33);
        let m = dense_matrix(&g, 0.05);
        for j in 0..33 {
            let col: f64 = (0..33).map(|i| m[i][j]).sum();
            assert_relative_eq!(col, g.wv()[j], epsilon = 1e-14);
            for i in 0..33 {
                if i != j {
                    assert!(m[i][j] <= 0.0);
                }
            }
        }
    }

    #[test]
    fn discrete_maxwellian_is_fixed() {
        let g = grid(41);
        let step = CollisionStep::new(&g, 0.3).unwrap();
        let mut col: Vec<f64> = g.v().iter().map(|v| (-0.5 * v * v).exp()).collect();
        let orig = col.clone();
        step.apply(&mut col, g.wv());
        for (a, b) in col.iter().zip(&orig) {
            assert_relative_eq!(a, b, max_relative = 1e-12, epsilon = 1e-300);
        }
    }

    #[test]
    fn thomas_matches_dense_residual() {
        let g = grid(25);
        let dt = 0.1;
        let step = CollisionStep::new(&g, dt).unwrap();
        let old: Vec<f64> = g.v().iter().map(|v| (-(v - 1.0).powi(2)).exp() + 0.01).collect();
        let mut new = old.clone();
        step.apply(&mut new, g.wv());
        let m = dense_matrix(&g, dt);
        for i in 0..25 {
            let lhs: f64 = (0..25).map(|k| m[i][k] * new[k]).sum();
            assert_relative_eq!(lhs, g.wv()[i] * old[i], epsilon = 1e-13);
        }
        let mass = |c: &[f64]| c.iter().zip(g.wv()).map(|(a, w)| a * w).sum::<f64>();
        assert_relative_eq!(mass(&new), mass(&old), epsilon = 1e-14);
        assert!(new.iter().all(|x| *x > 0.0));
    }

    #[test]
    fn rejects_nonpositive_dt() {
        assert!(CollisionStep::new(&grid(9), 0.0).is_err());
    }
}
