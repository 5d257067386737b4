//! The mean-field information matrix `R(z, x, y)` and certification of the
//! decay constant `λ` with `R ⪰ λ diag(M, M)`, `M = aa^T + zz^T`.
//!
//! `λ` at a point is the smallest generalized eigenvalue of the pencil
//! `(R, M̂)`, computed by Cholesky whitening. Certification takes the
//! minimum over a deterministic `(x, y)` grid.

pub mod checks;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{metric_block, DirectionPair, Kernel, PositionDomain, Potential};

pub use checks::CheckRecord;

/// `λ` must exceed this for a certificate to count as feasible.
pub const FEASIBILITY_TOL: f64 = 1e-10;

/// The `W`/`U` split of the `A` blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct ReformBlocks {
    pub a1_xy: DMatrix<f64>,
    pub a1_yx: DMatrix<f64>,
    pub a2_xy: DMatrix<f64>,
    pub a2_yx: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

impl ReformBlocks {
    /// `½[[A1_xy, B], [Bᵀ, A1_yx]] + ½ diag(A2_xy, A2_yx)`.
    pub fn reassemble(&self) -> DMatrix<f64> {
        let a_xy = &self.a1_xy + &self.a2_xy;
        let a_yx = &self.a1_yx + &self.a2_yx;
        block_r(&a_xy, &a_yx, &self.b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfoMatrix {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub dir: DirectionPair,
    pub a_xy: DMatrix<f64>,
    pub a_yx: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub reform: ReformBlocks,
}

/// `[[z1z2 I, ½(cI − z1²H)], [½(cI − z1²H), (1+z2²)I − z1z2 H]]` with
/// `c = 1 + z1z2 + z2²`. With `with_identity = false` the `H`-free terms are
/// dropped, which gives the `A1` block.
fn a_block(dir: &DirectionPair, h: &DMatrix<f64>, with_identity: bool) -> DMatrix<f64> {
    let d = h.nrows();
    let (z1, z2) = (dir.z1, dir.z2);
    let id = if with_identity { 1.0 } else { 0.0 };
    let c = 1.0 + z1 * z2 + z2 * z2;
    let mut a = DMatrix::zeros(2 * d, 2 * d);
    for i in 0..d {
        a[(i, i)] = id * z1 * z2;
        for j in 0..d {
            let delta = if i == j { id } else { 0.0 };
            let off = 0.5 * (c * delta - z1 * z1 * h[(i, j)]);
            a[(i, d + j)] = off;
            a[(d + i, j)] = off;
            a[(d + i, d + j)] = (1.0 + z2 * z2) * delta - z1 * z2 * h[(i, j)];
        }
    }
    a
}

fn b_block(dir: &DirectionPair, hxy: &DMatrix<f64>) -> DMatrix<f64> {
    let d = hxy.nrows();
    let (z1, z2) = (dir.z1, dir.z2);
    let mut b = DMatrix::zeros(2 * d, 2 * d);
    for i in 0..d {
        for j in 0..d {
            b[(i, d + j)] = -0.5 * z1 * z1 * hxy[(i, j)];
            b[(d + i, j)] = -0.5 * z1 * z1 * hxy[(i, j)];
            b[(d + i, d + j)] = -z1 * z2 * hxy[(i, j)];
        }
    }
    b
}

// The lower-left block is Bᵀ so that R is symmetric for any d; for the
// diagonal cross Hessians of the builtins this is B itself.
fn block_r(a_xy: &DMatrix<f64>, a_yx: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a_xy.nrows();
    let mut r = DMatrix::zeros(2 * n, 2 * n);
    r.view_mut((0, 0), (n, n)).copy_from(a_xy);
    r.view_mut((0, n), (n, n)).copy_from(b);
    r.view_mut((n, 0), (n, n)).copy_from(&b.transpose());
    r.view_mut((n, n), (n, n)).copy_from(a_yx);
    r * 0.5
}

fn finite_or_err(m: &DMatrix<f64>, quantity: &'static str, x: &[f64], y: &[f64]) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Evaluation {
            quantity,
            x: x.to_vec(),
            y: y.to_vec(),
        })
    }
}

/// Assemble `R(z, x, y)` and its reform blocks.
pub fn assemble_r(
    kernel: &dyn Kernel,
    potential: &dyn Potential,
    dir: DirectionPair,
    x: &[f64],
    y: &[f64],
) -> Result<InfoMatrix> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::InvalidInput(format!(
            "points must share a positive dimension, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let wxx = kernel.hess_xx(x, y);
    finite_or_err(&wxx, "hess_xx W", x, y)?;
    let wyy = kernel.hess_xx(y, x);
    finite_or_err(&wyy, "hess_xx W", y, x)?;
    let wxy = kernel.hess_xy(x, y);
    finite_or_err(&wxy, "hess_xy W", x, y)?;
    let ux = potential.hess(x);
    finite_or_err(&ux, "hess U", x, y)?;
    let uy = potential.hess(y);
    finite_or_err(&uy, "hess U", y, x)?;

    let a_xy = a_block(&dir, &(&wxx + &ux), true);
    let a_yx = a_block(&dir, &(&wyy + &uy), true);
    let b = b_block(&dir, &wxy);
    let r = block_r(&a_xy, &a_yx, &b);
    let reform = ReformBlocks {
        a1_xy: a_block(&dir, &wxx, false),
        a1_yx: a_block(&dir, &wyy, false),
        a2_xy: a_block(&dir, &ux, true),
        a2_yx: a_block(&dir, &uy, true),
        b: b.clone(),
    };
    Ok(InfoMatrix {
        x: x.to_vec(),
        y: y.to_vec(),
        dir,
        a_xy,
        a_yx,
        b,
        r,
        reform,
    })
}

/// `diag(M, M)` for the given direction pair.
pub fn metric_hat(dir: &DirectionPair, d: usize) -> DMatrix<f64> {
    let m = metric_block(dir, d);
    let n = 2 * d;
    let mut mh = DMatrix::zeros(2 * n, 2 * n);
    mh.view_mut((0, 0), (n, n)).copy_from(&m);
    mh.view_mut((n, n), (n, n)).copy_from(&m);
    mh
}

/// Prefactored whitening for a fixed direction pair.
#[derive(Debug, Clone)]
pub struct Whitener {
    dir: DirectionPair,
    chol: Cholesky<f64, Dyn>,
    l_inv: DMatrix<f64>,
}

/// Smallest generalized eigenvalue with its `M̂`-normalized eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedMin {
    pub lambda: f64,
    pub witness: DVector<f64>,
}

impl Whitener {
    pub fn new(dir: DirectionPair, d: usize) -> Result<Self> {
        if dir.z1 == 0.0 || !dir.z1.is_finite() || !dir.z2.is_finite() {
            return Err(Error::SingularMetric {
                z1: dir.z1,
                z2: dir.z2,
            });
        }
        let mh = metric_hat(&dir, d);
        let chol = Cholesky::new(mh).ok_or(Error::SingularMetric {
            z1: dir.z1,
            z2: dir.z2,
        })?;
        let n = 4 * d;
        let l_inv = chol
            .l()
            .solve_lower_triangular(&DMatrix::identity(n, n))
            .ok_or(Error::SingularMetric {
                z1: dir.z1,
                z2: dir.z2,
            })?;
        Ok(Self { dir, chol, l_inv })
    }

    pub fn dir(&self) -> DirectionPair {
        self.dir
    }

    pub fn metric(&self) -> DMatrix<f64> {
        let l = self.chol.l();
        &l * l.transpose()
    }

    /// Solve `R v = λ M̂ v` for the smallest `λ`.
    pub fn min_generalized(&self, r: &DMatrix<f64>) -> GeneralizedMin {
        let c = &self.l_inv * r * self.l_inv.transpose();
        // symmetrize away roundoff before the symmetric solver
        let c = (&c + c.transpose()) * 0.5;
        let eig = SymmetricEigen::new(c);
        let (k, lambda) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (i, v)| {
                if v < best.1 {
                    (i, v)
                } else {
                    best
                }
            });
        let u = eig.eigenvectors.column(k).into_owned();
        // v = L^{-T} u, so vᵀ M̂ v = uᵀ u = 1
        let witness = self.l_inv.transpose() * u;
        GeneralizedMin { lambda, witness }
    }
}

/// Largest `λ` with `R(z, x, y) ⪰ λ diag(M, M)`.
pub fn lambda_at(
    kernel: &dyn Kernel,
    potential: &dyn Potential,
    dir: DirectionPair,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    let w = Whitener::new(dir, x.len())?;
    let info = assemble_r(kernel, potential, dir, x, y)?;
    Ok(w.min_generalized(&info.r).lambda)
}

/// Tensor grid on `(x, y) ∈ D × D`, `points_per_axis` nodes per coordinate.
///
/// Torus nodes are `k·period/n`; line nodes include both endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XyGrid {
    pub domain: PositionDomain,
    pub points_per_axis: usize,
}

impl XyGrid {
    pub fn new(domain: PositionDomain, points_per_axis: usize) -> Result<Self> {
        if points_per_axis == 0 {
            return Err(Error::EmptyGrid("xy grid needs at least one point per axis"));
        }
        domain.validate()?;
        Ok(Self {
            domain,
            points_per_axis,
        })
    }

    pub fn axis_nodes(&self) -> Vec<f64> {
        let n = self.points_per_axis;
        if self.domain.is_torus() {
            (0..n)
                .map(|k| k as f64 * self.domain.length() / n as f64)
                .collect()
        } else if n == 1 {
            vec![0.0]
        } else {
            let lo = self.domain.lower();
            (0..n)
                .map(|k| lo + k as f64 * self.domain.length() / (n - 1) as f64)
                .collect()
        }
    }

    /// Number of `(x, y)` pairs.
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(2 * self.domain.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The `k`-th point in lexicographic order over `(x_1..x_d, y_1..y_d)`.
    pub fn point(&self, mut k: usize) -> (Vec<f64>, Vec<f64>) {
        let nodes = self.axis_nodes();
        let d = self.domain.dim;
        let n = self.points_per_axis;
        let mut coords = vec![0.0; 2 * d];
        for c in (0..2 * d).rev() {
            coords[c] = nodes[k % n];
            k /= n;
        }
        let y = coords.split_off(d);
        (coords, y)
    }

    /// A grid containing every node of `self`.
    pub fn refine(&self) -> Self {
        let n = self.points_per_axis;
        let points_per_axis = if self.domain.is_torus() {
            2 * n
        } else if n == 1 {
            // the lone node sits at the centre
            3
        } else {
            2 * n - 1
        };
        Self {
            domain: self.domain,
            points_per_axis,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralCertificate {
    pub lambda: f64,
    pub z1: f64,
    pub z2: f64,
    /// `x` followed by `y`.
    pub argmin: Vec<f64>,
    pub feasible: bool,
    pub grid: XyGrid,
    #[serde(default)]
    pub checks: Vec<CheckRecord>,
    pub witness: Vec<f64>,
}

impl SpectralCertificate {
    pub fn dir(&self) -> DirectionPair {
        DirectionPair::new(self.z1, self.z2)
    }

    pub fn argmin_point(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.argmin.len() / 2;
        (self.argmin[..d].to_vec(), self.argmin[d..].to_vec())
    }
}

/// Minimum of `lambda_at` over the grid, with argmin and witness.
///
/// Ties resolve to the first point in lexicographic grid order.
pub fn certify_lambda(
    kernel: &dyn Kernel,
    potential: &dyn Potential,
    dir: DirectionPair,
    grid: &XyGrid,
) -> Result<SpectralCertificate> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid("xy grid"));
    }
    let whitener = Whitener::new(dir, grid.domain.dim)?;
    let lambdas: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (x, y) = grid.point(k);
            let info = assemble_r(kernel, potential, dir, &x, &y)?;
            Ok(whitener.min_generalized(&info.r).lambda)
        })
        .collect::<Result<_>>()?;
    let (k_min, _) = lambdas
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (k, &l)| if l < best.1 { (k, l) } else { best });
    let (x, y) = grid.point(k_min);
    let info = assemble_r(kernel, potential, dir, &x, &y)?;
    let gm = whitener.min_generalized(&info.r);
    let mut argmin = x;
    argmin.extend(y);
    Ok(SpectralCertificate {
        lambda: gm.lambda,
        z1: dir.z1,
        z2: dir.z2,
        argmin,
        feasible: gm.lambda > FEASIBILITY_TOL,
        grid: *grid,
        checks: Vec::new(),
        witness: gm.witness.iter().copied().collect(),
    })
}

/// Candidate direction pairs for [`search_directions`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ZGrid {
    /// Half-open product grid `(lo, hi]` per axis: `lo + (hi − lo)k/n`, `k = 1..=n`.
    Product {
        z1_lo: f64,
        z1_hi: f64,
        z1_points: usize,
        z2_lo: f64,
        z2_hi: f64,
        z2_points: usize,
    },
    List { points: Vec<DirectionPair> },
}

impl ZGrid {
    pub fn half_open(lo: f64, hi: f64, n: usize) -> Self {
        ZGrid::Product {
            z1_lo: lo,
            z1_hi: hi,
            z1_points: n,
            z2_lo: lo,
            z2_hi: hi,
            z2_points: n,
        }
    }

    pub fn directions(&self) -> Vec<DirectionPair> {
        match self {
            ZGrid::Product {
                z1_lo,
                z1_hi,
                z1_points,
                z2_lo,
                z2_hi,
                z2_points,
            } => {
                let mut out = Vec::with_capacity(z1_points * z2_points);
                for i in 1..=*z1_points {
                    let z1 = z1_lo + (z1_hi - z1_lo) * i as f64 / *z1_points as f64;
                    for j in 1..=*z2_points {
                        let z2 = z2_lo + (z2_hi - z2_lo) * j as f64 / *z2_points as f64;
                        out.push(DirectionPair::new(z1, z2));
                    }
                }
                out
            }
            ZGrid::List { points } => points.clone(),
        }
    }
}

/// Result of a direction search: the winner and every evaluated `λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionSearch {
    pub best: DirectionPair,
    pub certificate: SpectralCertificate,
    pub evaluated: Vec<(DirectionPair, f64)>,
}

/// Maximize the certified `λ` over `z_grid`. Ties go to the smallest `z1`,
/// then the smallest `z2`.
pub fn search_directions(
    kernel: &dyn Kernel,
    potential: &dyn Potential,
    z_grid: &ZGrid,
    xy_grid: &XyGrid,
) -> Result<DirectionSearch> {
    let dirs = z_grid.directions();
    if dirs.is_empty() {
        return Err(Error::EmptyGrid("direction grid"));
    }
    if let Some(bad) = dirs.iter().find(|d| d.z1 == 0.0) {
        return Err(Error::SingularMetric {
            z1: bad.z1,
            z2: bad.z2,
        });
    }
    let certs: Vec<SpectralCertificate> = dirs
        .par_iter()
        .map(|dir| certify_lambda(kernel, potential, *dir, xy_grid))
        .collect::<Result<_>>()?;
    let evaluated: Vec<(DirectionPair, f64)> =
        dirs.iter().zip(&certs).map(|(d, c)| (*d, c.lambda)).collect();
    let best = pick_best(&evaluated);
    Ok(DirectionSearch {
        best: dirs[best],
        certificate: certs[best].clone(),
        evaluated,
    })
}

fn pick_best(evaluated: &[(DirectionPair, f64)]) -> usize {
    let mut best = 0;
    for (k, (d, l)) in evaluated.iter().enumerate().skip(1) {
        let (bd, bl) = evaluated[best];
        if *l > bl || (*l == bl && (d.z1, d.z2) < (bd.z1, bd.z2)) {
            best = k;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{KernelSpec, PotentialSpec};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn min_eig(m: &DMatrix<f64>) -> f64 {
        m.symmetric_eigenvalues().min()
    }

    #[test]
    fn zero_kernel_identity_hessian_at_z2_zero() {
        let info = assemble_r(
            &KernelSpec::Zero,
            &PotentialSpec::Quadratic { kappa: 1.0 },
            DirectionPair::new(1.0, 0.0),
            &[0.3],
            &[-1.1],
        )
        .unwrap();
        assert_eq!(info.a_xy, DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]));
        assert_eq!(info.b.amax(), 0.0);
        let mut eig: Vec<f64> = info.r.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        for (e, want) in eig.iter().zip([0.0, 0.0, 0.5, 0.5]) {
            assert!((e - want).abs() < 1e-15);
        }
    }

    #[test]
    fn difference_kernel_blocks_at_antipode() {
        // at x − y = π the unit difference kernel has hess_xx = 1, hess_xy = −1
        let k = KernelSpec::difference(1.0, 1.0);
        let info = assemble_r(
            &k,
            &PotentialSpec::Zero,
            DirectionPair::new(1.0, 0.3),
            &[PI],
            &[0.0],
        )
        .unwrap();
        assert_relative_eq!(info.a_xy[(0, 0)], 0.3);
        assert_relative_eq!(info.a_xy[(0, 1)], 0.195, epsilon = 1e-15);
        assert_relative_eq!(info.a_xy[(1, 1)], 0.79, epsilon = 1e-15);
        assert_relative_eq!(info.b[(0, 1)], 0.5, epsilon = 1e-15);
        assert_relative_eq!(info.b[(1, 1)], 0.3, epsilon = 1e-15);
    }

    #[test]
    fn z1_zero_decouples_the_kernel() {
        let k = KernelSpec::separable(0.7, crate::model::Profile::Sin);
        let info = assemble_r(
            &k,
            &PotentialSpec::Cosine { kappa: 2.0 },
            DirectionPair::new(0.0, 0.4),
            &[0.2, 1.0],
            &[2.0, -0.3],
        )
        .unwrap();
        assert_eq!(info.b.amax(), 0.0);
        for i in 0..2 {
            assert_relative_eq!(info.a_xy[(i, 2 + i)], 0.5 * 1.16, epsilon = 1e-15);
        }
        let err = lambda_at(&k, &PotentialSpec::Zero, DirectionPair::new(0.0, 0.4), &[0.0], &[0.0]);
        assert!(matches!(err, Err(Error::SingularMetric { .. })));
    }

    #[test]
    fn lambda_identity_hessian_is_zero() {
        let l = lambda_at(
            &KernelSpec::Zero,
            &PotentialSpec::Quadratic { kappa: 1.0 },
            DirectionPair::new(1.0, 0.0),
            &[0.0],
            &[0.0],
        )
        .unwrap();
        assert!(l.abs() < 1e-15);
    }

    #[test]
    fn lambda_matches_two_by_two_pencil() {
        let dir = DirectionPair::new(1.0, 0.3);
        let l = lambda_at(
            &KernelSpec::Zero,
            &PotentialSpec::Quadratic { kappa: 0.9 },
            dir,
            &[0.4],
            &[-2.0],
        )
        .unwrap();
        // R = ½ diag(A2, A2); solve det(½A2 − μM) = 0 by the quadratic formula
        let a: [[f64; 2]; 2] = [[0.3, 0.245], [0.245, 0.82]];
        let m = [[1.0, 0.3], [0.3, 1.09]];
        let qa = m[0][0] * m[1][1] - m[0][1] * m[0][1];
        let qb = -(0.5 * a[0][0] * m[1][1] + 0.5 * a[1][1] * m[0][0] - a[0][1] * m[0][1]);
        let qc = 0.25 * (a[0][0] * a[1][1] - a[0][1] * a[0][1]);
        let root = (-qb - (qb * qb - 4.0 * qa * qc).sqrt()) / (2.0 * qa);
        assert_relative_eq!(l, root, epsilon = 1e-13);
        let unwhitened = min_eig(&DMatrix::from_row_slice(2, 2, &[0.3, 0.245, 0.245, 0.82]));
        assert_relative_eq!(unwhitened, 0.2028, epsilon = 1e-4);
    }

    #[test]
    fn difference_kernel_without_confinement_is_not_certified() {
        let l = lambda_at(
            &KernelSpec::difference(1.0, 1.0),
            &PotentialSpec::Zero,
            DirectionPair::new(1.0, 0.3),
            &[1.0],
            &[1.0],
        )
        .unwrap();
        assert!(l < 0.0);
    }

    #[test]
    fn witness_satisfies_the_pencil() {
        let k = KernelSpec::difference(0.3, 1.0);
        let p = PotentialSpec::Cosine { kappa: 0.5 };
        let dir = DirectionPair::new(1.3, 0.7);
        let grid = XyGrid::new(PositionDomain::unit_torus(), 6).unwrap();
        let cert = certify_lambda(&k, &p, dir, &grid).unwrap();
        let (x, y) = cert.argmin_point();
        let info = assemble_r(&k, &p, dir, &x, &y).unwrap();
        let v = DVector::from_vec(cert.witness.clone());
        let mh = metric_hat(&dir, 1);
        let vmv = (v.transpose() * &mh * &v)[(0, 0)];
        let vrv = (v.transpose() * &info.r * &v)[(0, 0)];
        assert!((vrv - cert.lambda * vmv).abs() <= 1e-9 * vmv.abs());
        assert_relative_eq!(vmv, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn certified_constant_hessian_model() {
        let domain = PositionDomain::line(3.0, 1).unwrap();
        let grid = XyGrid::new(domain, 5).unwrap();
        let dir = DirectionPair::new(1.0, 0.3);
        let p = PotentialSpec::Quadratic { kappa: 0.9 };
        let cert = certify_lambda(&KernelSpec::Zero, &p, dir, &grid).unwrap();
        let single = lambda_at(&KernelSpec::Zero, &p, dir, &[0.0], &[0.0]).unwrap();
        assert_relative_eq!(cert.lambda, single, epsilon = 1e-14);
        // det M = 1 and det(A2 − μM) = μ² − μ + 0.185975, halved by the ½ in R
        let closed = 0.5 * (1.0 - (1.0f64 - 4.0 * 0.185975).sqrt()) / 2.0;
        assert_relative_eq!(cert.lambda, closed, epsilon = 1e-13);
        assert!(cert.feasible);
        // every point ties, so the first grid point is reported
        assert_eq!(cert.argmin, vec![-3.0, -3.0]);

        let zero = certify_lambda(&KernelSpec::Zero, &PotentialSpec::Zero, dir, &grid).unwrap();
        assert!(zero.lambda < 0.0 && !zero.feasible);

        let one = XyGrid::new(domain, 1).unwrap();
        let c1 = certify_lambda(&KernelSpec::Zero, &p, dir, &one).unwrap();
        assert_eq!(c1.lambda, lambda_at(&KernelSpec::Zero, &p, dir, &[0.0], &[0.0]).unwrap());
    }

    #[test]
    fn grid_points_and_refinement() {
        let g = XyGrid::new(PositionDomain::unit_torus(), 4).unwrap();
        assert_eq!(g.len(), 16);
        assert_eq!(g.point(0), (vec![0.0], vec![0.0]));
        assert_eq!(g.point(1), (vec![0.0], vec![PI / 2.0]));
        assert_eq!(g.point(4), (vec![PI / 2.0], vec![0.0]));
        let fine = g.refine().axis_nodes();
        for x in g.axis_nodes() {
            assert!(fine.iter().any(|f| (f - x).abs() < 1e-15));
        }
        let line = XyGrid::new(PositionDomain::line(2.0, 1).unwrap(), 3).unwrap();
        assert_eq!(line.axis_nodes(), vec![-2.0, 0.0, 2.0]);
        assert_eq!(line.refine().axis_nodes(), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        let d2 = XyGrid::new(PositionDomain::torus(1.0, 2).unwrap(), 3).unwrap();
        assert_eq!(d2.len(), 81);
        assert_eq!(d2.point(80), (vec![2.0 / 3.0; 2], vec![2.0 / 3.0; 2]));
    }

    #[test]
    fn search_prefers_the_larger_lambda() {
        let p = PotentialSpec::Quadratic { kappa: 0.9 };
        let grid = XyGrid::new(PositionDomain::line(2.0, 1).unwrap(), 2).unwrap();
        let zg = ZGrid::List {
            points: vec![DirectionPair::new(1.0, 10.0), DirectionPair::new(1.0, 0.3)],
        };
        let res = search_directions(&KernelSpec::Zero, &p, &zg, &grid).unwrap();
        assert_eq!(res.best, DirectionPair::new(1.0, 0.3));

        let tie = ZGrid::List {
            points: vec![DirectionPair::new(2.0, 0.3), DirectionPair::new(1.0, 0.3)],
        };
        let res = search_directions(&KernelSpec::Zero, &PotentialSpec::Zero, &tie, &grid);
        assert!(res.is_ok());

        let empty = ZGrid::List { points: vec![] };
        assert!(matches!(
            search_directions(&KernelSpec::Zero, &p, &empty, &grid),
            Err(Error::EmptyGrid(_))
        ));
        let singular = ZGrid::List {
            points: vec![DirectionPair::new(0.0, 1.0)],
        };
        assert!(search_directions(&KernelSpec::Zero, &p, &singular, &grid).is_err());
    }

    #[test]
    fn ties_resolve_to_smallest_z() {
        let d = DirectionPair::new;
        let ev = [(d(2.0, 0.1), 0.5), (d(1.0, 0.4), 0.5), (d(1.0, 0.2), 0.5), (d(0.5, 9.0), 0.4)];
        assert_eq!(pick_best(&ev), 2);
    }

    #[test]
    fn search_reports_bad_points() {
        // a kernel/potential pair whose certified λ does not depend on z
        struct Flat;
        impl Kernel for Flat {
            fn eval(&self, _: &[f64], _: &[f64]) -> f64 {
                0.0
            }
            fn grad_x(&self, x: &[f64], _: &[f64]) -> DVector<f64> {
                DVector::zeros(x.len())
            }
            fn hess_xx(&self, x: &[f64], _: &[f64]) -> DMatrix<f64> {
                DMatrix::from_element(x.len(), x.len(), f64::NAN)
            }
            fn hess_xy(&self, x: &[f64], _: &[f64]) -> DMatrix<f64> {
                DMatrix::zeros(x.len(), x.len())
            }
        }
        let grid = XyGrid::new(PositionDomain::unit_torus(), 1).unwrap();
        let zg = ZGrid::half_open(0.0, 1.0, 2);
        let err = search_directions(&Flat, &PotentialSpec::Zero, &zg, &grid).unwrap_err();
        assert!(matches!(err, Error::Evaluation { .. }));

        let dirs = zg.directions();
        assert_eq!(dirs[0], DirectionPair::new(0.5, 0.5));
        assert_eq!(dirs[3], DirectionPair::new(1.0, 1.0));
    }
}
