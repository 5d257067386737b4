//! Interaction kernels, confinement potentials, position domains and the
//! direction pair `(z1, z2)`.
//!
//! A model is a pair of a [`Kernel`] `W(x, y)` and a [`Potential`] `U(x)`.
//! The builtin catalog ([`KernelSpec`], [`PotentialSpec`]) is what config
//! files refer to by name; anything implementing the traits can be used by
//! the library directly.
//!
//! Builtins in `d > 1` are coordinate sums of the scalar formula, so every
//! Hessian they produce is diagonal.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Central-difference step used by [`validate_model`].
pub const FD_STEP: f64 = 1e-4;
/// Acceptance threshold for every defect in a [`ValidationReport`].
pub const FD_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    Torus {
        #[serde(default = "default_period")]
        period: f64,
    },
    /// Symmetric box `[-half_width, half_width]`, used as a sampling and
    /// truncation box. Numerical schemes treat it as periodic.
    Line { half_width: f64 },
}

fn default_period() -> f64 {
    2.0 * PI
}

fn default_dim() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionDomain {
    #[serde(flatten)]
    pub kind: DomainKind,
    #[serde(default = "default_dim")]
    pub dim: usize,
}

impl PositionDomain {
    pub fn torus(period: f64, dim: usize) -> Result<Self> {
        let domain = Self {
            kind: DomainKind::Torus { period },
            dim,
        };
        domain.validate()?;
        Ok(domain)
    }

    /// The `2π` torus in one dimension.
    pub fn unit_torus() -> Self {
        Self {
            kind: DomainKind::Torus { period: 2.0 * PI },
            dim: 1,
        }
    }

    pub fn line(half_width: f64, dim: usize) -> Result<Self> {
        let domain = Self {
            kind: DomainKind::Line { half_width },
            dim,
        };
        domain.validate()?;
        Ok(domain)
    }

    pub fn validate(&self) -> Result<()> {
        let extent = match self.kind {
            DomainKind::Torus { period } => period,
            DomainKind::Line { half_width } => half_width,
        };
        if !(extent.is_finite() && extent > 0.0) {
            return Err(Error::InvalidInput(format!(
                "domain extent must be positive and finite, got {extent}"
            )));
        }
        if self.dim == 0 {
            return Err(Error::InvalidInput("domain dimension must be >= 1".into()));
        }
        Ok(())
    }

    pub fn is_torus(&self) -> bool {
        matches!(self.kind, DomainKind::Torus { .. })
    }

    /// Left end of the fundamental cell.
    pub fn lower(&self) -> f64 {
        match self.kind {
            DomainKind::Torus { .. } => 0.0,
            DomainKind::Line { half_width } => -half_width,
        }
    }

    /// Width of the fundamental cell.
    pub fn length(&self) -> f64 {
        match self.kind {
            DomainKind::Torus { period } => period,
            DomainKind::Line { half_width } => 2.0 * half_width,
        }
    }

    /// Map a coordinate into `[lower, lower + length)`.
    pub fn wrap(&self, x: f64) -> f64 {
        let lo = self.lower();
        let len = self.length();
        let mut r = (x - lo).rem_euclid(len);
        // rem_euclid can return `len` itself for tiny negative inputs
        if r >= len {
            r -= len;
        }
        lo + r
    }
}

/// The constants `(z1, z2)` defining the auxiliary direction matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionPair {
    pub z1: f64,
    pub z2: f64,
}

impl DirectionPair {
    pub const fn new(z1: f64, z2: f64) -> Self {
        Self { z1, z2 }
    }

    /// `a = (0; I_d)`, a `2d × d` matrix.
    pub fn a_matrix(&self, d: usize) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(2 * d, d);
        for k in 0..d {
            a[(d + k, k)] = 1.0;
        }
        a
    }

    /// `z = (z1 I_d; z2 I_d)`, a `2d × d` matrix.
    pub fn z_matrix(&self, d: usize) -> DMatrix<f64> {
        let mut z = DMatrix::zeros(2 * d, d);
        for k in 0..d {
            z[(k, k)] = self.z1;
            z[(d + k, k)] = self.z2;
        }
        z
    }

    /// `aa^T + zz^T`.
    pub fn metric_block(&self, d: usize) -> DMatrix<f64> {
        metric_block(self, d)
    }
}

/// `aa^T + zz^T = [[z1² I, z1 z2 I], [z1 z2 I, (1 + z2²) I]]`.
pub fn metric_block(dir: &DirectionPair, d: usize) -> DMatrix<f64> {
    let (z1, z2) = (dir.z1, dir.z2);
    let mut m = DMatrix::zeros(2 * d, 2 * d);
    for k in 0..d {
        m[(k, k)] = z1 * z1;
        m[(k, d + k)] = z1 * z2;
        m[(d + k, k)] = z1 * z2;
        m[(d + k, d + k)] = 1.0 + z2 * z2;
    }
    m
}

/// Closed eigenvalue interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenRange {
    pub lo: f64,
    pub hi: f64,
}

impl EigenRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return Err(Error::InvalidInput(format!(
                "eigenvalue range needs lo <= hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn point(value: f64) -> Self {
        Self {
            lo: value,
            hi: value,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn add(&self, other: &EigenRange) -> EigenRange {
        EigenRange {
            lo: self.lo + other.lo,
            hi: self.hi + other.hi,
        }
    }
}

/// Declared eigenvalue ranges of the kernel Hessians, valid everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelBounds {
    pub hess_xx: EigenRange,
    pub hess_xy: EigenRange,
}

/// A symmetric interaction kernel `W(x, y) = W(y, x)`.
///
/// Evaluators must be pure; they are called concurrently.
pub trait Kernel: Send + Sync {
    fn eval(&self, x: &[f64], y: &[f64]) -> f64;
    fn grad_x(&self, x: &[f64], y: &[f64]) -> DVector<f64>;
    fn hess_xx(&self, x: &[f64], y: &[f64]) -> DMatrix<f64>;
    fn hess_xy(&self, x: &[f64], y: &[f64]) -> DMatrix<f64>;

    fn declared_bounds(&self) -> Option<KernelBounds> {
        None
    }

    /// `(1/N) Σ_j ∇_x W(x_i, x_j)` for every particle `i`, including `j = i`.
    ///
    /// `positions` is row-major `N × d`; the result has the same layout.
    fn mean_grad_x(&self, positions: &[f64], d: usize) -> Vec<f64> {
        let n = positions.len() / d;
        let mut out = vec![0.0; positions.len()];
        for i in 0..n {
            let xi = &positions[i * d..(i + 1) * d];
            for j in 0..n {
                let g = self.grad_x(xi, &positions[j * d..(j + 1) * d]);
                for k in 0..d {
                    out[i * d + k] += g[k];
                }
            }
            for k in 0..d {
                out[i * d + k] /= n as f64;
            }
        }
        out
    }
}

/// A confinement potential `U(x)`.
pub trait Potential: Send + Sync {
    fn eval(&self, x: &[f64]) -> f64;
    fn grad(&self, x: &[f64]) -> DVector<f64>;
    fn hess(&self, x: &[f64]) -> DMatrix<f64>;

    /// Declared `(λ̲, λ̄)` with `λ̲ I ⪯ ∇²U ⪯ λ̄ I`.
    fn declared_bounds(&self) -> Option<EigenRange> {
        None
    }

    /// Adds `∇U(x_i)` to `out` for each row of the `N × d` array `positions`.
    fn add_grad(&self, positions: &[f64], d: usize, out: &mut [f64]) {
        for (x, o) in positions.chunks(d).zip(out.chunks_mut(d)) {
            for (a, g) in o.iter_mut().zip(self.grad(x).iter()) {
                *a += g;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Cos,
    Sin,
}

impl Profile {
    fn value(self, t: f64) -> f64 {
        match self {
            Profile::Cos => t.cos(),
            Profile::Sin => t.sin(),
        }
    }

    fn derivative(self, t: f64) -> f64 {
        match self {
            Profile::Cos => -t.sin(),
            Profile::Sin => t.cos(),
        }
    }

    fn second_derivative(self, t: f64) -> f64 {
        -self.value(t)
    }
}

/// Builtin interaction kernels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum KernelSpec {
    Zero,
    /// `α Σ_k cos(ω (x_k − y_k))`.
    Difference { alpha: f64, omega: f64 },
    /// `β Σ_k g(x_k) g(y_k)`.
    Separable { beta: f64, profile: Profile },
    /// `½ a (|x|² + |y|²) + b x·y`; constant Hessians `a I` and `b I`.
    /// Not periodic, so only meaningful on a line domain.
    Quadratic { a: f64, b: f64 },
}

impl KernelSpec {
    pub fn difference(alpha: f64, omega: f64) -> Self {
        KernelSpec::Difference { alpha, omega }
    }

    pub fn separable(beta: f64, profile: Profile) -> Self {
        KernelSpec::Separable { beta, profile }
    }

    pub fn quadratic(a: f64, b: f64) -> Self {
        KernelSpec::Quadratic { a, b }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Zero => "zero",
            KernelSpec::Difference { .. } => "difference",
            KernelSpec::Separable { .. } => "separable",
            KernelSpec::Quadratic { .. } => "quadratic",
        }
    }

    pub fn is_periodic(&self) -> bool {
        !matches!(self, KernelSpec::Quadratic { .. })
    }

    /// `sup |W|` over the domain when it is known in closed form.
    pub fn sup_abs(&self, d: usize) -> Option<f64> {
        match *self {
            KernelSpec::Zero => Some(0.0),
            KernelSpec::Difference { alpha, .. } => Some(alpha.abs() * d as f64),
            KernelSpec::Separable { beta, .. } => Some(beta.abs() * d as f64),
            KernelSpec::Quadratic { .. } => None,
        }
    }
}

fn diag(values: impl Iterator<Item = f64>, d: usize) -> DMatrix<f64> {
    let v: Vec<f64> = values.collect();
    debug_assert_eq!(v.len(), d);
    DMatrix::from_diagonal(&DVector::from_vec(v))
}

impl Kernel for KernelSpec {
    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            KernelSpec::Zero => 0.0,
            KernelSpec::Difference { alpha, omega } => x
                .iter()
                .zip(y)
                .map(|(a, b)| alpha * (omega * (a - b)).cos())
                .sum(),
            KernelSpec::Separable { beta, profile } => x
                .iter()
                .zip(y)
                .map(|(a, b)| beta * profile.value(*a) * profile.value(*b))
                .sum(),
            KernelSpec::Quadratic { a, b } => x
                .iter()
                .zip(y)
                .map(|(p, q)| 0.5 * a * (p * p + q * q) + b * p * q)
                .sum(),
        }
    }

    fn grad_x(&self, x: &[f64], y: &[f64]) -> DVector<f64> {
        let d = x.len();
        match *self {
            KernelSpec::Zero => DVector::zeros(d),
            KernelSpec::Difference { alpha, omega } => DVector::from_iterator(
                d,
                x.iter()
                    .zip(y)
                    .map(|(a, b)| -alpha * omega * (omega * (a - b)).sin()),
            ),
            KernelSpec::Separable { beta, profile } => DVector::from_iterator(
                d,
                x.iter()
                    .zip(y)
                    .map(|(a, b)| beta * profile.derivative(*a) * profile.value(*b)),
            ),
            KernelSpec::Quadratic { a, b } => {
                DVector::from_iterator(d, x.iter().zip(y).map(|(p, q)| a * p + b * q))
            }
        }
    }

    fn hess_xx(&self, x: &[f64], y: &[f64]) -> DMatrix<f64> {
        let d = x.len();
        match *self {
            KernelSpec::Zero => DMatrix::zeros(d, d),
            KernelSpec::Difference { alpha, omega } => diag(
                x.iter()
                    .zip(y)
                    .map(|(a, b)| -alpha * omega * omega * (omega * (a - b)).cos()),
                d,
            ),
            KernelSpec::Separable { beta, profile } => diag(
                x.iter()
                    .zip(y)
                    .map(|(a, b)| beta * profile.second_derivative(*a) * profile.value(*b)),
                d,
            ),
            KernelSpec::Quadratic { a, .. } => DMatrix::identity(d, d) * a,
        }
    }

    fn hess_xy(&self, x: &[f64], y: &[f64]) -> DMatrix<f64> {
        let d = x.len();
        match *self {
            KernelSpec::Zero => DMatrix::zeros(d, d),
            KernelSpec::Difference { alpha, omega } => diag(
                x.iter()
                    .zip(y)
                    .map(|(a, b)| alpha * omega * omega * (omega * (a - b)).cos()),
                d,
            ),
            KernelSpec::Separable { beta, profile } => diag(
                x.iter()
                    .zip(y)
                    .map(|(a, b)| beta * profile.derivative(*a) * profile.derivative(*b)),
                d,
            ),
            KernelSpec::Quadratic { b, .. } => DMatrix::identity(d, d) * b,
        }
    }

    fn declared_bounds(&self) -> Option<KernelBounds> {
        let sym = |r: f64| EigenRange { lo: -r, hi: r };
        Some(match *self {
            KernelSpec::Zero => KernelBounds {
                hess_xx: EigenRange::point(0.0),
                hess_xy: EigenRange::point(0.0),
            },
            KernelSpec::Difference { alpha, omega } => {
                let r = alpha.abs() * omega * omega;
                KernelBounds {
                    hess_xx: sym(r),
                    hess_xy: sym(r),
                }
            }
            KernelSpec::Separable { beta, .. } => KernelBounds {
                hess_xx: sym(beta.abs()),
                hess_xy: sym(beta.abs()),
            },
            KernelSpec::Quadratic { a, b } => KernelBounds {
                hess_xx: EigenRange::point(a),
                hess_xy: EigenRange::point(b),
            },
        })
    }

    // Every builtin factors through a handful of empirical moments, so the
    // mean-field force costs O(N) instead of O(N²).
    fn mean_grad_x(&self, positions: &[f64], d: usize) -> Vec<f64> {
        let n = positions.len() / d;
        let nf = n as f64;
        let mut out = vec![0.0; positions.len()];
        match *self {
            KernelSpec::Zero => {}
            KernelSpec::Difference { alpha, omega } => {
                for k in 0..d {
                    let sc: Vec<(f64, f64)> =
                        (0..n).map(|i| (omega * positions[i * d + k]).sin_cos()).collect();
                    let s = sc.iter().map(|p| p.0).sum::<f64>() / nf;
                    let c = sc.iter().map(|p| p.1).sum::<f64>() / nf;
                    for (i, (si, ci)) in sc.iter().enumerate() {
                        // sin(ω(x−y)) = sin ωx cos ωy − cos ωx sin ωy
                        out[i * d + k] = -alpha * omega * (si * c - ci * s);
                    }
                }
            }
            KernelSpec::Separable { beta, profile } => {
                for k in 0..d {
                    let m: f64 =
                        (0..n).map(|i| profile.value(positions[i * d + k])).sum::<f64>() / nf;
                    for i in 0..n {
                        out[i * d + k] = beta * profile.derivative(positions[i * d + k]) * m;
                    }
                }
            }
            KernelSpec::Quadratic { a, b } => {
                for k in 0..d {
                    let m: f64 = (0..n).map(|i| positions[i * d + k]).sum::<f64>() / nf;
                    for i in 0..n {
                        out[i * d + k] = a * positions[i * d + k] + b * m;
                    }
                }
            }
        }
        out
    }
}

/// Builtin confinement potentials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum PotentialSpec {
    Zero,
    /// `κ Σ_k (1 − cos x_k)`.
    Cosine { kappa: f64 },
    /// `½ κ |x|²`; line domain only.
    Quadratic { kappa: f64 },
}

impl PotentialSpec {
    pub fn name(&self) -> &'static str {
        match self {
            PotentialSpec::Zero => "zero",
            PotentialSpec::Cosine { .. } => "cosine",
            PotentialSpec::Quadratic { .. } => "quadratic",
        }
    }

    pub fn is_periodic(&self) -> bool {
        !matches!(self, PotentialSpec::Quadratic { .. })
    }
}

impl Potential for PotentialSpec {
    fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            PotentialSpec::Zero => 0.0,
            PotentialSpec::Cosine { kappa } => x.iter().map(|t| kappa * (1.0 - t.cos())).sum(),
            PotentialSpec::Quadratic { kappa } => x.iter().map(|t| 0.5 * kappa * t * t).sum(),
        }
    }

    fn grad(&self, x: &[f64]) -> DVector<f64> {
        let d = x.len();
        match *self {
            PotentialSpec::Zero => DVector::zeros(d),
            PotentialSpec::Cosine { kappa } => {
                DVector::from_iterator(d, x.iter().map(|t| kappa * t.sin()))
            }
            PotentialSpec::Quadratic { kappa } => {
                DVector::from_iterator(d, x.iter().map(|t| kappa * t))
            }
        }
    }

    fn hess(&self, x: &[f64]) -> DMatrix<f64> {
        let d = x.len();
        match *self {
            PotentialSpec::Zero => DMatrix::zeros(d, d),
            PotentialSpec::Cosine { kappa } => diag(x.iter().map(|t| kappa * t.cos()), d),
            PotentialSpec::Quadratic { kappa } => DMatrix::identity(d, d) * kappa,
        }
    }

    fn declared_bounds(&self) -> Option<EigenRange> {
        Some(match *self {
            PotentialSpec::Zero => EigenRange::point(0.0),
            PotentialSpec::Cosine { kappa } => EigenRange {
                lo: -kappa.abs(),
                hi: kappa.abs(),
            },
            PotentialSpec::Quadratic { kappa } => EigenRange::point(kappa),
        })
    }

    fn add_grad(&self, positions: &[f64], _d: usize, out: &mut [f64]) {
        match *self {
            PotentialSpec::Zero => {}
            PotentialSpec::Cosine { kappa } => {
                for (o, x) in out.iter_mut().zip(positions) {
                    *o += kappa * x.sin();
                }
            }
            PotentialSpec::Quadratic { kappa } => {
                for (o, x) in out.iter_mut().zip(positions) {
                    *o += kappa * x;
                }
            }
        }
    }
}

/// Every builtin name, for config validation and listings.
pub fn catalog() -> (&'static [&'static str], &'static [&'static str]) {
    (
        &["zero", "difference", "separable", "quadratic"],
        &["zero", "cosine", "quadratic"],
    )
}

/// Maximum defects found by [`validate_model`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub samples: usize,
    pub kernel_grad_x: f64,
    pub kernel_hess_xx: f64,
    pub kernel_hess_xy: f64,
    /// FD Hessian in `y` of `W(x, ·)` against `hess_xx(y, x)`.
    pub kernel_hess_yy_swap: f64,
    pub kernel_symmetry: f64,
    pub kernel_hess_symmetry: f64,
    pub potential_grad: f64,
    pub potential_hess: f64,
    /// Only measured on a torus.
    pub periodicity: Option<f64>,
    pub passed: bool,
}

impl ValidationReport {
    pub fn max_defect(&self) -> f64 {
        [
            self.kernel_grad_x,
            self.kernel_hess_xx,
            self.kernel_hess_xy,
            self.kernel_hess_yy_swap,
            self.kernel_symmetry,
            self.kernel_hess_symmetry,
            self.potential_grad,
            self.potential_hess,
            self.periodicity.unwrap_or(0.0),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(1.0)
}

fn check_finite(value: f64, quantity: &'static str, x: &[f64], y: &[f64]) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Evaluation {
            quantity,
            x: x.to_vec(),
            y: y.to_vec(),
        })
    }
}

fn check_all_finite<'a>(
    values: impl IntoIterator<Item = &'a f64>,
    quantity: &'static str,
    x: &[f64],
    y: &[f64],
) -> Result<()> {
    for v in values {
        check_finite(*v, quantity, x, y)?;
    }
    Ok(())
}

fn shifted(p: &[f64], k: usize, h: f64) -> Vec<f64> {
    let mut q = p.to_vec();
    q[k] += h;
    q
}

/// Check analytic derivatives against central finite differences, kernel
/// symmetry and (on a torus) periodicity at `samples` deterministic random
/// points.
///
/// Relative errors are measured against `max(1, |analytic|)`.
pub fn validate_model(
    kernel: &dyn Kernel,
    potential: &dyn Potential,
    domain: &PositionDomain,
    samples: usize,
) -> Result<ValidationReport> {
    if samples == 0 {
        return Err(Error::InvalidInput("validation needs at least one sample".into()));
    }
    domain.validate()?;
    let d = domain.dim;
    let h = FD_STEP;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_f00d);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..d)
            .map(|_| domain.lower() + rng.random::<f64>() * domain.length())
            .collect()
    };

    let mut rep = ValidationReport {
        samples,
        kernel_grad_x: 0.0,
        kernel_hess_xx: 0.0,
        kernel_hess_xy: 0.0,
        kernel_hess_yy_swap: 0.0,
        kernel_symmetry: 0.0,
        kernel_hess_symmetry: 0.0,
        potential_grad: 0.0,
        potential_hess: 0.0,
        periodicity: domain.is_torus().then_some(0.0),
        passed: false,
    };

    for _ in 0..samples {
        let x = draw(&mut rng);
        let y = draw(&mut rng);

        let w = check_finite(kernel.eval(&x, &y), "W", &x, &y)?;
        let w_swap = check_finite(kernel.eval(&y, &x), "W", &y, &x)?;
        rep.kernel_symmetry = rep.kernel_symmetry.max((w - w_swap).abs());

        let g = kernel.grad_x(&x, &y);
        check_all_finite(g.iter(), "grad_x W", &x, &y)?;
        let hxx = kernel.hess_xx(&x, &y);
        check_all_finite(hxx.iter(), "hess_xx W", &x, &y)?;
        let hxy = kernel.hess_xy(&x, &y);
        check_all_finite(hxy.iter(), "hess_xy W", &x, &y)?;
        let hxx_swap = kernel.hess_xx(&y, &x);
        check_all_finite(hxx_swap.iter(), "hess_xx W", &y, &x)?;
        rep.kernel_hess_symmetry = rep
            .kernel_hess_symmetry
            .max((&hxx - hxx.transpose()).amax());

        for k in 0..d {
            let xp = shifted(&x, k, h);
            let xm = shifted(&x, k, -h);
            let fd = (kernel.eval(&xp, &y) - kernel.eval(&xm, &y)) / (2.0 * h);
            rep.kernel_grad_x = rep.kernel_grad_x.max(rel_err(g[k], fd));

            // column k of hess_xx from FD of grad_x in x
            let gp = kernel.grad_x(&xp, &y);
            let gm = kernel.grad_x(&xm, &y);
            for l in 0..d {
                let fd = (gp[l] - gm[l]) / (2.0 * h);
                rep.kernel_hess_xx = rep.kernel_hess_xx.max(rel_err(hxx[(l, k)], fd));
            }

            // hess_xy(l, k) = ∂_{y_k} ∂_{x_l} W
            let yp = shifted(&y, k, h);
            let ym = shifted(&y, k, -h);
            let gp = kernel.grad_x(&x, &yp);
            let gm = kernel.grad_x(&x, &ym);
            for l in 0..d {
                let fd = (gp[l] - gm[l]) / (2.0 * h);
                rep.kernel_hess_xy = rep.kernel_hess_xy.max(rel_err(hxy[(l, k)], fd));
            }

            // second differences in y of W(x, ·) versus hess_xx(y, x)
            for l in 0..d {
                let fd = if k == l {
                    (kernel.eval(&x, &yp) - 2.0 * w + kernel.eval(&x, &ym)) / (h * h)
                } else {
                    let ypp = shifted(&yp, l, h);
                    let ypm = shifted(&yp, l, -h);
                    let ymp = shifted(&ym, l, h);
                    let ymm = shifted(&ym, l, -h);
                    (kernel.eval(&x, &ypp) - kernel.eval(&x, &ypm) - kernel.eval(&x, &ymp)
                        + kernel.eval(&x, &ymm))
                        / (4.0 * h * h)
                };
                rep.kernel_hess_yy_swap = rep
                    .kernel_hess_yy_swap
                    .max(rel_err(hxx_swap[(k, l)], fd));
            }
        }

        let u = check_finite(potential.eval(&x), "U", &x, &[])?;
        let gu = potential.grad(&x);
        check_all_finite(gu.iter(), "grad U", &x, &[])?;
        let hu = potential.hess(&x);
        check_all_finite(hu.iter(), "hess U", &x, &[])?;
        for k in 0..d {
            let xp = shifted(&x, k, h);
            let xm = shifted(&x, k, -h);
            let fd = (potential.eval(&xp) - potential.eval(&xm)) / (2.0 * h);
            rep.potential_grad = rep.potential_grad.max(rel_err(gu[k], fd));
            let gp = potential.grad(&xp);
            let gm = potential.grad(&xm);
            for l in 0..d {
                let fd = (gp[l] - gm[l]) / (2.0 * h);
                rep.potential_hess = rep.potential_hess.max(rel_err(hu[(l, k)], fd));
            }
        }

        if let Some(p) = rep.periodicity.as_mut() {
            let len = domain.length();
            for k in 0..d {
                let xs = shifted(&x, k, len);
                let dk = (kernel.eval(&xs, &y) - w).abs();
                let du = (potential.eval(&xs) - u).abs();
                *p = p.max(dk).max(du);
            }
        }
    }

    rep.passed = rep.max_defect() <= FD_TOLERANCE;
    Ok(rep)
}
