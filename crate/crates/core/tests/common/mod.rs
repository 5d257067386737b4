//! Independent reference computations shared by the integration tests.

#![allow(dead_code)]

use std::path::PathBuf;

use vfplab::config::ExperimentConfig;

pub fn config(name: &str) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    ExperimentConfig::load(&path).unwrap()
}

/// `R` in one dimension, written out entry by entry from the block definition.
///
/// `vxx`, `vyy` are `∂²_xx V(x, y)`, `∂²_yy V(y, x)` and `wxy` is `∂²_xy W`.
pub fn r_1d(z1: f64, z2: f64, vxx: f64, vyy: f64, wxy: f64) -> [[f64; 4]; 4] {
    let c = 1.0 + z1 * z2 + z2 * z2;
    let a = |h: f64| {
        [
            [z1 * z2, 0.5 * (c - z1 * z1 * h)],
            [0.5 * (c - z1 * z1 * h), 1.0 + z2 * z2 - z1 * z2 * h],
        ]
    };
    let b = [[0.0, -0.5 * z1 * z1 * wxy], [-0.5 * z1 * z1 * wxy, -z1 * z2 * wxy]];
    let (ax, ay) = (a(vxx), a(vyy));
    let mut r = [[0.0; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = 0.5 * ax[i][j];
            r[i][j + 2] = 0.5 * b[i][j];
            r[i + 2][j] = 0.5 * b[j][i];
            r[i + 2][j + 2] = 0.5 * ay[i][j];
        }
    }
    r
}

pub fn metric_1d(z1: f64, z2: f64) -> [[f64; 4]; 4] {
    let m = [[z1 * z1, z1 * z2], [z1 * z2, 1.0 + z2 * z2]];
    let mut out = [[0.0; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = m[i][j];
            out[i + 2][j + 2] = m[i][j];
        }
    }
    out
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Cofactor expansion along the first row.
pub fn det4(m: [[f64; 4]; 4]) -> f64 {
    let mut s = 0.0;
    for c in 0..4 {
        let mut minor = [[0.0; 3]; 3];
        for i in 1..4 {
            let mut k = 0;
            for j in 0..4 {
                if j != c {
                    minor[i - 1][k] = m[i][j];
                    k += 1;
                }
            }
        }
        let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * m[0][c] * det3(minor);
    }
    s
}

fn pencil(r: &[[f64; 4]; 4], m: &[[f64; 4]; 4], lambda: f64) -> f64 {
    let mut a = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            a[i][j] = r[i][j] - lambda * m[i][j];
        }
    }
    det4(a)
}

/// Coefficients `c0..c4` of `det(R − λM)` from exact interpolation at five nodes.
fn char_poly(r: &[[f64; 4]; 4], m: &[[f64; 4]; 4]) -> [f64; 5] {
    let nodes = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let vals: Vec<f64> = nodes.iter().map(|&t| pencil(r, m, t)).collect();
    // Newton divided differences, then expand to monomials
    let mut dd = vals.clone();
    for k in 1..5 {
        for i in (k..5).rev() {
            dd[i] = (dd[i] - dd[i - 1]) / (nodes[i] - nodes[i - k]);
        }
    }
    let mut coef = [0.0; 5];
    for k in (0..5).rev() {
        // coef = coef * (λ − nodes[k]) + dd[k]
        let mut next = [0.0; 5];
        for p in 0..4 {
            next[p + 1] += coef[p];
            next[p] -= nodes[k] * coef[p];
        }
        next[0] += dd[k];
        coef = next;
    }
    coef
}

/// Smallest root of `det(R − λM) = 0`: Durand-Kerner on the quartic, then
/// bisection on the determinant itself.
pub fn min_generalized_eig(r: &[[f64; 4]; 4], m: &[[f64; 4]; 4]) -> f64 {
    let c = char_poly(r, m);
    let lead = c[4];
    type C = (f64, f64);
    let mul = |a: C, b: C| (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0);
    let div = |a: C, b: C| {
        let d = b.0 * b.0 + b.1 * b.1;
        ((a.0 * b.0 + a.1 * b.1) / d, (a.1 * b.0 - a.0 * b.1) / d)
    };
    let eval = |z: C| {
        let mut acc = (c[4] / lead, 0.0);
        for k in (0..4).rev() {
            acc = mul(acc, z);
            acc.0 += c[k] / lead;
        }
        acc
    };
    let scale = 1.0 + c[..4].iter().map(|x| (x / lead).abs()).fold(0.0, f64::max);
    let mut roots: Vec<C> = (0..4)
        .map(|k| {
            let th = 0.4 + k as f64 * std::f64::consts::FRAC_PI_2;
            (0.5 * scale * th.cos(), 0.5 * scale * th.sin())
        })
        .collect();
    for _ in 0..500 {
        for i in 0..4 {
            let mut den = (1.0, 0.0);
            for j in 0..4 {
                if i != j {
                    den = mul(den, (roots[i].0 - roots[j].0, roots[i].1 - roots[j].1));
                }
            }
            let step = div(eval(roots[i]), den);
            roots[i] = (roots[i].0 - step.0, roots[i].1 - step.1);
        }
    }
    let guess = roots.iter().map(|z| z.0).fold(f64::INFINITY, f64::min);
    let width = 1e-6 * guess.abs().max(1.0);
    // a simple root changes the sign of det; a double root is a simple root
    // of the derivative
    let det = |t: f64| pencil(r, m, t);
    let slope = |t: f64| c[1] + t * (2.0 * c[2] + t * (3.0 * c[3] + t * 4.0 * c[4]));
    bisect(det, guess - width, guess + width)
        .or_else(|| bisect(slope, guess - width, guess + width))
        .unwrap_or(guess)
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Option<f64> {
    let flo = f(lo);
    if flo == 0.0 || flo.signum() == f(hi).signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid).signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Plain Picard iteration `ρ ← e^{−U − W⊛ρ} / Z` with rectangle quadrature
/// on the periodic nodes.
pub fn picard_oracle(
    w: impl Fn(f64, f64) -> f64,
    u: impl Fn(f64) -> f64,
    xs: &[f64],
    hx: f64,
    tol: f64,
) -> Vec<f64> {
    let n = xs.len();
    let mut rho = vec![0.0; n];
    for _ in 0..10_000 {
        let mut next: Vec<f64> = xs
            .iter()
            .map(|&x| {
                let conv: f64 = xs.iter().zip(&rho).map(|(&y, r)| hx * w(x, y) * r).sum();
                (-u(x) - conv).exp()
            })
            .collect();
        let z: f64 = next.iter().sum::<f64>() * hx;
        next.iter_mut().for_each(|r| *r /= z);
        let diff = next.iter().zip(&rho).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        rho = next;
        if diff < tol {
            break;
        }
    }
    rho
}
