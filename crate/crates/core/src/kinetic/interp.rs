//! Shift-by-constant Lagrange interpolation on uniform 1d grids.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    Linear,
    Cubic,
    #[default]
    Quintic,
}

impl Interpolation {
    /// Half-width `r` of the stencil `{−r+1, …, r}`.
    fn half_width(self) -> i64 {
        match self {
            Interpolation::Linear => 1,
            Interpolation::Cubic => 2,
            Interpolation::Quintic => 3,
        }
    }
}

/// Weights for evaluating at index position `base + φ`, `φ ∈ (0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    pub base: i64,
    pub offsets: Vec<i64>,
    pub weights: Vec<f64>,
    pub linear: [f64; 2],
}

impl Stencil {
    /// Stencil for the value at fractional index `pos`.
    pub fn at(pos: f64, order: Interpolation) -> Self {
        // pick base so that φ lies in (0, 1]; φ = 1 lands exactly on a node
        let mut base = pos.floor() as i64;
        let mut phi = pos - base as f64;
        if phi == 0.0 {
            base -= 1;
            phi = 1.0;
        }
        let r = order.half_width();
        let offsets: Vec<i64> = (-r + 1..=r).collect();
        let weights = offsets
            .iter()
            .map(|&m| {
                offsets
                    .iter()
                    .filter(|&&n| n != m)
                    .map(|&n| (phi - n as f64) / (m - n) as f64)
                    .product()
            })
            .collect();
        Stencil {
            base,
            offsets,
            weights,
            linear: [1.0 - phi, phi],
        }
    }
}

/// `out[i] = f(i − shift)` on a periodic grid, with a linear fallback where
/// the high-order value is negative.
pub fn shift_periodic(src: &[f64], shift: f64, order: Interpolation, out: &mut [f64]) {
    let n = src.len() as i64;
    let st = Stencil::at(-shift, order);
    let get = |k: i64| src[k.rem_euclid(n) as usize];
    for (i, o) in out.iter_mut().enumerate() {
        let b = i as i64 + st.base;
        let hi: f64 = st
            .offsets
            .iter()
            .zip(&st.weights)
            .map(|(m, w)| w * get(b + m))
            .sum();
        *o = if hi >= 0.0 {
            hi
        } else {
            st.linear[0] * get(b) + st.linear[1] * get(b + 1)
        };
    }
}

/// `out[j] = f(j − shift)` with `f = 0` outside the grid, same fallback.
pub fn shift_zero_extended(src: &[f64], shift: f64, order: Interpolation, out: &mut [f64]) {
    let n = src.len() as i64;
    let st = Stencil::at(-shift, order);
    let get = |k: i64| if (0..n).contains(&k) { src[k as usize] } else { 0.0 };
    for (j, o) in out.iter_mut().enumerate() {
        let b = j as i64 + st.base;
        let hi: f64 = st
            .offsets
            .iter()
            .zip(&st.weights)
            .map(|(m, w)| w * get(b + m))
            .sum();
        *o = if hi >= 0.0 {
            hi
        } else {
            st.linear[0] * get(b) + st.linear[1] * get(b + 1)
        };
    }
}

/// First-order upwind shift by `c = shift` cells, `|c| ≤ 1`, periodic.
pub fn upwind_periodic(src: &[f64], c: f64, out: &mut [f64]) {
    let n = src.len();
    for i in 0..n {
        let here = src[i];
        out[i] = if c >= 0.0 {
            here - c * (here - src[(i + n - 1) % n])
        } else {
            here - c * (src[(i + 1) % n] - here)
        };
    }
}

/// First-order upwind shift with zero inflow.
pub fn upwind_zero_extended(src: &[f64], c: f64, out: &mut [f64]) {
    let n = src.len();
    for j in 0..n {
        let here = src[j];
        out[j] = if c >= 0.0 {
            let left = if j > 0 { src[j - 1] } else { 0.0 };
            here - c * (here - left)
        } else {
            let right = if j + 1 < n { src[j + 1] } else { 0.0 };
            here - c * (right - here)
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_one_and_reproduce_polynomials() {
        for order in [Interpolation::Linear, Interpolation::Cubic, Interpolation::Quintic] {
            let deg = 2 * order.half_width() - 1;
            for &pos in &[3.2, 3.0, 7.999, -1.5] {
                let st = Stencil::at(pos, order);
                assert_relative_eq!(st.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-13);
                let p = |x: f64| x.powi(deg as i32) - 2.0 * x + 0.5;
                let val: f64 = st
                    .offsets
                    .iter()
                    .zip(&st.weights)
                    .map(|(m, w)| w * p((st.base + m) as f64))
                    .sum();
                assert_relative_eq!(val, p(pos), max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn integer_shift_is_exact_and_conserves_sum() {
        let src: Vec<f64> = (0..16).map(|i| (i as f64 * 0.4).sin() + 2.0).collect();
        let mut out = vec![0.0; 16];
        shift_periodic(&src, 3.0, Interpolation::Quintic, &mut out);
        for i in 0..16 {
            assert_eq!(out[i], src[(i + 13) % 16]);
        }
        shift_periodic(&src, 0.37, Interpolation::Quintic, &mut out);
        assert_relative_eq!(out.iter().sum::<f64>(), src.iter().sum::<f64>(), epsilon = 1e-12);
    }

    #[test]
    fn fallback_keeps_values_nonnegative() {
        let mut src = vec![0.0; 32];
        src[10] = 1.0;
        for order in [Interpolation::Cubic, Interpolation::Quintic] {
            let mut out = vec![0.0; 32];
            shift_periodic(&src, 0.4, order, &mut out);
            assert!(out.iter().all(|v| *v >= 0.0));
            shift_zero_extended(&src, -0.3, order, &mut out);
            assert!(out.iter().all(|v| *v >= 0.0));
        }
    }

    #[test]
    fn upwind_matches_linear_for_small_shift() {
        let src: Vec<f64> = (0..12).map(|i| 1.0 + (i as f64).cos()).collect();
        let (mut a, mut b) = (vec![0.0; 12], vec![0.0; 12]);
        upwind_periodic(&src, 0.3, &mut a);
        shift_periodic(&src, 0.3, Interpolation::Linear, &mut b);
        for (x, y) in a.iter().zip(&b) {
            assert_relative_eq!(x, y, epsilon = 1e-14);
        }
        upwind_zero_extended(&src, -0.3, &mut a);
        shift_zero_extended(&src, -0.3, Interpolation::Linear, &mut b);
        for (x, y) in a.iter().zip(&b) {
            assert_relative_eq!(x, y, epsilon = 1e-14);
        }
    }
}
