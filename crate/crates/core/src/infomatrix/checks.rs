//! Closed-form sufficient conditions for `R ⪰ λ M̂` in terms of scalar
//! eigenvalue bounds of the model Hessians.
//!
//! Notation: `λ̃` is an eigenvalue of `∇²_xx W` (or of `∇²_xx V`, where
//! stated), `λᵂ` one of `∇²_xy W`, and `[λ̲, λ̄]` bounds `∇²U`.

use serde::{Deserialize, Serialize};

use crate::model::{DirectionPair, EigenRange};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Feasible,
    Infeasible,
    Skipped,
}

/// One row of a checker table, as reported by the CLI and stored in
/// certificates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check: String,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default)]
    pub detail: serde_json::Value,
}

impl CheckRecord {
    pub fn new(check: &str, feasible: bool, detail: impl Serialize) -> Self {
        Self {
            check: check.to_string(),
            verdict: if feasible {
                Verdict::Feasible
            } else {
                Verdict::Infeasible
            },
            note: None,
            detail: serde_json::to_value(detail).unwrap_or(serde_json::Value::Null),
        }
    }

    pub fn skipped(check: &str, note: &str) -> Self {
        Self {
            check: check.to_string(),
            verdict: Verdict::Skipped,
            note: Some(note.to_string()),
            detail: serde_json::Value::Null,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Declared eigenvalue ranges used by the analytic checkers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenBoundSpec {
    /// Eigenvalues `λ̃` of `∇²_xx W`, or of `∇²_xx V` for the Gershgorin check.
    pub wxx_range: EigenRange,
    /// Eigenvalues `λᵂ` of `∇²_xy W`.
    pub wxy_range: EigenRange,
    /// `[λ̲, λ̄]` for `∇²U`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_range: Option<EigenRange>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Case1Result {
    pub feasible: bool,
    pub c1: f64,
    pub c2: f64,
    /// `(C1, C2]`: every `λ_Wxx` in it is a valid witness.
    pub lambda_wxx_interval: Option<(f64, f64)>,
}

/// The two Gershgorin row bounds of `A` at a single `λ̃`.
pub fn gershgorin_rows(dir: &DirectionPair, wxx: f64) -> (f64, f64) {
    let (z1, z2) = (dir.z1, dir.z2);
    let off = (0.5 * ((1.0 + z1 * z2 + z2 * z2) - z1 * z1 * wxx)).abs();
    (z1 * z2 - off, (1.0 + z2 * z2) - z1 * z2 * wxx - off)
}

/// Diagonal-dominance check of `A` combined with a Schur bound on `B`.
pub fn check_case1_gershgorin(dir: &DirectionPair, bounds: &EigenBoundSpec) -> Case1Result {
    let (z1, z2) = (dir.z1, dir.z2);
    let (z1s, z2s) = (z1 * z1, z2 * z2);
    let factor =
        ((z1s * z2s + 0.5 * z1s * z1s + (z1s * z1s * z2s * z2s + z1s * z1s * z1s * z2s).sqrt())
            / 2.0)
            .sqrt();
    let c1 = factor * bounds.wxy_range.max_abs();
    // both row bounds are concave in λ̃, so the endpoints give the minimum
    let c2 = [bounds.wxx_range.lo, bounds.wxx_range.hi]
        .into_iter()
        .map(|w| {
            let (r1, r2) = gershgorin_rows(dir, w);
            r1.min(r2)
        })
        .fold(f64::INFINITY, f64::min);
    let feasible = c1 < c2 && c2 > 0.0;
    Case1Result {
        feasible,
        c1,
        c2,
        lambda_wxx_interval: feasible.then_some((c1, c2)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Case2General {
    pub z1: f64,
    pub z2: f64,
    pub z1z2: f64,
    /// `1 + z1z2 − z2²`.
    pub linear: f64,
    /// `−z1⁴λ̄² + 2(1 + z1z2 − z2²)z1²λ̲ + 2z1z2 + 2z1z2³ − 1 − (z1² + 2)z2² − z2⁴`.
    pub quadratic: f64,
    pub feasible: bool,
}

/// Schur-complement condition for `A ≻ 0` with `∇²_xy W = 0`, general `z1`.
pub fn check_case2_general(dir: &DirectionPair, lambda_lo: f64, lambda_hi: f64) -> Case2General {
    let (z1, z2) = (dir.z1, dir.z2);
    let z1z2 = z1 * z2;
    let linear = 1.0 + z1z2 - z2 * z2;
    let quadratic = -z1.powi(4) * lambda_hi * lambda_hi
        + 2.0 * linear * z1 * z1 * lambda_lo
        + 2.0 * z1z2
        + 2.0 * z1 * z2.powi(3)
        - 1.0
        - (z1 * z1 + 2.0) * z2 * z2
        - z2.powi(4);
    Case2General {
        z1,
        z2,
        z1z2,
        linear,
        quadratic,
        feasible: z1z2 > 0.0 && linear > 0.0 && quadratic > 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Case2Result {
    pub z2: f64,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub delta: f64,
    /// Right-hand side of `2λ̲ − λ̄² > threshold`; `1 − δ` unless overridden.
    pub threshold: f64,
    pub z2_in_range: bool,
    /// `2λ̲ − λ̄²`.
    pub first_lhs: f64,
    /// `2(z2 − z2²)λ̲ + 2z2 + 2z2³ − z2⁴ − 3z2²`.
    pub second_lhs: f64,
    pub first_holds: bool,
    pub second_holds: bool,
    pub feasible: bool,
    /// The general-`z1` form evaluated at `z1 = 1`.
    pub general: Case2General,
}

/// The `z1 = 1` simplification, with threshold `1 − δ` on the first condition.
pub fn check_case2_schur(z2: f64, lambda_lo: f64, lambda_hi: f64, delta: f64) -> Case2Result {
    check_case2_schur_with_threshold(z2, lambda_lo, lambda_hi, delta, 1.0 - delta)
}

/// As [`check_case2_schur`] with an explicit threshold for `2λ̲ − λ̄²`.
pub fn check_case2_schur_with_threshold(
    z2: f64,
    lambda_lo: f64,
    lambda_hi: f64,
    delta: f64,
    threshold: f64,
) -> Case2Result {
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    let z2_in_range = z2 > 0.0 && z2 < golden;
    let first_lhs = 2.0 * lambda_lo - lambda_hi * lambda_hi;
    let second_lhs = 2.0 * (z2 - z2 * z2) * lambda_lo + 2.0 * z2 + 2.0 * z2.powi(3)
        - z2.powi(4)
        - 3.0 * z2 * z2;
    let first_holds = first_lhs > threshold;
    let second_holds = second_lhs > delta;
    Case2Result {
        z2,
        lambda_lo,
        lambda_hi,
        delta,
        threshold,
        z2_in_range,
        first_lhs,
        second_lhs,
        first_holds,
        second_holds,
        feasible: z2_in_range && first_holds && second_holds,
        general: check_case2_general(&DirectionPair::new(1.0, z2), lambda_lo, lambda_hi),
    }
}

/// Open interval of admissible `λ̃` given `λ_U`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpenInterval {
    pub lo: f64,
    pub hi: f64,
}

impl OpenInterval {
    pub fn contains(&self, t: f64) -> bool {
        self.lo < t && t < self.hi
    }
}

/// `(−2λ_U(z2 + √(z1² + z2²))/z1³, 2λ_U(√(z1² + z2²) − z2)/z1³)`, the set
/// where `λ_U(λ_U − z1z2λ̃) − z1⁴λ̃²/4 > 0`.
///
/// Endpoints are returned in increasing order, so a negative `z1` is
/// accepted.
pub fn check_example2_interval(dir: &DirectionPair, lambda_u: f64) -> OpenInterval {
    let (z1, z2) = (dir.z1, dir.z2);
    let r = (z1 * z1 + z2 * z2).sqrt();
    let z1c = z1.powi(3);
    let a = -2.0 * lambda_u * (z2 + r) / z1c;
    let b = 2.0 * lambda_u * (r - z2) / z1c;
    OpenInterval {
        lo: a.min(b),
        hi: a.max(b),
    }
}

/// Smallest eigenvalue of `[[z1z2, ½(1+z1z2+z2²−z1²t)], [·, 1+z2²−z1z2 t]]`.
pub fn a2_scalar_min_eig(dir: &DirectionPair, t: f64) -> f64 {
    let (z1, z2) = (dir.z1, dir.z2);
    let p = z1 * z2;
    let q = 0.5 * (1.0 + z1 * z2 + z2 * z2 - z1 * z1 * t);
    let r = 1.0 + z2 * z2 - z1 * z2 * t;
    let mean = 0.5 * (p + r);
    let rad = (0.25 * (p - r) * (p - r) + q * q).sqrt();
    mean - rad
}

/// Interior samples used by [`compute_lambda_u`] in addition to the endpoints.
pub const LAMBDA_U_SAMPLES: usize = 64;

/// `min_{t ∈ [λ̲, λ̄]}` of [`a2_scalar_min_eig`], over the endpoints and
/// [`LAMBDA_U_SAMPLES`] interior points.
pub fn compute_lambda_u(dir: &DirectionPair, lambda_lo: f64, lambda_hi: f64) -> f64 {
    let mut best = a2_scalar_min_eig(dir, lambda_lo).min(a2_scalar_min_eig(dir, lambda_hi));
    for k in 1..=LAMBDA_U_SAMPLES {
        let t = lambda_lo + (lambda_hi - lambda_lo) * k as f64 / (LAMBDA_U_SAMPLES + 1) as f64;
        best = best.min(a2_scalar_min_eig(dir, t));
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchurChainResult {
    pub lambda_u: f64,
    pub wxx_eig: f64,
    pub wxy_eig: f64,
    /// `D = λ_U(λ_U − z1z2λ̃) − z1⁴λ̃²/4`.
    pub d: f64,
    /// `α = λ_U − z1z2λ̃`.
    pub alpha: f64,
    /// `4λ_U D − z1⁴λ_U(λᵂ)²`.
    pub first: f64,
    /// The full second inequality, no truncation in `λᵂ`.
    pub second: f64,
    /// `64 D² (λ_U α − z1⁴λ̃²/4)`, the `λᵂ → 0` limit of `second`.
    pub leading_term: f64,
    pub d_holds: bool,
    pub first_holds: bool,
    pub second_holds: bool,
    pub feasible: bool,
}

/// Exact Schur chain for `J1 + λ_U I ⪰ 0` at one eigenvalue pair.
pub fn check_example2_schur_chain(
    dir: &DirectionPair,
    lambda_u: f64,
    wxx_eig: f64,
    wxy_eig: f64,
) -> SchurChainResult {
    let (z1, z2) = (dir.z1, dir.z2);
    let t = wxx_eig;
    let w2 = wxy_eig * wxy_eig;
    let z1_2 = z1 * z1;
    let z1_4 = z1_2 * z1_2;
    let alpha = lambda_u - z1 * z2 * t;
    let d = lambda_u * alpha - 0.25 * z1_4 * t * t;
    let first = 4.0 * lambda_u * d - z1_4 * lambda_u * w2;
    let bracket = 4.0 * d * alpha
        - (z1_4 * w2 * alpha
            + 2.0 * z1_4 * z1 * z2 * w2 * t
            + 4.0 * lambda_u * (z1 * z2) * (z1 * z2) * w2);
    let square = 4.0 * d * z1_2 * t + 4.0 * z1_2 * z1 * z2 * w2 * lambda_u + z1_4 * z1_2 * w2 * t;
    let second = 4.0 * first * bracket - square * square;
    let leading_term = 64.0 * d * d * (lambda_u * alpha - 0.25 * z1_4 * t * t);
    let d_holds = d > 0.0;
    let first_holds = first > 0.0;
    let second_holds = second > 0.0;
    SchurChainResult {
        lambda_u,
        wxx_eig,
        wxy_eig,
        d,
        alpha,
        first,
        second,
        leading_term,
        d_holds,
        first_holds,
        second_holds,
        feasible: d_holds && first_holds && second_holds,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Remark3Result {
    /// `(z1z2 − 1 − z2²)/2`.
    pub b1: f64,
    /// `−(z1z2 − 1 − z2²)/2 − 2z1z2 λ̂`.
    pub b2: f64,
    /// `min(b1, b2)`: no `λ` above this is reachable by the Gershgorin route.
    pub bound: f64,
    /// Whether `½[(1 + z1z2 + z2²) − z1²λ̂] > 0`, under which the reduction
    /// to `b1, b2` is valid.
    pub assumption_holds: bool,
}

/// Gershgorin upper bound on `λ` for a difference kernel without confinement.
pub fn check_remark3(dir: &DirectionPair, wdiff_eig: f64) -> Remark3Result {
    let (z1, z2) = (dir.z1, dir.z2);
    let s = z1 * z2 - 1.0 - z2 * z2;
    let b1 = 0.5 * s;
    let b2 = -0.5 * s - 2.0 * z1 * z2 * wdiff_eig;
    Remark3Result {
        b1,
        b2,
        bound: b1.min(b2),
        assumption_holds: 0.5 * ((1.0 + z1 * z2 + z2 * z2) - z1 * z1 * wdiff_eig) > 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn bounds(wxx: (f64, f64), wxy: (f64, f64)) -> EigenBoundSpec {
        EigenBoundSpec {
            wxx_range: EigenRange::new(wxx.0, wxx.1).unwrap(),
            wxy_range: EigenRange::new(wxy.0, wxy.1).unwrap(),
            u_range: None,
        }
    }

    #[test]
    fn gershgorin_without_cross_term() {
        let r = check_case1_gershgorin(&DirectionPair::new(1.0, 0.3), &bounds((0.9, 0.9), (0.0, 0.0)));
        assert_eq!(r.c1, 0.0);
        assert_relative_eq!(r.c2, 0.055, epsilon = 1e-14);
        assert!(r.feasible);
        assert_eq!(r.lambda_wxx_interval, Some((0.0, r.c2)));
    }

    #[test]
    fn gershgorin_large_cross_term_fails() {
        let dir = DirectionPair::new(1.0, 0.3);
        let small = check_case1_gershgorin(&dir, &bounds((0.9, 0.9), (-1.0, 1.0)));
        let big = check_case1_gershgorin(&dir, &bounds((0.9, 0.9), (-10.0, 10.0)));
        assert_relative_eq!(big.c1, 10.0 * small.c1, epsilon = 1e-12);
        assert!(big.c1 > big.c2 && !big.feasible);
    }

    #[test]
    fn gershgorin_needs_positive_z2() {
        let r = check_case1_gershgorin(&DirectionPair::new(1.0, 0.0), &bounds((0.5, 2.0), (0.0, 0.0)));
        assert!(r.c2 <= 0.0 && !r.feasible);
    }

    #[test]
    fn case2_examples() {
        let r = check_case2_schur(0.3, 0.99, 0.99, 0.02);
        assert_relative_eq!(r.second_lhs, 0.42 * 0.99 + 0.3759, epsilon = 1e-12);
        assert_relative_eq!(r.first_lhs, 0.9999, epsilon = 1e-12);
        assert!(r.feasible);

        assert!(!check_case2_schur(0.0, 0.99, 0.99, 0.02).feasible);

        let r = check_case2_schur(0.3, 0.9, 0.9, 0.02);
        assert_relative_eq!(r.first_lhs, 0.99, epsilon = 1e-12);
        assert!(r.first_holds && r.feasible);

        // the weaker threshold admits a range the 1 − δ reading rejects
        let loose = check_case2_schur_with_threshold(0.3, 0.6, 0.6, 0.02, 0.08);
        let strict = check_case2_schur(0.3, 0.6, 0.6, 0.02);
        assert!(loose.first_holds && !strict.first_holds);
    }

    #[test]
    fn case2_general_form_at_z1_one() {
        // with z1 = 1 the general quadratic collapses to the simple form
        for &(z2, lo, hi) in &[(0.3, 0.99, 0.99), (0.5, 0.8, 1.1), (1.2, 0.7, 0.9)] {
            let g = check_case2_general(&DirectionPair::new(1.0, z2), lo, hi);
            let simple = -(hi * hi) + 2.0 * (1.0 + z2 - z2 * z2) * lo + 2.0 * z2 + 2.0 * z2.powi(3)
                - 1.0
                - 3.0 * z2 * z2
                - z2.powi(4);
            assert_relative_eq!(g.quadratic, simple, epsilon = 1e-13);
        }
    }

    #[test]
    fn interval_examples() {
        let i = check_example2_interval(&DirectionPair::new(1.0, 0.3), 0.2);
        assert_relative_eq!(i.lo, -0.4 * (0.3 + 1.09f64.sqrt()), epsilon = 1e-14);
        assert_relative_eq!(i.hi, 0.4 * (1.09f64.sqrt() - 0.3), epsilon = 1e-14);
        let i = check_example2_interval(&DirectionPair::new(1.0, 0.0), 1.0);
        assert_eq!((i.lo, i.hi), (-2.0, 2.0));
        let i = check_example2_interval(&DirectionPair::new(2.0, 0.3), 0.2);
        assert_relative_eq!(i.lo, -0.4 * (0.3 + 4.09f64.sqrt()) / 8.0, epsilon = 1e-14);
        assert_relative_eq!(i.hi, 0.4 * (4.09f64.sqrt() - 0.3) / 8.0, epsilon = 1e-14);
    }

    #[test]
    fn interval_endpoints_are_roots_of_d() {
        for &(z1, z2, lu) in &[(1.0, 0.3, 0.2), (2.0, 0.7, 0.5), (0.4, 1.5, 0.1)] {
            let dir = DirectionPair::new(z1, z2);
            let i = check_example2_interval(&dir, lu);
            for t in [i.lo, i.hi] {
                let d = check_example2_schur_chain(&dir, lu, t, 0.0).d;
                assert!(d.abs() < 1e-12, "{d}");
            }
            let mid = 0.5 * (i.lo + i.hi);
            assert!(check_example2_schur_chain(&dir, lu, mid, 0.0).d > 0.0);
        }
    }

    #[test]
    fn lambda_u_examples() {
        let dir = DirectionPair::new(1.0, 0.3);
        let l = compute_lambda_u(&dir, 0.9, 0.9);
        let oracle = DMatrix::from_row_slice(2, 2, &[0.3, 0.245, 0.245, 0.82])
            .symmetric_eigenvalues()
            .min();
        assert_relative_eq!(l, oracle, epsilon = 1e-14);
        assert_relative_eq!(l, 0.2028, epsilon = 1e-4);
        assert_relative_eq!(compute_lambda_u(&dir, 1.39, 1.39), 0.3, epsilon = 1e-12);
        assert!(compute_lambda_u(&DirectionPair::new(1.0, 0.0), 0.5, 0.5) < 0.0);
    }

    #[test]
    fn schur_chain_examples() {
        let dir = DirectionPair::new(1.0, 0.3);
        assert!(check_example2_schur_chain(&dir, 0.2028, -0.12, 1e-3).feasible);
        let r = check_example2_schur_chain(&dir, 0.2, 0.0, 0.0);
        assert_relative_eq!(r.d, 0.04, epsilon = 1e-15);
        assert!(r.feasible);
    }

    #[test]
    fn schur_chain_without_cross_term_reduces() {
        let dir = DirectionPair::new(1.0, 0.3);
        for &t in &[-0.5, -0.12, 0.0, 0.2, 0.29, 0.4] {
            let r = check_example2_schur_chain(&dir, 0.2028, t, 0.0);
            assert_relative_eq!(r.second, r.leading_term, max_relative = 1e-12, epsilon = 1e-18);
            assert_relative_eq!(
                r.second,
                16.0 * 0.2028 * r.d * 4.0 * r.d * r.alpha - (4.0 * r.d * t).powi(2),
                max_relative = 1e-12,
                epsilon = 1e-18
            );
            assert_eq!(r.feasible, r.d > 0.0);
        }
    }

    #[test]
    fn unconfined_difference_bound_examples() {
        let r = check_remark3(&DirectionPair::new(1.0, 0.3), 0.5);
        assert_relative_eq!(r.bound, -0.395, epsilon = 1e-14);
        assert_relative_eq!(r.b2, 0.095, epsilon = 1e-14);
        assert!(r.assumption_holds);
        let r = check_remark3(&DirectionPair::new(2.0, 1.0), 0.0);
        assert_eq!(r.bound, 0.0);
        let r = check_remark3(&DirectionPair::new(1.0, 0.3), 0.0);
        assert_relative_eq!(r.bound, -0.395, epsilon = 1e-14);
        assert_relative_eq!(r.b2, 0.395, epsilon = 1e-14);
    }

    #[test]
    fn records_serialize() {
        let rec = CheckRecord::new("gershgorin", true, check_remark3(&DirectionPair::new(1.0, 0.3), 0.1));
        let text = serde_json::to_string(&rec).unwrap();
        assert!(text.contains("\"verdict\":\"feasible\""));
        let skipped = CheckRecord::skipped("schur chain", "bounds not declared");
        assert_eq!(skipped.verdict, Verdict::Skipped);
    }
}
