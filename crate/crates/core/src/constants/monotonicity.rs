//! Continuous extensions of the mode quotients in x = 2k, used as a finite
//! certificate that the tail k ≥ 1 cannot undercut the scanned minimum.

use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::{check_k_params, int, pow, rat, to_f64, InequalityParams};
use crate::error::Result;

pub const TAIL_GRID_START: f64 = 2.0;
pub const TAIL_GRID_END: f64 = 200.0;
pub const TAIL_GRID_STEP: f64 = 0.1;

/// 𝓕(x) = t⁴(t+4α+4)² / (4[t² + 2(α+1)x]²) with t = N+x-α-3.
pub fn k_tail_value(params: &InequalityParams, x: f64) -> f64 {
    let a = params.alpha;
    let t = params.nf() + x - a - 3.0;
    let s = t * t + 2.0 * (a + 1.0) * x;
    t.powi(4) * (t + 4.0 * a + 4.0).powi(2) / (4.0 * s * s)
}

/// d𝓕/dx = ∂𝒢/∂x + ∂𝒢/∂t, since dt/dx = 1.
pub fn k_tail_derivative(params: &InequalityParams, x: f64) -> f64 {
    let a = params.alpha;
    let t = params.nf() + x - a - 3.0;
    let s = t * t + 2.0 * (a + 1.0) * x;
    let u = t + 4.0 * a + 4.0;
    let s3 = s * s * s;
    let dx = -(a + 1.0) * t.powi(4) * u * u / s3;
    let dt = u * t.powi(3) * (t.powi(3) + 2.0 * (a + 1.0) * x * (3.0 * t + 8.0 * a + 8.0))
        / (2.0 * s3);
    dx + dt
}

/// The factorization 𝒥(N, x/2) = g(x)·h(x) with D = x² + 2(N-2)x + (N-3)².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JTailParts {
    pub f: f64,
    pub g: f64,
    pub h: f64,
    pub dg: f64,
    pub dh: f64,
}

pub fn j_tail_parts(n: u32, x: f64) -> JTailParts {
    let n = n as f64;
    let d = x * x + 2.0 * (n - 2.0) * x + (n - 3.0).powi(2);
    let p = n + x + 1.0;
    let m = n + x - 3.0;
    let g = p * p / (4.0 * d.powf(0.25));
    let h = m.powi(4) / d.powf(1.75);
    let dg = p
        * (3.0 * x * x + 3.0 * (2.0 * n - 5.0) * x + 4.0 * (n - 3.0).powi(2)
            - (n * n - n - 2.0))
        / (8.0 * d.powf(1.25));
    let dh = m.powi(3) * (x * x + (2.0 * n + 3.0) * x + (n * n - 13.0 * n + 30.0))
        / (2.0 * d.powf(2.75));
    JTailParts {
        f: m.powi(4) * p * p / (4.0 * d * d),
        g,
        h,
        dg,
        dh,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCertificate {
    pub passed: bool,
    pub samples: usize,
    /// Smallest (𝓕(x+h) - 𝓕(x)) / |𝓕(x)| on the grid.
    pub min_relative_increment: f64,
    /// Smallest 𝓕'(x) / |𝓕(x)| on the grid.
    pub min_relative_derivative: f64,
    pub first_failure: Option<f64>,
}

/// Samples 𝓕 on x ∈ [2, 200] with step 0.1 and checks both the forward
/// increments (slack 1e-12 relative) and the sign of the analytic derivative.
pub fn tail_certificate(params: &InequalityParams) -> Result<TailCertificate> {
    check_k_params(params)?;
    let steps = ((TAIL_GRID_END - TAIL_GRID_START) / TAIL_GRID_STEP).round() as usize;
    let mut min_inc = f64::INFINITY;
    let mut min_der = f64::INFINITY;
    let mut first_failure = None;
    for i in 0..steps {
        let x = TAIL_GRID_START + i as f64 * TAIL_GRID_STEP;
        let f0 = k_tail_value(params, x);
        let f1 = k_tail_value(params, x + TAIL_GRID_STEP);
        let scale = f0.abs().max(f64::MIN_POSITIVE);
        let inc = (f1 - f0) / scale;
        let der = k_tail_derivative(params, x) / scale;
        min_inc = min_inc.min(inc);
        min_der = min_der.min(der);
        if first_failure.is_none() && (inc < -1e-12 || der < -1e-10) {
            first_failure = Some(x);
        }
    }
    Ok(TailCertificate {
        passed: first_failure.is_none(),
        samples: steps,
        min_relative_increment: min_inc,
        min_relative_derivative: min_der,
        first_failure,
    })
}

/// The two polynomial inequalities behind 𝒦(N,α,1) ≥ 𝒦(N,α,0), with
/// y = N-α-1, evaluated exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step2Check {
    pub quartic_lhs: f64,
    pub quartic_rhs: f64,
    pub quartic_holds: bool,
    pub quadratic_lhs: f64,
    pub quadratic_rhs: f64,
    pub quadratic_holds: bool,
}

pub fn step2_inequalities(params: &InequalityParams) -> Result<Step2Check> {
    check_k_params(params)?;
    let a = rat(params.alpha);
    let one = BigRational::one();
    let y = int(params.n as i64) - &a - &one;
    let a1 = &a + &one;
    // y⁴(y+4α+4)² ≥ (y+4α+2)²(y²+4α+4)²
    let l1 = pow(&y, 4) * pow(&(&y + int(4) * &a1), 2);
    let r1 = pow(&(&y + int(4) * &a + int(2)), 2) * pow(&(pow(&y, 2) + int(4) * &a1), 2);
    // y² ≥ 2(α+1)y + 4(α+1)(2α+1)
    let l2 = pow(&y, 2);
    let r2 = int(2) * &a1 * &y + int(4) * &a1 * (int(2) * &a + &one);
    Ok(Step2Check {
        quartic_lhs: to_f64(&l1),
        quartic_rhs: to_f64(&r1),
        quartic_holds: l1 >= r1,
        quadratic_lhs: to_f64(&l2),
        quadratic_rhs: to_f64(&r2),
        quadratic_holds: l2 >= r2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{mode_quotient_j_exact, mode_quotient_k_exact};

    #[test]
    fn extension_interpolates_modes() {
        let p = InequalityParams::new(9, 0.7).unwrap();
        for k in 1..10u32 {
            let exact = to_f64(&mode_quotient_k_exact(&p, k).unwrap());
            let cont = k_tail_value(&p, 2.0 * k as f64);
            assert!(((exact - cont) / exact).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        for (n, a) in [(5, 0.0), (12, 1.0), (7, -0.6), (3, 0.0)] {
            let p = InequalityParams::new(n, a).unwrap();
            for x in [2.0, 3.7, 10.0, 55.5] {
                let h = 1e-5 * x;
                let fd = (k_tail_value(&p, x + h) - k_tail_value(&p, x - h)) / (2.0 * h);
                let an = k_tail_derivative(&p, x);
                assert!((fd - an).abs() <= 1e-6 * an.abs().max(1.0), "N={n} α={a} x={x}");
            }
        }
    }

    #[test]
    fn j_factorization() {
        for n in 2..=6u32 {
            for x in [2.0, 4.0, 9.5, 120.0] {
                let parts = j_tail_parts(n, x);
                assert!(((parts.f - parts.g * parts.h) / parts.f).abs() < 1e-13);
                let p = InequalityParams::new(n, 0.0).unwrap();
                assert!(((parts.f - k_tail_value(&p, x)) / parts.f).abs() < 1e-13);
                let dfd = parts.dg * parts.h + parts.g * parts.dh;
                let an = k_tail_derivative(&p, x);
                assert!((dfd - an).abs() < 1e-10 * an.abs().max(1.0), "N={n} x={x}");
                let h = 1e-6 * x;
                let lo = j_tail_parts(n, x - h);
                let hi = j_tail_parts(n, x + h);
                assert!(((hi.g - lo.g) / (2.0 * h) - parts.dg).abs() < 1e-6 * parts.dg.abs().max(1.0));
                assert!(((hi.h - lo.h) / (2.0 * h) - parts.dh).abs() < 1e-6 * parts.dh.abs().max(1.0));
            }
            let exact = to_f64(&mode_quotient_j_exact(n, 1).unwrap());
            assert!(((j_tail_parts(n, 2.0).f - exact) / exact).abs() < 1e-14);
        }
    }

    #[test]
    fn certificate_passes_in_the_stated_ranges() {
        for n in 2..=30u32 {
            let p = InequalityParams::new(n, 0.0).unwrap();
            assert!(tail_certificate(&p).unwrap().passed, "N = {n}");
        }
        let p = InequalityParams::new(12, 1.0).unwrap();
        let c = tail_certificate(&p).unwrap();
        assert!(c.passed);
        assert_eq!(c.samples, 1980);
    }

    #[test]
    fn step2_examples() {
        let c = step2_inequalities(&InequalityParams::new(5, 0.0).unwrap()).unwrap();
        assert!(c.quartic_holds && c.quadratic_holds);
        // N=2: 𝒦(2,0,1) = 1/4 < 9/4, so the quartic inequality must fail
        let c = step2_inequalities(&InequalityParams::new(2, 0.0).unwrap()).unwrap();
        assert!(!c.quartic_holds);
    }
}
