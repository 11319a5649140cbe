//! Double-exponential quadrature for ∫₀^∞ f(r) r^p dr.
//!
//! The half-line is split at `split_point`; (0, s] uses tanh-sinh nodes and
//! [s, ∞) uses exp-sinh nodes. Both pieces share one step size h = 2^-level,
//! and each level only evaluates the new (odd) nodes.
//!
//! With a decay hint (c, q) the integral is first rewritten in x = c r^q:
//!
//! ```text
//! ∫ f(r) r^p dr = (1/|q|) c^(-(p+1)/q) ∫ f(r(x)) x^((p+1)/q - 1) dx
//! ```
//!
//! so the tail becomes e^-x regardless of c and q. A negative q describes
//! decay at the origin (e^{-c r^q} with q < 0) and maps the origin to x = ∞.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub max_level: u32,
    pub split_point: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_level: 12,
            split_point: 1.0,
        }
    }
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, max_level: u32, split_point: f64) -> Result<Self> {
        let s = Self {
            rel_tol,
            max_level,
            split_point,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 1e-15 && self.rel_tol < 1e-3) {
            return Err(CoreError::Domain(format!(
                "rel_tol must lie in (1e-15, 1e-3), got {}",
                self.rel_tol
            )));
        }
        if !(4..=16).contains(&self.max_level) {
            return Err(CoreError::Domain(format!(
                "max_level must lie in [4, 16], got {}",
                self.max_level
            )));
        }
        if !(self.split_point.is_finite() && self.split_point > 0.0) {
            return Err(CoreError::Domain(format!(
                "split_point must be positive, got {}",
                self.split_point
            )));
        }
        Ok(())
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }
}

/// Tail e^{-c r^q} of an integrand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayHint {
    pub c: f64,
    pub q: f64,
}

impl DecayHint {
    pub fn new(c: f64, q: f64) -> Self {
        Self { c, q }
    }
}

/// An integrand f(r) r^p on (0, ∞).
#[derive(Clone, Copy)]
pub struct IntegrandHandle<'a> {
    pub evaluator: &'a (dyn Fn(f64) -> f64 + Sync),
    pub weight_exponent: f64,
    pub decay_hint: Option<DecayHint>,
}

impl<'a> IntegrandHandle<'a> {
    pub fn new(evaluator: &'a (dyn Fn(f64) -> f64 + Sync), weight_exponent: f64) -> Self {
        Self {
            evaluator,
            weight_exponent,
            decay_hint: None,
        }
    }

    pub fn with_decay(mut self, c: f64, q: f64) -> Self {
        self.decay_hint = Some(DecayHint { c, q });
        self
    }

    fn validate(&self) -> Result<()> {
        let p = self.weight_exponent;
        if !p.is_finite() {
            return Err(CoreError::Divergent(format!("weight exponent {p} is not finite")));
        }
        match self.decay_hint {
            None if p <= -1.0 => Err(CoreError::Divergent(format!(
                "r^{p} is not integrable at the origin"
            ))),
            Some(h) if !(h.c > 0.0 && h.c.is_finite() && h.q.is_finite() && h.q != 0.0) => {
                Err(CoreError::Domain(format!(
                    "decay hint needs c > 0 and q ≠ 0, got ({}, {})",
                    h.c, h.q
                )))
            }
            Some(h) if (p + 1.0) / h.q <= 0.0 => Err(CoreError::Divergent(format!(
                "r^{p} e^(-{} r^{}) is not integrable",
                h.c, h.q
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub err_est: f64,
    pub level: u32,
    pub evaluations: usize,
}

/// The integral after the optional change of variables: ∫ g(x) x^e dx · scale.
struct Transformed<'a> {
    f: &'a (dyn Fn(f64) -> f64 + Sync),
    e: f64,
    /// r(x) as (ln r) from ln x
    inv_q: f64,
    ln_c: f64,
    hinted: bool,
}

impl Transformed<'_> {
    fn r_of(&self, ln_x: f64) -> f64 {
        if self.hinted {
            ((ln_x - self.ln_c) * self.inv_q).exp()
        } else {
            ln_x.exp()
        }
    }

    /// f(r(x)) · x^e · dx/dt, with x and the Jacobian supplied in log form.
    fn term(&self, ln_x: f64, ln_jac: f64) -> Result<Option<f64>> {
        let r = self.r_of(ln_x);
        if r == 0.0 || !r.is_finite() {
            return Ok(None);
        }
        let fv = (self.f)(r);
        if !fv.is_finite() {
            return Err(CoreError::NonFiniteSample { at: r });
        }
        if fv == 0.0 {
            return Ok(Some(0.0));
        }
        let ln_w = self.e * ln_x + ln_jac;
        let w = ln_w.exp();
        let t = fv * w;
        if t.is_finite() {
            Ok(Some(t))
        } else {
            Ok(Some(fv.signum() * (fv.abs().ln() + ln_w).exp()))
        }
    }
}

/// Log of 1 + e^z without overflow.
fn ln1p_exp(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// tanh-sinh node on (0, s]: x = s / (1 + e^{-2u}), u = (π/2) sinh t.
fn tanh_sinh_node(s: f64, t: f64) -> (f64, f64) {
    let u = FRAC_PI_2 * t.sinh();
    let ln_x = s.ln() - ln1p_exp(-2.0 * u);
    // dx/dt = (s/2) sech²(u) (π/2) cosh t, sech² u = 4 e^{-2|u|} / (1 + e^{-2|u|})²
    let au = u.abs();
    let ln_sech2 = 4f64.ln() - 2.0 * au - 2.0 * (-2.0 * au).exp().ln_1p();
    let ln_jac = (0.5 * s).ln() + ln_sech2 + (FRAC_PI_2 * t.cosh()).ln();
    (ln_x, ln_jac)
}

/// exp-sinh node on [s, ∞): x = s + e^u, u = (π/2) sinh t.
fn exp_sinh_node(s: f64, t: f64) -> (f64, f64) {
    let u = FRAC_PI_2 * t.sinh();
    let ln_s = s.ln();
    let ln_x = if u > ln_s {
        u + (ln_s - u).exp().ln_1p()
    } else {
        ln_s + (u - ln_s).exp().ln_1p()
    };
    let ln_jac = (FRAC_PI_2 * t.cosh()).ln() + u;
    (ln_x, ln_jac)
}

const NEGLIGIBLE: f64 = 1e-20;
const T_MAX: f64 = 8.0;

struct Piece {
    sum: f64,
    scale: f64,
    /// |t| reached at level 0 in the positive and negative directions.
    extent: [f64; 2],
}

impl Piece {
    fn new() -> Self {
        Self {
            sum: 0.0,
            scale: 0.0,
            extent: [2.0, 2.0],
        }
    }
}

/// Sums one level of one piece. Level 0 takes every integer node, later
/// levels only the odd multiples of h.
fn sweep(
    tr: &Transformed<'_>,
    node: fn(f64, f64) -> (f64, f64),
    s: f64,
    level: u32,
    piece: &mut Piece,
    evals: &mut usize,
) -> Result<f64> {
    let h = 0.5f64.powi(level as i32);
    let (start, stride) = if level == 0 { (0u64, 1u64) } else { (1, 2) };
    let mut total = 0.0;
    if level == 0 {
        let (lx, lj) = node(s, 0.0);
        if let Some(v) = tr.term(lx, lj)? {
            *evals += 1;
            total += v;
            piece.scale = piece.scale.max(v.abs());
        }
    }
    for (side, dir) in [1.0, -1.0].into_iter().enumerate() {
        // Refined levels sweep at least as far as level 0 did, so a tail
        // that is small next to a distant peak does not end the sweep early.
        let reach = piece.extent[side];
        let mut quiet = 0;
        let mut j = if level == 0 { start + 1 } else { start };
        loop {
            let t = dir * j as f64 * h;
            if t.abs() > T_MAX {
                break;
            }
            let (lx, lj) = node(s, t);
            let v = match tr.term(lx, lj)? {
                Some(v) => v,
                None => break,
            };
            *evals += 1;
            total += v;
            piece.scale = piece.scale.max(v.abs());
            if level == 0 {
                piece.extent[side] = piece.extent[side].max(t.abs());
            }
            if v.abs() <= NEGLIGIBLE * piece.scale && t.abs() >= reach {
                quiet += 1;
                if quiet >= 2 {
                    break;
                }
            } else {
                quiet = 0;
            }
            j += stride;
        }
    }
    Ok(total)
}

/// Integrates `h` to relative accuracy `spec.rel_tol`.
///
/// The error estimate is the difference of the last two levels.
pub fn integrate(h: &IntegrandHandle<'_>, spec: &QuadratureSpec) -> Result<QuadResult> {
    spec.validate()?;
    h.validate()?;
    let p = h.weight_exponent;
    let (tr, prefactor) = match h.decay_hint {
        None => (
            Transformed {
                f: h.evaluator,
                e: p,
                inv_q: 1.0,
                ln_c: 0.0,
                hinted: false,
            },
            1.0,
        ),
        Some(DecayHint { c, q }) => {
            let a = (p + 1.0) / q;
            (
                Transformed {
                    f: h.evaluator,
                    e: a - 1.0,
                    inv_q: 1.0 / q,
                    ln_c: c.ln(),
                    hinted: true,
                },
                (-a * c.ln()).exp() / q.abs(),
            )
        }
    };
    let s = spec.split_point;
    let mut left = Piece::new();
    let mut right = Piece::new();
    let mut evals = 0usize;
    let mut prev = f64::NAN;
    let mut err = f64::INFINITY;
    let mut value = 0.0;
    for level in 0..=spec.max_level {
        let h_step = 0.5f64.powi(level as i32);
        let l_new = sweep(&tr, tanh_sinh_node, s, level, &mut left, &mut evals)?;
        let r_new = sweep(&tr, exp_sinh_node, s, level, &mut right, &mut evals)?;
        if level == 0 {
            left.sum = l_new;
            right.sum = r_new;
        } else {
            left.sum = 0.5 * left.sum + h_step * l_new;
            right.sum = 0.5 * right.sum + h_step * r_new;
        }
        value = prefactor * (left.sum + right.sum);
        if !value.is_finite() {
            return Err(CoreError::Overflow(format!(
                "quadrature sum is not finite at level {level}"
            )));
        }
        if level >= 1 {
            err = (value - prev).abs();
            if level >= 2 && err <= (spec.rel_tol * value.abs()).max(1e-300) {
                return Ok(QuadResult {
                    value,
                    err_est: err,
                    level,
                    evaluations: evals,
                });
            }
        }
        prev = value;
    }
    Err(CoreError::NonConvergence {
        value,
        err_est: err,
        level: spec.max_level,
    })
}

/// Shorthand for `integrate` on a closure.
pub fn integrate_fn(
    f: &(dyn Fn(f64) -> f64 + Sync),
    p: f64,
    decay: Option<DecayHint>,
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    let h = IntegrandHandle {
        evaluator: f,
        weight_exponent: p,
        decay_hint: decay,
    };
    integrate(&h, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{weighted_exp_integral, WeightedExpIntegral};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn textbook_values() {
        let f = |r: f64| (-2.0 * r).exp();
        let v = integrate_fn(&f, 3.0, None, &spec()).unwrap();
        assert!((v.value - 0.375).abs() < 1e-12);
        let g = |r: f64| (-r).exp();
        let v = integrate_fn(&g, 0.0, None, &spec()).unwrap();
        assert!((v.value - 1.0).abs() < 1e-12);
        let v = integrate_fn(&f, 1.0, None, &spec()).unwrap();
        assert!((v.value - 0.25).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫ r^-0.9 e^-r = Γ(0.1)
        let f = |r: f64| (-r).exp();
        let v = integrate_fn(&f, -0.9, None, &spec()).unwrap();
        assert!(((v.value - 9.5135076986687318363) / v.value).abs() < 1e-11);
    }

    #[test]
    fn hinted_and_plain_agree() {
        let f = |r: f64| (-3.0 * r * r).exp() * (1.0 + r);
        let a = integrate_fn(&f, 2.5, None, &spec()).unwrap().value;
        let b = integrate_fn(&f, 2.5, Some(DecayHint::new(3.0, 2.0)), &spec())
            .unwrap()
            .value;
        assert!(((a - b) / a).abs() < 1e-12);
    }

    #[test]
    fn decay_at_origin() {
        // ∫ r^-4 e^{-2/r} dr = Γ(3)/2³
        let f = |r: f64| (-2.0 / r).exp();
        let v = integrate_fn(&f, -4.0, Some(DecayHint::new(2.0, -1.0)), &spec()).unwrap();
        assert!(((v.value - 0.25) / 0.25).abs() < 1e-12);
    }

    #[test]
    fn oracle_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let p = rng.random_range(-0.9..12.0);
            let c = rng.random_range(0.1..10.0);
            let q = rng.random_range(0.2..4.0);
            let want = weighted_exp_integral(WeightedExpIntegral::new(p, c, q).unwrap()).unwrap();
            let f = move |r: f64| (-c * r.powf(q)).exp();
            let got = integrate_fn(&f, p, Some(DecayHint::new(c, q)), &spec())
                .unwrap_or_else(|e| panic!("p={p} c={c} q={q}: {e}"));
            assert!(
                ((got.value - want) / want).abs() < 1e-10,
                "p={p} c={c} q={q}: {} vs {want}",
                got.value
            );
        }
    }

    #[test]
    fn split_invariance() {
        let f = |r: f64| (-1.5 * r).exp() * (1.0 + r * r);
        let base = integrate_fn(&f, 0.5, None, &spec()).unwrap().value;
        for s in [0.5, 2.0] {
            let sp = QuadratureSpec {
                split_point: s,
                ..spec()
            };
            let v = integrate_fn(&f, 0.5, None, &sp).unwrap().value;
            assert!(((v - base) / base).abs() <= 1e-12);
        }
    }

    #[test]
    fn error_estimate_is_monotone_in_max_level() {
        let f = |r: f64| (-r).exp() / (1.0 + r);
        let mut last = f64::INFINITY;
        for max_level in 4..=12 {
            let sp = QuadratureSpec {
                max_level,
                rel_tol: 1e-14,
                ..spec()
            };
            let e = match integrate_fn(&f, -0.5, None, &sp) {
                Ok(r) => r.err_est,
                Err(CoreError::NonConvergence { err_est, .. }) => err_est,
                Err(e) => panic!("{e}"),
            };
            assert!(e <= last, "level {max_level}: {e} > {last}");
            last = e;
        }
    }

    #[test]
    fn rejects_bad_input() {
        let f = |r: f64| (-r).exp();
        assert!(matches!(
            integrate_fn(&f, -1.0, None, &spec()),
            Err(CoreError::Divergent(_))
        ));
        let nan = |_r: f64| f64::NAN;
        assert!(matches!(
            integrate_fn(&nan, 0.0, None, &spec()),
            Err(CoreError::NonFiniteSample { .. })
        ));
        assert!(QuadratureSpec::new(1e-16, 12, 1.0).is_err());
        assert!(QuadratureSpec::new(1e-12, 20, 1.0).is_err());
    }

    #[test]
    fn non_convergence_carries_estimate() {
        // A kink at r = 0.7 spoils the double-exponential convergence.
        let f = |r: f64| (-(r - 0.7).abs()).exp();
        let sp = QuadratureSpec {
            max_level: 4,
            rel_tol: 1e-14,
            ..spec()
        };
        match integrate_fn(&f, 0.0, None, &sp) {
            Err(CoreError::NonConvergence { value, err_est, .. }) => {
                assert!(value.is_finite() && err_est.is_finite());
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
