//! Per-mode energies of u = r^k v(r) φ_k(σ), the product quotients built
//! from them, and the extremal families.
//!
//! All energies omit the surface factor |𝕊^{N-1}|; it cancels in every
//! quotient. Each energy is available by quadrature and, for exponential
//! polynomial profiles, in closed form.

mod profile;

use serde::{Deserialize, Serialize};

pub use profile::{
    extremal_profile, ExtremalFamily, FamilyId, ProfileFn, ProfileKind, RadialProfile,
};

use crate::constants::{rel_diff, test_function_exact, to_f64, InequalityParams};
use crate::error::{CoreError, Result};
use crate::exppoly::ExpPoly;
use crate::quadrature::{integrate_fn, DecayHint, QuadratureSpec};

/// Relative agreement required between the closed-form and quadrature paths.
pub const CLOSED_VS_QUADRATURE_TOL: f64 = 1e-9;

/// c_k = k(N+k-2), eigenvalue of -Δ on 𝕊^{N-1}.
pub fn laplace_beltrami_eigenvalue(n: u32, k: u32) -> u64 {
    let (n, k) = (n as u64, k as u64);
    k * (n + k - 2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Field {
    V,
    Dv,
    D2v,
    /// v″ + (N-1) v′/r
    Laplacian(f64),
    /// u = r^k v and its derivatives, for the unreduced route
    Uk { k: f64, order: u8 },
    /// u″ + (N-1)u′/r - c_k u/r² with u = r^k v
    UkLaplacian { n: f64, k: f64, ck: f64 },
}

/// Σ coef · ∫₀^∞ field(r)² r^w dr
type Form = Vec<(f64, Field, f64)>;

fn field_closed(v: &RadialProfile, field: Field) -> Option<ExpPoly> {
    let (v0, dv, d2v) = v.exp_parts()?;
    let uk = |k: f64| v0.map(|p| p.shift(k));
    match field {
        Field::V => v0.cloned(),
        Field::Dv => Some(dv.clone()),
        Field::D2v => Some(d2v.clone()),
        Field::Laplacian(n) => d2v.add(&dv.shift(-1.0).scale(n - 1.0)).ok(),
        Field::Uk { k, order } => {
            let mut u = uk(k)?;
            for _ in 0..order {
                u = u.derivative();
            }
            Some(u)
        }
        Field::UkLaplacian { n, k, ck } => {
            let u = uk(k)?;
            let du = u.derivative();
            let d2u = du.derivative();
            d2u.add(&du.shift(-1.0).scale(n - 1.0))
                .and_then(|s| s.add(&u.shift(-2.0).scale(-ck)))
                .ok()
        }
    }
}

fn field_value(v: &RadialProfile, field: Field, r: f64) -> Result<f64> {
    Ok(match field {
        Field::V => v.v(r)?,
        Field::Dv => v.dv(r),
        Field::D2v => v.d2v(r),
        Field::Laplacian(n) => v.d2v(r) + (n - 1.0) * v.dv(r) / r,
        Field::Uk { k, order } => {
            let [a, b, c] = v.eval(r)?;
            let rk = r.powf(k);
            match order {
                0 => rk * a,
                1 => rk * (k * a / r + b),
                _ => rk * (k * (k - 1.0) * a / (r * r) + 2.0 * k * b / r + c),
            }
        }
        Field::UkLaplacian { n, k, ck } => {
            let [a, b, c] = v.eval(r)?;
            let rk = r.powf(k);
            let u = rk * a;
            let du = rk * (k * a / r + b);
            let d2u = rk * (k * (k - 1.0) * a / (r * r) + 2.0 * k * b / r + c);
            d2u + (n - 1.0) * du / r - ck * u / (r * r)
        }
    })
}

fn form_closed(v: &RadialProfile, form: &Form) -> Option<Result<f64>> {
    let mut total = 0.0;
    for &(coef, field, w) in form {
        if coef == 0.0 {
            continue;
        }
        let p = field_closed(v, field)?;
        match p.norm2(w) {
            Ok(x) => total += coef * x,
            Err(e) => return Some(Err(e)),
        }
    }
    Some(Ok(total))
}

fn squared_hint(v: &RadialProfile) -> Option<DecayHint> {
    v.decay_hint().map(|d| DecayHint::new(2.0 * d.c, d.q))
}

fn form_quadrature(v: &RadialProfile, form: &Form, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let hint = squared_hint(v);
    let mut total = 0.0;
    let mut err = 0.0;
    for &(coef, field, w) in form {
        if coef == 0.0 {
            continue;
        }
        let failure = std::sync::Mutex::new(None);
        // The field may cancel a weight that is singular on its own, and
        // field² may overflow where field²·r^w does not, so the weight is
        // folded into the integrand in log form.
        let p = match hint {
            Some(h) if h.q < 0.0 => -1.5,
            _ => -0.5,
        };
        // with a closed form, r^{(w-p)/2} goes into the exponents so the
        // field cannot overflow on its own near the origin
        let shifted = field_closed(v, field).map(|e| e.shift(0.5 * (w - p)));
        let f = |r: f64| match shifted.as_ref().map_or_else(|| field_value(v, field, r), |e| Ok(e.eval(r))) {
            Ok(x) if shifted.is_some() => x * x,
            Ok(0.0) => 0.0,
            Ok(x) => (2.0 * x.abs().ln() + (w - p) * r.ln()).exp(),
            Err(e) => {
                *failure.lock().expect("poisoned") = Some(e);
                f64::NAN
            }
        };
        let res = integrate_fn(&f, p, hint, spec);
        if let Some(e) = failure.into_inner().expect("poisoned") {
            return Err(e);
        }
        let res = res?;
        total += coef * res.value;
        err += coef.abs() * res.err_est;
    }
    Ok((total, err))
}

/// The three energies of one mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeEnergy {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// ∫|v′|² r^{N+2k-α-2}, the gradient part of C
    pub c_grad: f64,
    /// ∫|v|² r^{N+2k-α-4}, the potential part of C (before the (α+1)k factor)
    pub c_pot: f64,
    pub k: u32,
    pub params: InequalityParams,
    pub closed_form: bool,
    pub err_est: Option<f64>,
}

impl ModeEnergy {
    pub fn quotient(&self) -> Result<f64> {
        product_quotient(self.a, self.b, self.c)
    }

    /// A·B / c_grad², the quotient without the potential part of C.
    pub fn truncated_quotient(&self) -> Result<f64> {
        product_quotient(self.a, self.b, self.c_grad)
    }
}

pub(crate) fn product_quotient(a: f64, b: f64, c: f64) -> Result<f64> {
    if !(c > 1e-300) {
        return Err(CoreError::ZeroDenominator(format!(
            "cross energy C = {c:e} is not positive"
        )));
    }
    Ok(a / c * b / c)
}

fn check_mode_params(params: &InequalityParams) -> Result<()> {
    if params.n < 2 {
        return Err(CoreError::Domain(format!(
            "mode energies need N ≥ 2, got {}",
            params.n
        )));
    }
    if params.alpha <= -1.0 {
        return Err(CoreError::Domain(format!(
            "mode energies need α > -1, got {}",
            params.alpha
        )));
    }
    Ok(())
}

struct ModeForms {
    a: Form,
    b: Form,
    c_grad: Form,
    c_pot: Form,
    pot_coef: f64,
}

fn mode_forms(params: &InequalityParams, k: u32) -> ModeForms {
    let n = params.nf();
    let a = params.alpha;
    let kf = k as f64;
    let s = n + 2.0 * kf;
    ModeForms {
        a: vec![
            (1.0, Field::D2v, s - 2.0 * a - 1.0),
            ((2.0 * a + 1.0) * (s - 1.0), Field::Dv, s - 2.0 * a - 3.0),
        ],
        b: vec![(1.0, Field::Dv, s - 1.0)],
        c_grad: vec![(1.0, Field::Dv, s - a - 2.0)],
        c_pot: if k == 0 {
            Vec::new()
        } else {
            vec![(1.0, Field::V, s - a - 4.0)]
        },
        pot_coef: (a + 1.0) * kf,
    }
}

fn assemble(
    params: &InequalityParams,
    k: u32,
    vals: [f64; 4],
    pot_coef: f64,
    closed_form: bool,
    err_est: Option<f64>,
) -> ModeEnergy {
    let [a, b, c_grad, c_pot] = vals;
    ModeEnergy {
        a,
        b,
        c: c_grad + pot_coef * c_pot,
        c_grad,
        c_pot,
        k,
        params: *params,
        closed_form,
        err_est,
    }
}

/// Closed-form energies; `None` when the profile has no closed form for a
/// needed field.
pub fn mode_energies_closed_form(
    v: &RadialProfile,
    params: &InequalityParams,
    k: u32,
) -> Option<Result<ModeEnergy>> {
    if let Err(e) = check_mode_params(params) {
        return Some(Err(e));
    }
    let f = mode_forms(params, k);
    let mut vals = [0.0; 4];
    for (slot, form) in vals.iter_mut().zip([&f.a, &f.b, &f.c_grad, &f.c_pot]) {
        match form_closed(v, form)? {
            Ok(x) => *slot = x,
            Err(e) => return Some(Err(e)),
        }
    }
    Some(Ok(assemble(params, k, vals, f.pot_coef, true, None)))
}

pub fn mode_energies_quadrature(
    v: &RadialProfile,
    params: &InequalityParams,
    k: u32,
    spec: &QuadratureSpec,
) -> Result<ModeEnergy> {
    check_mode_params(params)?;
    let f = mode_forms(params, k);
    let mut vals = [0.0; 4];
    let mut err = 0.0;
    for (slot, form) in vals.iter_mut().zip([&f.a, &f.b, &f.c_grad, &f.c_pot]) {
        let (x, e) = form_quadrature(v, form, spec)?;
        *slot = x;
        err += e;
    }
    Ok(assemble(params, k, vals, f.pot_coef, false, Some(err)))
}

fn agree(what: &str, closed: f64, quad: f64) -> Result<()> {
    let d = rel_diff(quad, closed);
    if d > CLOSED_VS_QUADRATURE_TOL && (quad - closed).abs() > 1e-300 {
        return Err(CoreError::Consistency(format!(
            "{what}: closed form {closed:e} vs quadrature {quad:e} (relative {d:e})"
        )));
    }
    Ok(())
}

/// Energies by quadrature, cross-checked against the closed form whenever
/// the profile has one. Returns the closed-form values after the check.
pub fn mode_energies(
    v: &RadialProfile,
    params: &InequalityParams,
    k: u32,
    spec: &QuadratureSpec,
) -> Result<ModeEnergy> {
    let closed = mode_energies_closed_form(v, params, k).transpose()?;
    let quad = mode_energies_quadrature(v, params, k, spec)?;
    match closed {
        None => Ok(quad),
        Some(mut c) => {
            agree("A", c.a, quad.a)?;
            agree("B", c.b, quad.b)?;
            agree("C", c.c, quad.c)?;
            c.err_est = quad.err_est;
            Ok(c)
        }
    }
}

/// A·B/C² for one mode.
pub fn mode_quotient(
    v: &RadialProfile,
    params: &InequalityParams,
    k: u32,
    spec: &QuadratureSpec,
) -> Result<f64> {
    mode_energies(v, params, k, spec)?.quotient()
}

/// The same three energies computed from u = r^k v without the reduction:
/// A = ∫|u″ + (N-1)u′/r - c_k u/r²|² r^{N-1-2α}, B and C from
/// |u′|² + c_k u²/r² with weights r^{N-1} and r^{N-α-2}.
pub fn mode_energies_direct(
    v: &RadialProfile,
    params: &InequalityParams,
    k: u32,
    spec: &QuadratureSpec,
) -> Result<ModeEnergy> {
    check_mode_params(params)?;
    let n = params.nf();
    let a = params.alpha;
    let kf = k as f64;
    let ck = laplace_beltrami_eigenvalue(params.n, k) as f64;
    let u = Field::Uk { k: kf, order: 0 };
    let du = Field::Uk { k: kf, order: 1 };
    let forms: [Form; 3] = [
        vec![(1.0, Field::UkLaplacian { n, k: kf, ck }, n - 1.0 - 2.0 * a)],
        vec![(1.0, du, n - 1.0), (ck, u, n - 3.0)],
        vec![(1.0, du, n - a - 2.0), (ck, u, n - a - 4.0)],
    ];
    let mut vals = [0.0; 3];
    let mut closed = true;
    for (slot, form) in vals.iter_mut().zip(forms.iter()) {
        *slot = match form_closed(v, form) {
            Some(x) => x?,
            None => {
                closed = false;
                form_quadrature(v, form, spec)?.0
            }
        };
    }
    Ok(ModeEnergy {
        a: vals[0],
        b: vals[1],
        c: vals[2],
        c_grad: f64::NAN,
        c_pot: f64::NAN,
        k,
        params: *params,
        closed_form: closed,
        err_est: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionCheck {
    pub n: u32,
    pub closed_form: f64,
    pub quadrature: f64,
    pub rel_diff: f64,
}

/// The test profile v(r) = e^{-r}, i.e. u = |x| e^{-|x|} φ₁ in mode k = 1.
pub fn test_profile() -> RadialProfile {
    RadialProfile::from_exppoly(ExpPoly::new(1.0, 1.0, vec![(1.0, 0.0)]))
}

/// Both routes for the test-function quotient.
pub fn test_function_check(n: u32, spec: &QuadratureSpec) -> Result<TestFunctionCheck> {
    let closed = to_f64(&test_function_exact(n)?);
    let params = InequalityParams::new(n, 0.0)?;
    let quad = mode_energies_quadrature(&test_profile(), &params, 1, spec)?.quotient()?;
    let d = rel_diff(quad, closed);
    if d > 1e-10 {
        return Err(CoreError::Consistency(format!(
            "test-function quotient at N={n}: closed form {closed} vs quadrature {quad}"
        )));
    }
    Ok(TestFunctionCheck {
        n,
        closed_form: closed,
        quadrature: quad,
        rel_diff: d,
    })
}

/// N(N+4)(N²-1)²/(4(N²-N+4)²), after confirming it by quadrature.
pub fn test_function_quotient(n: u32) -> Result<f64> {
    Ok(test_function_check(n, &QuadratureSpec::default())?.closed_form)
}

/// Evaluates a three-form product quotient by closed form when possible,
/// otherwise by quadrature; when both exist they must agree.
fn checked_quotient(v: &RadialProfile, forms: [Form; 3], spec: &QuadratureSpec) -> Result<f64> {
    let mut vals = [0.0; 3];
    for (slot, form) in vals.iter_mut().zip(forms.iter()) {
        let quad = form_quadrature(v, form, spec)?.0;
        *slot = match form_closed(v, form) {
            Some(c) => {
                let c = c?;
                agree("energy", c, quad)?;
                c
            }
            None => quad,
        };
    }
    product_quotient(vals[0], vals[1], vals[2])
}

/// ∫|v″|²r^{-2α} · ∫|v′|² / (∫|v′|² r^{-α-1})² on the half-line. For even
/// profiles this equals the whole-line quotient since the doubling cancels.
pub fn one_dim_quotient(v: &RadialProfile, alpha: f64, spec: &QuadratureSpec) -> Result<f64> {
    if alpha <= -1.0 {
        return Err(CoreError::Domain(format!("α must exceed -1, got {alpha}")));
    }
    checked_quotient(
        v,
        [
            vec![(1.0, Field::D2v, -2.0 * alpha)],
            vec![(1.0, Field::Dv, 0.0)],
            vec![(1.0, Field::Dv, -alpha - 1.0)],
        ],
        spec,
    )
}

/// Radial form of ∫|Δu|²|x|^{-2α} ∫|∇u|²|x|^{-2β} / (∫|∇u|²|x|^{-α-β-1})²
/// with β from `params` (default 0).
pub fn reference_quotient(v: &RadialProfile, params: &InequalityParams, spec: &QuadratureSpec) -> Result<f64> {
    let n = params.nf();
    let a = params.alpha;
    let b = params.beta.unwrap_or(0.0);
    checked_quotient(
        v,
        [
            vec![(1.0, Field::Laplacian(n), n - 1.0 - 2.0 * a)],
            vec![(1.0, Field::Dv, n - 1.0 - 2.0 * b)],
            vec![(1.0, Field::Dv, n - a - b - 2.0)],
        ],
        spec,
    )
}

/// ∫|∇u|² ∫|u|² / (∫|u|²/|x|)² for radial u.
pub fn first_order_quotient(v: &RadialProfile, n: u32, spec: &QuadratureSpec) -> Result<f64> {
    let n = n as f64;
    checked_quotient(
        v,
        [
            vec![(1.0, Field::Dv, n - 1.0)],
            vec![(1.0, Field::V, n - 1.0)],
            vec![(1.0, Field::V, n - 2.0)],
        ],
        spec,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardyStep {
    /// ∫|v|² r^{N+2k-α-4}
    pub lhs: f64,
    /// 4/(N+2k-α-3)² ∫|v′|² r^{N+2k-α-2}
    pub rhs: f64,
}

/// Both sides of the one-dimensional Hardy estimate used on the cross term.
pub fn hardy_step(
    v: &RadialProfile,
    params: &InequalityParams,
    k: u32,
    spec: &QuadratureSpec,
) -> Result<HardyStep> {
    let e = mode_energies(v, params, k, spec)?;
    let d = params.nf() + 2.0 * k as f64 - params.alpha - 3.0;
    if d == 0.0 {
        return Err(CoreError::ZeroDenominator(format!(
            "N+2k-α-3 vanishes at {params}, k={k}"
        )));
    }
    Ok(HardyStep {
        lhs: e.c_pot,
        rhs: 4.0 / (d * d) * e.c_grad,
    })
}

/// [1 + 4(α+1)k/(N+2k-α-3)²], the factor relating the two cross energies.
pub fn hardy_factor(params: &InequalityParams, k: u32) -> f64 {
    let kf = k as f64;
    let d = params.nf() + 2.0 * kf - params.alpha - 3.0;
    if k == 0 {
        1.0
    } else {
        1.0 + 4.0 * (params.alpha + 1.0) * kf / (d * d)
    }
}
