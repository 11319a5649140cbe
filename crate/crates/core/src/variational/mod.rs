//! Variational estimates of the per-mode constants.
//!
//! A profile's derivative w = v′ is expanded in
//! φ_j(r) = r^{γ₀ + j q} e^{-r^q}, j = 0..m-1, and the quotient
//! (cᵀM_A c)(cᵀM_B c)/(cᵀM_C c)² is minimized over the coefficients.
//! Two Gram representations span the same space: the monomial one, with
//! every entry a closed Gamma expression, and a Laguerre-orthogonal one
//! that stays well conditioned for large m and is used by the estimators.

mod laguerre;
mod optimize;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

pub use laguerre::{gauss_laguerre, laguerre_table};
pub use optimize::{
    log_quotient_and_gradient, minimize_quotient_with, MinimizationResult, MinimizeOptions,
    DEFAULT_RESTARTS, DEFAULT_SEED, DEFAULT_TOL,
};

use crate::constants::{mode_quotient_k, symmetry_breaking_bounds, BoundsReport, InequalityParams};
use crate::error::{CoreError, Result};
use crate::exppoly::ExpPoly;
use crate::functionals::hardy_factor;
use crate::quadrature::{integrate_fn, DecayHint, QuadratureSpec};

/// Relative tolerance of the quadrature spot check on Gram entries.
pub const GRAM_SPOT_CHECK_TOL: f64 = 1e-10;
/// Default k_max for symmetry-breaking scans.
pub const DEFAULT_SCAN_K_MAX: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub m: usize,
    pub gamma0: f64,
    pub decay_q: f64,
}

impl BasisSpec {
    pub fn new(m: usize, gamma0: f64, decay_q: f64) -> Result<Self> {
        if m == 0 {
            return Err(CoreError::Domain("basis size must be at least 1".into()));
        }
        if !(decay_q > 0.0) || !decay_q.is_finite() || !gamma0.is_finite() {
            return Err(CoreError::Domain(format!(
                "basis needs finite γ₀ and decay exponent > 0, got γ₀={gamma0}, q={decay_q}"
            )));
        }
        Ok(Self { m, gamma0, decay_q })
    }

    /// γ₀ = α + s(α+1) with the smallest admissible s: 1 for k = 0 (the
    /// extremal shape r^{2α+1}e^{-r^{α+1}} is then φ₀), 0 otherwise (the
    /// test profile e^{-r} is then in the span).
    pub fn default_for(params: &InequalityParams, k: u32, m: usize) -> Result<Self> {
        check_alpha(params)?;
        let q = params.alpha + 1.0;
        let start = if k == 0 { 1 } else { 0 };
        for s in start..start + 4 {
            if laguerre::layout(params.nf(), params.alpha, k, s, k > 0).is_ok() {
                return Self::new(m, params.alpha + s as f64 * q, q);
            }
        }
        Err(CoreError::UnsupportedBasis(format!(
            "no admissible leading exponent for {params}, k={k}"
        )))
    }

    fn phi(&self, j: usize) -> ExpPoly {
        ExpPoly::new(1.0, self.decay_q, vec![(1.0, self.gamma0 + j as f64 * self.decay_q)])
    }

    /// s with γ₀ = α + s q, when it is a nonnegative integer.
    fn offset_index(&self, alpha: f64) -> Option<u32> {
        let s = (self.gamma0 - alpha) / self.decay_q;
        let r = s.round();
        ((s - r).abs() < 1e-9 && r >= 0.0).then_some(r as u32)
    }

    /// Convergence of every Gram integral near the origin.
    pub fn check_weights(&self, params: &InequalityParams, k: u32, form: QuotientForm) -> Result<()> {
        let n = params.nf() + 2.0 * k as f64;
        let a = params.alpha;
        let g = self.gamma0;
        let mut needs: Vec<(f64, &str)> = vec![
            (2.0 * (g - 1.0) + n - 2.0 * a - 1.0, "A (w′)"),
            (2.0 * g + n - 1.0, "B"),
            (2.0 * g + n - a - 2.0, "C"),
        ];
        if (2.0 * a + 1.0) != 0.0 {
            needs.push((2.0 * g + n - 2.0 * a - 3.0, "A (w)"));
        }
        if form == QuotientForm::Full && k > 0 {
            needs.push((n - a - 4.0, "C (v)"));
        }
        let bad: Vec<String> = needs
            .into_iter()
            .filter(|(p, _)| !(*p > -1.0))
            .map(|(p, what)| format!("{what} integrand ~ r^{p} at the origin"))
            .collect();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(CoreError::Divergent(format!(
                "γ₀ = {g} too small: {}",
                bad.join("; ")
            )))
        }
    }
}

fn check_alpha(params: &InequalityParams) -> Result<()> {
    if params.alpha <= -1.0 {
        return Err(CoreError::Domain(format!(
            "variational bases need α > -1, got {}",
            params.alpha
        )));
    }
    if params.n < 2 {
        return Err(CoreError::Domain("mode quotients need N ≥ 2".into()));
    }
    Ok(())
}

/// Which cross energy enters the denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuotientForm {
    /// C = ∫|v′|² r^{N+2k-α-2} only.
    Truncated,
    /// C including (α+1)k ∫|v|² r^{N+2k-α-4}.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Representation {
    /// Coefficients multiply φ_j directly; entries exact.
    Monomial,
    /// Coefficients multiply r^α y^s L_j^{(λ)}(y) e^{-y/2}, y = 2r^q;
    /// entries exact up to a common positive factor.
    Laguerre,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramTriple {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub k: u32,
    pub params: InequalityParams,
    pub basis: BasisSpec,
    pub form: QuotientForm,
    pub representation: Representation,
    /// (2α+1)(N+2k-1) < 0, so M_A need not be semidefinite.
    pub a_may_be_indefinite: bool,
}

impl GramTriple {
    pub fn dim(&self) -> usize {
        self.c.nrows()
    }

    /// Q at a coefficient vector.
    pub fn quotient_at(&self, c: &[f64]) -> f64 {
        let x = nalgebra::DVector::from_column_slice(c);
        let qa = (x.transpose() * &self.a * &x)[0];
        let qb = (x.transpose() * &self.b * &x)[0];
        let qc = (x.transpose() * &self.c * &x)[0];
        qa * qb / (qc * qc)
    }

    /// Largest |M - Mᵀ| entry over the three matrices.
    pub fn asymmetry(&self) -> f64 {
        [&self.a, &self.b, &self.c]
            .iter()
            .map(|m| (*m - m.transpose()).amax())
            .fold(0.0, f64::max)
    }
}

fn mode_terms(params: &InequalityParams, k: u32) -> (f64, f64, f64, f64, f64, f64) {
    let n = params.nf() + 2.0 * k as f64;
    let a = params.alpha;
    (
        n - 2.0 * a - 1.0,
        (2.0 * a + 1.0) * (n - 1.0),
        n - 2.0 * a - 3.0,
        n - 1.0,
        n - a - 2.0,
        n - a - 4.0,
    )
}

/// v_j = -∫_r^∞ φ_j = -(1/q) Γ(n_j, r^q), a finite sum when
/// n_j = (γ₀+1)/q + j is an integer.
fn tail_profile(basis: &BasisSpec, j: usize) -> Result<ExpPoly> {
    let q = basis.decay_q;
    let nj = (basis.gamma0 + 1.0) / q + j as f64;
    let r = nj.round();
    if (nj - r).abs() > 1e-9 || r < 1.0 {
        return Err(CoreError::UnsupportedBasis(format!(
            "the full cross energy needs (γ₀+1)/q to be a positive integer, got {}",
            (basis.gamma0 + 1.0) / q
        )));
    }
    let nj = r as usize;
    let mut fact = 1.0;
    for i in 1..nj {
        fact *= i as f64;
    }
    let mut terms = Vec::with_capacity(nj);
    let mut ifact = 1.0;
    for i in 0..nj {
        if i > 0 {
            ifact *= i as f64;
        }
        terms.push((-fact / (q * ifact), i as f64 * q));
    }
    Ok(ExpPoly::new(1.0, q, terms))
}

/// Closed-form Gram triple in the monomial basis, with the gradient-only
/// cross energy.
pub fn build_gram(params: &InequalityParams, k: u32, basis: &BasisSpec) -> Result<GramTriple> {
    build_gram_form(params, k, basis, QuotientForm::Truncated)
}

pub fn build_gram_form(
    params: &InequalityParams,
    k: u32,
    basis: &BasisSpec,
    form: QuotientForm,
) -> Result<GramTriple> {
    check_alpha(params)?;
    basis.check_weights(params, k, form)?;
    let m = basis.m;
    let (wa1, ca0, wa0, wb, wc, wv) = mode_terms(params, k);
    let pot = if form == QuotientForm::Full && k > 0 {
        (params.alpha + 1.0) * k as f64
    } else {
        0.0
    };
    let phi: Vec<ExpPoly> = (0..m).map(|j| basis.phi(j)).collect();
    let dphi: Vec<ExpPoly> = phi.iter().map(ExpPoly::derivative).collect();
    let tails: Vec<ExpPoly> = if pot != 0.0 {
        (0..m).map(|j| tail_profile(basis, j)).collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let named = |j: usize, l: usize, w: f64| {
        move |e: CoreError| match e {
            CoreError::Divergent(msg) => {
                CoreError::Divergent(format!("entry ({j}, {l}) with weight r^{w}: {msg}"))
            }
            other => other,
        }
    };
    let mut a = DMatrix::zeros(m, m);
    let mut b = DMatrix::zeros(m, m);
    let mut c = DMatrix::zeros(m, m);
    for j in 0..m {
        for l in j..m {
            let mut ea = dphi[j].inner(&dphi[l], wa1).map_err(named(j, l, wa1))?;
            if ca0 != 0.0 {
                ea += ca0 * phi[j].inner(&phi[l], wa0).map_err(named(j, l, wa0))?;
            }
            let eb = phi[j].inner(&phi[l], wb).map_err(named(j, l, wb))?;
            let mut ec = phi[j].inner(&phi[l], wc).map_err(named(j, l, wc))?;
            if pot != 0.0 {
                ec += pot * tails[j].inner(&tails[l], wv).map_err(named(j, l, wv))?;
            }
            for (mat, v) in [(&mut a, ea), (&mut b, eb), (&mut c, ec)] {
                mat[(j, l)] = v;
                mat[(l, j)] = v;
            }
        }
    }
    let g = GramTriple {
        a,
        b,
        c,
        k,
        params: *params,
        basis: *basis,
        form,
        representation: Representation::Monomial,
        a_may_be_indefinite: ca0 < 0.0,
    };
    spot_check(&g, &phi, &dphi, &tails)?;
    Ok(g)
}

/// ∫ f g r^w dr by quadrature, the weight folded into the integrand.
fn product_integral(f: &ExpPoly, g: &ExpPoly, w: f64, q: f64) -> Result<f64> {
    let h = |r: f64| {
        let x = f.eval(r) * g.eval(r);
        if x == 0.0 {
            0.0
        } else {
            x.signum() * (x.abs().ln() + (w + 0.5) * r.ln()).exp()
        }
    };
    let spec = QuadratureSpec::default().with_rel_tol(1e-13);
    Ok(integrate_fn(&h, -0.5, Some(DecayHint::new(2.0, q)), &spec)?.value)
}

/// Recomputes about 10% of the entries (at least one) by quadrature.
fn spot_check(g: &GramTriple, phi: &[ExpPoly], dphi: &[ExpPoly], tails: &[ExpPoly]) -> Result<()> {
    let m = g.dim();
    let (wa1, ca0, wa0, wb, wc, wv) = mode_terms(&g.params, g.k);
    let pot = if tails.is_empty() {
        0.0
    } else {
        (g.params.alpha + 1.0) * g.k as f64
    };
    let q = g.basis.decay_q;
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|j| (j..m).map(move |l| (j, l))).collect();
    let count = (pairs.len() / 10).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ ((g.k as u64) << 16) ^ m as u64);
    for _ in 0..count {
        let (j, l) = pairs[rng.random_range(0..pairs.len())];
        let mut ea = product_integral(&dphi[j], &dphi[l], wa1, q)?;
        if ca0 != 0.0 {
            ea += ca0 * product_integral(&phi[j], &phi[l], wa0, q)?;
        }
        let eb = product_integral(&phi[j], &phi[l], wb, q)?;
        let mut ec = product_integral(&phi[j], &phi[l], wc, q)?;
        if pot != 0.0 {
            ec += pot * product_integral(&tails[j], &tails[l], wv, q)?;
        }
        for (name, mat, quad) in [("M_A", &g.a, ea), ("M_B", &g.b, eb), ("M_C", &g.c, ec)] {
            let closed = mat[(j, l)];
            let scale = closed
                .abs()
                .max(1e-3 * (mat[(j, j)] * mat[(l, l)]).abs().sqrt());
            if (quad - closed).abs() > GRAM_SPOT_CHECK_TOL * scale {
                return Err(CoreError::Consistency(format!(
                    "{name}[{j}][{l}]: closed form {closed:e} vs quadrature {quad:e}"
                )));
            }
        }
    }
    Ok(())
}

/// Gram triple in the Laguerre representation of the same span. Requires
/// decay_q = α+1 and γ₀ = α + s(α+1) with integer s ≥ 0.
pub fn build_gram_laguerre(
    params: &InequalityParams,
    k: u32,
    basis: &BasisSpec,
    form: QuotientForm,
) -> Result<GramTriple> {
    check_alpha(params)?;
    let q = params.alpha + 1.0;
    if (basis.decay_q - q).abs() > 1e-12 * q {
        return Err(CoreError::UnsupportedBasis(format!(
            "Laguerre representation needs decay exponent α+1 = {q}, got {}",
            basis.decay_q
        )));
    }
    let s = basis.offset_index(params.alpha).ok_or_else(|| {
        CoreError::UnsupportedBasis(format!(
            "Laguerre representation needs γ₀ = α + s(α+1) with integer s ≥ 0, got γ₀ = {}",
            basis.gamma0
        ))
    })?;
    basis.check_weights(params, k, form)?;
    let with_pot = form == QuotientForm::Full && k > 0;
    let lg = laguerre::laguerre_gram(params.nf(), params.alpha, k, basis.m, s, with_pot)?;
    let c = match lg.c_pot {
        Some(p) => lg.c_grad + p * ((params.alpha + 1.0) * k as f64),
        None => lg.c_grad,
    };
    let (_, ca0, ..) = mode_terms(params, k);
    Ok(GramTriple {
        a: lg.a,
        b: lg.b,
        c,
        k,
        params: *params,
        basis: *basis,
        form,
        representation: Representation::Laguerre,
        a_may_be_indefinite: ca0 < 0.0,
    })
}

fn mode_seed(seed: u64, k: u32, m: usize) -> u64 {
    seed ^ ((k as u64) << 32) ^ m as u64
}

/// Minimizes the quotient of `g` with `restarts` seeded starts.
pub fn minimize_quotient(g: &GramTriple, restarts: usize, tol: f64) -> Result<MinimizationResult> {
    let opts = MinimizeOptions {
        restarts,
        tol,
        seed: mode_seed(DEFAULT_SEED, g.k, g.dim()),
        ..MinimizeOptions::default()
    };
    minimize_gram(g, &opts, &[])
}

pub fn minimize_gram(
    g: &GramTriple,
    opts: &MinimizeOptions,
    warm: &[Vec<f64>],
) -> Result<MinimizationResult> {
    minimize_quotient_with(&g.a, &g.b, &g.c, opts, warm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeEstimate {
    pub params: InequalityParams,
    pub k: u32,
    pub form: QuotientForm,
    pub basis_sizes: Vec<usize>,
    /// Minimum per basis size.
    pub trace: Vec<f64>,
    pub result: MinimizationResult,
    pub seed: u64,
}

impl ModeEstimate {
    pub fn value(&self) -> f64 {
        self.result.value
    }

    /// Largest increase along the trace (0 when non-increasing).
    pub fn max_trace_increase(&self) -> f64 {
        self.trace
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }
}

/// Full-quotient estimate over nested Laguerre bases, default options.
pub fn estimate_mode_constant(
    params: &InequalityParams,
    k: u32,
    basis_sizes: &[usize],
) -> Result<ModeEstimate> {
    estimate_mode_constant_with(params, k, basis_sizes, QuotientForm::Full, &MinimizeOptions::default())
}

pub fn estimate_mode_constant_with(
    params: &InequalityParams,
    k: u32,
    basis_sizes: &[usize],
    form: QuotientForm,
    opts: &MinimizeOptions,
) -> Result<ModeEstimate> {
    if basis_sizes.is_empty() || basis_sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CoreError::Precondition(vec![format!(
            "basis sizes must be non-empty and strictly increasing, got {basis_sizes:?}"
        )]));
    }
    let mut trace = Vec::with_capacity(basis_sizes.len());
    let mut last: Option<MinimizationResult> = None;
    let mut iterations = 0;
    for &m in basis_sizes {
        let basis = BasisSpec::default_for(params, k, m)?;
        let g = build_gram_laguerre(params, k, &basis, form)?;
        let o = MinimizeOptions {
            seed: mode_seed(opts.seed, k, m),
            ..*opts
        };
        // the previous minimizer embeds in the larger basis
        let warm: Vec<Vec<f64>> = last.iter().map(|r| r.coeffs.clone()).collect();
        let r = minimize_gram(&g, &o, &warm)?;
        iterations += r.iterations;
        trace.push(r.value);
        last = Some(r);
    }
    let mut result = last.expect("non-empty sizes");
    result.iterations = iterations;
    Ok(ModeEstimate {
        params: *params,
        k,
        form,
        basis_sizes: basis_sizes.to_vec(),
        trace,
        result,
        seed: opts.seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub k: u32,
    /// Minimum of A·B/C_grad².
    pub raw: f64,
    /// 1 + 4(α+1)k/(N+2k-α-3)²
    pub hardy_factor: f64,
    /// raw / hardy_factor²
    pub effective: f64,
    /// Minimum of A·B/C² with the complete cross energy.
    pub full: f64,
    /// Closed-form mode quotient 𝒦(N,α,k), where defined.
    pub closed_form: Option<f64>,
    pub converged: bool,
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Radial,
    SymmetryBroken { k: u32 },
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Radial => f.write_str("radial"),
            Verdict::SymmetryBroken { k } => write!(f, "symmetry-broken at k={k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub params: InequalityParams,
    pub k_max: u32,
    pub basis_sizes: Vec<usize>,
    pub rows: Vec<ScanRow>,
    pub verdict: Verdict,
    /// Smallest full-quotient estimate over the scanned modes.
    pub best: f64,
    pub best_k: u32,
    pub conjecture_open: bool,
    pub bounds: Option<BoundsReport>,
    pub seed: u64,
}

/// Relative margin by which a mode k ≥ 1 must undercut k = 0 to count as
/// symmetry breaking.
pub const VERDICT_MARGIN: f64 = 1e-8;

pub fn symmetry_breaking_scan(n: u32, alpha: f64, k_max: u32, basis_sizes: &[usize]) -> Result<ScanReport> {
    symmetry_breaking_scan_with(n, alpha, k_max, basis_sizes, &MinimizeOptions::default())
}

pub fn symmetry_breaking_scan_with(
    n: u32,
    alpha: f64,
    k_max: u32,
    basis_sizes: &[usize],
    opts: &MinimizeOptions,
) -> Result<ScanReport> {
    let params = InequalityParams::new(n, alpha)?;
    check_alpha(&params)?;
    let rows: Vec<ScanRow> = (0..=k_max)
        .into_par_iter()
        .map(|k| -> Result<ScanRow> {
            let full = estimate_mode_constant_with(&params, k, basis_sizes, QuotientForm::Full, opts)?;
            let raw = if k == 0 {
                full.clone()
            } else {
                estimate_mode_constant_with(&params, k, basis_sizes, QuotientForm::Truncated, opts)?
            };
            let h = hardy_factor(&params, k);
            let closed_form = if params.in_weighted_case() || alpha == 0.0 {
                mode_quotient_k(&params, k).ok().map(|q| q.value)
            } else {
                None
            };
            Ok(ScanRow {
                k,
                raw: raw.value(),
                hardy_factor: h,
                effective: raw.value() / (h * h),
                full: full.value(),
                closed_form,
                converged: full.result.converged && raw.result.converged,
                trace: full.trace,
            })
        })
        .collect::<Result<_>>()?;
    let radial = rows[0].full;
    let (best_k, best) = rows
        .iter()
        .map(|r| (r.k, r.full))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("k_max ≥ 0");
    let verdict = if best_k == 0 || best >= radial * (1.0 - VERDICT_MARGIN) {
        Verdict::Radial
    } else {
        Verdict::SymmetryBroken { k: best_k }
    };
    let zero_weight = alpha == 0.0;
    Ok(ScanReport {
        params,
        k_max,
        basis_sizes: basis_sizes.to_vec(),
        verdict,
        best: if verdict == Verdict::Radial { radial } else { best },
        best_k: if verdict == Verdict::Radial { 0 } else { best_k },
        rows,
        conjecture_open: zero_weight && n == 4,
        bounds: if zero_weight { symmetry_breaking_bounds(n).ok() } else { None },
        seed: opts.seed,
    })
}
