//! Generalized Laguerre polynomials and Gauss–Laguerre rules, plus the
//! Gram triple in a Laguerre-orthogonal basis.
//!
//! With q = α+1 and y = 2r^q, the profile derivative is written
//! w = v′ = r^α y^s P(y) e^{-y/2}, P = Σ c_j L_j^{(λ)}. Every integrand of
//! the three forms then becomes y^{e} × polynomial × e^{-y}, with all
//! exponents e differing by integers, so a Gauss rule with parameter
//! min(e) integrates them exactly. λ is chosen so the gradient part of C is
//! diagonal.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{CoreError, Result};
use crate::special::{ln_gamma, GammaArg};

/// L_0..L_{n-1} of parameter `lam` at y, and their derivatives.
pub fn laguerre_table(n: usize, lam: f64, y: f64) -> (Vec<f64>, Vec<f64>) {
    let mut l = vec![0.0; n];
    let mut d = vec![0.0; n];
    if n == 0 {
        return (l, d);
    }
    l[0] = 1.0;
    if n > 1 {
        l[1] = 1.0 + lam - y;
    }
    for j in 1..n.saturating_sub(1) {
        let jf = j as f64;
        l[j + 1] = ((2.0 * jf + 1.0 + lam - y) * l[j] - (jf + lam) * l[j - 1]) / (jf + 1.0);
    }
    // L_j′ = -Σ_{i<j} L_i
    let mut acc = 0.0;
    for j in 0..n {
        d[j] = -acc;
        acc += l[j];
    }
    (l, d)
}

/// L_n^{(a)}(x) and its derivative.
fn laguerre_with_derivative(n: usize, a: f64, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p1 = 1.0 + a - x;
    for j in 1..n {
        let jf = j as f64;
        let p2 = ((2.0 * jf + 1.0 + a - x) * p1 - (jf + a) * p0) / (jf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    // x L_n′ = n L_n - (n+a) L_{n-1}
    (p1, (nf * p1 - (nf + a) * p0) / x)
}

/// n-point Gauss rule for ∫₀^∞ f(y) y^a e^{-y} dy, weights normalized to
/// sum to 1 (i.e. divided by Γ(a+1)).
pub fn gauss_laguerre(n: usize, a: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 || !(a > -1.0) || !a.is_finite() {
        return Err(CoreError::Domain(format!(
            "Gauss–Laguerre rule needs n ≥ 1 and a > -1, got n={n}, a={a}"
        )));
    }
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let fi = i as f64;
        jac[(i, i)] = 2.0 * fi + a + 1.0;
        if i + 1 < n {
            let off = ((fi + 1.0) * (fi + 1.0 + a)).sqrt();
            jac[(i, i + 1)] = off;
            jac[(i + 1, i)] = off;
        }
    }
    let mut nodes: Vec<f64> = SymmetricEigen::new(jac).eigenvalues.iter().copied().collect();
    nodes.sort_by(f64::total_cmp);
    // ln[Γ(n+a+1) / (n! Γ(a+1))]
    let nf = n as f64;
    let ln_pref = ln_gamma(GammaArg::new(nf + a + 1.0)?)
        - ln_gamma(GammaArg::new(nf + 1.0)?)
        - ln_gamma(GammaArg::new(a + 1.0)?);
    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = laguerre_with_derivative(n, a, *x);
            let step = p / dp;
            *x -= step;
            if step.abs() <= 4.0 * f64::EPSILON * x.abs() {
                break;
            }
        }
        let (_, dp) = laguerre_with_derivative(n, a, *x);
        // w = Γ(n+a+1) / (n! x [L_n′(x)]²)
        weights.push((ln_pref - x.ln() - 2.0 * dp.abs().ln()).exp());
    }
    Ok((nodes, weights))
}

/// Exponents of the Laguerre representation for one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LaguerreLayout {
    pub lam: f64,
    pub e_a: f64,
    pub e_b: f64,
    pub e_c: f64,
    pub e_cv: Option<f64>,
    pub base: f64,
}

pub(crate) fn layout(n: f64, alpha: f64, k: u32, s: u32, with_potential: bool) -> Result<LaguerreLayout> {
    let q = alpha + 1.0;
    let kf = k as f64;
    let sf = s as f64;
    let c0 = (n + 2.0 * kf + alpha - 1.0) / q - 1.0;
    let e_c = c0 + 2.0 * sf;
    let e_a = c0 - 1.0 + 2.0 * sf;
    let e_b = c0 + 1.0 + 2.0 * sf;
    let e_cv = with_potential.then_some(c0 - 2.0);
    let mut base = e_a.min(e_b).min(e_c);
    if let Some(e) = e_cv {
        base = base.min(e);
    }
    if !(base > -1.0) {
        return Err(CoreError::Divergent(format!(
            "Laguerre Gram exponent {base} ≤ -1 (N={n}, α={alpha}, k={k}, s={s}); raise s"
        )));
    }
    Ok(LaguerreLayout {
        lam: e_c,
        e_a,
        e_b,
        e_c,
        e_cv,
        base,
    })
}

/// Laguerre-basis Gram matrices, up to a common positive factor.
pub(crate) struct LaguerreGram {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c_grad: DMatrix<f64>,
    pub c_pot: Option<DMatrix<f64>>,
}

pub(crate) fn laguerre_gram(
    n: f64,
    alpha: f64,
    k: u32,
    m: usize,
    s: u32,
    with_potential: bool,
) -> Result<LaguerreGram> {
    let lay = layout(n, alpha, k, s, with_potential)?;
    let q = alpha + 1.0;
    let su = s as usize;
    let sf = s as f64;
    let size = m + su;
    let (nodes, weights) = gauss_laguerre(m + su + 6, lay.base)?;

    // v-polynomial coefficients: (d/dy - 1/2) pv = y^s P / (2q)
    let mut vcoef = DMatrix::<f64>::zeros(size, m);
    if with_potential {
        let mut e = DMatrix::<f64>::zeros(size, m);
        for j in 0..m {
            e[(j, j)] = 1.0;
        }
        for _ in 0..s {
            // y L_j = -(j+1) L_{j+1} + (2j+λ+1) L_j - (j+λ) L_{j-1}
            let mut next = DMatrix::<f64>::zeros(size, m);
            for col in 0..m {
                for j in 0..size {
                    let c = e[(j, col)];
                    if c == 0.0 {
                        continue;
                    }
                    let jf = j as f64;
                    if j + 1 < size {
                        next[(j + 1, col)] -= (jf + 1.0) * c;
                    }
                    next[(j, col)] += (2.0 * jf + lay.lam + 1.0) * c;
                    if j > 0 {
                        next[(j - 1, col)] -= (jf + lay.lam) * c;
                    }
                }
            }
            e = next;
        }
        // D = -1/2 I - U is upper triangular; back-substitute
        for col in 0..m {
            for i in (0..size).rev() {
                let tail: f64 = ((i + 1)..size).map(|j| vcoef[(j, col)]).sum();
                vcoef[(i, col)] = -2.0 * (e[(i, col)] / (2.0 * q) + tail);
            }
        }
    }

    let a_coef = (2.0 * alpha + 1.0) * (n + 2.0 * k as f64 - 1.0);
    let mut a = DMatrix::<f64>::zeros(m, m);
    let mut b = DMatrix::<f64>::zeros(m, m);
    let mut c = DMatrix::<f64>::zeros(m, m);
    let mut cv = with_potential.then(|| DMatrix::<f64>::zeros(m, m));
    let mut pt = DVector::<f64>::zeros(m);
    let mut qt = DVector::<f64>::zeros(m);
    let mut pv = DVector::<f64>::zeros(m);
    for (&y, &wt) in nodes.iter().zip(&weights) {
        let (l, d) = laguerre_table(size, lay.lam, y);
        for j in 0..m {
            pt[j] = l[j];
            qt[j] = (alpha + q * sf) * l[j] + q * y * (d[j] - 0.5 * l[j]);
        }
        let ln_y = y.ln();
        let wa = 2.0 * wt * ((lay.e_a - lay.base) * ln_y).exp();
        let wb = 0.5 * wt * ((lay.e_b - lay.base) * ln_y).exp();
        let wc = wt * ((lay.e_c - lay.base) * ln_y).exp();
        a.ger(wa, &qt, &qt, 1.0);
        if a_coef != 0.0 {
            a.ger(wa * a_coef, &pt, &pt, 1.0);
        }
        b.ger(wb, &pt, &pt, 1.0);
        c.ger(wc, &pt, &pt, 1.0);
        if let (Some(cv), Some(e_cv)) = (cv.as_mut(), lay.e_cv) {
            for j in 0..m {
                pv[j] = (0..size).map(|i| vcoef[(i, j)] * l[i]).sum();
            }
            let wv = wt * ((e_cv - lay.base) * ln_y).exp();
            cv.ger(wv, &pv, &pv, 1.0);
        }
    }
    // The potential energy in y-variables carries a factor 4 relative to
    // the gradient energy; fold it in here.
    let c_pot = cv.map(|m| m * 4.0);
    Ok(LaguerreGram {
        a: symmetrize(a),
        b: symmetrize(b),
        c_grad: symmetrize(c),
        c_pot: c_pot.map(symmetrize),
    })
}

pub(crate) fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}
