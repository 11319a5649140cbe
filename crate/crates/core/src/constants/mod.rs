//! Closed-form sharp constants and the per-mode quotients 𝒥, 𝒦.
//!
//! Mode quotients at integer N and f64 α are evaluated in exact rational
//! arithmetic (every finite f64 is a dyadic rational) and converted once.

mod monotonicity;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

pub use monotonicity::{
    j_tail_parts, k_tail_derivative, k_tail_value, step2_inequalities, tail_certificate,
    JTailParts, Step2Check, TailCertificate, TAIL_GRID_END, TAIL_GRID_START, TAIL_GRID_STEP,
};

/// Default number of modes scanned by [`mode_infimum`].
pub const DEFAULT_K_MAX: u32 = 64;

/// (N, α) and an optional β for the reference formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityParams {
    pub n: u32,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

impl InequalityParams {
    pub fn new(n: u32, alpha: f64) -> Result<Self> {
        if n < 1 {
            return Err(CoreError::Domain("dimension N must be at least 1".into()));
        }
        if !alpha.is_finite() {
            return Err(CoreError::Domain(format!("α must be finite, got {alpha}")));
        }
        Ok(Self {
            n,
            alpha,
            beta: None,
        })
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(CoreError::Domain(format!("β must be finite, got {beta}")));
        }
        self.beta = Some(beta);
        Ok(self)
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    /// Conditions N ≥ 2, α > -1, N ≥ 5α + 5 that are not met.
    pub fn weighted_case_violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.n < 2 {
            v.push(format!("N ≥ 2 fails (N = {})", self.n));
        }
        if self.alpha <= -1.0 {
            v.push(format!("α > -1 fails (α = {})", self.alpha));
        }
        if self.nf() < 5.0 * self.alpha + 5.0 {
            v.push(format!(
                "N ≥ 5α+5 fails (N = {}, 5α+5 = {})",
                self.n,
                5.0 * self.alpha + 5.0
            ));
        }
        v
    }

    pub fn in_weighted_case(&self) -> bool {
        self.weighted_case_violations().is_empty()
    }
}

impl fmt::Display for InequalityParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N={}, α={}", self.n, self.alpha)?;
        if let Some(b) = self.beta {
            write!(f, ", β={b}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuotientFormula {
    J,
    K,
    #[serde(rename = "DN-general")]
    DnGeneral,
}

impl fmt::Display for QuotientFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QuotientFormula::J => "J",
            QuotientFormula::K => "K",
            QuotientFormula::DnGeneral => "DN-general",
        })
    }
}

impl FromStr for QuotientFormula {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "J" => Ok(Self::J),
            "K" => Ok(Self::K),
            "DN" | "DN-GENERAL" => Ok(Self::DnGeneral),
            _ => Err(CoreError::Domain(format!(
                "unknown formula '{s}' (expected J, K or DN-general)"
            ))),
        }
    }
}

/// One per-mode constant candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeQuotient {
    pub k: u32,
    pub value: f64,
    pub formula: QuotientFormula,
    pub params: InequalityParams,
    /// Exact value as "p/q".
    pub exact: String,
}

impl ModeQuotient {
    fn from_exact(k: u32, q: &BigRational, formula: QuotientFormula, params: InequalityParams) -> Self {
        Self {
            k,
            value: to_f64(q),
            formula,
            params,
            exact: format!("{}/{}", q.numer(), q.denom()),
        }
    }

    /// Parses `exact` back into a rational.
    pub fn exact_value(&self) -> BigRational {
        let (n, d) = self.exact.split_once('/').expect("exact is p/q");
        BigRational::new(n.parse().expect("integer"), d.parse().expect("integer"))
    }
}

pub(crate) fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub(crate) fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

fn pow(q: &BigRational, e: i32) -> BigRational {
    num_traits::pow(q.clone(), e as usize)
}

fn quarter() -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(4))
}

/// 𝒥(N,k) exactly. k = 0 returns (N+1)²/4, the value of the expression's
/// limit; at N = 3 the formula itself is 0/0 there.
pub fn mode_quotient_j_exact(n: u32, k: u32) -> Result<BigRational> {
    if n < 2 {
        return Err(CoreError::Domain(format!("𝒥 needs N ≥ 2, got {n}")));
    }
    let (n, k) = (n as i64, k as i64);
    if k == 0 {
        return Ok(pow(&int(n + 1), 2) * quarter());
    }
    let t = int(n + 2 * k - 3);
    let den = pow(&t, 2) + int(4 * k);
    if den.is_zero() {
        return Err(CoreError::ZeroDenominator(format!(
            "(N+2k-3)² + 4k vanishes at N={n}, k={k}"
        )));
    }
    Ok(pow(&t, 4) * pow(&int(n + 2 * k + 1), 2) / (int(4) * pow(&den, 2)))
}

pub fn mode_quotient_j(n: u32, k: u32) -> Result<ModeQuotient> {
    let q = mode_quotient_j_exact(n, k)?;
    let params = InequalityParams::new(n, 0.0)?;
    Ok(ModeQuotient::from_exact(k, &q, QuotientFormula::J, params))
}

fn check_k_params(params: &InequalityParams) -> Result<()> {
    if params.n < 2 {
        return Err(CoreError::Domain(format!("𝒦 needs N ≥ 2, got {}", params.n)));
    }
    if params.alpha <= -1.0 {
        return Err(CoreError::Domain(format!(
            "𝒦 needs α > -1, got {}",
            params.alpha
        )));
    }
    Ok(())
}

/// 𝒦(N,α,k) exactly; k = 0 returns (N+3α+1)²/4 as for 𝒥.
///
/// With α = m/D the value is T⁴S² / (4D²(T² + 4kD(m+D))²) where
/// T = (N+2k-3)D - m and S = (N+2k+1)D + 3m, so a single reduction suffices.
pub fn mode_quotient_k_exact(params: &InequalityParams, k: u32) -> Result<BigRational> {
    check_k_params(params)?;
    let a = rat(params.alpha);
    let (m, d) = (a.numer().clone(), a.denom().clone());
    let nk = BigInt::from(params.n as i64 + 2 * k as i64);
    if k == 0 {
        let s = (&nk + 1) * &d + 3 * &m;
        return Ok(BigRational::new(&s * &s, 4 * &d * &d));
    }
    let t = (&nk - 3) * &d - &m;
    let s = (&nk + 1) * &d + 3 * &m;
    let den: BigInt = &t * &t + BigInt::from(4 * k) * &d * (&m + &d);
    if den.is_zero() {
        return Err(CoreError::ZeroDenominator(format!(
            "(N+2k-α-3)² + 4(α+1)k vanishes at {params}, k={k}"
        )));
    }
    let t2 = &t * &t;
    Ok(BigRational::new(&t2 * &t2 * &s * &s, 4 * &d * &d * &den * &den))
}

pub fn mode_quotient_k(params: &InequalityParams, k: u32) -> Result<ModeQuotient> {
    let q = mode_quotient_k_exact(params, k)?;
    let p = InequalityParams { beta: None, ..*params };
    Ok(ModeQuotient::from_exact(k, &q, QuotientFormula::K, p))
}

/// Conditions of the general lower-bound display that fail for (N, α, β).
pub fn dn_precondition_violations(params: &InequalityParams) -> Vec<String> {
    let n = params.nf();
    let a = params.alpha;
    let b = params.beta.unwrap_or(0.0);
    let mut v = Vec::new();
    let mut need = |ok: bool, what: &str, val: f64| {
        if !ok {
            v.push(format!("{what} fails (value {val})"));
        }
    };
    need(n - 2.0 * a > 0.0, "N-2α > 0", n - 2.0 * a);
    need(n - 2.0 * b > 0.0, "N-2β > 0", n - 2.0 * b);
    need(n - a - b - 1.0 > 0.0, "N-α-β-1 > 0", n - a - b - 1.0);
    need(a - b + 1.0 > 0.0, "α-β+1 > 0", a - b + 1.0);
    need(n + 2.0 * a > 0.0, "N+2α > 0", n + 2.0 * a);
    v
}

/// One term of the general (α, β) lower-bound display, exactly. β defaults
/// to 0. The k-proportional corrections are taken as 0 at k = 0.
pub fn mode_quotient_dn_exact(params: &InequalityParams, k: u32) -> Result<BigRational> {
    let bad = dn_precondition_violations(params);
    if !bad.is_empty() {
        return Err(CoreError::Precondition(bad));
    }
    let n = int(params.n as i64);
    let a = rat(params.alpha);
    let b = rat(params.beta.unwrap_or(0.0));
    let kk = int(k as i64);
    let one = BigRational::one();
    let zero = BigRational::zero();
    let (num, den) = if k == 0 {
        (one.clone(), one.clone())
    } else {
        let d1 = pow(&(&n + int(2) * &kk - int(2) * &b - int(2)), 2);
        let d2 = pow(&(&n + int(2) * &kk - &a - &b - int(3)), 2);
        if d1.is_zero() || d2.is_zero() {
            return Err(CoreError::ZeroDenominator(format!(
                "lower-bound term has a vanishing denominator at {params}, k={k}"
            )));
        }
        let t1 = int(8) * &b * &kk / d1;
        let t2 = int(4) * (&a + &b + &one) * &kk / d2;
        let num = &one + if t1 < zero { t1 } else { zero.clone() };
        let den = &one + if t2 > zero { t2 } else { zero.clone() };
        (num, den)
    };
    let s = (&n + int(2) * &kk + int(3) * &a - &b + &one) / int(2);
    Ok(num / pow(&den, 2) * pow(&s, 2))
}

pub fn mode_quotient_dn(params: &InequalityParams, k: u32) -> Result<ModeQuotient> {
    let q = mode_quotient_dn_exact(params, k)?;
    Ok(ModeQuotient::from_exact(k, &q, QuotientFormula::DnGeneral, *params))
}

pub fn mode_quotient(formula: QuotientFormula, params: &InequalityParams, k: u32) -> Result<ModeQuotient> {
    match formula {
        QuotientFormula::J => mode_quotient_j(params.n, k),
        QuotientFormula::K => mode_quotient_k(params, k),
        QuotientFormula::DnGeneral => mode_quotient_dn(params, k),
    }
}

fn exact_quotient(formula: QuotientFormula, params: &InequalityParams, k: u32) -> Result<BigRational> {
    match formula {
        QuotientFormula::J => mode_quotient_j_exact(params.n, k),
        QuotientFormula::K => mode_quotient_k_exact(params, k),
        QuotientFormula::DnGeneral => mode_quotient_dn_exact(params, k),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeInfimum {
    pub best: ModeQuotient,
    pub argmin: u32,
    /// True when the hypotheses hold and the continuous tail passed the
    /// monotonicity certificate.
    pub tail_verified: bool,
    pub values: Vec<ModeQuotient>,
}

/// Minimum of the chosen per-mode quotient over k = 0..=k_max (exact
/// comparison). Ties go to the smaller k.
pub fn mode_infimum(formula: QuotientFormula, params: &InequalityParams, k_max: u32) -> Result<ModeInfimum> {
    if k_max < 2 {
        return Err(CoreError::Domain(format!("k_max must be at least 2, got {k_max}")));
    }
    let p = match formula {
        QuotientFormula::J => InequalityParams {
            alpha: 0.0,
            beta: None,
            ..*params
        },
        _ => *params,
    };
    let mut exact = Vec::with_capacity(k_max as usize + 1);
    for k in 0..=k_max {
        exact.push(exact_quotient(formula, &p, k)?);
    }
    let mut argmin = 0usize;
    for (i, q) in exact.iter().enumerate() {
        if q < &exact[argmin] {
            argmin = i;
        }
    }
    let values: Vec<ModeQuotient> = exact
        .iter()
        .enumerate()
        .map(|(k, q)| ModeQuotient::from_exact(k as u32, q, formula, p))
        .collect();

    let hypotheses = match formula {
        QuotientFormula::J => p.n >= 2,
        QuotientFormula::K => p.in_weighted_case(),
        QuotientFormula::DnGeneral => p.beta.unwrap_or(0.0) == 0.0 && p.in_weighted_case(),
    };
    let tail_verified = if hypotheses {
        let cert = tail_certificate(&p)?;
        if !cert.passed {
            return Err(CoreError::Consistency(format!(
                "tail of the mode quotient decreases at x = {:?} for {p}",
                cert.first_failure
            )));
        }
        true
    } else {
        false
    };
    Ok(ModeInfimum {
        best: values[argmin].clone(),
        argmin: argmin as u32,
        tail_verified,
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SharpCase {
    /// N = 1, -1 < α ≤ -1/2: α²/4
    #[serde(rename = "1a")]
    OneDimSmall,
    /// N = 1, α > -1/2: (3α+2)²/4
    #[serde(rename = "1b")]
    OneDimLarge,
    /// N ≥ 2, α > -1, N ≥ 5α+5: (N+3α+1)²/4
    #[serde(rename = "2")]
    Weighted,
}

impl SharpCase {
    pub fn label(&self) -> &'static str {
        match self {
            SharpCase::OneDimSmall => "1a",
            SharpCase::OneDimLarge => "1b",
            SharpCase::Weighted => "2",
        }
    }
}

pub fn sharp_constant_case(params: &InequalityParams) -> Result<SharpCase> {
    let a = params.alpha;
    if params.n == 1 {
        if a < -1.0 {
            return Err(CoreError::UnsupportedRegime(format!(
                "N = 1 with α = {a} < -1 is not supported"
            )));
        }
        if a == -1.0 {
            return Err(CoreError::UnsupportedRegime("N = 1 with α = -1 matches no case".into()));
        }
        return Ok(if a <= -0.5 {
            SharpCase::OneDimSmall
        } else {
            SharpCase::OneDimLarge
        });
    }
    let bad = params.weighted_case_violations();
    if bad.is_empty() {
        Ok(SharpCase::Weighted)
    } else {
        Err(CoreError::UnsupportedRegime(format!(
            "no closed form for {params}: {}",
            bad.join("; ")
        )))
    }
}

pub fn sharp_constant_exact(params: &InequalityParams) -> Result<BigRational> {
    let a = rat(params.alpha);
    let one = BigRational::one();
    Ok(match sharp_constant_case(params)? {
        SharpCase::OneDimSmall => pow(&a, 2) * quarter(),
        SharpCase::OneDimLarge => pow(&(int(3) * &a + int(2)), 2) * quarter(),
        SharpCase::Weighted => {
            pow(&(int(params.n as i64) + int(3) * &a + &one), 2) * quarter()
        }
    })
}

/// C(N, α) for the case of the parameter block that applies.
pub fn sharp_constant_closed_form(params: &InequalityParams) -> Result<f64> {
    Ok(to_f64(&sharp_constant_exact(params)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub lower: f64,
    pub upper: f64,
    pub conjectured: f64,
    pub params: InequalityParams,
    pub lower_exact: String,
    pub upper_exact: String,
    pub conjecture_open: bool,
}

/// Two-sided bounds on C(N) for N ∈ {2, 3}; N = 4 uses the radial value as
/// upper bound and is flagged open.
pub fn symmetry_breaking_bounds(n: u32) -> Result<BoundsReport> {
    if !(2..=4).contains(&n) {
        return Err(CoreError::Domain(format!(
            "bounds are available for N ∈ {{2, 3, 4}}, got {n}"
        )));
    }
    let ni = n as i64;
    let lower = mode_quotient_j_exact(n, 1)?;
    let conjectured = pow(&int(ni + 1), 2) * quarter();
    let (upper, open) = if n == 4 {
        (conjectured.clone(), true)
    } else {
        (test_function_exact(n)?, false)
    };
    if lower > upper || (!open && upper >= conjectured) {
        return Err(CoreError::Consistency(format!(
            "bounds out of order at N={n}: {lower} ≤ {upper} < {conjectured} fails"
        )));
    }
    let fmt = |q: &BigRational| format!("{}/{}", q.numer(), q.denom());
    Ok(BoundsReport {
        lower: to_f64(&lower),
        upper: to_f64(&upper),
        conjectured: to_f64(&conjectured),
        params: InequalityParams::new(n, 0.0)?,
        lower_exact: fmt(&lower),
        upper_exact: fmt(&upper),
        conjecture_open: open,
    })
}

/// N(N+4)(N²-1)² / (4(N²-N+4)²), the quotient of |x|e^{-|x|}φ₁.
pub fn test_function_exact(n: u32) -> Result<BigRational> {
    if n < 2 {
        return Err(CoreError::Domain(format!("test function needs N ≥ 2, got {n}")));
    }
    let n = n as i64;
    Ok(int(n * (n + 4)) * pow(&int(n * n - 1), 2) / (int(4) * pow(&int(n * n - n + 4), 2)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceEntry {
    pub value: Option<f64>,
    pub formula: String,
    /// Whether the stated hypotheses hold at these parameters.
    pub applies: bool,
    pub note: Option<String>,
}

/// Constants of the first- and second-order inequalities that the weighted
/// family extends, keyed by name.
pub fn reference_constants(params: &InequalityParams) -> BTreeMap<String, ReferenceEntry> {
    let n = params.nf();
    let a = params.alpha;
    let mut out = BTreeMap::new();
    out.insert(
        "thmA".to_string(),
        ReferenceEntry {
            value: Some((n + 1.0).powi(2) / 4.0),
            formula: "(N+1)²/4".into(),
            applies: params.n >= 5,
            note: (params.n < 5).then(|| "sharp only for N ≥ 5".to_string()),
        },
    );
    out.insert(
        "thmB".to_string(),
        ReferenceEntry {
            value: Some((n + 2.0).powi(2) / 4.0),
            formula: "(N+2)²/4".into(),
            applies: true,
            note: None,
        },
    );
    if let Some(b) = params.beta {
        let entry = if b < 1.0 {
            ReferenceEntry {
                value: Some((n - b + 1.0).powi(2) / 4.0),
                formula: "(N-β+1)²/4".into(),
                applies: params.n >= 5,
                note: None,
            }
        } else if b > 1.0 {
            ReferenceEntry {
                value: Some((n + b - 1.0).powi(2) / 4.0),
                formula: "(N+β-1)²/4".into(),
                applies: params.n >= 5,
                note: None,
            }
        } else {
            ReferenceEntry {
                value: None,
                formula: "Hardy-Rellich".into(),
                applies: true,
                note: Some("β = 1 is the sharp Hardy-Rellich inequality".into()),
            }
        };
        out.insert("thmC".to_string(), entry);
    }
    out.insert(
        "thmD".to_string(),
        ReferenceEntry {
            value: Some((n + 4.0 * a + 2.0).powi(2) / 4.0),
            formula: "(N+4α+2)²/4".into(),
            applies: params.n >= 2 && (a + 1.0 > 0.0 || n + 4.0 * a + 2.0 > 0.0),
            note: None,
        },
    );
    out.insert(
        "first-order".to_string(),
        ReferenceEntry {
            value: Some((n - 1.0).powi(2) / 4.0),
            formula: "(N-1)²/4".into(),
            applies: params.n >= 2,
            note: None,
        },
    );
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DnBound {
    pub value: f64,
    pub argmin: u32,
    pub exact: String,
}

/// Infimum over k ≤ k_max of the general (α, β) lower-bound display.
pub fn dn_general_lower_bound(params: &InequalityParams, k_max: u32) -> Result<DnBound> {
    let inf = mode_infimum(QuotientFormula::DnGeneral, params, k_max)?;
    Ok(DnBound {
        value: inf.best.value,
        argmin: inf.argmin,
        exact: inf.best.exact,
    })
}

/// |a - b| / |b| with a zero-safe denominator.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

/// True when the rational is strictly positive.
pub fn is_positive(q: &BigRational) -> bool {
    q.is_positive()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn j_table() {
        assert_eq!(mode_quotient_j_exact(2, 1).unwrap(), r(1, 4));
        assert_eq!(mode_quotient_j_exact(3, 1).unwrap(), r(9, 4));
        assert_eq!(mode_quotient_j_exact(4, 1).unwrap(), r(3969, 676));
        assert_eq!(mode_quotient_j_exact(2, 0).unwrap(), r(9, 4));
        assert_eq!(mode_quotient_j_exact(3, 0).unwrap(), r(4, 1));
        assert_eq!(mode_quotient_j_exact(4, 0).unwrap(), r(25, 4));
        assert!(mode_quotient_j(1, 0).is_err());
    }

    #[test]
    fn k_examples() {
        let p = InequalityParams::new(5, 0.0).unwrap();
        assert_eq!(mode_quotient_k(&p, 0).unwrap().value, 9.0);
        let p = InequalityParams::new(10, 1.0).unwrap();
        assert_eq!(mode_quotient_k(&p, 0).unwrap().value, 49.0);
        let p = InequalityParams::new(5, 0.0).unwrap();
        assert_eq!(
            mode_quotient_k_exact(&p, 1).unwrap(),
            mode_quotient_j_exact(5, 1).unwrap()
        );
        // frozen from a brute-force scan of 𝒦(12, 1, k)
        let p = InequalityParams::new(12, 1.0).unwrap();
        let want = [
            r(64, 1),
            r(625, 9),
            r(81, 1),
            r(2401, 25),
            r(1024, 9),
        ];
        for (k, w) in want.iter().enumerate() {
            assert_eq!(&mode_quotient_k_exact(&p, k as u32).unwrap(), w, "k = {k}");
        }
    }

    #[test]
    fn exact_value_round_trips() {
        let q = mode_quotient_j(4, 1).unwrap();
        assert_eq!(q.exact, "3969/676");
        assert_eq!(q.exact_value(), r(3969, 676));
    }

    #[test]
    fn infimum_examples() {
        let p = InequalityParams::new(3, 0.0).unwrap();
        let inf = mode_infimum(QuotientFormula::J, &p, 64).unwrap();
        assert_eq!((inf.argmin, inf.best.exact_value()), (1, r(9, 4)));
        assert!(inf.tail_verified);
        let p = InequalityParams::new(7, 0.0).unwrap();
        let inf = mode_infimum(QuotientFormula::J, &p, 64).unwrap();
        assert_eq!((inf.argmin, inf.best.value), (0, 16.0));
        let p = InequalityParams::new(12, 1.0).unwrap();
        let inf = mode_infimum(QuotientFormula::K, &p, 64).unwrap();
        assert_eq!((inf.argmin, inf.best.value), (0, 64.0));
        assert!(inf.tail_verified);
        assert!(mode_infimum(QuotientFormula::J, &p, 1).is_err());
    }

    #[test]
    fn closed_form_cases() {
        let c = |n, a| sharp_constant_closed_form(&InequalityParams::new(n, a).unwrap());
        assert_eq!(c(1, -0.75).unwrap(), 0.140625);
        assert_eq!(c(1, 0.0).unwrap(), 1.0);
        assert_eq!(c(5, 0.0).unwrap(), 9.0);
        // α = -1/2 belongs to the α²/4 branch
        assert_eq!(c(1, -0.5).unwrap(), 0.0625);
        assert_eq!(c(1, -0.4999).unwrap(), (3.0f64 * -0.4999 + 2.0).powi(2) / 4.0);
        match c(3, 1.0) {
            Err(CoreError::UnsupportedRegime(msg)) => assert!(msg.contains("5α+5")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(c(1, -1.5), Err(CoreError::UnsupportedRegime(_))));
    }

    #[test]
    fn bounds() {
        let b = symmetry_breaking_bounds(2).unwrap();
        assert_eq!((b.lower, b.upper, b.conjectured), (0.25, 0.75, 2.25));
        let b = symmetry_breaking_bounds(3).unwrap();
        assert_eq!((b.lower, b.upper, b.conjectured), (2.25, 3.36, 4.0));
        assert_eq!(b.upper_exact, "84/25");
        let b = symmetry_breaking_bounds(4).unwrap();
        assert_eq!(b.lower_exact, "3969/676");
        assert_eq!(b.upper, 6.25);
        assert!(b.conjecture_open);
        assert!(symmetry_breaking_bounds(5).is_err());
    }

    #[test]
    fn reference_examples() {
        let p = InequalityParams::new(5, 0.0).unwrap().with_beta(0.0).unwrap();
        assert_eq!(reference_constants(&p)["thmC"].value, Some(9.0));
        let p = InequalityParams::new(3, 0.0).unwrap();
        assert_eq!(reference_constants(&p)["thmD"].value, Some(6.25));
        assert!(!reference_constants(&p).contains_key("thmC"));
        let p = InequalityParams::new(2, 0.0).unwrap();
        assert_eq!(reference_constants(&p)["first-order"].value, Some(0.25));
        let p = InequalityParams::new(5, 0.0).unwrap().with_beta(1.0).unwrap();
        let e = &reference_constants(&p)["thmC"];
        assert_eq!((e.value, e.formula.as_str()), (None, "Hardy-Rellich"));
        let p = InequalityParams::new(7, 0.0).unwrap().with_beta(2.0).unwrap();
        assert_eq!(reference_constants(&p)["thmC"].value, Some(16.0));
    }

    #[test]
    fn general_bound() {
        let p = |n, a, b| InequalityParams::new(n, a).unwrap().with_beta(b).unwrap();
        assert_eq!(dn_general_lower_bound(&p(5, 0.0, 0.0), 64).unwrap().value, 9.0);
        assert_eq!(dn_general_lower_bound(&p(6, 0.0, 0.0), 64).unwrap().value, 12.25);
        let d = dn_general_lower_bound(&p(12, 1.0, 0.0), 64).unwrap();
        assert_eq!((d.value, d.argmin), (64.0, 0));
        // β ≠ 0: the infimum moves to k = 1 (frozen brute-force scan)
        let d = dn_general_lower_bound(&p(5, 0.0, 0.5), 64).unwrap();
        assert_eq!((d.argmin, d.exact.as_str()), (1, "540225/85264"));
        match dn_general_lower_bound(&p(2, 1.0, 0.0), 64) {
            Err(CoreError::Precondition(v)) => assert!(v.iter().any(|s| s.contains("N-2α"))),
            other => panic!("{other:?}"),
        }
    }
}
