//! Radial profiles v(r) and the extremal families that generate them.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::constants::InequalityParams;
use crate::error::{CoreError, Result};
use crate::exppoly::ExpPoly;
use crate::quadrature::{integrate_fn, DecayHint, QuadratureSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyId {
    #[serde(rename = "thmA")]
    ThmA,
    #[serde(rename = "thm1.2-1a")]
    OneA,
    #[serde(rename = "thm1.2-1b")]
    OneB,
    #[serde(rename = "thm1.2-2")]
    Weighted,
    #[serde(rename = "thmB")]
    ThmB,
    #[serde(rename = "thmC-1")]
    ThmC1,
    #[serde(rename = "thmC-2")]
    ThmC2,
    #[serde(rename = "thmD")]
    ThmD,
}

impl FamilyId {
    pub const ALL: [FamilyId; 8] = [
        FamilyId::ThmA,
        FamilyId::OneA,
        FamilyId::OneB,
        FamilyId::Weighted,
        FamilyId::ThmB,
        FamilyId::ThmC1,
        FamilyId::ThmC2,
        FamilyId::ThmD,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FamilyId::ThmA => "thmA",
            FamilyId::OneA => "thm1.2-1a",
            FamilyId::OneB => "thm1.2-1b",
            FamilyId::Weighted => "thm1.2-2",
            FamilyId::ThmB => "thmB",
            FamilyId::ThmC1 => "thmC-1",
            FamilyId::ThmC2 => "thmC-2",
            FamilyId::ThmD => "thmD",
        }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyId {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self> {
        FamilyId::ALL
            .into_iter()
            .find(|f| f.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| CoreError::Domain(format!("unsupported family id '{s}'")))
    }
}

/// A member of one of the known extremal families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremalFamily {
    pub family_id: FamilyId,
    pub a: f64,
    pub b: f64,
    pub params: InequalityParams,
}

impl ExtremalFamily {
    pub fn new(family_id: FamilyId, a: f64, b: f64, params: InequalityParams) -> Result<Self> {
        let f = Self {
            family_id,
            a,
            b,
            params,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.b.is_finite()) {
            return Err(CoreError::Domain("family amplitude and rate must be finite".into()));
        }
        let ok = match self.family_id {
            FamilyId::ThmC2 => self.b < 0.0,
            _ => self.b > 0.0,
        };
        if !ok {
            return Err(CoreError::Domain(format!(
                "rate b = {} has the wrong sign for {}",
                self.b, self.family_id
            )));
        }
        let alpha = self.params.alpha;
        match self.family_id {
            FamilyId::OneA | FamilyId::OneB | FamilyId::Weighted | FamilyId::ThmD
                if alpha <= -1.0 =>
            {
                Err(CoreError::Domain(format!("{} needs α > -1", self.family_id)))
            }
            FamilyId::ThmC1 | FamilyId::ThmC2 => {
                let beta = self.params.beta.ok_or_else(|| {
                    CoreError::Domain(format!("{} needs β", self.family_id))
                })?;
                let good = if self.family_id == FamilyId::ThmC1 {
                    beta < 1.0
                } else {
                    beta > 1.0
                };
                if good {
                    Ok(())
                } else {
                    Err(CoreError::Domain(format!(
                        "{} does not cover β = {beta}",
                        self.family_id
                    )))
                }
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileKind {
    #[serde(rename = "closed-form-family")]
    ClosedFormFamily,
    #[serde(rename = "basis-coefficients")]
    BasisCoefficients,
    #[serde(rename = "callable")]
    Callable,
}

/// r ↦ (v, v′, v″)
pub type ProfileFn = Arc<dyn Fn(f64) -> [f64; 3] + Send + Sync>;

#[derive(Clone)]
pub(crate) enum Repr {
    Closed { v: ExpPoly, dv: ExpPoly, d2v: ExpPoly },
    /// v(r) = -∫_r^∞ v′(s) ds
    TailDefined { dv: ExpPoly, d2v: ExpPoly },
    Callable { f: ProfileFn, decay: Option<DecayHint> },
}

/// A radial profile v(r) with its first two derivatives.
#[derive(Clone)]
pub struct RadialProfile {
    pub kind: ProfileKind,
    pub family: Option<ExtremalFamily>,
    pub coeffs: Option<Vec<f64>>,
    pub(crate) repr: Repr,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile")
            .field("kind", &self.kind)
            .field("family", &self.family)
            .field("coeffs", &self.coeffs)
            .finish_non_exhaustive()
    }
}

impl RadialProfile {
    fn closed(kind: ProfileKind, v: ExpPoly) -> Self {
        let dv = v.derivative();
        let d2v = dv.derivative();
        Self {
            kind,
            family: None,
            coeffs: None,
            repr: Repr::Closed { v, dv, d2v },
        }
    }

    /// v given in closed form.
    pub fn from_exppoly(v: ExpPoly) -> Self {
        Self::closed(ProfileKind::ClosedFormFamily, v)
    }

    /// v defined through v′ and decay at infinity.
    pub fn from_derivative(dv: ExpPoly) -> Self {
        let d2v = dv.derivative();
        Self {
            kind: ProfileKind::ClosedFormFamily,
            family: None,
            coeffs: None,
            repr: Repr::TailDefined { dv, d2v },
        }
    }

    /// v(r) = Σ cⱼ r^{γ₀ + j q} e^{-r^q}.
    pub fn from_basis(coeffs: &[f64], gamma0: f64, q: f64) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(CoreError::Domain("basis coefficients must be finite and non-empty".into()));
        }
        if !(q > 0.0) {
            return Err(CoreError::Domain(format!("basis exponent q must be positive, got {q}")));
        }
        let terms = coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| (c, gamma0 + j as f64 * q))
            .collect();
        let mut p = Self::closed(ProfileKind::BasisCoefficients, ExpPoly::new(1.0, q, terms));
        p.coeffs = Some(coeffs.to_vec());
        Ok(p)
    }

    /// A user-supplied profile. The derivatives are checked against central
    /// differences of v on r ∈ [0.25, 4].
    pub fn callable(f: ProfileFn, decay: Option<DecayHint>) -> Result<Self> {
        let grid: Vec<f64> = (1..=16).map(|i| 0.25 * i as f64).collect();
        let mut scale1: f64 = 0.0;
        let mut scale2: f64 = 0.0;
        for &r in &grid {
            let [v, d1, d2] = f(r);
            if !(v.is_finite() && d1.is_finite() && d2.is_finite()) {
                return Err(CoreError::NonFiniteSample { at: r });
            }
            scale1 = scale1.max(d1.abs());
            scale2 = scale2.max(d2.abs());
        }
        for &r in &grid {
            let h = 1e-4 * r;
            let [v0, d1, d2] = f(r);
            let [vp, d1p, _] = f(r + h);
            let [vm, d1m, _] = f(r - h);
            let fd1 = (vp - vm) / (2.0 * h);
            let fd2 = (vp - 2.0 * v0 + vm) / (h * h);
            let fd2b = (d1p - d1m) / (2.0 * h);
            let bad1 = (fd1 - d1).abs() > 1e-6 * d1.abs().max(scale1).max(1e-300);
            let bad2 = (fd2b - d2).abs() > 1e-6 * d2.abs().max(scale2).max(1e-300)
                && (fd2 - d2).abs() > 1e-4 * d2.abs().max(scale2).max(1e-300);
            if bad1 || bad2 {
                return Err(CoreError::Consistency(format!(
                    "callable profile derivatives disagree with finite differences at r = {r}"
                )));
            }
        }
        Ok(Self {
            kind: ProfileKind::Callable,
            family: None,
            coeffs: None,
            repr: Repr::Callable { f, decay },
        })
    }

    pub fn decay_hint(&self) -> Option<DecayHint> {
        match &self.repr {
            Repr::Closed { dv, .. } | Repr::TailDefined { dv, .. } => Some(dv.decay()),
            Repr::Callable { decay, .. } => *decay,
        }
    }

    /// Closed forms of (v, v′, v″) where available; v is `None` when it is
    /// only defined through its derivative.
    pub fn exp_parts(&self) -> Option<(Option<&ExpPoly>, &ExpPoly, &ExpPoly)> {
        match &self.repr {
            Repr::Closed { v, dv, d2v } => Some((Some(v), dv, d2v)),
            Repr::TailDefined { dv, d2v } => Some((None, dv, d2v)),
            Repr::Callable { .. } => None,
        }
    }

    pub fn dv(&self, r: f64) -> f64 {
        match &self.repr {
            Repr::Closed { dv, .. } | Repr::TailDefined { dv, .. } => dv.eval(r),
            Repr::Callable { f, .. } => f(r)[1],
        }
    }

    pub fn d2v(&self, r: f64) -> f64 {
        match &self.repr {
            Repr::Closed { d2v, .. } | Repr::TailDefined { d2v, .. } => d2v.eval(r),
            Repr::Callable { f, .. } => f(r)[2],
        }
    }

    /// v(r); the tail-defined kind integrates its derivative from r to ∞.
    pub fn v(&self, r: f64) -> Result<f64> {
        match &self.repr {
            Repr::Closed { v, .. } => Ok(v.eval(r)),
            Repr::Callable { f, .. } => Ok(f(r)[0]),
            Repr::TailDefined { dv, .. } => {
                let g = |t: f64| dv.eval(r + t);
                let hint = (dv.q > 0.0).then(|| dv.decay());
                let spec = QuadratureSpec::default().with_rel_tol(1e-13);
                Ok(-integrate_fn(&g, 0.0, hint, &spec)?.value)
            }
        }
    }

    pub fn eval(&self, r: f64) -> Result<[f64; 3]> {
        Ok([self.v(r)?, self.dv(r), self.d2v(r)])
    }

    /// c · v
    pub fn scaled(&self, c: f64) -> Self {
        let repr = match &self.repr {
            Repr::Closed { v, dv, d2v } => Repr::Closed {
                v: v.scale(c),
                dv: dv.scale(c),
                d2v: d2v.scale(c),
            },
            Repr::TailDefined { dv, d2v } => Repr::TailDefined {
                dv: dv.scale(c),
                d2v: d2v.scale(c),
            },
            Repr::Callable { f, decay } => {
                let f = f.clone();
                Repr::Callable {
                    f: Arc::new(move |r| f(r).map(|x| c * x)),
                    decay: *decay,
                }
            }
        };
        Self {
            kind: self.kind,
            family: None,
            coeffs: self.coeffs.as_ref().map(|v| v.iter().map(|x| c * x).collect()),
            repr,
        }
    }

    /// r ↦ v(λ r)
    pub fn dilated(&self, lambda: f64) -> Self {
        let repr = match &self.repr {
            Repr::Closed { v, .. } => {
                let v = v.dilate(lambda);
                let dv = v.derivative();
                let d2v = dv.derivative();
                Repr::Closed { v, dv, d2v }
            }
            Repr::TailDefined { dv, .. } => {
                let dv = dv.dilate(lambda).scale(lambda);
                let d2v = dv.derivative();
                Repr::TailDefined { dv, d2v }
            }
            Repr::Callable { f, decay } => {
                let f = f.clone();
                Repr::Callable {
                    f: Arc::new(move |r| {
                        let [a, b, c] = f(lambda * r);
                        [a, lambda * b, lambda * lambda * c]
                    }),
                    decay: decay.map(|d| DecayHint::new(d.c * lambda.powf(d.q), d.q)),
                }
            }
        };
        Self {
            kind: if self.kind == ProfileKind::Callable {
                ProfileKind::Callable
            } else {
                ProfileKind::ClosedFormFamily
            },
            family: None,
            coeffs: None,
            repr,
        }
    }
}

/// The profile of an extremal family member, with analytic derivatives.
pub fn extremal_profile(fam: &ExtremalFamily) -> Result<RadialProfile> {
    fam.validate()?;
    let (a, b) = (fam.a, fam.b);
    let alpha = fam.params.alpha;
    let mut p = match fam.family_id {
        FamilyId::ThmA => RadialProfile::from_exppoly(ExpPoly::new(b, 1.0, vec![(a, 0.0), (a * b, 1.0)])),
        FamilyId::OneB | FamilyId::Weighted => {
            let q = alpha + 1.0;
            RadialProfile::from_exppoly(ExpPoly::new(b, q, vec![(a, 0.0), (a * b, q)]))
        }
        FamilyId::OneA => {
            let q = alpha + 1.0;
            RadialProfile::from_derivative(ExpPoly::new(b, q, vec![(-a, 0.0)]))
        }
        FamilyId::ThmB => RadialProfile::from_exppoly(ExpPoly::new(b, 2.0, vec![(a, 0.0)])),
        FamilyId::ThmD => {
            RadialProfile::from_exppoly(ExpPoly::new(b, 2.0 * (alpha + 1.0), vec![(a, 0.0)]))
        }
        FamilyId::ThmC1 | FamilyId::ThmC2 => {
            let beta = fam.params.beta.expect("validated");
            let q = 1.0 - beta;
            let lead = if fam.family_id == FamilyId::ThmC1 {
                1.0
            } else {
                1.0 - fam.params.nf()
            };
            RadialProfile::from_derivative(ExpPoly::new(b / q, q, vec![(a, lead)]))
        }
    };
    p.family = Some(*fam);
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: u32, a: f64) -> InequalityParams {
        InequalityParams::new(n, a).unwrap()
    }

    #[test]
    fn family_ids_round_trip() {
        for f in FamilyId::ALL {
            assert_eq!(f.as_str().parse::<FamilyId>().unwrap(), f);
            let j = serde_json::to_string(&f).unwrap();
            assert_eq!(j, format!("\"{}\"", f.as_str()));
        }
        assert!("thmZ".parse::<FamilyId>().is_err());
    }

    #[test]
    fn weighted_family_at_alpha_zero() {
        let fam = ExtremalFamily::new(FamilyId::Weighted, 1.0, 1.0, params(5, 0.0)).unwrap();
        let p = extremal_profile(&fam).unwrap();
        for r in [0.1, 1.0, 3.0] {
            let [v, d1, _] = p.eval(r).unwrap();
            assert!((v - (1.0 + r) * (-r).exp()).abs() < 1e-15);
            assert!((d1 + r * (-r).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn one_a_derivative() {
        let fam = ExtremalFamily::new(FamilyId::OneA, 1.0, 1.0, params(1, -0.75)).unwrap();
        let p = extremal_profile(&fam).unwrap();
        for r in [0.1, 1.0, 3.0] {
            assert!((p.dv(r) + (-r.powf(0.25)).exp()).abs() < 1e-15);
        }
        // v(r) = ∫_r^∞ e^{-s^{1/4}} ds = 4 Γ(4, r^{1/4}) = 4·3!·e^{-x}(1 + x + x²/2 + x³/6)
        let r: f64 = 2.0;
        let x = r.powf(0.25);
        let want = 24.0 * (-x).exp() * (1.0 + x + x * x / 2.0 + x * x * x / 6.0);
        assert!((p.v(r).unwrap() - want).abs() < 1e-11 * want);
    }

    #[test]
    fn thm_a_member() {
        let fam = ExtremalFamily::new(FamilyId::ThmA, 2.0, 3.0, params(3, 0.0)).unwrap();
        let p = extremal_profile(&fam).unwrap();
        let r: f64 = 0.4;
        assert!((p.v(r).unwrap() - 2.0 * (1.0 + 3.0 * r) * (-3.0 * r).exp()).abs() < 1e-15);
    }

    #[test]
    fn rate_sign_is_checked() {
        assert!(ExtremalFamily::new(FamilyId::ThmA, 1.0, -1.0, params(5, 0.0)).is_err());
        let p = params(5, 0.0).with_beta(2.0).unwrap();
        assert!(ExtremalFamily::new(FamilyId::ThmC2, 1.0, 1.0, p).is_err());
        assert!(ExtremalFamily::new(FamilyId::ThmC2, 1.0, -1.0, p).is_ok());
        assert!(ExtremalFamily::new(FamilyId::ThmC1, 1.0, 1.0, p).is_err());
    }

    #[test]
    fn callable_checks_derivatives() {
        let good: ProfileFn = Arc::new(|r: f64| {
            let e = (-r).exp();
            [e, -e, e]
        });
        assert!(RadialProfile::callable(good, Some(DecayHint::new(1.0, 1.0))).is_ok());
        let bad: ProfileFn = Arc::new(|r: f64| {
            let e = (-r).exp();
            [e, e, e]
        });
        assert!(matches!(
            RadialProfile::callable(bad, None),
            Err(CoreError::Consistency(_))
        ));
    }

    #[test]
    fn dilation_and_scaling() {
        let p = RadialProfile::from_basis(&[1.0, -0.5, 0.25], 0.0, 1.0).unwrap();
        let d = p.dilated(2.0);
        let s = p.scaled(-3.0);
        for r in [0.3, 1.1] {
            assert!((d.v(r).unwrap() - p.v(2.0 * r).unwrap()).abs() < 1e-14);
            assert!((d.dv(r) - 2.0 * p.dv(2.0 * r)).abs() < 1e-13);
            assert!((s.d2v(r) + 3.0 * p.d2v(r)).abs() < 1e-13);
        }
    }
}
