//! Generalized exponential polynomials Σ cᵢ r^{eᵢ} exp(-b r^q).
//!
//! Every closed-form profile in the crate has this shape, and so do its
//! derivatives and the integrands of all energies. Weighted L² norms then
//! reduce to sums of Gamma values. A negative `q` means the exponential
//! decays at the origin instead of at infinity.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::quadrature::DecayHint;
use crate::special::{weighted_exp_integral, WeightedExpIntegral};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpPoly {
    pub rate: f64,
    pub q: f64,
    /// (coefficient, exponent) pairs, exponents distinct.
    pub terms: Vec<(f64, f64)>,
}

fn same_exponent(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// ∫₀^∞ r^p exp(-c r^q) dr for either sign of q.
pub fn power_exp_integral(p: f64, c: f64, q: f64) -> Result<f64> {
    if q > 0.0 {
        weighted_exp_integral(WeightedExpIntegral::new(p, c, q)?)
    } else if q < 0.0 {
        // r = 1/s
        weighted_exp_integral(WeightedExpIntegral::new(-p - 2.0, c, -q).map_err(|_| {
            CoreError::Divergent(format!(
                "r^{p} exp(-{c} r^{q}) is not integrable at infinity (need p < -1)"
            ))
        })?)
    } else {
        Err(CoreError::Divergent("exponent q = 0 gives no decay".into()))
    }
}

impl ExpPoly {
    pub fn new(rate: f64, q: f64, terms: Vec<(f64, f64)>) -> Self {
        let mut p = Self {
            rate,
            q,
            terms: Vec::new(),
        };
        p.absorb(terms);
        p
    }

    pub fn zero(rate: f64, q: f64) -> Self {
        Self {
            rate,
            q,
            terms: Vec::new(),
        }
    }

    /// Merges terms with equal exponents and drops those that cancel to
    /// round-off.
    fn absorb(&mut self, terms: Vec<(f64, f64)>) {
        let mut merged: Vec<(f64, f64, f64)> = self
            .terms
            .iter()
            .map(|&(c, e)| (c, e, c.abs()))
            .collect();
        for (c, e) in terms {
            if c == 0.0 {
                continue;
            }
            match merged.iter_mut().find(|m| same_exponent(m.1, e)) {
                Some(m) => {
                    m.0 += c;
                    m.2 += c.abs();
                }
                None => merged.push((c, e, c.abs())),
            }
        }
        merged.retain(|&(c, _, mag)| c.abs() > 8.0 * f64::EPSILON * mag);
        merged.sort_by(|a, b| a.1.total_cmp(&b.1));
        self.terms = merged.into_iter().map(|(c, e, _)| (c, e)).collect();
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn decay(&self) -> DecayHint {
        DecayHint::new(self.rate, self.q)
    }

    pub fn eval(&self, r: f64) -> f64 {
        let damp = (-self.rate * r.powf(self.q)).exp();
        if damp == 0.0 {
            return 0.0;
        }
        let ln_r = r.ln();
        self.terms
            .iter()
            .map(|&(c, e)| c * (e * ln_r).exp())
            .sum::<f64>()
            * damp
    }

    pub fn derivative(&self) -> Self {
        let (b, q) = (self.rate, self.q);
        let mut out = Vec::with_capacity(2 * self.terms.len());
        for &(c, e) in &self.terms {
            out.push((c * e, e - 1.0));
            out.push((-c * b * q, e + q - 1.0));
        }
        Self::new(b, q, out)
    }

    pub fn scale(&self, a: f64) -> Self {
        Self::new(
            self.rate,
            self.q,
            self.terms.iter().map(|&(c, e)| (a * c, e)).collect(),
        )
    }

    /// r^s · self
    pub fn shift(&self, s: f64) -> Self {
        Self::new(
            self.rate,
            self.q,
            self.terms.iter().map(|&(c, e)| (c, e + s)).collect(),
        )
    }

    /// r ↦ self(λ r)
    pub fn dilate(&self, lambda: f64) -> Self {
        Self::new(
            self.rate * lambda.powf(self.q),
            self.q,
            self.terms
                .iter()
                .map(|&(c, e)| (c * lambda.powf(e), e))
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let mut out = self.clone();
        out.absorb(other.terms.clone());
        Ok(out)
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.q != other.q || (self.rate - other.rate).abs() > 1e-14 * self.rate.abs() {
            return Err(CoreError::Domain(format!(
                "exponential parts differ: exp(-{} r^{}) vs exp(-{} r^{})",
                self.rate, self.q, other.rate, other.q
            )));
        }
        Ok(())
    }

    /// ∫₀^∞ self(r) other(r) r^w dr in closed form.
    pub fn inner(&self, other: &Self, w: f64) -> Result<f64> {
        self.compatible(other)?;
        let c = self.rate + other.rate;
        let mut sum = 0.0;
        for &(ci, ei) in &self.terms {
            for &(cj, ej) in &other.terms {
                let p = ei + ej + w;
                let v = power_exp_integral(p, c, self.q).map_err(|e| match e {
                    CoreError::Divergent(_) => CoreError::Divergent(format!(
                        "term r^{p:.6} exp(-{c} r^{}) diverges (weight exponent {w})",
                        self.q
                    )),
                    other => other,
                })?;
                sum += ci * cj * v;
            }
        }
        Ok(sum)
    }

    /// ∫₀^∞ self(r)² r^w dr in closed form.
    pub fn norm2(&self, w: f64) -> Result<f64> {
        self.inner(self, w)
    }

    /// Exponent of the term that dominates as r → 0 (for q > 0).
    pub fn leading_exponent(&self) -> Option<f64> {
        self.terms.first().map(|t| t.1)
    }
}
