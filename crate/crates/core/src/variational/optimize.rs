//! Minimization of Q(c) = (cᵀAc)(cᵀBc)/(cᵀCc)².
//!
//! Work happens in whitened coordinates z = Lᵀc with C = LLᵀ, where the
//! constraint cᵀCc = 1 becomes |z| = 1. Two routes run on every triple:
//! quasi-Newton descent of ln Q from seeded random starts, and the
//! eigenvalue route √Q* = min_λ ½ μ_min(λÂ + B̂/λ), which is exact when Â
//! is positive definite. The lower of the two is returned.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

pub const DEFAULT_RESTARTS: usize = 8;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_SEED: u64 = 42;
const MAX_ITER: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    pub restarts: usize,
    pub tol: f64,
    pub seed: u64,
    pub max_iter: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            restarts: DEFAULT_RESTARTS,
            tol: DEFAULT_TOL,
            seed: DEFAULT_SEED,
            max_iter: MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizationResult {
    pub value: f64,
    /// Minimizer, normalized so cᵀCc = 1.
    pub coeffs: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Norm of ∇ ln Q in C-orthonormal coordinates.
    pub gradient_norm: f64,
    /// Value from the eigenvalue route, when it applies.
    pub eigen_value: Option<f64>,
    pub restarts: usize,
    /// A was found indefinite; Q may approach 0 or go negative.
    pub a_indefinite: bool,
}

/// Whitened problem.
pub(crate) struct Whitened {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    l: DMatrix<f64>,
}

impl Whitened {
    pub fn new(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<Self> {
        let chol = Cholesky::new(c.clone()).ok_or_else(|| {
            CoreError::Domain("M_C is not positive definite (Cholesky failed)".into())
        })?;
        let l = chol.l();
        let whiten = |m: &DMatrix<f64>| -> DMatrix<f64> {
            let x = l.solve_lower_triangular(m).expect("triangular");
            let y = l
                .solve_lower_triangular(&x.transpose())
                .expect("triangular");
            (&y + y.transpose()) * 0.5
        };
        Ok(Self {
            a: whiten(a),
            b: whiten(b),
            l,
        })
    }

    fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// ln Q and its gradient at z (any nonzero scale).
    fn eval(&self, z: &DVector<f64>) -> Option<(f64, DVector<f64>)> {
        let az = &self.a * z;
        let bz = &self.b * z;
        let a = z.dot(&az);
        let b = z.dot(&bz);
        let n2 = z.norm_squared();
        if !(a > 0.0 && b > 0.0 && n2 > 0.0) {
            return None;
        }
        let f = a.ln() + b.ln() - 2.0 * n2.ln();
        let g = az * (2.0 / a) + bz * (2.0 / b) - z * (4.0 / n2);
        Some((f, g))
    }

    fn to_coeffs(&self, z: &DVector<f64>) -> DVector<f64> {
        let z = z / z.norm();
        self.l
            .transpose()
            .solve_upper_triangular(&z)
            .expect("triangular")
    }

    fn to_whitened(&self, c: &DVector<f64>) -> DVector<f64> {
        self.l.transpose() * c
    }
}

/// ln Q and ∇_c ln Q = 2Ac/a + 2Bc/b - 4Cc/(cᵀCc) in coefficient space.
pub fn log_quotient_and_gradient(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    x: &DVector<f64>,
) -> Result<(f64, DVector<f64>)> {
    let ax = a * x;
    let bx = b * x;
    let cx = c * x;
    let (qa, qb, qc) = (x.dot(&ax), x.dot(&bx), x.dot(&cx));
    if !(qa > 0.0 && qb > 0.0 && qc > 0.0) {
        return Err(CoreError::Domain(format!(
            "quadratic forms must be positive at the point: A={qa:e}, B={qb:e}, C={qc:e}"
        )));
    }
    let f = qa.ln() + qb.ln() - 2.0 * qc.ln();
    Ok((f, ax * (2.0 / qa) + bx * (2.0 / qb) - cx * (4.0 / qc)))
}

struct Descent {
    z: DVector<f64>,
    f: f64,
    grad_norm: f64,
    iterations: usize,
}

/// BFGS on the sphere: steps are taken in the tangent space and retracted
/// by normalization; ln Q is scale invariant so the retraction is free.
fn bfgs(w: &Whitened, z0: DVector<f64>, tol: f64, max_iter: usize) -> Option<Descent> {
    let m = w.dim();
    let mut z = &z0 / z0.norm();
    let (mut f, mut g) = w.eval(&z)?;
    let mut h = DMatrix::<f64>::identity(m, m);
    let mut it = 0;
    while it < max_iter {
        let gn = g.norm();
        if gn <= tol {
            break;
        }
        it += 1;
        let mut d = -(&h * &g);
        // keep the direction tangent
        d -= &z * z.dot(&d);
        if d.dot(&g) >= 0.0 {
            h.fill_with_identity();
            d = -&g;
        }
        let slope = d.dot(&g);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = &z + &d * t;
            let trial = &trial / trial.norm();
            if let Some((ft, gt)) = w.eval(&trial) {
                if ft <= f + 1e-4 * t * slope {
                    accepted = Some((trial, ft, gt));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((zn, fnew, gnew)) = accepted else {
            break;
        };
        let s = &zn - &z;
        let y = &gnew - &g;
        let sy = s.dot(&y);
        if sy > 1e-300 {
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            // H ← (I - ρ s yᵀ) H (I - ρ y sᵀ) + ρ s sᵀ
            h += (&s * s.transpose()) * (rho * rho * yhy + rho)
                - (&hy * s.transpose() + &s * hy.transpose()) * rho;
        }
        let stalled = (f - fnew).abs() <= 1e-16 * f.abs().max(1.0) && s.norm() < 1e-15;
        z = zn;
        f = fnew;
        g = gnew;
        if stalled {
            break;
        }
    }
    let grad_norm = g.norm();
    Some(Descent {
        z,
        f,
        grad_norm,
        iterations: it,
    })
}

/// Newton steps on the tangent space for the final digits.
fn newton_polish(w: &Whitened, mut z: DVector<f64>, tol: f64) -> Option<Descent> {
    let m = w.dim();
    let (mut f, mut g) = w.eval(&z)?;
    let mut it = 0;
    for _ in 0..8 {
        if g.norm() <= tol {
            break;
        }
        it += 1;
        let az = &w.a * &z;
        let bz = &w.b * &z;
        let a = z.dot(&az);
        let b = z.dot(&bz);
        // Hessian of ln a + ln b - 2 ln|z|² at |z| = 1
        let hess = &w.a * (2.0 / a) + &w.b * (2.0 / b)
            - (&az * az.transpose()) * (4.0 / (a * a))
            - (&bz * bz.transpose()) * (4.0 / (b * b))
            - DMatrix::<f64>::identity(m, m) * 4.0
            + (&z * z.transpose()) * 8.0;
        // restrict to the tangent space
        let p = DMatrix::<f64>::identity(m, m) - &z * z.transpose();
        let ht = &p * hess * &p + &z * z.transpose();
        let step = ht.lu().solve(&(-&p * &g))?;
        let zn = &z + step;
        let zn = &zn / zn.norm();
        let (fn_, gn) = w.eval(&zn)?;
        if fn_ > f + 1e-14 * f.abs().max(1.0) || gn.norm() > g.norm() {
            break;
        }
        z = zn;
        f = fn_;
        g = gn;
    }
    let grad_norm = g.norm();
    Some(Descent {
        z,
        f,
        grad_norm,
        iterations: it,
    })
}

/// min_λ ½ μ_min(λÂ + B̂/λ) over ln λ ∈ [-30, 30]; returns (Q*, minimizer).
fn eigen_route(w: &Whitened) -> Option<(f64, DVector<f64>)> {
    let phi = |t: f64| -> (f64, DVector<f64>) {
        let lam = t.exp();
        let m = &w.a * lam + &w.b / lam;
        let e = SymmetricEigen::new(m);
        let (i, mu) = e
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("nonempty");
        (0.5 * mu, e.eigenvectors.column(i).into_owned())
    };
    let (lo, hi, steps) = (-30.0, 30.0, 240);
    let h = (hi - lo) / steps as f64;
    let mut best = (f64::INFINITY, 0usize);
    for i in 0..=steps {
        let v = phi(lo + h * i as f64).0;
        if v < best.0 {
            best = (v, i);
        }
    }
    let (mut a, mut b) = (lo + h * (best.1 as f64 - 1.0), lo + h * (best.1 as f64 + 1.0));
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - gr * (b - a);
    let mut x2 = a + gr * (b - a);
    let (mut f1, mut f2) = (phi(x1).0, phi(x2).0);
    for _ in 0..90 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = phi(x1).0;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = phi(x2).0;
        }
        if b - a < 1e-12 {
            break;
        }
    }
    let (v, z) = phi(0.5 * (a + b));
    (v > 0.0 && v.is_finite()).then(|| (v * v, z))
}

fn smallest_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Minimizes Q over the span; see [`MinimizeOptions`] for the knobs.
///
/// `warm` optionally supplies extra starting coefficient vectors (shorter
/// vectors are zero-padded).
pub fn minimize_quotient_with(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    opts: &MinimizeOptions,
    warm: &[Vec<f64>],
) -> Result<MinimizationResult> {
    if opts.restarts == 0 {
        return Err(CoreError::Precondition(vec!["restarts ≥ 1".into()]));
    }
    let m = c.nrows();
    let w = Whitened::new(a, b, c)?;
    let a_indefinite = smallest_eigenvalue(&w.a) <= 0.0;

    let mut starts: Vec<DVector<f64>> = Vec::new();
    let eigen = if a_indefinite { None } else { eigen_route(&w) };
    if let Some((_, z)) = &eigen {
        starts.push(z.clone());
    }
    for c0 in warm {
        let mut x = DVector::<f64>::zeros(m);
        for (i, v) in c0.iter().take(m).enumerate() {
            x[i] = *v;
        }
        if x.norm() > 0.0 {
            starts.push(w.to_whitened(&x));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.restarts {
        let z: DVector<f64> = DVector::from_fn(m, |_, _| rng.sample(StandardNormal));
        starts.push(z);
    }

    let mut best: Option<Descent> = None;
    let mut iterations = 0;
    for z0 in starts {
        let Some(d) = bfgs(&w, z0, opts.tol, opts.max_iter) else {
            continue;
        };
        iterations += d.iterations;
        let d = if d.grad_norm > opts.tol {
            match newton_polish(&w, d.z.clone(), opts.tol) {
                Some(p) if p.f <= d.f + 1e-14 * d.f.abs().max(1.0) => {
                    iterations += p.iterations;
                    p
                }
                _ => d,
            }
        } else {
            d
        };
        // values within round-off of each other are ranked by gradient
        let better = match &best {
            None => true,
            Some(b) => {
                let slack = 1e-13 * b.f.abs().max(1.0);
                d.f < b.f - slack || (d.f <= b.f + slack && d.grad_norm < b.grad_norm)
            }
        };
        if better {
            best = Some(d);
        }
    }
    let best = best.ok_or_else(|| {
        CoreError::NonConvergence {
            value: f64::NAN,
            err_est: f64::INFINITY,
            level: 0,
        }
    })?;
    let value = best.f.exp();
    let coeffs = w.to_coeffs(&best.z);
    Ok(MinimizationResult {
        value,
        coeffs: coeffs.iter().copied().collect(),
        iterations,
        converged: best.grad_norm <= opts.tol && value.is_finite(),
        gradient_norm: best.grad_norm,
        eigen_value: eigen.map(|e| e.0),
        restarts: opts.restarts,
        a_indefinite,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_spd(rng: &mut ChaCha8Rng, m: usize, shift: f64) -> DMatrix<f64> {
        let x = DMatrix::from_fn(m, m, |_, _| rng.random::<f64>() - 0.5);
        &x * x.transpose() + DMatrix::identity(m, m) * shift
    }

    #[test]
    fn gradient_matches_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_spd(&mut rng, 5, 0.1);
        let b = random_spd(&mut rng, 5, 0.1);
        let c = random_spd(&mut rng, 5, 0.5);
        for _ in 0..20 {
            let x = DVector::from_fn(5, |_, _| rng.random::<f64>() - 0.5);
            let (_, g) = log_quotient_and_gradient(&a, &b, &c, &x).unwrap();
            for i in 0..5 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += 1e-6;
                xm[i] -= 1e-6;
                let fp = log_quotient_and_gradient(&a, &b, &c, &xp).unwrap().0;
                let fm = log_quotient_and_gradient(&a, &b, &c, &xm).unwrap().0;
                let fd = (fp - fm) / 2e-6;
                assert!((fd - g[i]).abs() <= 1e-5 * g[i].abs().max(1e-3), "{fd} vs {}", g[i]);
            }
        }
    }

    #[test]
    fn routes_agree_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let a = random_spd(&mut rng, 6, 0.05);
            let b = random_spd(&mut rng, 6, 0.05);
            let c = random_spd(&mut rng, 6, 0.3);
            let r = minimize_quotient_with(&a, &b, &c, &MinimizeOptions::default(), &[]).unwrap();
            let e = r.eigen_value.unwrap();
            assert!(((r.value - e) / e).abs() < 1e-9, "{} vs {e}", r.value);
            assert!(r.converged, "gradient {}", r.gradient_norm);
            let x = DVector::from_vec(r.coeffs.clone());
            assert!(((x.transpose() * &c * &x)[0] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn one_dimensional_problem_is_the_ratio() {
        let one = |v: f64| DMatrix::from_element(1, 1, v);
        let r = minimize_quotient_with(&one(3.0), &one(2.0), &one(0.5), &MinimizeOptions::default(), &[])
            .unwrap();
        assert!((r.value - 24.0).abs() < 1e-13);
        assert!(r.converged);
    }

    #[test]
    fn non_spd_cross_form_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let id = DMatrix::<f64>::identity(2, 2);
        assert!(minimize_quotient_with(&id, &id, &m, &MinimizeOptions::default(), &[]).is_err());
    }
}
