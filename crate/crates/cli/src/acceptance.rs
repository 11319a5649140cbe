//! The acceptance suite: one check per criterion, each with a tolerance and
//! a runtime budget. Shared by `cknlab selftest` and the `acceptance` test
//! target.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use cknlab_core::constants::{
    mode_infimum, mode_quotient_j, mode_quotient_k, InequalityParams, QuotientFormula,
};
use cknlab_core::functionals::{
    extremal_profile, hardy_step, mode_quotient, one_dim_quotient, test_function_check, ExtremalFamily,
    FamilyId, RadialProfile,
};
use cknlab_core::quadrature::{integrate_fn, QuadratureSpec};
use cknlab_core::special::{gamma, weighted_exp_integral, GammaArg, WeightedExpIntegral};
use cknlab_core::variational::{
    build_gram, build_gram_laguerre, estimate_mode_constant, log_quotient_and_gradient, minimize_quotient,
    symmetry_breaking_scan, BasisSpec, QuotientForm, Verdict,
};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::commands::cmd_probe_conjecture;
use crate::config::{Command, RunConfig, Settings};

const SEED: u64 = 42;

type Check = Result<String, String>;

pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub budget: Duration,
    pub check: fn() -> Check,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "{} [{:>2}] {:<32} {:>10.3} ms (budget {} ms)  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64() * 1e3,
            self.budget.as_millis(),
            self.detail
        )
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn params(n: u32, alpha: f64) -> Result<InequalityParams, String> {
    InequalityParams::new(n, alpha).map_err(|e| e.to_string())
}

/// (N, α) with N ≥ 2, α > -1 and N ≥ 5α+5.
fn weighted_sample(rng: &mut ChaCha8Rng, n_max: u32) -> Result<InequalityParams, String> {
    let n = rng.random_range(2..=n_max);
    let hi = n as f64 / 5.0 - 1.0;
    // open at α = -1
    let alpha = -1.0 + (hi + 1.0) * (1.0 - rng.random::<f64>());
    params(n, alpha)
}

fn c1_tables() -> Check {
    let want_1 = [(2, "1/4"), (3, "9/4"), (4, "3969/676")];
    let want_0 = [(2, "9/4"), (3, "4/1"), (4, "25/4")];
    for (k, table) in [(1, want_1), (0, want_0)] {
        for (n, w) in table {
            let q = mode_quotient_j(n, k).map_err(|e| e.to_string())?;
            ensure(q.exact == w, || format!("𝒥({n},{k}) = {} ≠ {w}", q.exact))?;
        }
    }
    Ok("𝒥(N,1), 𝒥(N,0) exact for N = 2, 3, 4".into())
}

fn reduced_quarter_square(m: u64) -> String {
    let (mut a, mut b) = (m * m, 4u64);
    let g = {
        let (mut x, mut y) = (a, b);
        while y != 0 {
            (x, y) = (y, x % y);
        }
        x
    };
    a /= g;
    b /= g;
    format!("{a}/{b}")
}

fn c2_mode_infimum() -> Check {
    for n in 2..=30u32 {
        let inf = mode_infimum(QuotientFormula::J, &params(n, 0.0)?, 64).map_err(|e| e.to_string())?;
        if n <= 4 {
            let want = mode_quotient_j(n, 1).map_err(|e| e.to_string())?;
            ensure(inf.argmin == 1 && inf.best.exact == want.exact, || {
                format!("N={n}: got k={} {}", inf.argmin, inf.best.exact)
            })?;
        } else {
            let want = reduced_quarter_square(n as u64 + 1);
            ensure(inf.argmin == 0 && inf.best.exact == want, || {
                format!("N={n}: got k={} {} (want {want})", inf.argmin, inf.best.exact)
            })?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for _ in 0..200 {
        let p = weighted_sample(&mut rng, 40)?;
        let inf = mode_infimum(QuotientFormula::K, &p, 64).map_err(|e| e.to_string())?;
        let want = (p.nf() + 3.0 * p.alpha + 1.0).powi(2) / 4.0;
        ensure(inf.argmin == 0 && rel(inf.best.value, want) <= 1e-12, || {
            format!("{p}: k={} value {} vs {want}", inf.argmin, inf.best.value)
        })?;
    }
    Ok("J over N = 2..30 exact; K argmin 0 on 200 samples".into())
}

fn c3_test_function() -> Check {
    let mut worst: f64 = 0.0;
    for n in 2..=10u32 {
        let t = test_function_check(n, &spec()).map_err(|e| e.to_string())?;
        ensure(t.rel_diff <= 1e-10, || format!("N={n}: relative {}", t.rel_diff))?;
        worst = worst.max(t.rel_diff);
        let radial = ((n + 1) * (n + 1)) as f64 / 4.0;
        match n {
            2 | 3 => ensure(t.closed_form < radial, || format!("N={n}: {} ≥ {radial}", t.closed_form))?,
            4 => ensure(t.closed_form > radial, || format!("N=4: {} ≤ {radial}", t.closed_form))?,
            _ => {}
        }
    }
    Ok(format!("max relative difference {worst:.1e}"))
}

fn c4_extremal_weighted() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let mut worst: f64 = 0.0;
    for _ in 0..30 {
        let p = weighted_sample(&mut rng, 20)?;
        let a = rng.random_range(-3.0..3.0);
        let a = if a == 0.0 { 1.0 } else { a };
        let b = rng.random_range(0.1..5.0);
        let fam = ExtremalFamily::new(FamilyId::Weighted, a, b, p).map_err(|e| e.to_string())?;
        let v = extremal_profile(&fam).map_err(|e| e.to_string())?;
        let q = mode_quotient(&v, &p, 0, &spec()).map_err(|e| format!("{p}, a={a}, b={b}: {e}"))?;
        let want = (p.nf() + 3.0 * p.alpha + 1.0).powi(2) / 4.0;
        let d = rel(q, want);
        ensure(d <= 1e-8, || format!("{p}, a={a}, b={b}: {q} vs {want}"))?;
        worst = worst.max(d);
    }
    Ok(format!("30 samples, max relative error {worst:.1e}"))
}

fn c5_extremal_one_dim() -> Check {
    let mut worst: f64 = 0.0;
    let cases: [(FamilyId, &[f64]); 2] = [
        (FamilyId::OneA, &[-0.9, -0.75, -0.5]),
        (FamilyId::OneB, &[-0.4, 0.0, 1.0, 2.5]),
    ];
    for (id, alphas) in cases {
        for &alpha in alphas {
            let p = params(1, alpha)?;
            let fam = ExtremalFamily::new(id, 1.0, 1.0, p).map_err(|e| e.to_string())?;
            let v = extremal_profile(&fam).map_err(|e| e.to_string())?;
            let q = one_dim_quotient(&v, alpha, &spec()).map_err(|e| e.to_string())?;
            let want = if id == FamilyId::OneA {
                alpha * alpha / 4.0
            } else {
                (3.0 * alpha + 2.0).powi(2) / 4.0
            };
            ensure((q - want).abs() <= 1e-8, || format!("{id} α={alpha}: {q} vs {want}"))?;
            worst = worst.max((q - want).abs());
        }
    }
    Ok(format!("7 samples, max error {worst:.1e}"))
}

fn c6_variational_recovery() -> Check {
    let mut parts = Vec::new();
    for (n, want) in [(5, 9.0), (7, 16.0)] {
        let e = estimate_mode_constant(&params(n, 0.0)?, 0, &[4, 8, 16]).map_err(|e| e.to_string())?;
        let d = rel(e.value(), want);
        ensure(d <= 1e-4, || format!("N={n}: {} vs {want}", e.value()))?;
        parts.push(format!("N={n} rel {d:.1e}"));
    }
    for (n, alpha) in [(5, 0.0), (7, 0.0), (11, 1.0)] {
        let p = params(n, alpha)?;
        let basis = BasisSpec::new(1, 2.0 * alpha + 1.0, alpha + 1.0).map_err(|e| e.to_string())?;
        let g = build_gram(&p, 0, &basis).map_err(|e| e.to_string())?;
        let r = minimize_quotient(&g, 8, 1e-10).map_err(|e| e.to_string())?;
        let want = (p.nf() + 3.0 * alpha + 1.0).powi(2) / 4.0;
        ensure(rel(r.value, want) <= 1e-9, || format!("m=1 at {p}: {} vs {want}", r.value))?;
    }
    parts.push("m=1 extremal shape within 1e-9".into());
    Ok(parts.join(", "))
}

fn c7_verdicts() -> Check {
    let mut parts = Vec::new();
    for n in [2, 3, 5, 6, 7] {
        let s = symmetry_breaking_scan(n, 0.0, 8, &[4, 8, 16]).map_err(|e| e.to_string())?;
        if n <= 3 {
            ensure(s.verdict == Verdict::SymmetryBroken { k: 1 }, || format!("N={n}: {}", s.verdict))?;
            ensure(s.rows[1].effective < s.rows[0].full, || {
                format!("N={n}: effective {} ≥ radial {}", s.rows[1].effective, s.rows[0].full)
            })?;
        } else {
            ensure(s.verdict == Verdict::Radial, || format!("N={n}: {}", s.verdict))?;
        }
        parts.push(format!("N={n} {}", s.verdict));
    }
    Ok(parts.join(", "))
}

fn c8_probe() -> Check {
    let cfg = RunConfig::from_settings(Command::ProbeConjecture, &Settings::new()).map_err(|e| e.to_string())?;
    let r = cmd_probe_conjecture(&cfg).map_err(|e| e.to_string())?;
    let lo = 3969.0 / 676.0 - 1e-3;
    let hi = 6.25 + 1e-3;
    ensure(r.best_estimate >= lo && r.best_estimate <= hi, || {
        format!("estimate {} outside [{lo}, {hi}]", r.best_estimate)
    })?;
    ensure((r.rows[0].full - 6.25).abs() <= 1e-6, || format!("k=0 row {}", r.rows[0].full))?;
    ensure(r.lower_bound_exact == "3969/676", || format!("lower bound {}", r.lower_bound_exact))?;
    Ok(format!(
        "estimate {:.10} at k={}, evidence: {}",
        r.best_estimate, r.best_k, r.verdict
    ))
}

fn c9_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 9);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let p = rng.random_range(-0.9..12.0);
        let c = rng.random_range(0.1..10.0);
        let q = rng.random_range(0.2..4.0);
        let i = WeightedExpIntegral::new(p, c, q).map_err(|e| e.to_string())?;
        let want = weighted_exp_integral(i).map_err(|e| e.to_string())?;
        let f = |r: f64| (-c * r.powf(q)).exp();
        let got = integrate_fn(&f, p, None, &spec()).map_err(|e| format!("p={p} c={c} q={q}: {e}"))?;
        let d = rel(got.value, want);
        ensure(d <= 1e-10, || format!("p={p} c={c} q={q}: {} vs {want}", got.value))?;
        worst = worst.max(d);
    }
    Ok(format!("200 samples, max relative error {worst:.1e}"))
}

fn random_coeffs(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let mut c: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
    c[0] = 1.0 + c[0].abs();
    c
}

fn c10_properties() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 10);
    let err = |e: cknlab_core::CoreError| e.to_string();
    let mut cases = 0usize;

    // dilation invariance
    let p5 = params(5, 0.0)?;
    for _ in 0..10 {
        let v = RadialProfile::from_basis(&random_coeffs(&mut rng, 4), 0.0, 1.0).map_err(err)?;
        let k = rng.random_range(0..3);
        let q = mode_quotient(&v, &p5, k, &spec()).map_err(err)?;
        for lambda in [0.5, 2.0, 10.0] {
            let ql = mode_quotient(&v.dilated(lambda), &p5, k, &spec()).map_err(err)?;
            ensure(rel(ql, q) <= 1e-9, || format!("dilation λ={lambda}: {ql} vs {q}"))?;
        }
        cases += 1;
    }
    // amplitude invariance
    let p4 = params(4, 0.3)?;
    for _ in 0..10 {
        let v = RadialProfile::from_basis(&random_coeffs(&mut rng, 3), 0.0, 1.3).map_err(err)?;
        let k = rng.random_range(0..3);
        let q = mode_quotient(&v, &p4, k, &spec()).map_err(err)?;
        for s in [-3.0, 0.1, 7.0] {
            let qs = mode_quotient(&v.scaled(s), &p4, k, &spec()).map_err(err)?;
            ensure(rel(qs, q) <= 1e-13, || format!("amplitude c={s}: {qs} vs {q}"))?;
        }
        cases += 1;
    }
    // Hardy step
    for _ in 0..10 {
        let p = params(rng.random_range(5..10), rng.random_range(-0.9..1.0))?;
        let k = rng.random_range(1..5);
        let v = RadialProfile::from_basis(&random_coeffs(&mut rng, 4), 0.0, 1.0).map_err(err)?;
        let h = hardy_step(&v, &p, k, &spec()).map_err(err)?;
        ensure(h.lhs <= h.rhs * (1.0 + 1e-9), || format!("Hardy step {p} k={k}: {} > {}", h.lhs, h.rhs))?;
        cases += 1;
    }
    // Gamma recurrence
    for _ in 0..1000 {
        let t: f64 = rng.random_range(1e-3..50.0);
        let g = gamma(GammaArg::new(t).map_err(err)?).map_err(err)?;
        let g1 = gamma(GammaArg::new(t + 1.0).map_err(err)?).map_err(err)?;
        ensure(rel(t * g, g1) <= 1e-12, || format!("Γ recurrence at t={t}"))?;
        cases += 1;
    }
    // gradient of ln Q against central differences
    for _ in 0..10 {
        let p = params(rng.random_range(2..9), rng.random_range(-0.5..1.0))?;
        let k = rng.random_range(0..4);
        let m = rng.random_range(2..7);
        let basis = BasisSpec::default_for(&p, k, m).map_err(err)?;
        let g = build_gram_laguerre(&p, k, &basis, QuotientForm::Full).map_err(err)?;
        let x = DVector::from_fn(m, |_, _| rng.random_range(-0.5..0.5));
        let Ok((_, grad)) = log_quotient_and_gradient(&g.a, &g.b, &g.c, &x) else {
            continue;
        };
        for i in 0..m {
            let h = 1e-6;
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fp = log_quotient_and_gradient(&g.a, &g.b, &g.c, &xp).map_err(err)?.0;
            let fm = log_quotient_and_gradient(&g.a, &g.b, &g.c, &xm).map_err(err)?.0;
            let fd = (fp - fm) / (2.0 * h);
            ensure((fd - grad[i]).abs() <= 1e-5 * grad.norm().max(1e-8), || {
                format!("gradient at {p} k={k}: {fd} vs {}", grad[i])
            })?;
        }
        cases += 1;
    }
    // basis nesting
    for _ in 0..6 {
        let p = params(rng.random_range(2..8), rng.random_range(-0.5..1.0))?;
        let k = rng.random_range(0..4);
        let e = estimate_mode_constant(&p, k, &[2, 4, 8]).map_err(err)?;
        ensure(e.trace.windows(2).all(|w| w[1] <= w[0] + 1e-10), || {
            format!("trace increases at {p} k={k}: {:?}", e.trace)
        })?;
        cases += 1;
    }
    // per-mode lower bound: profiles (c₀ + c₀r^q + ...)e^{-r^q}, q = α+1
    for _ in 0..20 {
        let p = weighted_sample(&mut rng, 20)?;
        let k = rng.random_range(0..4);
        let t = random_coeffs(&mut rng, 3);
        let v = RadialProfile::from_basis(&[t[0], t[0], t[1], t[2]], 0.0, p.alpha + 1.0).map_err(err)?;
        let got = mode_quotient(&v, &p, k, &spec()).map_err(|e| format!("{p} k={k}: {e}"))?;
        let bound = mode_quotient_k(&p, k).map_err(err)?.value;
        ensure(got >= bound * (1.0 - 1e-9), || format!("{p} k={k}: {got} < {bound}"))?;
        cases += 1;
    }
    Ok(format!("{cases} cases, zero failures"))
}

pub fn criteria() -> Vec<Criterion> {
    let ms = Duration::from_millis;
    vec![
        Criterion { id: 1, name: "closed-form tables", budget: ms(1), check: c1_tables },
        Criterion { id: 2, name: "mode infimum", budget: ms(1000), check: c2_mode_infimum },
        Criterion { id: 3, name: "test-function quotient", budget: ms(1000), check: c3_test_function },
        Criterion { id: 4, name: "extremal sharpness N >= 2", budget: ms(5000), check: c4_extremal_weighted },
        Criterion { id: 5, name: "extremal sharpness N = 1", budget: ms(2000), check: c5_extremal_one_dim },
        Criterion { id: 6, name: "variational recovery", budget: ms(10_000), check: c6_variational_recovery },
        Criterion { id: 7, name: "symmetry-breaking verdicts", budget: ms(30_000), check: c7_verdicts },
        Criterion { id: 8, name: "conjecture probe", budget: ms(60_000), check: c8_probe },
        Criterion { id: 9, name: "oracle suite", budget: ms(5000), check: c9_oracle },
        Criterion { id: 10, name: "property suite", budget: ms(30_000), check: c10_properties },
    ]
}

pub fn run_one(c: &Criterion) -> Outcome {
    let start = Instant::now();
    let res = catch_unwind(AssertUnwindSafe(c.check)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(format!("panicked: {msg}"))
    });
    let elapsed = start.elapsed();
    let (mut passed, mut detail) = match res {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    if elapsed > c.budget {
        passed = false;
        detail = format!("over budget; {detail}");
    }
    Outcome {
        id: c.id,
        name: c.name,
        passed,
        detail,
        elapsed,
        budget: c.budget,
    }
}

/// Runs every criterion in order, reporting each as it finishes.
pub fn run_all(mut report: impl FnMut(&Outcome)) -> Vec<Outcome> {
    criteria()
        .iter()
        .map(|c| {
            let o = run_one(c);
            report(&o);
            o
        })
        .collect()
}
