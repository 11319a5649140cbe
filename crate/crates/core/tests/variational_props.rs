use cknlab_core::constants::InequalityParams;
use cknlab_core::functionals::{extremal_profile, mode_quotient, ExtremalFamily, FamilyId};
use cknlab_core::quadrature::QuadratureSpec;
use cknlab_core::variational::{
    build_gram_laguerre, estimate_mode_constant, estimate_mode_constant_with,
    log_quotient_and_gradient, BasisSpec, MinimizeOptions, QuotientForm,
};
use nalgebra::DVector;
use proptest::prelude::*;

fn weighted_case() -> impl Strategy<Value = InequalityParams> {
    (2u32..=20, 0.0f64..1.0).prop_map(|(n, t)| {
        let hi = n as f64 / 5.0 - 1.0;
        let alpha = -1.0 + (hi + 1.0) * (1.0 - t).max(0.05);
        InequalityParams::new(n, alpha).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn radial_estimate_is_bracketed(p in weighted_case()) {
        let e = estimate_mode_constant(&p, 0, &[2, 4, 8]).unwrap();
        let lower = (p.nf() + 3.0 * p.alpha + 1.0).powi(2) / 4.0;
        prop_assert!(e.value() >= lower - 1e-6, "{p}: {} < {lower}", e.value());
        // the extremal shape is φ₀ of the default k = 0 basis
        let fam = ExtremalFamily::new(FamilyId::Weighted, 1.0, 1.0, p).unwrap();
        let ext = mode_quotient(&extremal_profile(&fam).unwrap(), &p, 0, &QuadratureSpec::default()).unwrap();
        prop_assert!(e.value() <= ext + 1e-9 * ext.max(1.0), "{p}: {} > {ext}", e.value());
    }

    #[test]
    fn traces_do_not_increase(n in 2u32..8, alpha in -0.5f64..1.0, k in 0u32..4) {
        let p = InequalityParams::new(n, alpha).unwrap();
        let e = estimate_mode_constant(&p, k, &[2, 4, 8]).unwrap();
        for w in e.trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-10, "{:?}", e.trace);
        }
    }

    #[test]
    fn log_gradient_matches_differences(
        n in 2u32..9,
        alpha in -0.5f64..1.0,
        k in 0u32..4,
        m in 2usize..7,
        seed in any::<u64>(),
    ) {
        let p = InequalityParams::new(n, alpha).unwrap();
        let basis = BasisSpec::default_for(&p, k, m).unwrap();
        let g = build_gram_laguerre(&p, k, &basis, QuotientForm::Full).unwrap();
        let mut state = seed | 1;
        let mut next = || {
            // xorshift; any reproducible stream will do
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for _ in 0..20 {
            let x = DVector::from_fn(m, |_, _| next());
            let Ok((_, grad)) = log_quotient_and_gradient(&g.a, &g.b, &g.c, &x) else { continue };
            for i in 0..m {
                let h = 1e-6;
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fp = log_quotient_and_gradient(&g.a, &g.b, &g.c, &xp).unwrap().0;
                let fm = log_quotient_and_gradient(&g.a, &g.b, &g.c, &xm).unwrap().0;
                let fd = (fp - fm) / (2.0 * h);
                let scale = grad.norm().max(1e-8);
                // rounding in fp - fm, amplified by 1/h
                let noise = 32.0 * f64::EPSILON * fp.abs().max(fm.abs()).max(1.0) / h;
                prop_assert!((fd - grad[i]).abs() <= 1e-5 * scale + noise, "component {i}: {fd} vs {}", grad[i]);
            }
        }
    }
}

#[test]
fn seeded_runs_are_bit_identical() {
    let p = InequalityParams::new(3, 0.0).unwrap();
    let opts = MinimizeOptions { seed: 1234, ..MinimizeOptions::default() };
    let a = estimate_mode_constant_with(&p, 1, &[4, 8], QuotientForm::Full, &opts).unwrap();
    let b = estimate_mode_constant_with(&p, 1, &[4, 8], QuotientForm::Full, &opts).unwrap();
    let bits = |t: &[f64]| t.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a.trace), bits(&b.trace));
    assert_eq!(bits(&a.result.coeffs), bits(&b.result.coeffs));
}
