use cknlab_core::constants::InequalityParams;
use cknlab_core::functionals::{
    extremal_profile, hardy_step, mode_quotient, one_dim_quotient, test_function_quotient,
    ExtremalFamily, FamilyId, RadialProfile,
};
use cknlab_core::quadrature::QuadratureSpec;
use proptest::prelude::*;

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn coeffs(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, len).prop_map(|mut c| {
        // keep the profile away from zero
        c[0] = 1.0 + c[0].abs();
        c
    })
}

fn weighted_case() -> impl Strategy<Value = InequalityParams> {
    (2u32..=20, 0.0f64..1.0).prop_map(|(n, t)| {
        let hi = n as f64 / 5.0 - 1.0;
        // α → -1 pushes individual energies past f64 range (Γ of ~1/(α+1))
        let alpha = (-1.0 + (hi + 1.0) * (1.0 - t)).max(-0.9);
        InequalityParams::new(n, alpha).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn dilation_invariance(c in coeffs(4), k in 0u32..3) {
        let p = InequalityParams::new(5, 0.0).unwrap();
        let v = RadialProfile::from_basis(&c, 0.0, 1.0).unwrap();
        let q = mode_quotient(&v, &p, k, &spec()).unwrap();
        for lambda in [0.5, 2.0, 10.0] {
            let ql = mode_quotient(&v.dilated(lambda), &p, k, &spec()).unwrap();
            prop_assert!(rel(ql, q) <= 1e-9, "λ={lambda}: {ql} vs {q}");
        }
    }

    #[test]
    fn amplitude_invariance(c in coeffs(3), k in 0u32..3) {
        let p = InequalityParams::new(4, 0.3).unwrap();
        let v = RadialProfile::from_basis(&c, 0.0, 1.3).unwrap();
        let q = mode_quotient(&v, &p, k, &spec()).unwrap();
        for s in [-3.0, 0.1, 7.0] {
            let qs = mode_quotient(&v.scaled(s), &p, k, &spec()).unwrap();
            prop_assert!(rel(qs, q) <= 1e-13, "c={s}: {qs} vs {q}");
        }
    }
}

#[test]
fn extremal_value_is_parameter_free() {
    for (n, alpha) in [(5, 0.0), (8, 0.4), (3, -0.6), (12, 1.0)] {
        let p = InequalityParams::new(n, alpha).unwrap();
        let want = (p.nf() + 3.0 * alpha + 1.0).powi(2) / 4.0;
        for a in [1.0, -2.0] {
            for b in [0.5, 1.0, 4.0] {
                let fam = ExtremalFamily::new(FamilyId::Weighted, a, b, p).unwrap();
                let q = mode_quotient(&extremal_profile(&fam).unwrap(), &p, 0, &spec()).unwrap();
                assert!(rel(q, want) <= 1e-8, "N={n} α={alpha} a={a} b={b}: {q}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    /// v = (c₀ + c₀ r^q + Σ_{j≥2} c_j r^{jq}) e^{-r^q} with q = α+1 has
    /// finite energies for every admissible (N, α).
    #[test]
    fn radial_quotient_respects_the_sharp_bound(p in weighted_case(), tail in coeffs(3)) {
        let q = p.alpha + 1.0;
        let c = vec![tail[0], tail[0], tail[1], tail[2]];
        let v = RadialProfile::from_basis(&c, 0.0, q).unwrap();
        let got = mode_quotient(&v, &p, 0, &spec()).unwrap();
        let bound = (p.nf() + 3.0 * p.alpha + 1.0).powi(2) / 4.0;
        prop_assert!(got >= bound - 1e-6, "{p}: {got} < {bound}");
    }

    #[test]
    fn hardy_step_holds(
        n in 5u32..10,
        alpha in -0.9f64..1.0,
        k in 1u32..5,
        c in coeffs(4),
    ) {
        let p = InequalityParams::new(n, alpha).unwrap();
        let v = RadialProfile::from_basis(&c, 0.0, 1.0).unwrap();
        let h = hardy_step(&v, &p, k, &spec()).unwrap();
        prop_assert!(h.lhs <= h.rhs * (1.0 + 1e-9), "{} > {}", h.lhs, h.rhs);
    }
}

#[test]
fn test_function_against_radial_value() {
    for n in [2, 3] {
        assert!(test_function_quotient(n).unwrap() < ((n + 1) * (n + 1)) as f64 / 4.0);
    }
    assert!(test_function_quotient(4).unwrap() > 25.0 / 4.0);
}

#[test]
fn one_dimensional_sharpness() {
    for alpha in [-0.9, -0.75, -0.5] {
        let p = InequalityParams::new(1, alpha).unwrap();
        let fam = ExtremalFamily::new(FamilyId::OneA, 1.0, 1.0, p).unwrap();
        let q = one_dim_quotient(&extremal_profile(&fam).unwrap(), alpha, &spec()).unwrap();
        assert!((q - alpha * alpha / 4.0).abs() <= 1e-8, "1a α={alpha}: {q}");
    }
    for alpha in [-0.4, 0.0, 1.0, 2.0] {
        let p = InequalityParams::new(1, alpha).unwrap();
        let fam = ExtremalFamily::new(FamilyId::OneB, 1.0, 1.0, p).unwrap();
        let q = one_dim_quotient(&extremal_profile(&fam).unwrap(), alpha, &spec()).unwrap();
        let want = (3.0 * alpha + 2.0).powi(2) / 4.0;
        assert!((q - want).abs() <= 1e-8, "1b α={alpha}: {q}");
    }
}
