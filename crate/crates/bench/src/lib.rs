//! Fixed inputs shared by the benchmarks in `benches/`.

use cknlab_core::functionals::{extremal_profile, ExtremalFamily, FamilyId, RadialProfile};
use cknlab_core::InequalityParams;

pub fn params(n: u32, alpha: f64) -> InequalityParams {
    InequalityParams::new(n, alpha).expect("valid parameters")
}

/// The weighted-case extremal profile with a = b = 1.
pub fn extremal(n: u32, alpha: f64) -> RadialProfile {
    let fam = ExtremalFamily::new(FamilyId::Weighted, 1.0, 1.0, params(n, alpha)).expect("valid family");
    extremal_profile(&fam).expect("closed form")
}

/// A non-extremal profile: (1 + r - r²/3) e^{-r}.
pub fn generic_profile() -> RadialProfile {
    RadialProfile::from_basis(&[1.0, 1.0, -1.0 / 3.0], 0.0, 1.0).expect("finite coefficients")
}
