//! Sharp constants, mode quotients, extremal profiles and variational
//! estimates for weighted second-order uncertainty principles
//!
//! ∫|Δu|²|x|^{-2α} · ∫|∇u|² ≥ C(N,α) (∫|∇u|²|x|^{-α-1})².
//!
//! Closed forms are computed in exact rational arithmetic where possible,
//! and every closed form has an independent numerical route (quadrature or
//! minimization) to check it against.

pub mod constants;
pub mod error;
pub mod exppoly;
pub mod functionals;
pub mod quadrature;
pub mod special;
pub mod variational;

pub use constants::{
    BoundsReport, InequalityParams, ModeInfimum, ModeQuotient, QuotientFormula, ReferenceEntry,
    SharpCase,
};
pub use error::{CoreError, Result};
pub use exppoly::ExpPoly;
pub use functionals::{ExtremalFamily, FamilyId, ModeEnergy, RadialProfile};
pub use quadrature::{QuadResult, QuadratureSpec};
pub use variational::{
    BasisSpec, GramTriple, MinimizationResult, MinimizeOptions, ModeEstimate, QuotientForm,
    ScanReport, ScanRow, Verdict,
};
