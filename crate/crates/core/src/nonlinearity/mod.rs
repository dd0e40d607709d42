//! The derivative nonlinearity `N(u) = Σ_{|α|=k} c_α (∂u)^α`: its
//! representation, dealiased evaluation, rotation-invariance check and the
//! admissibility arithmetic.

mod eval;
mod gate;
mod radial;
mod spec;

pub use eval::{eval_n, padded_points};
pub use gate::{
    regularity_gate, scaling_index, strichartz_range, AdmissibilityVerdict, GateCase, StrichartzRange,
};
pub use radial::{
    classify_radial, is_radial, sampled_witness, symbolic_radial, RadialReport, RotationWitness,
    RADIAL_ROTATIONS, RADIAL_SEED, RADIAL_TOL, RADIAL_VECTORS,
};
pub use spec::{NonlinearSpec, NonlinearTerm};
