//! Continuum limit of the chain: fields on the unit torus, Riemann
//! invariants, inviscid Burgers characteristics and the KdV family.

pub mod burgers;
pub mod grid;
pub mod kdv;

pub use burgers::{
    burgers_coefficients, burgers_evolve, burgers_shock_time, burgers_spectrum,
    early_growth_slopes, implicit_residual, shock_asymptotics, shock_prediction,
    shock_times_closed_form, zeta, BurgersFlux, Direction, Maximizer, ShockAsymptotics,
    ShockPrediction,
};
pub use grid::{
    antiderivative, derivative, dh_apply, dh_inverse, fields_to_lattice, inverse_riemann,
    lattice_fields, normal_form_amplitudes, normal_form_initial_data, riemann_invariants,
    slaving_defect, slaving_manifold, GridField, NormalFormData, TrigSeries,
};
pub use kdv::{kdv_evolve, kdv_evolve_with, kodama_residual, DispersionConvention, KdvParams};
