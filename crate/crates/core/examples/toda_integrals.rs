//! Hénon integrals along the Toda chain tangent to the α-chain, and their
//! Lax-trace counterparts.

use fputlab::integrate::{relative_drift, run};
use fputlab::model::{build_initial, toda_tangent_params};
use fputlab::toda::{henon_j2, henon_j3, lax_traces, HenonObserver, HenonScaling};
use fputlab::{Boundary, InitialData, IntegratorSpec, Scheme};

fn main() -> fputlab::Result<()> {
    let alpha = 1.0;
    let tangent = toda_tangent_params(alpha)?;
    println!("A = {}, B = {}, β_T = {}, γ_T = {}", tangent.a, tangent.b, tangent.beta_t, tangent.gamma_t);
    let pot = tangent.potential();

    let datum = InitialData::SineWave { epsilon: 0.01, phase: std::f64::consts::FRAC_PI_4 };
    let state = build_initial(&datum, 32, Boundary::Periodic, &pot)?;
    let scaling = HenonScaling::tangent_to(alpha)?;
    let scaled = scaling.apply(&state);
    let traces = lax_traces(&scaled, 4)?;
    println!("J2 = {:.12} (Lax {:.12})", henon_j2(&scaled)?, traces.j2);
    println!("J3 = {:.12} (Lax {:.12})", henon_j3(&scaled)?, traces.j3);

    let mut obs = HenonObserver::new(scaling);
    let spec = IntegratorSpec::new(Scheme::Yoshida4, 0.02, 1000.0, 50);
    let record = run(state, &pot, &spec, &mut [&mut obs])?;
    for name in ["J2", "J3"] {
        let rel = relative_drift(&record.column(name)?)?;
        println!("relative drift of {name} over t = 1000: {rel:.2e}");
    }
    Ok(())
}
