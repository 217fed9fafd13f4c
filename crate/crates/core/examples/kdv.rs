//! Left-moving KdV evolution of the normal-form datum against the
//! dispersionless Burgers flow.

use fputlab::continuum::{
    burgers_evolve, burgers_shock_time, kdv_evolve, normal_form_initial_data, BurgersFlux,
    DispersionConvention, Direction, KdvParams,
};

fn main() -> fputlab::Result<()> {
    let (eps, alpha, n) = (0.05, 1.0, 128);
    let h = 1.0 / n as f64;
    let data = normal_form_initial_data(0.0, eps, alpha, 512)?;
    let flux = BurgersFlux::normal_form(eps, alpha, 0.0, Direction::Left);
    let (tau_s, _) = burgers_shock_time(&data.lambda, &flux)?;
    let tau = 0.5 * tau_s;

    let burgers = burgers_evolve(&data.lambda, &flux, tau)?;
    for convention in [DispersionConvention::NormalForm, DispersionConvention::Boussinesq] {
        let mut params = KdvParams::left_moving(eps, alpha, h, convention);
        params.transport = 0.0;
        let dt = 0.5 * params.stable_dt(&data.lambda).min(1e-3);
        let u = kdv_evolve(&data.lambda, &params, dt, tau)?;
        println!("{convention:?}: |KdV − Burgers| at τ_s/2 = {:.3e}", u.max_abs_diff(&burgers));
    }
    Ok(())
}
