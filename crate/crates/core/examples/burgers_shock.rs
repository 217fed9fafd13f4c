//! Shock time and k^{-8/3} spectrum of the normal-form Burgers datum.

use fputlab::continuum::{
    burgers_spectrum, normal_form_initial_data, shock_asymptotics, shock_times_closed_form,
    BurgersFlux, Direction,
};
use fputlab::spectral::fit_power_law;

fn main() -> fputlab::Result<()> {
    let (eps, alpha) = (0.05, 1.0);
    let data = normal_form_initial_data(0.0, eps, alpha, 512)?;
    let flux = BurgersFlux::normal_form(eps, alpha, 1.0, Direction::Left);
    let asym = shock_asymptotics(&data.lambda, &flux)?;
    let closed = shock_times_closed_form(0.0, eps, alpha, 128)?;
    println!("τ_s = {:.10} (closed form {:.10})", asym.tau_s, closed.tau_s);

    let spec = burgers_spectrum(&data.lambda, &flux, asym.tau_s, 64)?;
    let ks: Vec<f64> = (8..=64).map(f64::from).collect();
    let fit = fit_power_law(&ks, &spec[7..])?;
    println!("fitted exponent {:.4}, prefactor {:.4}", fit.exponent, fit.prefactor);
    println!("stationary phase C = {:.5}", asym.coefficient_at(1));
    for k in [8, 16, 32, 64] {
        let compensated = spec[k - 1] * (k as f64).powf(8.0 / 3.0);
        println!("k = {k:2}: |U_k|² k^(8/3) = {compensated:.5}");
    }
    Ok(())
}
