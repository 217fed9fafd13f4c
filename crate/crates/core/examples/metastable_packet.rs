//! A random-phase packet of long waves settles into a packet with an
//! exponential tail.

use fputlab::integrate::run;
use fputlab::model::{build_initial, PhaseRule};
use fputlab::spectral::{indicator_series, EntropyVariant, ModeEnergyObserver};
use fputlab::{Boundary, InitialData, IntegratorSpec, Potential, Scheme};

fn main() -> fputlab::Result<()> {
    let pot = Potential::fput(1.0, 0.0);
    let datum = InitialData::ModePacket {
        fraction: 0.1,
        mode_energy: 1e-3 * 128.0 / 6.0,
        phases: PhaseRule::Random,
        seed: 3,
    };
    let state = build_initial(&datum, 128, Boundary::Periodic, &pot)?;
    let mut modes = ModeEnergyObserver::new(&state);
    let spec = IntegratorSpec::new(Scheme::Verlet2, 0.1, 5000.0, 50);
    let record = run(state, &pot, &spec, &mut [&mut modes])?;
    let ind = indicator_series(&record.times, &record.rows, EntropyVariant::TimeAveraged)?;
    println!("width {:.3} -> {:.3}", ind.width[0], ind.width.last().unwrap());
    let ebar = ind.ebar.last().unwrap();
    for k in (1..=40).step_by(6) {
        println!("k = {k:2}: Ē_k = {:.3e}", ebar[k - 1]);
    }
    Ok(())
}
