//! Sine-wave datum of the α-chain: E_1 leaves and comes back.

use fputlab::integrate::run;
use fputlab::model::build_initial;
use fputlab::spectral::{detect_recurrence, indicator_series, EntropyVariant, ModeEnergyObserver};
use fputlab::{Boundary, InitialData, IntegratorSpec, Potential, Scheme};

fn main() -> fputlab::Result<()> {
    let pot = Potential::fput(0.25, 0.0);
    let datum = InitialData::SineWave { epsilon: 0.002, phase: 0.0 };
    let state = build_initial(&datum, 32, Boundary::Periodic, &pot)?;
    let mut modes = ModeEnergyObserver::new(&state);
    let spec = IntegratorSpec::new(Scheme::Verlet2, 0.05, 1e4, 20);
    let record = run(state, &pot, &spec, &mut [&mut modes])?;

    let e1 = record.column("E_1")?;
    for r in detect_recurrence(&record.times, &e1, 0.5) {
        println!("recurrence at t = {:8.1}, E_1 back to {:.3}", r.time, r.recovery);
    }
    let ind = indicator_series(&record.times, &record.rows, EntropyVariant::TimeAveraged)?;
    println!("max entropy {:.3} of ln 16 = {:.3}", ind.max_eta(), 16f64.ln());
    let last = ind.ebar.last().unwrap();
    println!("time-averaged E_1..E_4: {:.2e} {:.2e} {:.2e} {:.2e}", last[0], last[1], last[2], last[3]);
    Ok(())
}
