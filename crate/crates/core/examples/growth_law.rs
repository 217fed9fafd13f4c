//! Early growth E_k ∝ t^{2(k−1)} of a travelling wave before the shock time.

use fputlab::harness::{compute, ExperimentConfig, ExperimentKind};

fn main() -> fputlab::Result<()> {
    let config = ExperimentConfig::defaults(ExperimentKind::GrowthLaw);
    let out = compute(&config)?;
    for n in [128, 256] {
        print!("N = {n}: t_s = {:7.2}, slopes", out.quantities[&format!("t_s_N{n}")]);
        for k in [2, 3, 4] {
            print!(" {:.3}", out.quantities[&format!("slope_k{k}_N{n}")]);
        }
        println!();
    }
    Ok(())
}
