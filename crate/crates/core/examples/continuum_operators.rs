//! Lattice fields as continuum fields: D_h, Riemann invariants and the
//! slaving manifold of an almost one-directional wave.

use std::f64::consts::PI;

use fputlab::continuum::{
    fields_to_lattice, inverse_riemann, lattice_fields, riemann_invariants, slaving_defect,
    slaving_manifold, GridField,
};

fn main() -> fputlab::Result<()> {
    let (eps, alpha, n) = (1e-3, 1.0, 64);
    let h = 1.0 / n as f64;
    let left = GridField::from_fn(n, |x| 2.0 * (2.0 * PI * x).cos())?;
    let right = slaving_manifold(&left, eps, alpha);
    let (q, p) = inverse_riemann(&left, &right, h)?;
    let state = fields_to_lattice(&q, &p, eps)?;
    println!("lattice with {} particles, total momentum {:.1e}", state.n(), state.total_momentum());

    let (q2, p2) = lattice_fields(&state, eps)?;
    let (l2, r2) = riemann_invariants(&q2, &p2, h)?;
    println!("round trip error {:.1e}", l2.max_abs_diff(&left).max(r2.max_abs_diff(&right)));
    println!("|L| = {:.3}, |R| = {:.3e}", l2.sup_norm(), r2.sup_norm());
    println!("slaving defect {:.1e}", slaving_defect(&l2, &r2, eps, alpha));
    let free = GridField::zeros(n)?;
    println!("defect of R = 0 instead {:.3e}", slaving_defect(&l2, &free, eps, alpha));
    Ok(())
}
