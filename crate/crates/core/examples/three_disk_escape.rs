//! Escape rate and trapped-set dimension of the symmetric three-disk system,
//! from periodic orbits and from direct sampling.
//!
//! `cargo run --release --example three_disk_escape -- [spacing] [samples]`

use std::time::Instant;

use weyl_lab::disk_billiard::{self, DiskConfig};
use weyl_lab::symbolic_pressure::{bowen_dimension, classical_decay_rate, lyapunov_bounds, pressure};

fn main() -> weyl_lab::Result<()> {
    let mut args = std::env::args().skip(1);
    let spacing: f64 = args.next().map_or(6.0, |s| s.parse().expect("spacing"));
    let samples: usize = args.next().map_or(1_000_000, |s| s.parse().expect("samples"));
    let cfg = DiskConfig::equilateral(1.0, spacing)?;

    let t0 = Instant::now();
    let tables = (4..=8).map(|n| disk_billiard::cylinder_table(&cfg, n)).collect::<Result<Vec<_>, _>>()?;
    let per_bounce = pressure(&tables, -1.0, 0.0)?;
    let gamma = classical_decay_rate(&tables)?;
    let d_h = bowen_dimension(&tables, (0.0, 2.0))?;
    let (lmin, lmax) = lyapunov_bounds(tables.last().unwrap())?;
    println!("periodic orbits ({:.2?})", t0.elapsed());
    println!("  P(-phi_u)        {:.6} +- {:.1e}", per_bounce.value, per_bounce.uncertainty);
    println!("  decay rate       {gamma:.6} per unit time");
    println!("  Bowen dimension  {d_h:.6}");
    println!("  Lyapunov bounds  [{lmin:.4}, {lmax:.4}] per bounce");

    let t0 = Instant::now();
    let mc = disk_billiard::escape_rate_mc(&cfg, samples, 200, 2024)?;
    println!("sampling {samples} rays ({:.2?})", t0.elapsed());
    println!("  rate per time    {:.6} +- {:.1e}", mc.rate_per_time, mc.stderr);
    println!("  rate per bounce  {:.6} +- {:.1e}", mc.rate_per_bounce, mc.stderr_per_bounce);

    let t0 = Instant::now();
    let slice = disk_billiard::trapped_slice_dimension(&cfg, 0, 10)?;
    println!("box counting on a ray fan ({:.2?}, {} intervals)", t0.elapsed(), slice.intervals);
    println!("  dimension        {:.6}", slice.dimension);
    for (eps, n) in &slice.counts {
        println!("    {eps:.3e} {n}");
    }
    Ok(())
}
