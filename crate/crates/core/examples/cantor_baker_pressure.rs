//! Thermodynamic quantities of the open baker map with a Cantor trapped set,
//! compared with their closed forms, plus covers of the trapped set and a
//! sampled survival measure.
//!
//! `cargo run --release --example cantor_baker_pressure -- [a] [digits...]`

use weyl_lab::baker_classical::{self, BakerSpec};
use weyl_lab::symbolic_pressure::{
    bowen_dimension, classical_decay_rate, lyapunov_bounds, pressure, sigma_of_gamma,
};

fn main() -> weyl_lab::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).map(|s| s.parse().expect("integer")).collect();
    let spec = match args.split_first() {
        Some((&a, digits)) if !digits.is_empty() => BakerSpec::new(a, digits.to_vec())?,
        _ => BakerSpec::new(3, vec![0, 2])?,
    };
    println!("baker a = {}, alphabet {:?}", spec.base(), spec.alphabet());

    let tables = (2..=8).map(|n| baker_classical::cylinder_table(&spec, n)).collect::<Result<Vec<_>, _>>()?;
    for s in [0.0, 0.5, 1.0] {
        let est = pressure(&tables, -s, 0.0)?;
        let exact = (spec.symbol_count() as f64).ln() - s * (spec.base() as f64).ln();
        println!("  P(-{s} phi_u) = {:+.12}   closed form {exact:+.12}", est.value);
    }

    let d_h = bowen_dimension(&tables, (0.0, 2.0))?;
    let gamma_cl = classical_decay_rate(&tables)?;
    let (_, lambda_max) = lyapunov_bounds(tables.last().unwrap())?;
    println!("  Bowen root     {d_h:.10}   closed form {:.10}", spec.dimension());
    println!("  decay rate     {gamma_cl:.10}   closed form {:.10}", spec.decay_rate());

    println!("gap function sigma(gamma)");
    for i in 0..=10 {
        let g = gamma_cl * i as f64 / 10.0;
        let s = sigma_of_gamma(&tables, g, lambda_max)?;
        println!("  {g:.4}  {s:.6}");
    }

    println!("trapped-set covers");
    for n in 1..=5 {
        let cover = baker_classical::trapped_cover(&spec, n, n)?;
        let area: f64 = cover.iter().map(|b| b.area()).sum();
        println!("  depth {n}: {:5} boxes, area {area:.3e}", cover.len());
    }
    let box_dim = baker_classical::box_dimension_estimate(&spec, &[2, 4, 6, 8, 10])?;
    println!("  box-counting dimension of a stable slice {box_dim:.6} (Bowen root {d_h:.6})");

    println!("forward survivors");
    for n in [1, 3, 5] {
        let s = baker_classical::survival_measure(&spec, n, 1_000_000, 42)?;
        println!("  n = {n}: exact {:.6}, sampled {:.6} (tol {:.1e})", s.exact, s.mc, s.tolerance);
    }
    Ok(())
}
