//! A coherent state on the torus carried by the quantized baker map, shown
//! through its Husimi density, and the same state under the map damped by
//! an escape function.
//!
//! `cargo run --release --example coherent_transport -- [N] [x] [xi]`

use weyl_lab::baker_classical::{forward, BakerSpec, TorusPoint};
use weyl_lab::phase_space::{damped_propagation_experiment, husimi, EscapeParams, WavePacket};
use weyl_lab::quantum_baker::{OpenMapOperator, Variant, DEFAULT_PHASE};

fn main() -> weyl_lab::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(729, |s| s.parse().expect("N"));
    let x: f64 = args.next().map_or(0.1, |s| s.parse().expect("x"));
    let xi: f64 = args.next().map_or(0.4, |s| s.parse().expect("xi"));

    let spec = BakerSpec::new(3, vec![0, 2])?;
    let op = OpenMapOperator::build(&spec, n, Variant::Fft)?;
    let h = op.h();
    let mut state = WavePacket::coherent(h, [x, xi])?.to_torus(n, DEFAULT_PHASE)?;
    let mut classical = Some(TorusPoint::new(x, xi));
    let radius = 10.0 * h.sqrt();

    println!("N = {n}, h = {h:.3e}, start at ({x}, {xi})");
    for step in 0..4 {
        if step > 0 {
            state = op.apply(&state)?;
            classical = classical.and_then(|p| forward(&spec, p));
        }
        let field = husimi(&state, n, DEFAULT_PHASE)?;
        let peak = (0..field.values.len()).max_by(|&a, &b| field.values[a].total_cmp(&field.values[b])).unwrap();
        let peak = ((peak % n) as f64 / n as f64, (peak / n) as f64 / n as f64);
        let near = classical.map(|p| field.mass_near(p.x, p.xi, radius));
        println!(
            "  step {step}: |u|^2 {:.4}, Husimi peak ({:.4}, {:.4}), classical {:?}, share near it {:?}",
            state.norm().powi(2),
            peak.0,
            peak.1,
            classical.map(|p| (p.x, p.xi)),
            near
        );
    }

    println!("damped propagation, delta = 0.4, M = 1");
    for (t, rho) in [(0.0, [0.25, 0.75]), (2.0, [0.25, 0.75]), (2.0, [0.0, 0.5])] {
        let esc = EscapeParams::new(0.4, 1.0, t)?;
        let series = damped_propagation_experiment(&spec, n, TorusPoint::new(rho[0], rho[1]), &esc, 3)?;
        let w: Vec<String> = series.w.iter().map(|w| format!("{w:.3e}")).collect();
        println!("  t = {t}, rho = {rho:?}: w = [{}], slope {:.3}", w.join(", "), series.log_slope(3));
    }
    Ok(())
}
