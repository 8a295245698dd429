//! Squeezed Gaussian packets moved by phase-space translations and linear
//! symplectic maps, checked against grid evaluations.

use weyl_lab::phase_space::{compose, phase_fitted_distance, to_grid, GridTarget, WavePacket, ROTATION};
use weyl_lab::C64;

fn main() -> weyl_lab::Result<()> {
    let h = 1e-2;
    let line = GridTarget::Line { x_min: -3.0, x_max: 3.0, points: 2001 };
    let coeffs = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.5), C64::new(0.25, 0.0)];
    let packet = WavePacket::excited(h, [0.2, -0.1], coeffs)?;

    let shear = [[1.0, 0.0], [0.7, 1.0]];
    let squeeze = [[2.0, 0.0], [0.0, 0.5]];
    for (name, kappa) in [("rotation", ROTATION), ("shear", shear), ("squeeze", squeeze)] {
        let moved = packet.metaplectic(kappa)?;
        let g = moved.squeeze();
        let f = moved.frame();
        let s2 = f[0][0].powi(2) + f[0][1].powi(2);
        println!(
            "{name:9} center {:?}, gamma = {:.4}{:+.4}i, Im gamma * |a+ib|^2 = {:.15}",
            moved.center(),
            g.re,
            g.im,
            g.im * s2
        );
    }

    let two_steps = packet.metaplectic(shear)?.metaplectic(squeeze)?;
    let one_step = packet.metaplectic(compose(squeeze, shear))?;
    let d = phase_fitted_distance(&to_grid(&two_steps, line)?, &to_grid(&one_step, line)?);
    println!("composition on the grid: distance {d:.2e}");

    let shifted = packet.translate([0.5, 0.3]).translate([-0.5, -0.3]);
    let d = phase_fitted_distance(&to_grid(&shifted, line)?, &to_grid(&packet, line)?);
    println!("translation round trip: distance {d:.2e}");

    let n = 81;
    let torus = WavePacket::coherent(1.0 / (2.0 * std::f64::consts::PI * n as f64), [0.5, 0.5])?.to_torus(n, 0.5)?;
    println!("torus restriction at N = {n}: norm {:.12}", torus.norm());
    Ok(())
}
