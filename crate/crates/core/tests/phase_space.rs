use std::f64::consts::TAU;

use faer::Mat;

use weyl_lab::baker_classical::{BakerSpec, TorusPoint};
use weyl_lab::phase_space::{
    damped_propagation_experiment, damping_operator, escape_g, hs_trace_experiment, husimi, to_grid, EscapeParams,
    ExperimentParams, GridTarget, WavePacket,
};
use weyl_lab::quantum_baker::QuantumState;
use weyl_lab::C64;

fn h_of(n: usize) -> f64 {
    1.0 / (TAU * n as f64)
}

fn periodic(d: f64) -> f64 {
    d - d.round()
}

#[test]
fn husimi_peak_sits_on_the_packet() {
    let n = 243;
    let u = WavePacket::coherent(h_of(n), [1.0 / 3.0, 1.0 / 3.0]).unwrap().to_torus(n, 0.5).unwrap();
    let f = husimi(&u, n, 0.5).unwrap();
    let best = (0..n * n).max_by(|&a, &b| f.values[a].total_cmp(&f.values[b])).unwrap();
    let (x, xi) = ((best % n) as f64 / n as f64, (best / n) as f64 / n as f64);
    assert!(periodic(x - 1.0 / 3.0).abs() <= 1.0 / n as f64);
    assert!(periodic(xi - 1.0 / 3.0).abs() <= 1.0 / n as f64);
}

#[test]
fn husimi_second_moments_of_a_coherent_state() {
    let n = 729;
    let h = h_of(n);
    let center = [0.4, 0.6];
    let u = WavePacket::coherent(h, center).unwrap().to_torus(n, 0.5).unwrap();
    let f = husimi(&u, n, 0.5).unwrap();
    let (mut mass, mut vx, mut vxi) = (0.0, 0.0, 0.0);
    for q in 0..n {
        for p in 0..n {
            let w = f.get(p, q);
            mass += w;
            vx += w * periodic(p as f64 / n as f64 - center[0]).powi(2);
            vxi += w * periodic(q as f64 / n as f64 - center[1]).powi(2);
        }
    }
    // |<phi_rho, phi_0>|^2 = exp(-|rho|^2 / 2h): variance h per coordinate
    for v in [vx / mass, vxi / mass] {
        assert!((v / h - 1.0).abs() < 0.05, "{} h", v / h);
    }
}

#[test]
fn husimi_of_first_basis_vector_hugs_the_zero_line() {
    let n = 243;
    let f = husimi(&QuantumState::basis(n, 0).unwrap(), n, 0.5).unwrap();
    let width = 5.0 * h_of(n).sqrt();
    let near: f64 = (0..n)
        .filter(|&p| periodic(p as f64 / n as f64).abs() <= width)
        .map(|p| (0..n).map(|q| f.get(p, q)).sum::<f64>())
        .sum::<f64>()
        / f.values.iter().sum::<f64>();
    assert!(near > 0.999, "{near}");
}

#[test]
fn quantized_escape_function_tracks_its_symbol() {
    let n = 729;
    let h = h_of(n);
    let spec = BakerSpec::new(3, vec![0, 2]).unwrap();
    let params = EscapeParams::new(0.4, 1.0, 0.0).unwrap();
    let damping = damping_operator(&spec, &params, n, 0.5).unwrap();
    let g = damping.generator();
    for rho in [[0.5, 0.0], [0.5, 2.0 / 3.0], [0.0, 0.5]] {
        let v = WavePacket::coherent(h, rho).unwrap().to_torus(n, 0.5).unwrap();
        let norm2 = v.norm().powi(2);
        let gv = g * faer::Col::from_fn(n, |i| v.amps()[i]);
        let quad: C64 = (0..n).map(|i| v.amps()[i].conj() * gv[i]).sum::<C64>() / norm2;
        let symbol = escape_g(&spec, TorusPoint::new(rho[0], rho[1]), &params, h);
        assert!(quad.im.abs() < 1e-10);
        assert!((quad.re - symbol).abs() <= 0.1 * symbol.abs(), "{rho:?}: {} vs {symbol}", quad.re);
    }
    assert!(damping.eigenvalues().iter().all(|e| e.is_finite()));
}

#[test]
fn closed_map_has_no_damping() {
    let closed = BakerSpec::new(2, vec![0, 1]).unwrap();
    let n = 128;
    let params = EscapeParams::new(0.4, 1.0, 2.0).unwrap();
    let damping = damping_operator(&closed, &params, n, 0.5).unwrap();
    let e = damping.exp(-2.0);
    assert!((&e - Mat::<C64>::identity(n, n)).norm_l2() < 1e-10);

    let undamped = EscapeParams::new(0.4, 1.0, 0.0).unwrap();
    let s = damped_propagation_experiment(&closed, n, TorusPoint::new(0.0, 0.0), &undamped, 4).unwrap();
    assert!(s.w.iter().all(|w| (w - 1.0).abs() < 1e-10), "{:?}", s.w);

    for vartheta in [0.0, 0.3] {
        let steps = ExperimentParams { vartheta, slack: 0.0 };
        let t = hs_trace_experiment(&closed, &[64, 128], &undamped, &steps).unwrap();
        assert!((t.w[0] - 64.0).abs() < 1e-9 && (t.w[1] - 128.0).abs() < 1e-9, "{:?}", t.w);
        assert!(t.max_relative_gap() < 1e-10);
    }
}

#[test]
fn husimi_covariance_under_linear_maps() {
    let h = 0.01;
    let line = GridTarget::Line { x_min: -4.0, x_max: 4.0, points: 1601 };
    let dx = 8.0 / 1600.0;
    let rho = [0.4, -0.3];
    let cells = 81;
    let cell = 4.0 / (cells - 1) as f64;
    for kappa in [[[1.0, 0.0], [0.5, 1.0]], [[2.0, 0.0], [0.0, 0.5]], [[0.0, 1.0], [-1.0, 0.0]]] {
        let moved = WavePacket::coherent(h, [0.0, 0.0]).unwrap().translate(rho).metaplectic(kappa).unwrap();
        let u = to_grid(&moved, line).unwrap();
        let want = [kappa[0][0] * rho[0] + kappa[0][1] * rho[1], kappa[1][0] * rho[0] + kappa[1][1] * rho[1]];
        let mut best = (f64::MIN, [0.0, 0.0]);
        for i in 0..cells {
            for j in 0..cells {
                let p = [-2.0 + i as f64 * cell, -2.0 + j as f64 * cell];
                let probe = to_grid(&WavePacket::coherent(h, p).unwrap(), line).unwrap();
                let z: C64 = probe.iter().zip(&u).map(|(a, b)| a.conj() * b).sum::<C64>() * dx;
                if z.norm() > best.0 {
                    best = (z.norm(), p);
                }
            }
        }
        assert!((best.1[0] - want[0]).abs() <= cell && (best.1[1] - want[1]).abs() <= cell, "{kappa:?}: {best:?} vs {want:?}");
    }
}
