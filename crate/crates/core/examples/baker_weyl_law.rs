//! Spectra of the quantized open baker map and the growth of the number of
//! eigenvalues outside a disk of radius `nu` with the dimension `N`.
//!
//! `cargo run --release --example baker_weyl_law -- [max_power]`

use std::time::Instant;

use weyl_lab::baker_classical::BakerSpec;
use weyl_lab::quantum_baker::Variant;
use weyl_lab::spectral_counting::{
    annulus_histogram, baker_spectrum, bound_report, count_annulus, weyl_exponent, weyl_gap_exponent,
};

fn main() -> weyl_lab::Result<()> {
    let max_power: u32 = std::env::args().nth(1).map_or(6, |s| s.parse().expect("power"));
    let spec = BakerSpec::new(3, vec![0, 2])?;
    let d_h = spec.dimension();
    let log_a = (spec.base() as f64).ln();

    let mut records = Vec::new();
    for k in 3..=max_power {
        let n = 3usize.pow(k);
        let t0 = Instant::now();
        let rec = baker_spectrum(&spec, n, Variant::Fft)?;
        let hist = annulus_histogram(&rec, &[0.0, 1e-8, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0 + 1e-9]);
        println!(
            "N = {n:5} ({:.2?}): radius {:.4}, residual {:.1e}, |z| histogram {hist:?}",
            t0.elapsed(),
            rec.spectral_radius(),
            rec.residual_max
        );
        records.push(rec);
    }

    println!("d_H = {d_h:.4}");
    for nu in [0.3, 0.5, 0.7, 0.9] {
        let fit = weyl_exponent(&records, nu)?;
        let gap = weyl_gap_exponent(d_h, nu, log_a);
        let report = bound_report(&fit, d_h, gap / 6.0);
        let counts: Vec<usize> = records.iter().map(|r| count_annulus(r, nu)).collect();
        println!(
            "  nu = {nu}: counts {counts:?}, slope {:.3} +- {:.3}, bound exponent {:.3}{}",
            fit.slope,
            fit.stderr,
            report.exponent,
            if report.unbounded { " (ratios still growing)" } else { "" }
        );
    }
    Ok(())
}
