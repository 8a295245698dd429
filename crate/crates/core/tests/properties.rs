use std::collections::BTreeMap;

use proptest::prelude::*;

use weyl_lab::baker_classical::{self, forward, forward_box, inverse, trapped_cover, BakerSpec, CoverBox, TorusPoint};
use weyl_lab::disk_billiard::{billiard_step, BoundaryCoord, DiskConfig};
use weyl_lab::phase_space::{compose, phase_fitted_distance, to_grid, GridTarget, WavePacket};
use weyl_lab::quantum_baker::{OpenMapOperator, QuantumState, Variant};
use weyl_lab::rng;
use weyl_lab::spectral_counting::{annulus_histogram, baker_spectrum};
use weyl_lab::symbolic_pressure::{
    classical_decay_rate, finite_pressure, lyapunov_bounds, sigma_of_gamma, CylinderEntry, CylinderTable, Subshift,
    TableBounds,
};
use weyl_lab::C64;

fn random_table(m: usize, n: usize, weights: &[(f64, f64)]) -> CylinderTable {
    let shift = Subshift::full(m).unwrap();
    let entries: BTreeMap<_, _> = shift
        .words(n)
        .into_iter()
        .zip(weights.iter().cycle())
        .map(|(w, &(lj, t))| (w, CylinderEntry { log_j: lj * n as f64, t: t * n as f64 }))
        .collect();
    CylinderTable::new(shift, n, entries, TableBounds::default()).unwrap()
}

fn weights() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.1f64..3.0, 0.1f64..2.0), 27)
}

/// Open baker with at least two digits and at least one missing.
fn open_spec() -> impl Strategy<Value = BakerSpec> {
    (3usize..7).prop_flat_map(|a| {
        prop::sample::subsequence((0..a).collect::<Vec<_>>(), 2..a).prop_map(move |digits| BakerSpec::new(a, digits).unwrap())
    })
}

fn symplectic() -> impl Strategy<Value = [[f64; 2]; 2]> {
    (0.3f64..2.0, prop::bool::ANY, -1.5f64..1.5, -1.5f64..1.5).prop_map(|(a, neg, b, c)| {
        let a = if neg { -a } else { a };
        [[a, b], [c, (1.0 + b * c) / a]]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pressure_is_monotone_in_both_weights(w in weights(), s in -2.0f64..2.0, ds in 0.01f64..1.0) {
        let t = random_table(3, 3, &w);
        prop_assert!(finite_pressure(&t, -(s + ds), 0.0).unwrap() < finite_pressure(&t, -s, 0.0).unwrap());
        prop_assert!(finite_pressure(&t, 0.0, s + ds).unwrap() > finite_pressure(&t, 0.0, s).unwrap());
    }

    #[test]
    fn constant_weights_give_depth_free_pressure(m in 2usize..5, lj in 0.1f64..3.0, tt in 0.1f64..2.0, s in -1.5f64..1.5) {
        let shift = Subshift::full(m).unwrap();
        let p: Vec<f64> = (1..=5)
            .map(|n| finite_pressure(&CylinderTable::constant(shift.clone(), n, lj, tt).unwrap(), -s, 0.5).unwrap())
            .collect();
        for v in &p {
            prop_assert!((v - p[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn cycle_means_sandwich_periodic_words(w in weights(), len in 2usize..7) {
        let t = random_table(3, 3, &w);
        let (lo, hi) = lyapunov_bounds(&t).unwrap();
        for word in t.subshift().cyclic_words(len) {
            let s = word.symbols();
            // mean per-step weight along the closed walk of depth-3 windows
            let mean: f64 = (0..len)
                .map(|i| {
                    let window: Vec<u8> = (0..3).map(|k| s[(i + k) % len]).collect();
                    t.get(&window.into()).unwrap().log_j / 3.0
                })
                .sum::<f64>()
                / len as f64;
            prop_assert!(lo - 1e-9 <= mean && mean <= hi + 1e-9, "{lo} {mean} {hi}");
        }
    }

    #[test]
    fn sigma_vanishes_beyond_half_the_decay_rate(spec in open_spec(), frac in 0.5f64..3.0) {
        let tables: Vec<_> = (2..=4).map(|n| baker_classical::cylinder_table(&spec, n).unwrap()).collect();
        let gamma_cl = classical_decay_rate(&tables).unwrap();
        let (_, lmax) = lyapunov_bounds(tables.last().unwrap()).unwrap();
        prop_assert_eq!(sigma_of_gamma(&tables, frac * gamma_cl, lmax).unwrap(), 0.0);
        prop_assert!(sigma_of_gamma(&tables, 0.0, lmax).unwrap() >= 0.0);
    }

    #[test]
    fn forward_box_preserves_area(spec in open_spec(), pick in 0usize..8, u in 0.0f64..1.0, v in 0.0f64..1.0, sx in 0.0f64..1.0, sy in 0.0f64..1.0) {
        let a = spec.base() as f64;
        let j = spec.alphabet()[pick % spec.symbol_count()] as f64;
        let side_x = sx * (1.0 - u) / a;
        let b = CoverBox { x0: (j + u * (1.0 - sx)) / a, xi0: v * (1.0 - sy), side_x, side_xi: sy * (1.0 - v) };
        if let Some(img) = forward_box(&spec, &b) {
            prop_assert!((img.area() - b.area()).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_undoes_forward_on_rationals(spec in open_spec(), k in 1u32..6, i in 0u64..100_000, l in 0u64..100_000) {
        let den = spec.base().pow(k) as u64;
        let p = TorusPoint::new((i % den) as f64 / den as f64, (l % den) as f64 / den as f64);
        if let Some(q) = forward(&spec, p) {
            let back = inverse(&spec, q).unwrap();
            prop_assert!((back.x - p.x).abs() < 1e-12 && (back.xi - p.xi).abs() < 1e-12);
        }
    }

    #[test]
    fn quantized_map_is_subunitary(spec in open_spec(), k in 1u32..4, seed in 0u64..1000) {
        let n = spec.base().pow(k);
        let op = OpenMapOperator::build(&spec, n, Variant::Fft).unwrap();
        let u = QuantumState::random(n, &mut rng::stream(seed, 0)).unwrap();
        prop_assert!(op.apply(&u).unwrap().norm() <= u.norm() * (1.0 + 1e-10));
    }

    #[test]
    fn squeeze_law_and_composition(k1 in symplectic(), k2 in symplectic(), x in -0.5f64..0.5, xi in -0.5f64..0.5) {
        let wp = WavePacket::excited(0.05, [x, xi], vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap();
        let a = wp.metaplectic(k2).unwrap().metaplectic(k1).unwrap();
        let b = wp.metaplectic(compose(k1, k2)).unwrap();
        prop_assert_eq!(a.frame(), compose(compose(k1, k2), wp.frame()));
        let f = a.frame();
        let gamma = a.squeeze();
        prop_assert!((gamma.im * (f[0][0].powi(2) + f[0][1].powi(2)) - 1.0).abs() < 1e-12);
        let line = GridTarget::Line { x_min: -6.0, x_max: 6.0, points: 801 };
        let d = phase_fitted_distance(&to_grid(&a, line).unwrap(), &to_grid(&b, line).unwrap());
        prop_assert!(d <= 1e-8, "{d}");
    }

    #[test]
    fn billiard_map_is_symplectic(y in 0.0f64..std::f64::consts::TAU, eta in -0.9f64..0.9) {
        let cfg = DiskConfig::equilateral(1.0, 6.0).unwrap();
        let step = |y: f64, eta: f64| billiard_step(&cfg, BoundaryCoord::new(&cfg, 0, y, eta).unwrap()).unwrap();
        let h = 1e-6;
        let c = step(y, eta);
        let nbrs = [step(y + h, eta), step(y - h, eta), step(y, eta + h), step(y, eta - h)];
        if let (Some(c), [Some(yp), Some(ym), Some(ep), Some(em)]) = (c, nbrs) {
            if [yp, ym, ep, em].iter().all(|b| b.coord.disk == c.coord.disk) {
                let per = cfg.perimeter(c.coord.disk);
                let dy = |p: f64, m: f64| {
                    let d = (p - m).rem_euclid(per);
                    if d > per / 2.0 { d - per } else { d }
                };
                let j11 = dy(yp.coord.y, ym.coord.y) / (2.0 * h);
                let j21 = (yp.coord.eta - ym.coord.eta) / (2.0 * h);
                let j12 = dy(ep.coord.y, em.coord.y) / (2.0 * h);
                let j22 = (ep.coord.eta - em.coord.eta) / (2.0 * h);
                let det = j11 * j22 - j12 * j21;
                prop_assert!((det - 1.0).abs() < 1e-4 * (1.0 + j11.abs() * j22.abs()), "{det}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn covers_are_nested(spec in open_spec(), n in 1usize..3) {
        let coarse = trapped_cover(&spec, n, n).unwrap();
        let fine = trapped_cover(&spec, n + 1, n + 1).unwrap();
        for b in &fine {
            prop_assert!(coarse.iter().any(|c| c.contains_box(b, 1e-12)));
        }
    }

    #[test]
    fn annulus_counts_partition_the_spectrum(k in 2u32..5, cuts in prop::collection::vec(0.0f64..1.0, 1..8)) {
        let rec = baker_spectrum(&BakerSpec::new(3, vec![0, 2]).unwrap(), 3usize.pow(k), Variant::Fft).unwrap();
        let mut edges = vec![0.0];
        let mut cuts = cuts;
        cuts.sort_by(f64::total_cmp);
        edges.extend(cuts);
        edges.push(1.0 + 1e-8);
        prop_assert_eq!(annulus_histogram(&rec, &edges).iter().sum::<usize>(), rec.n);
        prop_assert!(rec.spectral_radius() <= 1.0 + 1e-8);
    }
}
