use serde_json::{json, Value};

use super::config::{RunConfig, System};
use super::svg::{plot_field, plot_series, PlotStyle, Series};
use super::Command;
use crate::baker_classical::{self, box_dimension_estimate, trapped_cover, write_cover_csv};
use crate::disk_billiard::{self, escape_rate_mc, orbit_for_word, trapped_slice_dimension, write_orbits_csv};
use crate::phase_space::{
    damped_propagation_experiment, husimi, hs_trace_experiment, EscapeParams, ExperimentParams, WavePacket,
};
use crate::quantum_baker::OpenMapOperator;
use crate::spectral_counting::{count_annulus, eigenvalues, weyl_exponent, SpectrumRecord};
use crate::symbolic_pressure::{
    bowen_dimension, classical_decay_rate, lyapunov_bounds, pressure, sigma_of_gamma, CylinderTable, Subshift,
};
use crate::{Error, Result};

/// What a command produced: the JSON payload plus named CSV and SVG files.
#[derive(Clone, Debug, Default)]
pub struct Artifacts {
    pub payload: Value,
    pub csv: Vec<(String, Vec<u8>)>,
    pub svg: Vec<(String, String)>,
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Serialization(e.to_string()))
}

fn rows_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Serialization(e.to_string());
    wtr.write_record(header).map_err(err)?;
    for row in rows {
        wtr.write_record(row).map_err(err)?;
    }
    wtr.into_inner().map_err(|e| Error::Serialization(e.to_string()))
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn tables(system: &System, depths: &[usize]) -> Result<Vec<CylinderTable>> {
    depths
        .iter()
        .map(|&n| match system {
            System::Baker(spec) => baker_classical::cylinder_table(spec, n),
            System::Disks(cfg) => disk_billiard::cylinder_table(cfg, n),
        })
        .collect()
}

fn system_name(system: &System) -> &'static str {
    match system {
        System::Baker(_) => "baker",
        System::Disks(_) => "disks",
    }
}

/// Runs `command` on the configuration without touching the filesystem.
pub fn execute(command: Command, cfg: &RunConfig, seed: u64) -> Result<Artifacts> {
    match command {
        Command::Pressure => pressure_cmd(cfg, seed),
        Command::Dimension => dimension_cmd(cfg),
        Command::SigmaCurve => sigma_cmd(cfg),
        Command::BilliardOrbits => orbits_cmd(cfg),
        Command::Spectrum => spectrum_cmd(cfg),
        Command::WeylFit => weyl_cmd(cfg),
        Command::Propagate => propagate_cmd(cfg),
        Command::HusimiFrames => husimi_cmd(cfg),
        Command::TraceCheck => trace_cmd(cfg),
    }
}

fn pressure_cmd(cfg: &RunConfig, seed: u64) -> Result<Artifacts> {
    let p = &cfg.pressure;
    let system = cfg.system()?;
    let tabs = tables(&system, &p.depths)?;
    let est = pressure(&tabs, p.coeff_j, p.coeff_t)?;
    let decay = match classical_decay_rate(&tabs) {
        Ok(g) => Some(g),
        Err(Error::NotOpen { .. }) => None,
        Err(e) => return Err(e),
    };
    let escape = match (&system, p.mc_samples) {
        (System::Disks(d), n) if n > 0 => Some(escape_rate_mc(d, n, p.max_bounces, seed)?),
        _ => None,
    };
    let deepest = tabs.last().unwrap();
    let mut table_csv = Vec::new();
    deepest.write_csv(&mut table_csv)?;
    let series = Series::new("p_n", est.per_depth.iter().map(|&(n, v)| (1.0 / n as f64, v)).collect());
    Ok(Artifacts {
        payload: json!({
            "system": system_name(&system),
            "estimate": to_value(&est)?,
            "decay_rate": decay,
            "escape": to_value(&escape)?,
        }),
        csv: vec![(format!("table_n{}.csv", deepest.depth()), table_csv)],
        svg: vec![("pressure.svg".into(), plot_series(&[series], &PlotStyle::titled("finite-depth pressure", "1/n", "p_n"))?)],
    })
}

fn dimension_cmd(cfg: &RunConfig) -> Result<Artifacts> {
    let p = &cfg.dimension;
    let system = cfg.system()?;
    let tabs = tables(&system, &p.depths)?;
    let bowen = bowen_dimension(&tabs, (0.0, 2.0))?;
    match system {
        System::Baker(spec) => {
            let box_count = box_dimension_estimate(&spec, &p.box_depths)?;
            let cover = trapped_cover(&spec, p.cover_depth, p.cover_depth)?;
            let mut csv = Vec::new();
            write_cover_csv(&cover, &mut csv)?;
            Ok(Artifacts {
                payload: json!({
                    "system": "baker",
                    "value": bowen,
                    "analytic": spec.dimension(),
                    "box_count": box_count,
                    "cover_boxes": cover.len(),
                }),
                csv: vec![("cover.csv".into(), csv)],
                svg: vec![],
            })
        }
        System::Disks(disks) => {
            let slice = trapped_slice_dimension(&disks, 0, p.slice_depth)?;
            let csv = rows_csv(&["size", "count"], slice.counts.iter().map(|&(s, c)| vec![num(s), c.to_string()]))?;
            let series = Series::new(
                "boxes",
                slice.counts.iter().map(|&(s, c)| ((1.0 / s).ln(), (c as f64).ln())).collect(),
            );
            Ok(Artifacts {
                payload: json!({ "system": "disks", "value": bowen, "slice": to_value(&slice)? }),
                csv: vec![("slice_counts.csv".into(), csv)],
                svg: vec![("slice_counts.svg".into(), plot_series(&[series], &PlotStyle::titled("box counts", "log(1/size)", "log count"))?)],
            })
        }
    }
}

fn sigma_cmd(cfg: &RunConfig) -> Result<Artifacts> {
    let p = &cfg.sigma_curve;
    if p.points < 2 {
        return Err(Error::InvalidArgument("sigma-curve needs at least 2 points".into()));
    }
    let system = cfg.system()?;
    let tabs = tables(&system, &p.depths)?;
    let gamma_cl = classical_decay_rate(&tabs)?;
    let (_, lambda_max) = lyapunov_bounds(tabs.last().unwrap())?;
    let d_h = bowen_dimension(&tabs, (0.0, 2.0))?;
    let gamma_max = p.gamma_max.unwrap_or(gamma_cl);
    let curve = (0..p.points)
        .map(|i| {
            let g = gamma_max * i as f64 / (p.points - 1) as f64;
            sigma_of_gamma(&tabs, g, lambda_max).map(|s| (g, s))
        })
        .collect::<Result<Vec<_>>>()?;
    let csv = rows_csv(&["gamma", "sigma"], curve.iter().map(|&(g, s)| vec![num(g), num(s)]))?;
    let series = Series::new("sigma", curve.clone());
    Ok(Artifacts {
        payload: json!({
            "system": system_name(&system),
            "gamma_cl": gamma_cl,
            "lambda_max": lambda_max,
            "d_h": d_h,
            "curve": curve,
        }),
        csv: vec![("sigma_curve.csv".into(), csv)],
        svg: vec![("sigma_curve.svg".into(), plot_series(&[series], &PlotStyle::titled("gap function", "gamma", "sigma"))?)],
    })
}

fn orbits_cmd(cfg: &RunConfig) -> Result<Artifacts> {
    let disks = cfg.disks()?;
    let n = cfg.billiard_orbits.length;
    let shift = Subshift::no_repeat(disks.len())?;
    let mut orbits = Vec::new();
    let mut shadowed = Vec::new();
    for word in shift.cyclic_words(n) {
        match orbit_for_word(&disks, &word, true) {
            Ok(o) => orbits.push(o),
            Err(Error::ShadowedPath { .. }) => shadowed.push(word.to_string()),
            Err(e) => return Err(e),
        }
    }
    let mut csv = Vec::new();
    write_orbits_csv(&orbits, &mut csv)?;
    let summary: Vec<Value> =
        orbits.iter().map(|o| json!({ "word": o.word.to_string(), "logJ": o.log_j, "t": o.t_total })).collect();
    Ok(Artifacts {
        payload: json!({ "length": n, "count": orbits.len(), "shadowed": shadowed, "orbits": summary }),
        csv: vec![(format!("orbits_n{n}.csv"), csv)],
        svg: vec![],
    })
}

fn baker_record(cfg: &RunConfig, dim: usize) -> Result<SpectrumRecord> {
    let (spec, sec) = cfg.baker()?;
    let op = OpenMapOperator::with_phase(&spec, dim, sec.variant, sec.theta)?;
    eigenvalues(op.dense()?)
}

fn spectrum_cmd(cfg: &RunConfig) -> Result<Artifacts> {
    let p = &cfg.spectrum;
    let record = baker_record(cfg, p.dim)?;
    let counts: Vec<Value> = p.nu.iter().map(|&nu| json!({ "nu": nu, "count": count_annulus(&record, nu) })).collect();
    let mut csv = Vec::new();
    record.write_csv(&mut csv)?;
    let moduli = Series::new(
        "modulus",
        record.eigenvalues.iter().enumerate().map(|(i, z)| (i as f64, z.norm())).collect(),
    );
    Ok(Artifacts {
        payload: json!({ "spectrum": to_value(&record)?, "annulus_counts": counts }),
        csv: vec![(format!("spectrum_N{}.csv", p.dim), csv)],
        svg: vec![(
            format!("spectrum_N{}.svg", p.dim),
            plot_series(&[moduli], &PlotStyle::titled("eigenvalue moduli", "rank", "|lambda|"))?,
        )],
    })
}

fn weyl_cmd(cfg: &RunConfig) -> Result<Artifacts> {
    let p = &cfg.weyl_fit;
    let (spec, _) = cfg.baker()?;
    let records = p.dims.iter().map(|&n| baker_record(cfg, n)).collect::<Result<Vec<_>>>()?;
    let fits = p.nu.iter().map(|&nu| weyl_exponent(&records, nu)).collect::<Result<Vec<_>>>()?;
    let rows = p.nu.iter().flat_map(|&nu| {
        records.iter().map(move |r| vec![r.n.to_string(), num(nu), count_annulus(r, nu).to_string()])
    });
    let csv = rows_csv(&["N", "nu", "count"], rows)?;
    let series: Vec<Series> = fits
        .iter()
        .map(|f| {
            Series::new(
                format!("nu={}", f.nu),
                f.points.iter().map(|&(n, c)| ((n as f64).ln(), (c as f64).ln())).collect(),
            )
        })
        .collect();
    let svg = if series.iter().any(|s| !s.points.is_empty()) {
        vec![("weyl_fit.svg".into(), plot_series(&series, &PlotStyle::titled("annulus counts", "log N", "log count"))?)]
    } else {
        vec![]
    };
    Ok(Artifacts { payload: json!({ "d_h": spec.dimension(), "fits": to_value(&fits)? }), csv: vec![("weyl_counts.csv".into(), csv)], svg })
}

fn propagate_cmd(cfg: &RunConfig) -> Result<Artifacts> {
    let p = &cfg.propagate;
    let (spec, _) = cfg.baker()?;
    let esc = EscapeParams::new(p.delta, p.m_const, p.t)?;
    let rho = baker_classical::TorusPoint::new(p.rho[0], p.rho[1]);
    let series = damped_propagation_experiment(&spec, p.dim, rho, &esc, p.n_max)?;
    let csv = rows_csv(&["n", "w"], series.n.iter().zip(&series.w).map(|(n, w)| vec![n.to_string(), num(*w)]))?;
    let line = Series::new("log w", series.n.iter().zip(&series.w).map(|(n, w)| (*n as f64, w.ln())).collect());
    Ok(Artifacts {
        payload: to_value(&series)?,
        csv: vec![("propagation.csv".into(), csv)],
        svg: vec![("propagation.svg".into(), plot_series(&[line], &PlotStyle::titled("damped propagation", "n", "log w"))?)],
    })
}

fn husimi_cmd(cfg: &RunConfig) -> Result<Artifacts> {
    let p = &cfg.husimi_frames;
    let (spec, sec) = cfg.baker()?;
    let op = OpenMapOperator::with_phase(&spec, p.dim, sec.variant, sec.theta)?;
    let k = p.k.unwrap_or(p.dim);
    let mut state = WavePacket::coherent(op.h(), p.rho)?.to_torus(p.dim, sec.theta)?;
    let mut csv = Vec::new();
    let mut svg = Vec::new();
    let mut frames = Vec::new();
    for j in 0..=p.frames {
        if j > 0 {
            state = op.apply(&state)?;
        }
        let field = husimi(&state, k, sec.theta)?;
        let peak = (0..field.values.len()).max_by(|&a, &b| field.values[a].total_cmp(&field.values[b])).unwrap_or(0);
        frames.push(json!({
            "frame": j,
            "norm_sq": state.norm().powi(2),
            "mass": field.integral(),
            "peak": [(peak % k) as f64 / k as f64, (peak / k) as f64 / k as f64],
        }));
        let mut bytes = Vec::new();
        field.write_csv(&mut bytes)?;
        csv.push((format!("husimi_{j}.csv"), bytes));
        svg.push((format!("husimi_{j}.svg"), plot_field(&field, &PlotStyle::titled(&format!("step {j}"), "x", "xi"))?));
    }
    Ok(Artifacts { payload: json!({ "N": p.dim, "k": k, "rho": p.rho, "frames": frames }), csv, svg })
}

fn trace_cmd(cfg: &RunConfig) -> Result<Artifacts> {
    let p = &cfg.trace_check;
    let (spec, _) = cfg.baker()?;
    let esc = EscapeParams::new(p.delta, p.m_const, p.t)?;
    let steps = ExperimentParams::from_epsilon(p.epsilon, (spec.base() as f64).ln(), p.slack)?;
    let series = hs_trace_experiment(&spec, &p.dims, &esc, &steps)?;
    let rows = (0..series.dims.len())
        .map(|i| vec![series.dims[i].to_string(), series.n[i].to_string(), num(series.w[i]), num(series.quadrature[i])]);
    let csv = rows_csv(&["N", "n", "frobenius", "quadrature"], rows)?;
    let pts = |v: &[f64]| series.dims.iter().zip(v).map(|(n, w)| ((*n as f64).ln(), w.ln())).collect();
    let plot = plot_series(
        &[Series::new("frobenius", pts(&series.w)), Series::new("quadrature", pts(&series.quadrature))],
        &PlotStyle::titled("damped trace", "log N", "log trace"),
    )?;
    let mut payload = to_value(&series)?;
    payload["max_relative_gap"] = json!(series.max_relative_gap());
    payload["vartheta"] = json!(steps.vartheta);
    payload["slack"] = json!(steps.slack);
    Ok(Artifacts { payload, csv: vec![("trace.csv".into(), csv)], svg: vec![("trace.svg".into(), plot)] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    fn baker_cfg(extra: &str) -> RunConfig {
        RunConfig::parse(&format!("[baker]\na = 3\nalphabet = [0, 2]\n{extra}"), Path::new(".")).unwrap()
    }

    #[test]
    fn dimension_of_the_cantor_baker() {
        let out = execute(Command::Dimension, &baker_cfg(""), 0).unwrap();
        let v = out.payload["value"].as_f64().unwrap();
        assert!((v - 2f64.ln() / 3f64.ln()).abs() < 1e-6);
        assert_eq!(out.csv[0].0, "cover.csv");
    }

    #[test]
    fn sigma_curve_has_zero_at_half_decay_rate() {
        let out = execute(Command::SigmaCurve, &baker_cfg(""), 0).unwrap();
        let gamma_cl = out.payload["gamma_cl"].as_f64().unwrap();
        let text = String::from_utf8(out.csv[0].1.clone()).unwrap();
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let rows: Vec<(f64, f64)> = rdr.deserialize().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 21);
        assert_eq!(rows[10], (gamma_cl / 2.0, 0.0));
        assert!(rows[0].1 > 0.0);
    }

    #[test]
    fn spectrum_dimension_error() {
        let err = execute(Command::Spectrum, &baker_cfg("[spectrum]\nN = 100\n"), 0).unwrap_err();
        assert_eq!(err.name(), "BadDimension");
        assert!(err.to_string().starts_with("BadDimension"));
        assert_eq!(super::super::exit_code(&err), 1);
    }

    #[test]
    fn missing_system_is_a_config_error() {
        let cfg = RunConfig::parse("rng_seed = 3\n", Path::new(".")).unwrap();
        let err = execute(Command::Spectrum, &cfg, 0).unwrap_err();
        assert_eq!(super::super::exit_code(&err), 2);
    }
}
