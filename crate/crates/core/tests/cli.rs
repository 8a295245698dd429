use std::path::Path;
use std::process::Command;

use weyl_lab::phase_space::PhaseField;
use weyl_lab::quantum_baker::QuantumState;

const BAKER: &str = "rng_seed = 3\n\n[baker]\na = 3\nalphabet = [0, 2]\n\n[spectrum]\nN = 81\n\n[husimi-frames]\nN = 81\nframes = 2\n";

fn run(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_weyl-lab")).current_dir(dir).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), BAKER).unwrap();
    for out in ["a", "b"] {
        for cmd in ["spectrum", "sigma-curve", "husimi-frames"] {
            let (code, err) = run(dir.path(), &[cmd, "--config", "run.toml", "--out", out, "--threads", "1"]);
            assert_eq!(code, 0, "{cmd}: {err}");
        }
    }
    let mut names: Vec<_> = std::fs::read_dir(dir.path().join("a")).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() > 10);
    for name in names {
        let name = name.to_string_lossy();
        if name.ends_with(".meta.json") {
            continue;
        }
        let a = std::fs::read(dir.path().join("a").join(&*name)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(&*name)).unwrap();
        assert_eq!(a, b, "{name} differs");
    }
    let bundle: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("a/spectrum.json")).unwrap()).unwrap();
    assert_eq!(bundle["config"].as_str().unwrap(), BAKER);
    assert_eq!(bundle["command"], "spectrum");
    assert!(bundle.get("wall_time_s").is_none());
}

#[test]
fn emitted_csv_parses_back() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), BAKER).unwrap();
    let (code, err) = run(dir.path(), &["husimi-frames", "--config", "run.toml", "--out", "o", "--format", "csv"]);
    assert_eq!(code, 0, "{err}");
    let field = PhaseField::read_csv(std::fs::File::open(dir.path().join("o/husimi_2.csv")).unwrap()).unwrap();
    assert_eq!(field.k, 81);
    assert!(!dir.path().join("o/husimi-frames.json").exists());

    let (code, _) = run(dir.path(), &["spectrum", "--config", "run.toml", "--out", "o", "--format", "csv"]);
    assert_eq!(code, 0);
    let mut rdr = csv::Reader::from_path(dir.path().join("o/spectrum_N81.csv")).unwrap();
    let rows: Vec<(f64, f64, f64)> = rdr.deserialize().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 81);
    assert!(rows.iter().all(|(re, im, m)| (re.hypot(*im) - m).abs() < 1e-12));
    // a state file round trip through the public reader
    let state = QuantumState::basis(9, 4).unwrap();
    let mut buf = Vec::new();
    state.write_csv(&mut buf).unwrap();
    assert_eq!(QuantumState::read_csv(buf.as_slice()).unwrap(), state);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), BAKER).unwrap();
    std::fs::write(dir.path().join("bad_n.toml"), BAKER.replace("N = 81\n\n[husimi", "N = 100\n\n[husimi")).unwrap();
    std::fs::write(dir.path().join("typo.toml"), "[baker]\na = 3\nalphabet = [0, 2]\nsigma = 1\n").unwrap();

    let (code, err) = run(dir.path(), &["spectrum", "--config", "bad_n.toml", "--out", "o"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("BadDimension"), "{err}");

    let (code, err) = run(dir.path(), &["spectrum", "--config", "typo.toml"]);
    assert_eq!(code, 2);
    assert!(err.starts_with("ConfigParse"), "{err}");

    let (code, _) = run(dir.path(), &["billiard-orbits", "--config", "run.toml"]);
    assert_eq!(code, 2);
    let (code, _) = run(dir.path(), &["no-such-command", "--config", "run.toml"]);
    assert_eq!(code, 2);
    let (code, _) = run(dir.path(), &["spectrum", "--config", "missing.toml"]);
    assert_eq!(code, 2);
}
