use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn mbci(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mbci"))
        .args(args)
        .env("MBCS_THREADS", "2")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn cfg(name: &str) -> String {
    configs().join(name).display().to_string()
}

fn header_value<'a>(csv: &'a str, key: &str) -> &'a str {
    let prefix = format!("# {key}: ");
    csv.lines()
        .find_map(|l| l.strip_prefix(prefix.as_str()))
        .unwrap_or_else(|| panic!("no {key} header"))
}

#[test]
fn tritter_permanent_vanishes() {
    let out = stdout(&mbci(&["permanent", "--builder", "tritter_fig2a"]));
    let abs: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("abs,"))
        .unwrap()
        .parse()
        .unwrap();
    assert!(abs < 1e-12);
    let json: Value = serde_json::from_str(&stdout(&mbci(&[
        "permanent",
        "--builder",
        "fourier:3",
        "--format",
        "json",
    ])))
    .unwrap();
    assert!((json["data"]["abs_sqr"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn every_bundled_config_checks() {
    let mut names: Vec<_> = std::fs::read_dir(configs())
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    names.sort();
    assert!(names.len() >= 2);
    for path in names {
        let out = stdout(&mbci(&["check", path.to_str().unwrap()]));
        assert_eq!(header_value(&out, "config_hash").len(), 64);
    }
}

#[test]
fn landscape_grid_layout() {
    let out = stdout(&mbci(&[
        "landscape",
        &cfg("fig2b.json"),
        "--range",
        "6",
        "--steps",
        "25",
    ]));
    let rows: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 26);
    let axis: Vec<f64> = rows[0]
        .split(',')
        .skip(1)
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(axis.len(), 25);
    assert_eq!((axis[0], axis[12], axis[24]), (-6.0, 0.0, 6.0));
    let values: Vec<Vec<f64>> = rows[1..]
        .iter()
        .map(|r| r.split(',').skip(1).map(|v| v.parse().unwrap()).collect())
        .collect();
    let max = values.iter().flatten().cloned().fold(0.0, f64::max);
    assert!(values[12][12] < 1e-9 * max);
    assert_eq!(header_value(&out, "axes"), "tau21, tau32");
    let ratio: f64 = header_value(&out, "center_over_max").parse().unwrap();
    assert!(ratio < 1e-9);
}

#[test]
fn polscan_reports_full_visibility() {
    let out = stdout(&mbci(&[
        "polscan",
        &cfg("fig2d.json"),
        "--steps",
        "31",
        "--format",
        "json",
    ]));
    let json: Value = serde_json::from_str(&out).unwrap();
    let v: f64 = json["metadata"]["notes"]["visibility"]
        .as_str()
        .unwrap()
        .parse()
        .unwrap();
    assert!((v - 1.0).abs() <= 1e-9);
    assert_eq!(json["data"]["values"].as_array().unwrap().len(), 31);
    assert_eq!(json["kind"], "grid");
}

#[test]
fn rate_accepts_negative_times_and_port_order() {
    let a = stdout(&mbci(&[
        "rate",
        &cfg("haar6.json"),
        "--times=-0.4,0.2,1.1",
        "--ports",
        "2,4,5",
        "--pols",
        "H,V,D",
    ]));
    let b = stdout(&mbci(&[
        "rate",
        &cfg("haar6.json"),
        "--times",
        "1.1,-0.4,0.2",
        "--ports",
        "5,2,4",
        "--pols",
        "D,H,V",
    ]));
    assert_eq!(a, b);
    let value: f64 = a
        .lines()
        .find_map(|l| l.strip_prefix("rate,"))
        .unwrap()
        .parse()
        .unwrap();
    assert!(value > 0.0);
}

#[test]
fn pav_with_oracle() {
    let out = stdout(&mbci(&["pav", &cfg("hom.json"), "--oracle"]));
    let row = out.lines().find(|l| l.starts_with("1 2,")).unwrap();
    let cells: Vec<f64> = row.split(',').skip(1).map(|v| v.parse().unwrap()).collect();
    let expected = (1.0 - (-0.25f64).exp()) / 2.0;
    assert!((cells[0] - expected).abs() < 1e-12);
    assert!((cells[1] - cells[0]).abs() < 1e-6);
}

#[test]
fn sampling_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |file: &Path, threads: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_mbci"))
            .args([
                "sample",
                &cfg("haar6.json"),
                "--count",
                "300",
                "--seed",
                "5",
                "--check",
                "--out",
            ])
            .arg(file)
            .env("MBCS_THREADS", threads)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(file).unwrap()
    };
    let a = run(&dir.path().join("a.jsonl"), "1");
    let b = run(&dir.path().join("b.jsonl"), "3");
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    let head: Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(head["kind"], "event-stream");
    assert!(head["metadata"]["notes"]["chi2_p_value"].is_string());
    let events: Vec<Value> = lines.map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(events.len(), 300);
    for e in &events {
        let ports: Vec<u64> = e["ports"]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| p.as_u64().unwrap())
            .collect();
        assert!(
            ports.len() == 3
                && ports.windows(2).all(|w| w[0] < w[1])
                && ports[0] >= 1
                && ports[2] <= 6
        );
        assert_eq!(e["times"].as_array().unwrap().len(), 3);
        assert_eq!(e["basis_indices"].as_array().unwrap().len(), 3);
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p.display().to_string()
    };
    let mismatch = write(
        "mismatch.json",
        r#"{"network":"fourier:3","input_ports":[1,2,3],"photons":[{},{}]}"#,
    );
    assert_eq!(mbci(&["check", &mismatch]).status.code(), Some(2));
    let broken = write("broken.json", "{\"network\": ");
    assert_eq!(mbci(&["check", &broken]).status.code(), Some(2));
    assert_eq!(
        mbci(&["check", "/nonexistent/config.json"]).status.code(),
        Some(2)
    );
    assert_eq!(
        mbci(&["permanent", "--builder", "nonsense"]).status.code(),
        Some(2)
    );
    assert_eq!(
        mbci(&["landscape", &cfg("hom.json")]).status.code(),
        Some(2)
    );

    // identical photons on a balanced beamsplitter leave no coincidences to sample
    let hom = write(
        "hom0.json",
        r#"{"network":"beamsplitter","input_ports":[1,2],"photons":[{"omega0_rel":5},{"omega0_rel":5}]}"#,
    );
    let out = mbci(&["sample", &hom, "--count", "10"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("collision-free"));
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("pav.csv");
    let direct = stdout(&mbci(&["pav", &cfg("haar6.json")]));
    let status = mbci(&["pav", &cfg("haar6.json"), "--out", file.to_str().unwrap()]);
    assert!(status.status.success() && status.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(file).unwrap(), direct);
    assert_eq!(header_value(&direct, "command"), "pav");
}
