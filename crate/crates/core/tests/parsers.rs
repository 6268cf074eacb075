use std::path::{Path, PathBuf};

use mbci::config::{parse_config_str, parse_polarization};
use mbci::correlation::MeanTime;
use mbci::network::{parse_matrix_json, Interferometer, NetworkSpec};
use proptest::prelude::*;

fn corpus(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fuzz")
        .join("corpus")
        .join(target);
    let mut seeds: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read_to_string(&p).unwrap(),
            )
        })
        .collect();
    seeds.sort();
    assert!(!seeds.is_empty());
    seeds
}

#[test]
fn config_seeds_parse() {
    for (name, text) in corpus("config_parse") {
        let cfg = parse_config_str(&text, Path::new("/nonexistent"))
            .unwrap_or_else(|e| panic!("{name}: {e}"));
        cfg.experiment().unwrap().gram(&cfg.tolerances).unwrap();
    }
}

#[test]
fn network_seeds_round_trip() {
    for (name, text) in corpus("network_spec") {
        let spec: NetworkSpec = text.parse().unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(spec.to_string().parse::<NetworkSpec>().unwrap(), spec);
    }
}

#[test]
fn matrix_seeds() {
    for (name, text) in corpus("matrix_json") {
        let parsed = parse_matrix_json(&text);
        assert_eq!(parsed.is_ok(), !name.contains("ragged"), "{name}");
        if let Ok(u) = Interferometer::from_json_str(&text, 1e-10) {
            assert_eq!(
                Interferometer::from_json_str(&u.to_json(), 1e-10).unwrap(),
                u
            );
        }
    }
}

#[test]
fn polarization_and_mean_time_seeds() {
    for (name, text) in corpus("polarization") {
        let p = parse_polarization(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!((p.e1().norm_sqr() + p.e2().norm_sqr() - 1.0).abs() < 1e-12);
    }
    for (name, text) in corpus("mean_time") {
        assert!(text.parse::<MeanTime>().is_ok(), "{name}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn parsers_reject_garbage_without_panicking(text in "\\PC{0,64}") {
        let _ = text.parse::<NetworkSpec>();
        let _ = text.parse::<MeanTime>();
        let _ = parse_matrix_json(&text);
        if let Ok(p) = parse_polarization(&text) {
            prop_assert!((p.e1().norm_sqr() + p.e2().norm_sqr() - 1.0).abs() < 1e-12);
        }
        let _ = parse_config_str(&text, Path::new("/nonexistent"));
    }

    #[test]
    fn structured_specs(kind in 0usize..4, a in 0u64..400, b in any::<u64>(), junk in "[ :a-z0-9.-]{0,6}") {
        let text = match kind {
            0 => format!("fourier:{a}{junk}"),
            1 => format!("haar:{a}:{b}{junk}"),
            2 => format!("linear:{a}{junk}"),
            _ => format!("fixed:{junk}{a}"),
        };
        if let Ok(spec) = text.parse::<NetworkSpec>() {
            prop_assert_eq!(spec.to_string().parse::<NetworkSpec>().unwrap(), spec);
        }
        if let Ok(p) = parse_polarization(&text) {
            prop_assert!((p.e1().norm_sqr() + p.e2().norm_sqr() - 1.0).abs() < 1e-12);
        }
        if let Ok(MeanTime::Fixed(t)) = text.parse::<MeanTime>() {
            prop_assert!(t.is_finite());
        }
    }
}
