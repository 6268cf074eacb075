#![no_main]

use std::path::Path;

use libfuzzer_sys::fuzz_target;
use mbci::config::parse_config_str;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    // `file:` networks resolve against a directory that does not exist
    if let Ok(cfg) = parse_config_str(text, Path::new("/nonexistent-fuzz-base")) {
        assert_eq!(cfg.photons.len(), cfg.inputs.len());
        assert_eq!(cfg.hash.len(), 64);
        let exp = cfg.experiment().expect("validated config builds an experiment");
        let _ = exp.gram(&cfg.tolerances);
    }
});
