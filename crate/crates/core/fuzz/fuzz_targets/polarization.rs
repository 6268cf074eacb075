#![no_main]

use libfuzzer_sys::fuzz_target;
use mbci::config::parse_polarization;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = parse_polarization(text) {
        let norm = p.e1().norm_sqr() + p.e2().norm_sqr();
        assert!((norm - 1.0).abs() < 1e-12, "{text:?} gave norm {norm}");
    }
});
