#![no_main]

use libfuzzer_sys::fuzz_target;
use mbci::correlation::MeanTime;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(MeanTime::Fixed(t)) = text.parse::<MeanTime>() {
        assert!(t.is_finite());
    }
});
