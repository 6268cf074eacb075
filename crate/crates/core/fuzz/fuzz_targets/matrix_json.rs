#![no_main]

use libfuzzer_sys::fuzz_target;
use mbci::network::{check_unitary, parse_matrix_json, Interferometer};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = parse_matrix_json(text) {
        let _ = check_unitary(m.view(), 1e-10);
    }
    if let Ok(u) = Interferometer::from_json_str(text, 1e-10) {
        let back = Interferometer::from_json_str(&u.to_json(), 1e-10).expect("serialized unitary reloads");
        assert_eq!(back, u);
    }
});
