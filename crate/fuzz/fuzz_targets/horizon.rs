#![no_main]

use coag_core::simulator::{parse_event_count, Horizon};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_event_count(text);
    if let Ok(h) = text.parse::<Horizon>() {
        assert_eq!(h.to_string().parse::<Horizon>().unwrap(), h);
    }
});
