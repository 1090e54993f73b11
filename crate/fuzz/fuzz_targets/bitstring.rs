#![no_main]

use coag_core::simulator::LatticeState;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(state) = LatticeState::from_bitstring(text) {
        assert_eq!(state.to_string().len(), state.sites());
    }
});
