#![no_main]

use coag_core::model::ChainSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(spec) = ChainSpec::from_json(text) {
            let _ = spec.validate();
        }
    }
});
