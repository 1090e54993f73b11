#![no_main]

use coag_core::model::ChainSpec;
use libfuzzer_sys::fuzz_target;

// anything that parses must survive serialize -> parse unchanged
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spec) = ChainSpec::from_json(text) else { return };
    let back = ChainSpec::from_json(&spec.to_json()).expect("serialized spec must parse");
    assert_eq!(back, spec);
});
