//! Replays the checked-in fuzz corpus through the same checks as the fuzz targets,
//! so the seeds are exercised on stable toolchains too.

use std::fs;
use std::path::PathBuf;

use coag_core::model::ChainSpec;
use coag_core::simulator::{parse_event_count, Horizon, LatticeState};
use coag_core::sweep::Grid;

fn seeds(target: &str) -> Vec<String> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<String> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap().to_string_lossy().starts_with("seed_"))
        .map(|p| fs::read_to_string(p).unwrap())
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn spec_seeds() {
    let mut parsed = 0;
    for text in seeds("spec_json").into_iter().chain(seeds("spec_roundtrip")) {
        if let Ok(spec) = ChainSpec::from_json(&text) {
            let _ = spec.validate();
            assert_eq!(ChainSpec::from_json(&spec.to_json()).unwrap(), spec);
            parsed += 1;
        }
    }
    assert!(parsed >= 6);
}

#[test]
fn grid_seeds() {
    for text in seeds("grid") {
        if let Ok(grid) = text.parse::<Grid>() {
            let v = grid.values();
            assert!(!v.is_empty() && v.iter().all(|x| x.is_finite()));
            assert!(v.windows(2).all(|w| w[0] < w[1]) || v.windows(2).all(|w| w[0] > w[1]));
        }
    }
}

#[test]
fn horizon_seeds() {
    for text in seeds("horizon") {
        let _ = parse_event_count(&text);
        if let Ok(h) = text.parse::<Horizon>() {
            assert_eq!(h.to_string().parse::<Horizon>().unwrap(), h);
        }
    }
}

#[test]
fn bitstring_seeds() {
    for text in seeds("bitstring") {
        if let Ok(state) = LatticeState::from_bitstring(&text) {
            assert_eq!(state.to_string(), text);
        }
    }
}
