#![no_main]

use libfuzzer_sys::fuzz_target;
use maser_tur::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(cfg) = serde_json::from_slice::<RunConfig>(data) else {
        return;
    };
    let _ = cfg.validate();
    let _ = cfg.params();
    let _ = cfg.sweep_spec();
    let _ = cfg.heatmap_spec();
    let _ = cfg.mc_spec();
    let json = serde_json::to_string(&cfg).unwrap();
    let back: RunConfig = serde_json::from_str(&json).unwrap();
    assert_eq!(serde_json::to_string(&back).unwrap(), json);
});
