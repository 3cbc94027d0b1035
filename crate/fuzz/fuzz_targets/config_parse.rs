#![no_main]

use boost_core::config::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    match ExperimentConfig::from_toml(text) {
        Ok(cfg) => {
            let back = ExperimentConfig::from_toml(&cfg.to_toml()).expect("echoed config parses");
            assert_eq!(back, cfg);
        }
        Err(e) => assert_eq!(e.exit_code(), 2),
    }
});
