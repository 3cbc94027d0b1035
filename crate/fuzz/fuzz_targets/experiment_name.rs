#![no_main]

use boost_core::config::Experiment;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(name) = std::str::from_utf8(data) else { return };
    match name.parse::<Experiment>() {
        Ok(e) => assert_eq!(e.name(), name),
        Err(e) => assert_eq!(e.exit_code(), 2),
    }
});
