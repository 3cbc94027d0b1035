#![no_main]

use boost_core::experiments::{pn_schema, pn_spin_schema, q_schema};
use boost_core::output::validate_csv;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&selector, rest)) = data.split_first() else {
        return;
    };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let n_max = (selector >> 2) as usize;
    let schema = match selector & 3 {
        0 => pn_schema(n_max),
        1 => pn_spin_schema(n_max),
        _ => q_schema(),
    };
    if let Ok(rows) = validate_csv(text, &schema) {
        assert!(rows < text.lines().count());
    }
});
