#![no_main]

use libfuzzer_sys::fuzz_target;
use nonsticky_cli::config::{coefficient_to_config, parse_coefficient_spec};

// Any coefficient the parser accepts must survive render-and-reparse
// with its declared metadata intact.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(spec) = parse_coefficient_spec(text) {
            let rendered = coefficient_to_config(&spec);
            let back = parse_coefficient_spec(&rendered)
                .expect("rendered coefficient config must reparse");
            assert_eq!(back.describe(), spec.describe());
            assert_eq!(back.zero_set(), spec.zero_set());
        }
    }
});
