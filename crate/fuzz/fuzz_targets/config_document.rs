#![no_main]

use libfuzzer_sys::fuzz_target;

// The raw sectioned key-value parser must never panic and must keep its
// structural guarantees on whatever bytes it accepts.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(doc) = nonsticky_cli::config::parse_document(text) {
            for section in &doc.sections {
                assert!(!section.name.is_empty());
                for (key, value) in &section.entries {
                    assert!(!key.is_empty());
                    assert!(!value.is_empty());
                }
            }
        }
    }
});
