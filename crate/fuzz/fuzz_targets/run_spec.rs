#![no_main]

use libfuzzer_sys::fuzz_target;

// Full typed study parsing must never panic; accepted configs must be
// well-formed enough to serialise for provenance hashing.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(config) = nonsticky_cli::config::parse_run_spec(text) {
            let _ = serde_json::to_vec(&config).expect("accepted config must serialise");
            assert!(config.problem.horizon > 0.0);
        }
    }
});
