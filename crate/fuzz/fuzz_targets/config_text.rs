#![no_main]

use libfuzzer_sys::fuzz_target;
use qdtree::experiment::{parse_entries, ExperimentConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_entries(text, "fuzz");
    if let Ok(config) = ExperimentConfig::from_text(text) {
        assert!(config.validate().is_ok());
        assert_eq!(ExperimentConfig::from_text(&config.to_text()).unwrap(), config);
    }
});
