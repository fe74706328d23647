#![no_main]

use std::path::Path;

use libfuzzer_sys::fuzz_target;
use qdtree::experiment::records;

fuzz_target!(|data: &[u8]| {
    let origin = Path::new("fuzz");
    if let Ok(rows) = records::read_evals(data, 40000, origin) {
        let mut log = records::EvalLog::new(Vec::new()).unwrap();
        for r in &rows {
            log.push(&r.to_individual()).unwrap();
        }
    }
    let _ = records::read_population(data, 40000, origin);
    let _ = records::read_coverage(data, origin);
    let _ = records::read_trend_summary(data, origin);
});
