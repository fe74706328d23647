#![no_main]

use std::path::Path;

use libfuzzer_sys::fuzz_target;
use qdtree::evo::GridSpec;
use qdtree::experiment::records;

fuzz_target!(|data: &[u8]| {
    let grid = GridSpec::mountain_car();
    let Ok(rows) = records::read_archive(data, &grid, 40000, Path::new("fuzz")) else { return };
    let archive = records::archive_from_rows(grid, &rows);
    assert_eq!(archive.len(), rows.len());
    let mut buf = Vec::new();
    records::write_archive(&mut buf, &archive).unwrap();
    let again = records::read_archive(buf.as_slice(), &grid, 40000, Path::new("fuzz")).unwrap();
    assert_eq!(records::archive_from_rows(grid, &again), archive);
    let _ = records::read_trend(data, Path::new("fuzz"));
    let _ = records::read_map(data, Path::new("fuzz"));
});
