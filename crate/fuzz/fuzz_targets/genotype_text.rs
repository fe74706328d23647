#![no_main]

use libfuzzer_sys::fuzz_target;
use qdtree::grammar::Genotype;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = Genotype::parse(text, 40000) {
        assert!(g.genes().iter().all(|&x| x <= 40000));
        assert_eq!(Genotype::parse(&g.to_string(), 40000).unwrap(), g);
    }
});
