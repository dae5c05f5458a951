#![no_main]

use libfuzzer_sys::fuzz_target;
use swnet::harness::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(c) = ExperimentConfig::parse(text) {
        let again = ExperimentConfig::parse(&c.to_text()).expect("own output parses");
        assert_eq!(again.to_text(), c.to_text());
        let _ = c.validate();
    }
});
