#![no_main]

use libfuzzer_sys::fuzz_target;
use swnet::topology::Network;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // keep lattices small enough that building adjacency stays cheap
    if text.len() > 1 << 16 {
        return;
    }
    if let Ok(net) = Network::from_text(text) {
        let again = Network::from_text(&net.to_text()).expect("own output parses");
        assert_eq!(again.to_text(), net.to_text());
    }
});
