#![no_main]

use libfuzzer_sys::fuzz_target;
use swnet::harness::SelectionOrder;
use swnet::metrics::MessageMode;
use swnet::routing::NavigationLevel;
use swnet::topology::{InterlacingScheme, NetworkKind};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    let _ = s.parse::<MessageMode>();
    let _ = s.parse::<NetworkKind>();
    let _ = s.parse::<NavigationLevel>();
    let _ = s.parse::<InterlacingScheme>();
    let _ = s.parse::<SelectionOrder>();
});
