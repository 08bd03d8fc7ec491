#![no_main]

use exactbp::io::{network_to_json, parse_network};
use exactbp::model::validate_network;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(net) = parse_network(text) {
        assert!(validate_network(&net).is_ok());
        let again = parse_network(&network_to_json(&net)).expect("serialized network parses");
        assert_eq!(again, net);
    }
});
