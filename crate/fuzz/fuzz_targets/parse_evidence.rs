#![no_main]

use exactbp::io::{evidence_to_json, parse_evidence};
use exactbp::pedigree;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let net = pedigree::network();
    if let Ok(ev) = parse_evidence(&net, text) {
        for (v, states) in ev.iter() {
            assert!(states.iter().all(|&s| s < net.cardinality(v)));
        }
        let again =
            parse_evidence(&net, &evidence_to_json(&net, &ev)).expect("serialized evidence parses");
        assert_eq!(again, ev);
    }
});
