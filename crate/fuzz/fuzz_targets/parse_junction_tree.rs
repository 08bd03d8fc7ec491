#![no_main]

use exactbp::io::{junction_tree_to_json, parse_junction_tree, parse_junction_tree_unchecked};
use exactbp::jtree::validate_junction_tree;
use exactbp::pedigree;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let net = pedigree::network();
    // The unchecked path must never panic, whatever the tree looks like.
    if let Ok(jt) = parse_junction_tree_unchecked(&net, text) {
        let _ = validate_junction_tree(&net, &jt);
    }
    if let Ok(jt) = parse_junction_tree(&net, text) {
        assert!(validate_junction_tree(&net, &jt).is_ok());
        let again = parse_junction_tree(&net, &junction_tree_to_json(&net, &jt))
            .expect("serialized tree parses");
        assert_eq!(again, jt);
    }
});
