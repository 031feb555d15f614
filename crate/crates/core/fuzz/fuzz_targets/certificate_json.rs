#![no_main]

use kscert::certifier::{from_json, to_json};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(cert) = from_json(text) {
        let again = from_json(&to_json(&cert)).expect("rendered certificate parses");
        assert_eq!(again, cert);
    }
});
