#![no_main]

use kscert::schema::{parse_scenario, render_scenario, LoadedSpec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let Ok(loaded) = parse_scenario(text) else {
        return;
    };
    let rendered = match &loaded.spec {
        LoadedSpec::Rational(spec) => render_scenario(spec, loaded.budget),
        LoadedSpec::Float(spec) => render_scenario(spec, loaded.budget),
    };
    let again = parse_scenario(&rendered).expect("rendered scenario parses");
    assert_eq!(again, loaded);
});
