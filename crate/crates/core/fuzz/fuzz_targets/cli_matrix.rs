#![no_main]

use kscert::schema::{parse_matrix, parse_vector};
use kscert::{BigRational, ShiftMeasure};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let _ = parse_vector::<f64>(text);
    if let Ok(rows) = parse_matrix::<BigRational>(text) {
        let _ = ShiftMeasure::markov(rows, None);
    }
    if let Ok(rows) = parse_matrix::<f64>(text) {
        let _ = ShiftMeasure::markov(rows, None);
    }
});
