#![no_main]

//! Exact literals survive `num/den` rendering; float parsing never panics.

use kscert::numeric::{format_rational, parse_rational};
use kscert::Scalar;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(x) = parse_rational(text) {
        assert_eq!(parse_rational(&format_rational(&x)).unwrap(), x);
    }
    let _ = <f64 as Scalar>::parse_literal(text);
});
