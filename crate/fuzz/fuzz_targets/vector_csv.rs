#![no_main]

use libfuzzer_sys::fuzz_target;
use lasso_corr::design::{parse_vector_csv, vector_to_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(v) = parse_vector_csv(text) {
        assert_eq!(parse_vector_csv(&vector_to_csv(&v)).unwrap(), v);
    }
});
