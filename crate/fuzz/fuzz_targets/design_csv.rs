#![no_main]

use libfuzzer_sys::fuzz_target;
use lasso_corr::design::DesignMatrix;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(design) = DesignMatrix::parse_csv(text) {
        let again = DesignMatrix::parse_csv(&design.to_csv_string()).expect("written designs parse");
        assert_eq!(again, design);
    }
});
