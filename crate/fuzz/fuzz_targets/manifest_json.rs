#![no_main]

use libfuzzer_sys::fuzz_target;
use lasso_corr::cli::RunManifest;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _ = RunManifest::from_json(text);
});
