#![no_main]

use libfuzzer_sys::fuzz_target;
use lasso_corr::correlation::CorrelationProfile;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(profile) = CorrelationProfile::from_json(text) {
        assert!(profile.k_upper.windows(2).all(|w| w[1] <= w[0]));
        let json = profile.to_json().expect("serializable");
        CorrelationProfile::from_json(&json).expect("roundtrip");
    }
});
