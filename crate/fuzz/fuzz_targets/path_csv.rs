#![no_main]

use libfuzzer_sys::fuzz_target;
use lasso_corr::lasso::LassoPath;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(path) = LassoPath::parse_csv(text) {
        let top = path.lambda_max();
        for lambda in [0.0, 0.5 * top, top] {
            let beta = path.solve_at(lambda).expect("lambda in range");
            assert_eq!(beta.len(), path.p());
        }
    }
});
