#![no_main]

use libfuzzer_sys::fuzz_target;
use matconc::stein::ModelSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spec) = ModelSpec::from_json(text) else { return };
    if let Ok(model) = spec.build() {
        assert!(model.dim() >= 1);
    }
});
