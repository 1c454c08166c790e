#![no_main]

use libfuzzer_sys::fuzz_target;
use matconc::verify::{replay, CaseInputs, WorstCase};

fuzz_target!(|data: &[u8]| {
    if let Ok(case) = serde_json::from_slice::<WorstCase>(data) {
        if let Ok(out) = replay(&case) {
            assert_eq!(out.inequality, case.inputs.inequality());
        }
    } else if let Ok(inputs) = serde_json::from_slice::<CaseInputs>(data) {
        let _ = inputs.evaluate();
    }
});
