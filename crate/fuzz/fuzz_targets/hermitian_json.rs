#![no_main]

use libfuzzer_sys::fuzz_target;
use matconc::HermitianMatrix;

fuzz_target!(|data: &[u8]| {
    let Ok(h) = serde_json::from_slice::<HermitianMatrix>(data) else { return };
    let ev = h.eigenvalues();
    assert_eq!(ev.len(), h.dim());
    let back: HermitianMatrix = serde_json::from_str(&serde_json::to_string(&h).unwrap()).unwrap();
    assert_eq!(back, h);
});
