#![no_main]

use libfuzzer_sys::fuzz_target;
use matconc::bounds::{BoundCurve, BoundKind};

fuzz_target!(|data: &[u8]| {
    let Ok(kind) = serde_json::from_slice::<BoundKind>(data) else { return };
    let curve = BoundCurve::new(kind);
    for t in [0.0, 0.5, 1.0, 10.0, 1e6] {
        if let Ok(v) = curve.eval(t) {
            assert!((0.0..=1.0).contains(&v.clamped), "clamped tail {} at t={t}", v.clamped);
        }
    }
});
