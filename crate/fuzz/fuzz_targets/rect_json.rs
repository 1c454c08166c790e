#![no_main]

use libfuzzer_sys::fuzz_target;
use matconc::matcore::dilation;
use matconc::RectMatrix;

fuzz_target!(|data: &[u8]| {
    let Ok(b) = serde_json::from_slice::<RectMatrix>(data) else { return };
    let h = dilation(&b);
    assert_eq!(h.dim(), b.rows() + b.cols());
    let ev = h.eigenvalues();
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    assert!((lo + hi).abs() <= 1e-8 * (1.0 + hi.abs()), "dilation spectrum not symmetric: {lo} {hi}");
});
