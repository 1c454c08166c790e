#![no_main]

use libfuzzer_sys::fuzz_target;
use matconc_cli::config::*;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(obj) = parse_object(text, "fuzz") else { return };
    if let Ok(c) = resolve::<BoundConfig>(obj.clone()) {
        let _ = c.t.points();
    }
    if let Ok(c) = resolve::<VerifyConfig>(obj.clone()) {
        let _ = c.validate();
    }
    if let Ok(c) = resolve::<FuzzConfig>(obj.clone()) {
        let _ = c.settings();
    }
    if let Ok(c) = resolve::<ConjectureConfig>(obj.clone()) {
        let _ = c.settings();
    }
    let _ = resolve::<CoupleConfig>(obj.clone());
    let _ = resolve::<TailConfig>(obj.clone());
    let _ = resolve::<ReplayConfig>(obj);
});
