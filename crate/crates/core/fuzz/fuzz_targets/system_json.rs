#![no_main]

use infoflow::system::{parse_system, validate_system_with_budget, SystemFile};
use libfuzzer_sys::fuzz_target;

const BUDGET: u64 = 1 << 16;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(spec) = parse_system(text, BUDGET) else {
        return;
    };
    if validate_system_with_budget(spec.clone(), BUDGET).is_ok() {
        // accepted specs survive a round trip through the table form
        let json = SystemFile::from_spec(&spec).to_json().unwrap();
        assert_eq!(parse_system(&json, BUDGET).unwrap(), spec);
    }
});
