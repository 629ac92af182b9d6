#![no_main]

use infoflow::cli::SweepAxis;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(axis) = text.parse::<SweepAxis>() {
        if axis.steps <= 1 << 12 {
            let values = axis.values();
            assert_eq!(values.len(), axis.steps);
            assert_eq!(values[0], axis.start);
        }
    }
});
