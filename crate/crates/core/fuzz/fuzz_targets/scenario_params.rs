#![no_main]

use infoflow::engine::Units;
use infoflow::sampler::Quantity;
use infoflow::scenario::{parse_params, Canonical, Dims, CANONICAL_TAGS};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _ = text.parse::<Dims>().map(|d| d.check());
    let _ = text.parse::<Quantity>();
    let _ = text.parse::<Units>();
    if let Ok(params) = parse_params(text) {
        for tag in CANONICAL_TAGS {
            if let Ok(c) = Canonical::from_tag(tag, &params) {
                let _ = c.build_with_budget(1 << 14);
            }
        }
    }
});
