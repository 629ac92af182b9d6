#![no_main]

use infoflow::system::{Alphabets, TrajectoryLayout};
use libfuzzer_sys::fuzz_target;

// Byte 0 picks the horizon, bytes 1..6 the alphabet sizes; the rest are
// symbols to encode and then decode.
fuzz_target!(|data: &[u8]| {
    if data.len() < 6 {
        return;
    }
    let size = |b: u8| usize::from(b % 5);
    let alphabets = Alphabets {
        message: size(data[1]),
        input: size(data[2]),
        output: size(data[3]),
        state: size(data[4]),
        feedback: size(data[5]),
    };
    let horizon = usize::from(data[0] % 8);
    let Ok(layout) = TrajectoryLayout::new(horizon, alphabets) else {
        return;
    };
    let symbols: Vec<usize> = data[6..].iter().map(|&b| usize::from(b)).collect();
    if let Ok(index) = layout.index(&symbols) {
        assert!(index < layout.count());
        assert_eq!(layout.symbols(index).unwrap(), symbols);
    }
});
