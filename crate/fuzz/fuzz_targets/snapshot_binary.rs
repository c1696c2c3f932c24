#![no_main]

use greedy_rb::snapshot_io::{from_binary, to_binary};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(ts) = from_binary(data) {
        let again = from_binary(&to_binary(&ts)).expect("re-encoded snapshot parses");
        assert_eq!(again.data(), ts.data());
        assert_eq!(again.n_h(), ts.n_h());
    }
});
