#![no_main]

use greedy_rb::snapshot_io::{from_csv, to_csv};
use greedy_rb::SpaceSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(ts) = from_csv(data, SpaceSpec::l2()) {
        let bytes = to_csv(&ts).expect("parsed snapshot encodes");
        let again = from_csv(&bytes, SpaceSpec::l2()).expect("re-encoded snapshot parses");
        assert_eq!(again.data(), ts.data());
    }
});
