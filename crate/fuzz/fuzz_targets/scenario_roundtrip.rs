#![no_main]

use libfuzzer_sys::fuzz_target;

use fairmac::Scenario;

// Anything that parses must print back to text that parses to the same scenario.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(scenario) = Scenario::parse(text) {
        let printed = scenario.to_string();
        let again = Scenario::parse(&printed).expect("printed scenario parses");
        assert_eq!(scenario, again);
    }
});
