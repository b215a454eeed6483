#![no_main]

use libfuzzer_sys::fuzz_target;
use mirror_accel::algorithms::GammaSchedule;
use mirror_accel::harness::{parse_algorithms, LrSource, ObjectiveSpec, Preset, Settings, StepPolicy};
use mirror_accel::ode::SystemKind;

// First byte picks the parser, the rest is the flag value.
fuzz_target!(|data: &[u8]| {
    let Some((&which, rest)) = data.split_first() else { return };
    let Ok(value) = std::str::from_utf8(rest) else { return };
    match which % 8 {
        0 => {
            if let Ok(p) = value.parse::<StepPolicy>() {
                assert_eq!(p.to_string().parse::<StepPolicy>().ok(), Some(p));
            }
        }
        1 => {
            let _ = value.parse::<GammaSchedule>();
        }
        2 => {
            if let Ok(algs) = parse_algorithms(value) {
                assert!(!algs.is_empty() && algs.windows(2).all(|w| w[0] < w[1]));
            }
        }
        3 => {
            let _ = value.parse::<LrSource>();
        }
        4 => {
            let _ = value.parse::<ObjectiveSpec>();
        }
        5 => {
            let _ = value.parse::<Preset>();
        }
        6 => {
            let _ = value.parse::<SystemKind>();
        }
        _ => {
            if let Some((key, v)) = value.split_once('=') {
                let _ = Settings::default().set(key, v);
            }
        }
    }
});
