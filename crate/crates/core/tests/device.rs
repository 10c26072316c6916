use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reram_fsa::device::{V_READ, V_SET};
use reram_fsa::{
    AdcConfig, CellDevice, Error, PulseSpec, StateId, StateTable, VariationMode, VariationProfile,
};

fn formed(seed: u64) -> CellDevice {
    let table = StateTable::default();
    let mut cell = CellDevice::nominal(seed);
    cell.apply_set(&table, &PulseSpec::set(10.0)).unwrap();
    cell
}

proptest! {
    #[test]
    fn reset_never_lowers_the_state(widths in prop::collection::vec(0.5f64..150.0, 1..12)) {
        let table = StateTable::default();
        let adc = AdcConfig::from_table(&table).unwrap();
        let off = VariationProfile::disabled();
        let mut cell = formed(0);
        let mut last = (cell.state(), adc.quantize(cell.read_current(&table, V_READ, &off).unwrap()));
        for w in widths {
            cell.apply_reset(&table, &PulseSpec::reset(w)).unwrap();
            let now = (cell.state(), adc.quantize(cell.read_current(&table, V_READ, &off).unwrap()));
            prop_assert!(now.0 >= last.0);
            prop_assert!(now.1 >= last.1);
            last = now;
        }
    }

    #[test]
    fn reads_do_not_disturb(seed in any::<u64>(), level in 1u8..=6, reads in 1usize..50) {
        let table = StateTable::default();
        let s = StateId::new(level).unwrap();
        let mut cell = formed(seed);
        cell.apply_reset(&table, &PulseSpec::reset(table.reset_width_ns(s))).unwrap();
        let exposure = cell.reset_exposure_ns();
        let profile = VariationProfile::c2c_only();
        for _ in 0..reads {
            cell.read_current(&table, V_READ, &profile).unwrap();
        }
        prop_assert_eq!(cell.state(), s);
        prop_assert_eq!(cell.reset_exposure_ns(), exposure);
    }

    #[test]
    fn set_returns_to_s0_from_anywhere(level in 1u8..=6) {
        let table = StateTable::default();
        let s = StateId::new(level).unwrap();
        let mut cell = formed(1);
        cell.apply_reset(&table, &PulseSpec::reset(table.reset_width_ns(s))).unwrap();
        cell.apply_set(&table, &PulseSpec::set(10.0)).unwrap();
        prop_assert_eq!(cell.state(), StateId::S0);
        prop_assert_eq!(cell.reset_exposure_ns(), 0.0);
    }
}

#[test]
fn multipliers_stay_inside_bounds() {
    for mode in [
        VariationMode::TruncatedGaussian,
        VariationMode::UniformAtBound,
    ] {
        let profile = VariationProfile::default().with_mode(mode);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for s in StateId::ALL {
            let b = profile.bound_for(s);
            for _ in 0..10_000 {
                let m = profile.draw_multiplier(s, &mut rng);
                assert!((m - 1.0).abs() <= b + 1e-12, "{s}: {m} outside ±{b}");
            }
        }
    }
}

#[test]
fn short_set_and_wrong_amplitude_are_rejected() {
    let table = StateTable::default();
    let mut cell = formed(0);
    assert!(matches!(
        cell.apply_set(&table, &PulseSpec::set(9.0)),
        Err(Error::PulseTooShort { .. })
    ));
    let bad = PulseSpec {
        amplitude_v: V_SET,
        ..PulseSpec::reset(30.0)
    };
    assert!(matches!(
        cell.apply_reset(&table, &bad),
        Err(Error::WrongAmplitude { .. })
    ));
    assert_eq!(cell.state(), StateId::S0);
}
