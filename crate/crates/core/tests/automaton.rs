use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reram_fsa::automaton::{
    action_of, decode_state, encode_state, krinsky_next, map_fsa_to_cells, run_krinsky,
    simulate_krinsky_rules, Action, Beta, EncodingMode, FsaSpec, KrinskyEnvironment, KrinskyRules,
    RewriteMode,
};
use reram_fsa::{Controller, Crossbar, Error, StateId, VariationProfile};

fn oracle_next(level: u8, penalty: bool) -> u8 {
    match (penalty, level) {
        (false, 1..=3) => 1,
        (false, _) => 4,
        (true, l) => l % 6 + 1,
    }
}

/// Krinsky walk computed from scratch: same environment stream, own rules.
fn oracle_walk(start: u8, pa: f64, pb: f64, steps: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = start;
    let mut out = vec![s];
    for _ in 0..steps {
        let p = if s <= 3 { pa } else { pb };
        let reward = rng.random::<f64>() < p;
        s = oracle_next(s, !reward);
        out.push(s);
    }
    out
}

fn levels(v: &[StateId]) -> Vec<u8> {
    v.iter().map(|s| s.level()).collect()
}

#[test]
fn rules_match_oracle_table() {
    for level in 1..=6 {
        let s = StateId::new(level).unwrap();
        for (beta, bit) in [(Beta::Reward, false), (Beta::Penalty, true)] {
            assert_eq!(
                krinsky_next(s, beta).unwrap().level(),
                oracle_next(level, bit)
            );
        }
    }
    assert!(action_of(StateId::S0).is_err());
    assert_eq!(action_of(StateId::S3).unwrap(), Action::A);
    assert_eq!(action_of(StateId::S4).unwrap(), Action::B);
}

#[test]
fn forced_a_reward_from_s4_is_absorbed_at_s1() {
    let env = KrinskyEnvironment {
        reward_a: 1.0,
        reward_b: 0.0,
    };
    let t = simulate_krinsky_rules(StateId::S4, &env, &KrinskyRules::default(), 8, 3).unwrap();
    assert_eq!(levels(&t.states()), vec![4, 5, 6, 1, 1, 1, 1, 1, 1]);
}

#[test]
fn zero_steps_is_an_error() {
    let env = KrinskyEnvironment {
        reward_a: 0.5,
        reward_b: 0.5,
    };
    let err = simulate_krinsky_rules(StateId::S1, &env, &KrinskyRules::default(), 0, 0);
    assert!(matches!(err, Err(Error::Config(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn crossbar_krinsky_follows_oracle(
        seed in any::<u64>(),
        start in 1u8..=6,
        pa in 0.0f64..=1.0,
        pb in 0.0f64..=1.0,
    ) {
        let env = KrinskyEnvironment { reward_a: pa, reward_b: pb };
        let mut xb = Crossbar::nominal(1, 1).unwrap();
        let mut ctl = Controller::for_crossbar(&xb, VariationProfile::disabled()).unwrap();
        xb.preset(0, 0, StateId::new(start).unwrap()).unwrap();
        let sel = xb.select(0, 0).unwrap();
        let t = run_krinsky(&mut ctl, &mut xb, &sel, &env, &KrinskyRules::default(), 200, seed).unwrap();
        prop_assert_eq!(levels(&t.states()), oracle_walk(start, pa, pb, 200, seed));
    }

    #[test]
    fn base6_matches_positional_decomposition(n in 1usize..=5000, k_frac in 0.0f64..1.0) {
        let k = ((n as f64) * k_frac) as usize;
        let mut d = 1;
        while 6usize.pow(d) < n {
            d += 1;
        }
        let expect: Vec<u8> = (0..d).rev().map(|i| ((k / 6usize.pow(i)) % 6) as u8).collect();
        let got = encode_state(k, n).unwrap();
        prop_assert_eq!(&got, &expect);
        prop_assert_eq!(decode_state(&got), k);
    }
}

#[test]
fn encoding_examples() {
    assert_eq!(encode_state(0, 36).unwrap(), vec![0, 0]);
    assert_eq!(encode_state(35, 36).unwrap(), vec![5, 5]);
    assert_eq!(encode_state(7, 36).unwrap(), vec![1, 1]);
    assert!(encode_state(36, 36).is_err());
}

fn random_spec() -> impl Strategy<Value = FsaSpec> {
    (1usize..=40, 1usize..=3).prop_flat_map(|(n, a)| {
        (
            prop::collection::vec(prop::collection::vec(0..n, a), n),
            0..n,
        )
            .prop_map(move |(delta, initial)| FsaSpec {
                state_count: n,
                alphabet: (0..a).map(|i| format!("x{i}")).collect(),
                delta,
                initial,
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fsa_on_cells_matches_table(
        spec in random_spec(),
        raw in prop::collection::vec(any::<usize>(), 0..40),
        binary in any::<bool>(),
        full in any::<bool>(),
    ) {
        let mode = if binary { EncodingMode::Binary } else { EncodingMode::Base6 };
        let rewrite = if full { RewriteMode::Full } else { RewriteMode::Partial };
        let inputs: Vec<usize> = raw.iter().map(|r| r % spec.alphabet.len()).collect();
        let mut xb = Crossbar::nominal(4, 4).unwrap();
        let mut ctl = Controller::for_crossbar(&xb, VariationProfile::disabled()).unwrap();
        let fsa = map_fsa_to_cells(&spec, &mut xb, mode, rewrite).unwrap();
        fsa.initialize(&mut ctl, &mut xb).unwrap();
        prop_assert_eq!(fsa.read_state(&mut ctl, &mut xb).unwrap(), spec.initial);
        let got = fsa.run(&mut ctl, &mut xb, &inputs).unwrap();
        let mut q = spec.initial;
        let want: Vec<usize> = inputs.iter().map(|&a| { q = spec.delta[q][a]; q }).collect();
        prop_assert_eq!(got, want);
    }
}

#[test]
fn too_large_automaton_does_not_fit() {
    let spec = FsaSpec {
        state_count: 6usize.pow(5),
        alphabet: vec!["a".into()],
        delta: (0..6usize.pow(5)).map(|s| vec![s]).collect(),
        initial: 0,
    };
    let mut xb = Crossbar::nominal(2, 2).unwrap();
    let err = map_fsa_to_cells(&spec, &mut xb, EncodingMode::Base6, RewriteMode::Partial);
    assert!(matches!(
        err,
        Err(Error::InsufficientCells {
            needed: 5,
            available: 4
        })
    ));
}
