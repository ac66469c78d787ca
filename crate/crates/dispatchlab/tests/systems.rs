use dispatchlab::system::{ten_gen_system, two_gen_system, validate, SystemSpec, Violation, TEN_GEN_TABLE};
use dispatchlab::{DispatchError, DispatchState, PenaltyConfig};
use proptest::prelude::*;

#[test]
fn ten_gen_matches_table() {
    let sys = ten_gen_system();
    assert_eq!(sys.len(), 10);
    assert_eq!(sys.total_capacity(), 2561.0);
    assert_eq!(sys.total_ramp_up(), 120.0);
    assert_eq!(sys.max_cost(), 185.0);
    for (g, &(cost, cap, ramp)) in sys.generators.iter().zip(&TEN_GEN_TABLE) {
        assert_eq!((g.cost, g.g_max, g.ramp_up, g.ramp_down, g.g_min), (cost, cap, ramp, ramp, 0.0));
    }
    assert!(validate(&sys).is_empty());
}

#[test]
fn json_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for sys in [two_gen_system(), ten_gen_system()] {
        let path = dir.path().join(format!("{}.json", sys.name));
        std::fs::write(&path, sys.to_json()).unwrap();
        let back = SystemSpec::resolve(path.to_str().unwrap()).unwrap();
        assert_eq!(back, sys);
        assert_eq!(back.fingerprint(), sys.fingerprint());
    }
}

#[test]
fn invalid_json_file_lists_violations() {
    let mut sys = two_gen_system();
    sys.generators[1].g_min = 600.0;
    sys.generators[1].name = "G1".into();
    match SystemSpec::from_json(&sys.to_json()) {
        Err(DispatchError::InvalidSystem(v)) => {
            assert!(v.contains(&Violation::MinAboveMax { generator: 1 }));
            assert!(v.contains(&Violation::DuplicateName { generator: 1 }));
        }
        other => panic!("{other:?}"),
    }
    assert!(SystemSpec::resolve("/nonexistent/system.json").is_err());
}

#[test]
fn penalty_must_exceed_costs() {
    let sys = ten_gen_system();
    assert!(PenaltyConfig::default().check(&sys).is_ok());
    assert!(PenaltyConfig { rho_s: 185.0 }.check(&sys).is_err());
}

#[test]
fn state_shape_checked() {
    let sys = two_gen_system();
    assert!(DispatchState::new(vec![0.0]).check(&sys).is_err());
    assert!(DispatchState::new(vec![0.0, 501.0]).check(&sys).is_err());
    assert!(DispatchState::new(vec![0.0, 500.0]).check(&sys).is_ok());
}

#[derive(Debug, Clone)]
enum Corruption {
    NegativeMin(f64),
    MinAboveMax(f64),
    RampUp(f64),
    RampDown(f64),
    NonFinite(usize),
    Duplicate,
}

fn corruption() -> impl Strategy<Value = Corruption> {
    prop_oneof![
        (-1e4f64..-1e-3).prop_map(Corruption::NegativeMin),
        (1e-3f64..1e4).prop_map(Corruption::MinAboveMax),
        (-1e3f64..=0.0).prop_map(Corruption::RampUp),
        (-1e3f64..=0.0).prop_map(Corruption::RampDown),
        (0usize..5).prop_map(Corruption::NonFinite),
        Just(Corruption::Duplicate),
    ]
}

proptest! {
    #[test]
    fn every_corruption_is_reported(gen in 1usize..10, c in corruption(), nan in any::<bool>()) {
        let mut sys = ten_gen_system();
        let g = &mut sys.generators[gen];
        let expect = match c {
            Corruption::NegativeMin(v) => { g.g_min = v; Violation::NegativeMin { generator: gen } }
            Corruption::MinAboveMax(v) => { g.g_min = g.g_max + v; Violation::MinAboveMax { generator: gen } }
            Corruption::RampUp(v) => { g.ramp_up = v; Violation::NonPositiveRampUp { generator: gen } }
            Corruption::RampDown(v) => { g.ramp_down = v; Violation::NonPositiveRampDown { generator: gen } }
            Corruption::NonFinite(k) => {
                let bad = if nan { f64::NAN } else { f64::INFINITY };
                let field = ["g_min", "g_max", "ramp_up", "ramp_down", "cost"][k];
                *[&mut g.g_min, &mut g.g_max, &mut g.ramp_up, &mut g.ramp_down, &mut g.cost][k] = bad;
                Violation::NonFinite { generator: gen, field }
            }
            Corruption::Duplicate => { g.name = "G1".into(); Violation::DuplicateName { generator: gen } }
        };
        let v = validate(&sys);
        prop_assert!(v.contains(&expect), "{:?} not in {:?}", expect, v);
        let only_this_unit = v.iter().all(|x| match x {
            Violation::NoGenerators | Violation::ZeroInterval => false,
            Violation::NonFinite { generator, .. }
            | Violation::NegativeMin { generator }
            | Violation::MinAboveMax { generator }
            | Violation::NonPositiveRampUp { generator }
            | Violation::NonPositiveRampDown { generator }
            | Violation::DuplicateName { generator } => *generator == gen,
        });
        prop_assert!(only_this_unit, "{:?}", v);
    }

    #[test]
    fn valid_random_systems_round_trip(specs in prop::collection::vec((1.0f64..500.0, 0.1f64..1.0, 1.0f64..200.0), 1..8)) {
        let sys = SystemSpec {
            name: "random".into(),
            interval_minutes: 5,
            generators: specs
                .iter()
                .enumerate()
                .map(|(i, &(cap, frac, cost))| dispatchlab::GeneratorSpec::new(format!("U{i}"), cap, frac * cap, cost))
                .collect(),
        };
        prop_assert!(validate(&sys).is_empty());
        prop_assert_eq!(SystemSpec::from_json(&sys.to_json()).unwrap(), sys);
    }
}

#[test]
fn empty_and_zero_interval() {
    let sys = SystemSpec { name: String::new(), interval_minutes: 0, generators: vec![] };
    assert_eq!(validate(&sys), vec![Violation::NoGenerators, Violation::ZeroInterval]);
}
