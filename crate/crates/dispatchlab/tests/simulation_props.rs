use dispatchlab::equivalence::random_instance;
use dispatchlab::policies::{self, build, Objective, PolicyConfig};
use dispatchlab::simulator::{clairvoyant_lower_bound, run, security_loss};
use dispatchlab::system::{two_gen_system, NetLoadProfile, PenaltyConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn policy() -> impl Strategy<Value = PolicyConfig> {
    prop_oneof![
        (0usize..5).prop_map(PolicyConfig::laed),
        (1u32..16, any::<bool>(), any::<bool>()).prop_map(|(mask, inc, roll)| {
            let d: Vec<usize> = (1..=4).filter(|d| mask & (1 << (d - 1)) != 0).collect();
            let mut c = PolicyConfig::rp(&d);
            c.increment_constraints = inc;
            c.rolling_difference_constraints = roll;
            c
        }),
    ]
}

/// Two-unit profiles above 550 MW: the slow unit (50 MW/interval down,
/// 500 MW max) can then never force over-generation, which the model has no
/// curtailment variable to absorb.
fn profile() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(550.0f64..1200.0, 1..30)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn rolling_runs_respect_bounds(values in profile(), cfg in policy()) {
        let sys = two_gen_system();
        let prof = NetLoadProfile::new(values).unwrap();
        let init = policies::initial_state(&sys, &prof, PenaltyConfig::default()).unwrap();
        let r = run(&sys, &prof, &cfg, &init).unwrap();
        prop_assert_eq!(r.steps.len(), prof.len());
        prop_assert!(r.total_loss_mwh >= 0.0);
        prop_assert!((r.total_loss_mwh - security_loss(&r)).abs() < 1e-12);
        let direct: f64 = r.steps.iter().map(|s| s.shed.max(0.0)).sum::<f64>() / 12.0;
        prop_assert!((r.total_loss_mwh - direct).abs() < 1e-9);
        let lb = clairvoyant_lower_bound(&sys, &prof, &init).unwrap();
        prop_assert!(r.total_loss_mwh >= lb - 1e-6, "loss {} below bound {}", r.total_loss_mwh, lb);
        prop_assert_eq!(run(&sys, &prof, &cfg, &init).unwrap(), r);
    }

    #[test]
    fn shedding_only_without_deliverable_headroom(values in profile(), cfg in policy()) {
        prop_assume!(!cfg.rolling_difference_constraints);
        let sys = two_gen_system();
        let prof = NetLoadProfile::new(values).unwrap();
        let init = policies::initial_state(&sys, &prof, PenaltyConfig::default()).unwrap();
        let r = run(&sys, &prof, &cfg, &init).unwrap();
        let mut prev = init.prev_output.clone();
        for s in &r.steps {
            if s.shed > 1e-6 {
                for ((g, &x), &p) in sys.generators.iter().zip(&s.committed_output).zip(&prev) {
                    let limit = g.g_max.min(p + g.ramp_up);
                    prop_assert!((x - limit).abs() < 1e-6, "step {}: {} at {x}, limit {limit}", s.t, g.name);
                }
            }
            prev = s.committed_output.clone();
        }
    }
}

#[test]
fn rolling_rows_can_trade_shed_for_headroom() {
    // Shedding at τ = 0 frees up-headroom that the rolling-difference row
    // credits one-for-one against later shed, saving the energy cost.
    let sys = two_gen_system();
    let prof = NetLoadProfile::new(vec![1136.8, 550.0, 550.0, 550.0, 1155.4]).unwrap();
    let init = policies::initial_state(&sys, &prof, PenaltyConfig::default()).unwrap();
    let cfg = PolicyConfig::rp(&[1, 4]).with_rolling_difference();
    let r = run(&sys, &prof, &cfg, &init).unwrap();
    let s0 = &r.steps[0];
    assert!(s0.shed > 136.8 + 1e-3 && s0.committed_output[0] < 500.0 - 1e-3, "{s0:?}");
    let plain = run(&sys, &prof, &PolicyConfig::rp(&[1, 4]), &init).unwrap();
    assert!((plain.steps[0].shed - 136.8).abs() < 1e-6);
}

#[test]
fn random_step_lps_solve_to_optimality() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut rejected, mut rp_infeasible) = (0, 0);
    for k in 0..1000 {
        let (inst, r) = random_instance(&mut rng, 4, 4);
        rejected += r;
        let w = inst.window();
        let laed = build(&inst.system, &inst.state, &inst.forecast, &PolicyConfig::laed(w), Objective::Economic).unwrap();
        assert!(laed.solve().is_ok(), "draw {k}: LAED not optimal");
        let mask: u32 = rng.gen_range(1..(1u32 << w));
        let d: Vec<usize> = (1..=w).filter(|d| mask & (1 << (d - 1)) != 0).collect();
        let mut cfg = PolicyConfig::rp(&d).with_window(w);
        cfg.increment_constraints = rng.gen();
        cfg.rolling_difference_constraints = rng.gen();
        let rp = build(&inst.system, &inst.state, &inst.forecast, &cfg, Objective::Economic).unwrap();
        match rp.solve() {
            Ok(_) => {}
            Err(dispatchlab::DispatchError::Solve(lpcore::Status::Infeasible)) => rp_infeasible += 1,
            Err(e) => panic!("draw {k}: {e}"),
        }
    }
    assert_eq!(rp_infeasible, 0, "RP infeasible where LAED is feasible");
    assert!(rejected < 1000, "generator rejects too often: {rejected}");
}
