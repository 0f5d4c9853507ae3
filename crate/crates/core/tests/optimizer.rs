use cvbell::bell::{chsh_form, mermin3_form, mermin4_form};
use cvbell::optimize::{optimize_bell, optimize_r_profile, Objective, OptimizerConfig, Squeezing};
use cvbell::types::SqueezedParams;

fn config(restarts: usize, seed: u64) -> OptimizerConfig {
    OptimizerConfig {
        restarts,
        seed,
        ..OptimizerConfig::default()
    }
}

#[test]
fn identical_seed_is_bit_identical() {
    let obj = Objective::Form(mermin4_form());
    let a = optimize_bell(4, Squeezing::free_default(5.0), &obj, &config(12, 9)).unwrap();
    let threaded = OptimizerConfig {
        threads: Some(1),
        ..config(12, 9)
    };
    let b = optimize_bell(4, Squeezing::free_default(5.0), &obj, &threaded).unwrap();
    assert_eq!(a, b);
    let c = optimize_bell(4, Squeezing::free_default(5.0), &obj, &config(12, 10)).unwrap();
    assert_ne!(a.restarts, c.restarts);
}

#[test]
fn result_invariants() {
    for (n, obj) in [
        (3, Objective::Form(mermin3_form())),
        (3, Objective::Zb(3)),
        (2, Objective::Zb(2)),
    ] {
        let res = optimize_bell(n, Squeezing::free_default(5.0), &obj, &config(16, 1)).unwrap();
        assert!(res.restarts.iter().all(|o| o.value <= res.best_value));
        assert!(res.best_value <= obj.algebraic_max());
        let p = SqueezedParams::new(n, res.best_r).unwrap();
        let again = obj.evaluate(&p, &res.best_settings).unwrap();
        assert!((again - res.best_value).abs() <= 1e-12);
    }
}

#[test]
fn no_violation_without_squeezing() {
    let cases = [
        (2, Objective::Form(chsh_form())),
        (3, Objective::Form(mermin3_form())),
        (4, Objective::Form(mermin4_form())),
        (2, Objective::Zb(2)),
        (3, Objective::Zb(3)),
    ];
    for (n, obj) in cases {
        let res = optimize_bell(n, Squeezing::Fixed(0.0), &obj, &config(16, 4)).unwrap();
        assert!(
            res.best_value <= obj.classical_bound() + 1e-9,
            "{}: {}",
            obj.name(),
            res.best_value
        );
        assert!(!res.r_at_bound);
    }
}

#[test]
fn complex_search_runs() {
    let cfg = OptimizerConfig {
        real_only: false,
        ..config(8, 2)
    };
    let res = optimize_bell(
        2,
        Squeezing::Fixed(-1.0),
        &Objective::Form(chsh_form()),
        &cfg,
    )
    .unwrap();
    assert!(res.best_value > 2.0);
    assert!(res.best_value <= 2.0 * 2f64.sqrt() + 1e-9);
}

#[test]
fn mermin3_limited_squeezing_interval() {
    let res = optimize_bell(
        3,
        Squeezing::Free { lo: -3.0, hi: 0.0 },
        &Objective::Form(mermin3_form()),
        &config(64, 0),
    )
    .unwrap();
    // the supremum over settings at r = -3 is 2.9998839..., confirmed by complex-settings search
    assert!(
        (res.best_value - 2.999_883_927).abs() < 1e-8,
        "{}",
        res.best_value
    );
    assert!(res.r_at_bound && res.best_r < -2.9);
}

#[test]
fn mermin3_profile_approaches_three() {
    let grid = [-0.5, -1.0, -2.0, -3.0];
    let prof =
        optimize_r_profile(3, &Objective::Form(mermin3_form()), &grid, &config(32, 0)).unwrap();
    for w in prof.windows(2) {
        assert!(w[1].1 >= w[0].1 - 1e-9, "{prof:?}");
    }
    assert!(prof[0].1 > 2.0);
    assert!(3.0 - prof[3].1 < 1e-3, "{prof:?}");
}

#[test]
fn two_mode_profile() {
    let obj = Objective::Form(chsh_form());
    let at_zero = optimize_r_profile(2, &obj, &[0.0], &config(16, 0)).unwrap();
    assert!((at_zero[0].1 - 2.0).abs() < 1e-9, "{at_zero:?}");
    let anchored = OptimizerConfig {
        anchored: true,
        ..config(32, 0)
    };
    let strong = optimize_r_profile(2, &obj, &[-2.5], &anchored).unwrap();
    assert!((strong[0].1 - 2.19).abs() < 0.005, "{strong:?}");
}

#[test]
fn rejects_bad_requests() {
    let obj = Objective::Form(mermin4_form());
    assert!(optimize_bell(3, Squeezing::Fixed(0.0), &obj, &config(4, 0)).is_err());
    assert!(optimize_bell(
        4,
        Squeezing::Free { lo: 1.0, hi: -1.0 },
        &obj,
        &config(4, 0)
    )
    .is_err());
    assert!(optimize_bell(4, Squeezing::Fixed(0.0), &obj, &config(0, 0)).is_err());
    assert!(optimize_r_profile(4, &obj, &[], &config(4, 0)).is_err());
}
