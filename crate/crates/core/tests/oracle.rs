use proptest::prelude::*;
use relaycap::gauss_bounds::*;
use relaycap::oracle::*;

const TOL: f64 = 1e-9;

fn gp(p1: f64, p2: f64, n2: f64, n3: f64, q: f64) -> GaussianRelayParams<f64> {
    GaussianRelayParams::new(p1, p2, n2, n3, q).unwrap()
}

fn hp(p1r: f64, p1d: f64, p2: f64, n2: f64, n3: f64, q: f64) -> HyperSourceParams<f64> {
    HyperSourceParams::new(p1r, p1d, p2, n2, n3, q).unwrap()
}

fn term(rep: &ConstructionReport<f64>, name: &str) -> TermCheck<f64> {
    rep.terms
        .iter()
        .find(|t| t.name == name)
        .cloned()
        .unwrap_or_else(|| panic!("missing term {name}"))
}

fn assert_ok(rep: &ConstructionReport<f64>) {
    assert!(rep.ok(), "{rep:#?}");
    assert!(rep.max_diff() <= TOL);
    assert!(!rep.terms.is_empty());
}

#[test]
fn input_description_unit_parameters() {
    let rep = verify_input_description(&gp(1.0, 1.0, 1.0, 1.0, 1.0), 0.5, TOL).unwrap();
    assert_ok(&rep);
    assert_eq!(rep.terms.len(), 3);
    let rep = verify_input_description(&gp(1.0, 1.0, 1.0, 1.0, 1.0), 1.0, TOL).unwrap();
    assert_ok(&rep);
    assert!(verify_input_description(&gp(1.0, 1.0, 0.0, 1.0, 1.0), 0.5, TOL).is_err());
    assert!(verify_input_description(&gp(1.0, 1.0, 1.0, 1.0, 1.0), 0.0, TOL).is_err());
}

fn state_point(theta: f64, rho12: f64, rho1s: f64) -> StateDescParamPoint<f64> {
    let (p1r, p1d) = (8.0, 2.0);
    let fresh = (1.0 - rho12 * rho12 - rho1s * rho1s) * (1.0 - theta) * p1r;
    let alpha = fresh / (fresh + 1.0 + theta * p1r + p1d);
    StateDescParamPoint {
        p1r,
        p1d,
        theta,
        rho12,
        rho1s,
        alpha,
    }
}

#[test]
fn state_description_example() {
    let p = gp(10.0, 10.0, 1.0, 1.0, 5.0);
    let rep = verify_state_description(&p, &state_point(0.5, 0.3, -0.2), TOL).unwrap();
    assert_ok(&rep);
    assert!(rep.skipped.is_empty());
    let rep = verify_state_description(&p, &state_point(0.0, 0.3, -0.2), TOL).unwrap();
    assert_ok(&rep);
    assert!(rep.skipped.iter().any(|s| s.starts_with("description")));
    assert!(verify_state_description(&p, &state_point(0.5, 0.9, -0.9), TOL).is_err());
    assert!(verify_state_description(
        &gp(10.0, 10.0, 1.0, 1.0, 0.0),
        &state_point(0.5, 0.3, -0.2),
        TOL
    )
    .is_err());
}

#[test]
fn hyper_converse_examples() {
    let unit = hp(1.0, 1.0, 1.0, 1.0, 1.0, 1.0);
    assert_ok(&verify_hyper_converse(&unit, 0.0, 0.0, TOL).unwrap());
    let rep = verify_hyper_converse(&unit, 1.0, 0.0, TOL).unwrap();
    assert_ok(&rep);
    let private = term(&rep, "private");
    assert_eq!(private.closed_form, 0.0);
    assert!(private.oracle.abs() <= TOL);
    assert!(verify_hyper_converse(&hp(1.0, 1.0, 1.0, 1.0, 1.0, 0.0), 0.0, -0.5, TOL).is_err());
}

#[test]
fn hyper_achievability_examples() {
    let unit = hp(1.0, 1.0, 1.0, 1.0, 1.0, 1.0);
    let rep = verify_hyper_achievability(&unit, 0.5, -0.5, TOL).unwrap();
    assert_ok(&rep);
    assert!(!rep.perturbations.is_empty());
    // Moving the scale factor off its optimum strictly lowers the private rate.
    assert!(rep
        .perturbations
        .iter()
        .all(|p| p.below < p.at_optimum && p.above < p.at_optimum));
    let h = hp(2.0, 3.0, 1.0, 1.0, 2.0, 4.0);
    let rep = verify_hyper_achievability(&h, 0.0, 0.0, TOL).unwrap();
    assert_ok(&rep);
    assert!((term(&rep, "private").oracle - 0.5 * (1.0 + 3.0 / 2.0f64).log2()).abs() <= TOL);
}

#[test]
fn cutset_and_baseline_examples() {
    let unit = gp(1.0, 1.0, 1.0, 1.0, 1.0);
    assert_ok(&verify_cutset_and_baseline(&unit, 0.0, TOL).unwrap());
    let rep = verify_cutset_and_baseline(&unit, 1.0, TOL).unwrap();
    assert_ok(&rep);
    assert_eq!(term(&rep, "cutset_relay").closed_form, 0.0);
    assert!(term(&rep, "cutset_relay").oracle.abs() <= TOL);
    let rep = verify_cutset_and_baseline(&gp(2.0, 0.0, 1.0, 1.0, 0.0), 0.0, TOL).unwrap();
    assert_ok(&rep);
    assert!(
        (term(&rep, "cutset_mac").closed_form - term(&rep, "baseline_mac").closed_form).abs()
            <= 1e-12
    );
}

#[test]
fn tolerance_is_recorded_and_enforced() {
    let rep = verify_cutset_and_baseline(&gp(3.0, 2.0, 0.7, 1.3, 2.5), 0.4, 0.0).unwrap();
    assert_eq!(rep.tolerance, 0.0);
    assert_eq!(rep.pass, rep.max_diff() <= 0.0);
}

fn general() -> impl Strategy<Value = GaussianRelayParams<f64>> {
    (
        0.5f64..20.0,
        0.5f64..20.0,
        0.1f64..10.0,
        0.5f64..10.0,
        0.5f64..30.0,
    )
        .prop_map(|(a, b, c, d, e)| gp(a, b, c, d, e))
}

fn hyper() -> impl Strategy<Value = HyperSourceParams<f64>> {
    (
        0.5f64..20.0,
        0.5f64..20.0,
        0.5f64..20.0,
        0.1f64..10.0,
        0.5f64..10.0,
        0.5f64..30.0,
    )
        .prop_map(|(a, b, c, d, e, f)| hp(a, b, c, d, e, f))
}

/// Correlation pair inside the quarter disc.
fn rhos() -> impl Strategy<Value = (f64, f64)> {
    (0.0f64..1.0, 0.0f64..std::f64::consts::FRAC_PI_2)
        .prop_map(|(r, t)| (r * t.cos(), -r * t.sin()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn input_description_random(p in general(), gamma in 0.01f64..1.0) {
        let rep = verify_input_description(&p, gamma, TOL).unwrap();
        prop_assert!(rep.ok(), "{:#?}", rep);
    }

    #[test]
    fn state_description_random(
        p in general(), total in 0.05f64..1.0, split in 0.0f64..1.0, theta in 0.0f64..1.0, (r12, r1s) in rhos(), alpha in -0.5f64..1.5,
    ) {
        let pt = StateDescParamPoint { p1r: p.p1 * total * split, p1d: p.p1 * total * (1.0 - split), theta, rho12: r12, rho1s: r1s, alpha };
        match verify_state_description(&p, &pt, TOL) {
            Ok(rep) => prop_assert!(rep.ok(), "{:#?}", rep),
            Err(OracleError::Bound(BoundError::FeasibilityViolation { .. })) => prop_assume!(false),
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn hyper_converse_random(h in hyper(), (r12, r1s) in rhos()) {
        let rep = verify_hyper_converse(&h, r12, r1s, TOL).unwrap();
        prop_assert!(rep.ok(), "{:#?}", rep);
    }

    #[test]
    fn hyper_achievability_random(h in hyper(), (r12, r1s) in rhos()) {
        let rep = verify_hyper_achievability(&h, r12, r1s, TOL).unwrap();
        prop_assert!(rep.ok(), "{:#?}", rep);
    }

    #[test]
    fn cutset_and_baseline_random(p in general(), rho in 0.0f64..=1.0) {
        let rep = verify_cutset_and_baseline(&p, rho, TOL).unwrap();
        prop_assert!(rep.ok(), "{:#?}", rep);
    }
}
