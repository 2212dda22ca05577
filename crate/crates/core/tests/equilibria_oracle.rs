mod common;

use common::{newton_endemic, random_params, starts};
use dengue_nonlocal::equilibria::{
    basic_reproduction_number, endemic_equilibrium, regime_classify, relation_residuals, rhs_residual, Regime,
};
use dengue_nonlocal::model::{bound_vector, ModelParams};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

#[test]
fn closed_form_matches_newton_on_random_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut endemic, mut below) = (0, 0);
    for i in 0..1000 {
        let p = random_params(&mut rng);
        let r0 = basic_reproduction_number(&p);
        let closed = endemic_equilibrium(&p);
        let oracle = starts(&p, 32, i).into_iter().find_map(|s| newton_endemic(&p, s));
        assert_eq!(closed.is_some(), r0 > 1.0, "draw {i}");
        assert_eq!(oracle.is_some(), r0 > 1.0, "draw {i}: R0 = {r0}");
        if let (Some(c), Some(o)) = (closed, oracle) {
            endemic += 1;
            for k in 0..3 {
                assert!(rel(c[k], o[k]) <= 1e-10, "draw {i} component {k}: {c:?} vs {o:?}");
            }
            assert!(relation_residuals(&p, c).iter().all(|r| *r <= 1e-12));
        } else {
            below += 1;
        }
    }
    assert!(endemic > 100 && below > 100, "{endemic} / {below}");
}

#[test]
fn positive_root_is_unique() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 20 {
        let p = random_params(&mut rng);
        let Some(u) = endemic_equilibrium(&p) else { continue };
        checked += 1;
        for s in starts(&p, 32, checked) {
            if let Some(root) = newton_endemic(&p, s) {
                for k in 0..3 {
                    assert!(rel(root[k], u[k]) <= 1e-10);
                }
            }
        }
    }
}

#[test]
fn endemic_state_lies_inside_box() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let p = random_params(&mut rng);
        if let Some(u) = endemic_equilibrium(&p) {
            let m = bound_vector(&p);
            for k in 0..3 {
                assert!(u[k] > 0.0 && u[k] < m[k]);
            }
        }
    }
}

#[test]
fn sweep_over_beta_m_crosses_all_regimes() {
    let base = common::worked_params();
    let labels: Vec<Regime> = [0.5, 1.0, 4.0]
        .iter()
        .map(|v| regime_classify(&base.with("beta_m", *v).unwrap()))
        .collect();
    assert_eq!(labels, [Regime::BelowThreshold, Regime::NewRegime, Regime::OldRegime]);
}

proptest! {
    #[test]
    fn closed_form_satisfies_relations(seed in any::<u64>()) {
        let p = random_params(&mut ChaCha8Rng::seed_from_u64(seed));
        if let Some(u) = endemic_equilibrium(&p) {
            prop_assert!(relation_residuals(&p, u).iter().all(|r| *r <= 1e-12));
            let scale = [p.mu_m * u[0], p.h, p.rho_h() * u[2]];
            let res = rhs_residual(u, &p);
            for k in 0..3 {
                prop_assert!(res[k] <= 1e-12 * scale[k].max(1.0));
            }
        }
    }

    #[test]
    fn r0_scales_with_square_root_of_recruitment(seed in any::<u64>(), f in 0.1f64..10.0) {
        let p = random_params(&mut ChaCha8Rng::seed_from_u64(seed));
        let q = ModelParams { a: p.a * f, ..p };
        let ratio = basic_reproduction_number(&q) / basic_reproduction_number(&p);
        prop_assert!((ratio - f.sqrt()).abs() <= 1e-12 * f.sqrt());
    }
}
