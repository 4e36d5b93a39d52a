use approx::assert_abs_diff_eq;
use dnlab::muskat::{
    fit_decay, integrability_check, simulate, MuskatConfig, MuskatState, NormKey, Scheme,
};
use dnlab::{Error, Field, Grid};

fn grid() -> Grid {
    Grid::torus(32).unwrap()
}

fn coarse() -> MuskatConfig {
    MuskatConfig {
        nz: 32,
        ..MuskatConfig::default()
    }
}

#[test]
fn linear_rate_with_small_steps() {
    // the implicit part is backward Euler, so the fitted rate is biased by
    // about dt/2; a 1e-3 step keeps it inside 1e-3
    let f0 = Field::from_fn(&grid(), |x| 1e-4 * x.cos());
    let config = MuskatConfig {
        dt_max: 1e-3,
        sample_interval: 0.25,
        ..coarse()
    };
    let sim = simulate(&f0, 5.0, &config, false).unwrap();
    let fit = fit_decay(&sim.record, NormKey::L2, (0.0, 5.0)).unwrap();
    assert_abs_diff_eq!(fit.lambda, 1.0, epsilon = 1e-3);
}

#[test]
fn single_mode_decay_is_exponential() {
    let f0 = Field::from_fn(&grid(), |x| 0.1 * x.cos());
    let sim = simulate(&f0, 10.0, &coarse(), false).unwrap();
    let fit = fit_decay(&sim.record, NormKey::L2, (0.0, 10.0)).unwrap();
    assert!(fit.r2 >= 0.999, "{fit:?}");
    assert!(fit.lambda > 0.9 && fit.lambda < 1.05, "{fit:?}");
    let int = integrability_check(&sim.record);
    // ∫ π ε² e^{-2t} dt up to the tail beyond t = 10 and the nonlinear shift
    assert_abs_diff_eq!(
        int.hhalf_sq,
        0.01 * std::f64::consts::PI / 2.0,
        epsilon = 1e-3
    );
}

#[test]
fn maximum_principles() {
    let f0 = Field::from_fn(&grid(), |x| 0.3 * x.cos() + 0.1 * (3.0 * x).cos());
    let slope0 = MuskatState::new(f0.clone()).lipschitz();
    let sim = simulate(&f0, 10.0, &coarse(), true).unwrap();
    let mut prev = f64::INFINITY;
    for s in &sim.snapshots {
        let sup = s.sup_norm();
        assert!(sup <= prev + 1e-6 * 0.4);
        assert!(s.lipschitz() <= slope0 * (1.0 + 1e-3));
        prev = sup;
    }
    assert!(sim.flags.l2_monotone);
    assert!(sim.flags.mean_error <= 1e-9);
}

#[test]
fn mean_is_conserved_for_shifted_data() {
    let f0 = Field::from_fn(&grid(), |x| 1.5 + 0.2 * (2.0 * x).sin());
    let sim = simulate(&f0, 2.0, &coarse(), false).unwrap();
    assert_abs_diff_eq!(sim.final_state.mean(), 1.5, epsilon = 1e-12);
}

#[test]
fn oversized_explicit_steps_are_caught() {
    let f0 = Field::from_fn(&grid(), |x| 0.3 * x.cos() + 0.05 * (12.0 * x).cos());
    let config = MuskatConfig {
        scheme: Scheme::Rk4,
        dt_max: 1.0,
        cfl: 100.0,
        sample_interval: 1.0,
        auto_depth: false,
        ..coarse()
    };
    let err = simulate(&f0, 5.0, &config, false).unwrap_err();
    assert!(matches!(err, Error::StabilityViolation { .. }), "{err}");
}

#[test]
fn zero_data_stays_zero() {
    let f0 = Field::zeros(&grid());
    let sim = simulate(&f0, 1.0, &coarse(), false).unwrap();
    assert_eq!(sim.final_state.f.sup_norm(), 0.0);
    let int = integrability_check(&sim.record);
    assert_eq!((int.hhalf_sq, int.dtf_sq), (0.0, 0.0));
}
