use vlock_core::linear::m_star;
use vlock_core::model::{LinearParams, Params, RationalSpeed};
use vlock_core::regions::c_bounds;
use vlock_core::sim::{classify_speed, simulate_speed, SimConfig};
use vlock_core::sweeps::{linspace, staircase};

fn quick(sites: usize) -> SimConfig {
    SimConfig {
        lattice_size: sites,
        transient_generations: 3000,
        measure_generations: 3000,
        ..SimConfig::default()
    }
}

#[test]
fn lattice_size_does_not_change_the_speed() {
    for (m, c) in [(0.2, 0.3), (0.35, 0.4), (0.5, 0.4), (0.7, 0.5)] {
        let params = Params::new(1.2, m, c).unwrap();
        let small = simulate_speed(&params, &quick(150)).unwrap();
        let large = simulate_speed(&params, &quick(300)).unwrap();
        assert_eq!(small.shift_count, large.shift_count, "m={m} c={c}");
    }
}

#[test]
fn band_interior_locks() {
    let r = 1.2;
    for (p, q) in [(1, 2), (1, 3), (2, 5)] {
        let s = RationalSpeed::new(p, q).unwrap();
        for frac in [0.4, 0.7] {
            let lp = LinearParams::new(r, m_star(r, s).unwrap().m * frac).unwrap();
            let b = c_bounds(&lp, s).unwrap();
            let c = 0.5 * (b.c_min + b.c_max);
            assert!(c <= 1.0 / r);
            let params = Params::from_linear(lp, c).unwrap();
            let cfg = quick(200);
            let meas = simulate_speed(&params, &cfg).unwrap();
            assert!(
                classify_speed(&meas, s, cfg.default_tolerance()).unwrap(),
                "{p}/{q} frac {frac}: {meas:?}"
            );
        }
    }
}

#[test]
fn far_above_band_does_not_lock() {
    let r = 1.2;
    let s = RationalSpeed::new(1, 3).unwrap();
    let lp = LinearParams::new(r, m_star(r, s).unwrap().m * 0.3).unwrap();
    let b = c_bounds(&lp, s).unwrap();
    let c = 2.5 * b.c_max;
    assert!(c <= 1.0 / r);
    let cfg = quick(200);
    let meas = simulate_speed(&Params::from_linear(lp, c).unwrap(), &cfg).unwrap();
    assert!(
        !classify_speed(&meas, s, cfg.default_tolerance()).unwrap(),
        "{meas:?}"
    );
    assert!(meas.measured_speed < s.value());
}

#[test]
fn staircase_is_nondecreasing() {
    let cfg = quick(150);
    let grid = linspace(0.05, 0.8, 40);
    let points = staircase(1.2, 0.4, &grid, &cfg);
    let speeds: Vec<f64> = points
        .iter()
        .map(|p| p.speed().expect("simulation failed"))
        .collect();
    assert!(speeds.iter().all(|s| (0.0..=1.0).contains(s)));
    let slack = 2.0 / cfg.measure_generations as f64;
    assert!(
        speeds.windows(2).all(|w| w[1] >= w[0] - slack),
        "{speeds:?}"
    );
}

#[test]
fn invalid_configs_are_rejected() {
    let params = Params::new(1.2, 0.3, 0.4).unwrap();
    assert!(simulate_speed(
        &params,
        &SimConfig {
            lattice_size: 10,
            ..quick(200)
        }
    )
    .is_err());
    assert!(simulate_speed(
        &params,
        &SimConfig {
            measure_generations: 0,
            ..quick(200)
        }
    )
    .is_err());
}
