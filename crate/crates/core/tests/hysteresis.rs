use hysterobeam::hysteresis::{bw_rate, chi_max, solve_abar_for_chimax};
use hysterobeam::BoucWenParams;
use proptest::prelude::*;

/// The law is rate independent, so a curvature history is followed in the
/// curvature variable itself: dz/dchi = A - alpha sign(dchi z)|z|^n - beta|z|^n.
fn sweep(p: &BoucWenParams, z: &mut f64, from: f64, to: f64, steps: usize) -> f64 {
    let d = (to - from) / steps as f64;
    let dir = d.signum();
    let slope = |z: f64| p.rate(z, dir) * dir;
    let mut area = 0.0;
    for _ in 0..steps {
        let z0 = *z;
        let k1 = slope(z0);
        let k2 = slope(z0 + 0.5 * d * k1);
        let k3 = slope(z0 + 0.5 * d * k2);
        let k4 = slope(z0 + d * k3);
        *z = z0 + d / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        area += 0.5 * (z0 + *z) * d;
    }
    area
}

/// Work per cycle `closed integral of z dchi` on the settled loop of amplitude `a`.
fn loop_area(p: &BoucWenParams, a: f64) -> f64 {
    let n = 20_000;
    let mut z = 0.0;
    sweep(p, &mut z, 0.0, a, n);
    for _ in 0..3 {
        sweep(p, &mut z, a, -a, 2 * n);
        sweep(p, &mut z, -a, a, 2 * n);
    }
    sweep(p, &mut z, a, -a, 2 * n) + sweep(p, &mut z, -a, a, 2 * n)
}

fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[test]
fn small_amplitude_loop_area_follows_the_power_law() {
    for p in [
        BoucWenParams::new(0.065, 0.8, 0.5, 0.5, 3000.0).unwrap(),
        BoucWenParams::new(608.9, 0.8, 0.5, 1.5, 0.3).unwrap(),
        BoucWenParams::new(1.0, 0.6, 0.2, 1.0, 1.0).unwrap(),
    ] {
        let cm = chi_max(&p);
        let amps: Vec<f64> = (0..6)
            .map(|k| cm / 100.0 * 10f64.powf(k as f64 / 5.0))
            .collect();
        let areas: Vec<f64> = amps.iter().map(|&a| loop_area(&p, a)).collect();
        let slope = loglog_slope(&amps, &areas);
        assert!(areas.iter().all(|&w| w > 0.0));
        assert!(
            (slope - (p.n_h() + 2.0)).abs() < 0.1,
            "n_h = {}: slope {slope}",
            p.n_h()
        );
    }
}

#[test]
fn vector_rate_matches_scalar_law() {
    let p = BoucWenParams::new(0.065, 0.8, 0.5, 0.5, 3000.0).unwrap();
    let z = [0.0, 0.01, -0.02, 0.03];
    let c = [1.0, -2.0, 0.0, 3.0];
    let r = bw_rate(&z, &c, &p).unwrap();
    assert_eq!(r[0], 0.065);
    assert_eq!(r[2], 0.0);
    assert!(bw_rate(&[f64::NAN], &[1.0], &p).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn cycles_dissipate(
        a_bar in 0.01f64..2.0,
        alpha in 0.1f64..2.0,
        beta_frac in -0.95f64..0.95,
        n_h in 0.3f64..2.5,
        amp_frac in 0.01f64..3.0,
    ) {
        let p = BoucWenParams::new(a_bar, alpha, beta_frac * alpha, n_h, 1.0).unwrap();
        let a = amp_frac * p.fixed_point_bound() / a_bar;
        prop_assert!(loop_area(&p, a) >= -1e-12 * a * p.fixed_point_bound());
    }

    #[test]
    fn loading_bound_is_never_crossed(
        n_h in 0.3f64..2.5,
        start in -1.0f64..1.0,
        path in proptest::collection::vec(-1.0f64..1.0, 1..20),
    ) {
        let p = BoucWenParams::new(0.5, 0.8, 0.5, n_h, 1.0).unwrap();
        let bound = p.fixed_point_bound();
        let mut z = start * bound;
        let mut chi = 0.0;
        for target in path {
            let target = target * 4.0 * bound / 0.5;
            sweep(&p, &mut z, chi, target, 2000);
            chi = target;
            prop_assert!(z.abs() <= bound * (1.0 + 1e-9));
        }
    }

    #[test]
    fn strain_bound_inversion_round_trips(target in 1e-3f64..1e-1, n_h in 0.2f64..2.8) {
        prop_assume!((n_h - 1.0).abs() > 0.05);
        let a = solve_abar_for_chimax(target, 0.8, 0.5, n_h).unwrap();
        let p = BoucWenParams::new(a, 0.8, 0.5, n_h, 1.0).unwrap();
        prop_assert!((chi_max(&p) / target - 1.0).abs() < 1e-10);
    }
}
