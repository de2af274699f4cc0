use chemostat_core::noise::{ergodic_stats, sample_ou_path, OUParams};
use chemostat_core::TimeGrid;

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

#[test]
fn long_path_time_averages() {
    let ou = OUParams::new(1.0, 0.2).unwrap();
    let grid = TimeGrid::spanning(0.0, 5000.0, 1e-3).unwrap();
    let path = sample_ou_path(ou, 20240601, grid);
    let stats = ergodic_stats(&path).unwrap();
    assert!(stats.time_avg.abs() < 0.02, "{stats:?}");
    let target = 0.2 * (1.0 / std::f64::consts::PI).sqrt();
    assert!((ou.stationary_mean_abs() - target).abs() < 1e-15);
    assert!(
        ((stats.time_avg_abs - target) / target).abs() < 0.1,
        "{stats:?}"
    );
    assert!(stats.final_over_t.abs() < 1e-3);

    // lag-one autocorrelation of the AR(1) chain
    let v = path.values();
    let (mean, var) = mean_var(v);
    let n = v.len() - 1;
    let cov = v
        .windows(2)
        .map(|w| (w[0] - mean) * (w[1] - mean))
        .sum::<f64>()
        / n as f64;
    let rho = cov / var;
    let want = (-1e-3f64).exp();
    let se = ((1.0 - rho * rho) / n as f64).sqrt();
    assert!(
        (rho - want).abs() < 3.0 * se,
        "rho {rho} want {want} se {se}"
    );
    // stationary variance gamma^2 / (2 beta) with correlation time 1 over T = 5000
    assert!((var - 0.02).abs() < 0.1 * 0.02, "var {var}");
}

#[test]
fn stationary_start() {
    let ou = OUParams::new(2.0, 0.5).unwrap();
    let grid = TimeGrid::new(0.0, 1e-2, 1).unwrap();
    let z0: Vec<f64> = (0..20_000)
        .map(|s| sample_ou_path(ou, s, grid).values()[0])
        .collect();
    let (mean, var) = mean_var(&z0);
    let want = 0.25 / 4.0;
    let n = z0.len() as f64;
    assert!(mean.abs() < 3.0 * (want / n).sqrt());
    // var of the sample variance is 2 sigma^4 / (n - 1)
    assert!(
        (var - want).abs() < 3.0 * want * (2.0 / (n - 1.0)).sqrt(),
        "{var}"
    );
}

#[test]
fn transition_moments() {
    // z(h) | z(0) has mean z0 e^{-beta h}, variance gamma^2 (1 - e^{-2 beta h}) / (2 beta)
    let ou = OUParams::new(1.5, 0.4).unwrap();
    let h = 0.3;
    let grid = TimeGrid::new(0.0, h, 1).unwrap();
    let pairs: Vec<(f64, f64)> = (0..20_000)
        .map(|s| {
            let p = sample_ou_path(ou, s, grid);
            (p.values()[0], p.values()[1])
        })
        .collect();
    let decay = (-1.5 * h).exp();
    let resid: Vec<f64> = pairs.iter().map(|(a, b)| b - a * decay).collect();
    let (mean, var) = mean_var(&resid);
    let want = 0.16 * (1.0 - (-2.0 * 1.5 * h).exp()) / 3.0;
    let n = resid.len() as f64;
    assert!(mean.abs() < 3.0 * (want / n).sqrt());
    assert!((var - want).abs() < 3.0 * want * (2.0 / (n - 1.0)).sqrt());
    // innovations are independent of the start value
    let cross = pairs
        .iter()
        .zip(&resid)
        .map(|((a, _), r)| a * r)
        .sum::<f64>()
        / n;
    let sd = (ou.stationary_sd().powi(2) * want / n).sqrt();
    assert!(cross.abs() < 3.0 * sd);
}

#[test]
fn sup_shrinks_with_reversion() {
    let grid = TimeGrid::spanning(0.0, 10.0, 1e-3).unwrap();
    let mean_sup = |beta: f64| {
        let ou = OUParams::new(beta, 0.2).unwrap();
        (0..50)
            .map(|s| sample_ou_path(ou, 1000 + s, grid).sup_abs())
            .sum::<f64>()
            / 50.0
    };
    let sups: Vec<f64> = [1.0, 10.0, 100.0].into_iter().map(mean_sup).collect();
    assert!(sups[0] > sups[1] && sups[1] > sups[2], "{sups:?}");
}

#[test]
fn sup_grows_with_volatility() {
    let grid = TimeGrid::spanning(0.0, 10.0, 1e-3).unwrap();
    for seed in 0..20 {
        let quiet = sample_ou_path(OUParams::new(1.0, 0.1).unwrap(), seed, grid).sup_abs();
        let loud = sample_ou_path(OUParams::new(1.0, 0.5).unwrap(), seed, grid).sup_abs();
        assert!(loud > quiet);
    }
}
