use chemostat_core::TimeGrid;
use chemostat_harness::{load_preset, run_ensemble, EnsembleSummary};

fn in_pool(threads: usize, f: impl FnOnce() -> EnsembleSummary + Send) -> EnsembleSummary {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn identical_across_thread_counts() {
    let mut cfg = load_preset("fig4").unwrap();
    cfg.grid = TimeGrid::spanning(0.0, 2.0, 1e-3).unwrap();
    let one = in_pool(1, || run_ensemble(&cfg, 16, 2024).unwrap());
    let four = in_pool(4, || run_ensemble(&cfg, 16, 2024).unwrap());
    assert_eq!(one, four);
    assert_eq!(one.completed, 16);
    let json = |s: &EnsembleSummary| serde_json::to_string(s).unwrap();
    assert_eq!(json(&one), json(&four));
}

#[test]
fn failures_are_counted_not_fatal() {
    let mut cfg = load_preset("fig9").unwrap();
    cfg.grid = TimeGrid::spanning(0.0, 20.0, 1e-3).unwrap();
    let s = run_ensemble(&cfg, 12, 3).unwrap();
    assert_eq!(s.completed + s.failed, 12);
    for e in &s.terminal {
        assert_eq!(e.terminal.is_some(), e.failure.is_none());
    }
    assert!(s.negative_nutrient_runs <= s.completed);
}
