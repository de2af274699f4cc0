use chemostat_harness::config::{load_config, parse_config, BandChoice, ModelKind};
use chemostat_harness::HarnessError;

#[test]
fn file_with_preset_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(
        &path,
        "# stronger noise on the persistent set\n[model]\npreset = fig4\nalpha = 1.2\n\n[grid]\nt_end = 5\n\n[band]\nb1 = 0.5\nb2 = 3.5\n",
    )
    .unwrap();
    let cfg = load_config(&path).unwrap();
    assert_eq!(cfg.name.as_deref(), Some("fig4"));
    assert_eq!(cfg.model, ModelKind::RandomOu);
    assert_eq!(cfg.params.alpha, 1.2);
    assert_eq!(cfg.params.s_in, 4.0);
    assert_eq!(cfg.grid.t_end(), 5.0);
    assert_eq!(cfg.band, BandChoice::Fixed { b1: 0.5, b2: 3.5 });
}

#[test]
fn missing_file_names_the_path() {
    let err = load_config("/no/such/run.cfg").unwrap_err();
    assert!(matches!(err, HarnessError::Io { .. }));
    assert!(err.to_string().contains("/no/such/run.cfg"), "{err}");
}

#[test]
fn unknown_key_reports_its_line() {
    let err = parse_config("[model]\npreset = fig6\n\nmu = 3\n", None).unwrap_err();
    assert!(err.to_string().starts_with("line 4:"), "{err}");
}

#[test]
fn unknown_preset() {
    let err = parse_config("[model]\npreset = fig99\n", None).unwrap_err();
    assert!(matches!(err, HarnessError::UnknownPreset(_)), "{err}");
}

#[test]
fn invalid_parameters_surface_from_core() {
    let err = parse_config("[model]\npreset = fig4\na = -1\n", None).unwrap_err();
    assert!(matches!(err, HarnessError::Core(_)), "{err}");
}

#[test]
fn assumption_breaks_are_warnings() {
    let cfg = parse_config("[model]\npreset = fig4\nc = 5\n", None).unwrap();
    assert_eq!(cfg.warnings.len(), 1);
}
