use std::path::PathBuf;

use proptest::prelude::*;
use spectra_cli::{load_config, parse_config, CliError, ExperimentConfig};
use spectra_core::{Window, REFERENCE_POSITIONS};

fn bundled(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn reference() -> ExperimentConfig {
    load_config(&bundled("five_scatterers_v5.json")).unwrap()
}

fn config_error(text: &str) -> String {
    match parse_config(text) {
        Err(CliError::Config(msg)) => msg,
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn bundled_reference_config() {
    let c = reference();
    assert_eq!(c.scatterers.positions.len(), 5);
    for (p, q) in c.scatterers.positions.iter().zip(&REFERENCE_POSITIONS) {
        assert_eq!(p[0], q.x);
        assert_eq!(p[1], q.y);
    }
    assert_eq!(c.scatterers.inverse_strengths, vec![5.0; 5]);
    assert_eq!(c.window, Window::Index { lo: 100, hi: 1100 });
    assert_eq!(c.energy_cutoff().unwrap(), 9200.0);
}

#[test]
fn every_bundled_config_validates() {
    for name in [
        "five_scatterers_v5.json",
        "strength_sweep.json",
        "strength_sweep_fine.json",
        "scatterer_count_sweep.json",
    ] {
        load_config(&bundled(name)).unwrap();
    }
    let counts = load_config(&bundled("scatterer_count_sweep.json")).unwrap();
    assert_eq!(counts.sweep.scatterer_counts, vec![1, 2, 3, 5, 10]);
    assert_eq!(counts.sweep.inverse_strengths, vec![7.5]);
}

#[test]
fn boundary_scatterer_is_rejected() {
    let mut c = reference();
    c.scatterers.positions[2] = [0.0, 0.5];
    let msg = config_error(&c.to_json());
    assert!(msg.starts_with("scatterers"), "{msg}");
}

#[test]
fn duplicate_positions_are_rejected() {
    let mut c = reference();
    c.scatterers.positions[3] = c.scatterers.positions[1];
    let msg = config_error(&c.to_json());
    assert!(msg.starts_with("scatterers"), "{msg}");
}

#[test]
fn unknown_fields_are_rejected() {
    let text = reference().to_json().replace("\"tol_omega\"", "\"tol_omgea\"");
    let msg = config_error(&text);
    assert!(msg.contains("tol_omgea") && msg.contains("line"), "{msg}");
}

#[test]
fn validation_names_the_field() {
    type Edit = fn(&mut ExperimentConfig);
    let cases: [(&str, Edit); 6] = [
        ("solver.safety_fraction", |c| c.solver.safety_fraction = 1.5),
        ("solver.tol_omega", |c| c.solver.tol_omega = 0.0),
        ("stats.bins", |c| c.stats.bins = 0),
        ("stats.l_grid", |c| c.stats.l_grid = vec![3.0, 2.0]),
        ("scatterers.inverse_strengths", |c| {
            c.scatterers.inverse_strengths.pop().map(drop).unwrap()
        }),
        ("sweep.scatterer_counts", |c| c.sweep.scatterer_counts = vec![6]),
    ];
    for (name, edit) in cases {
        let mut c = reference();
        edit(&mut c);
        let msg = config_error(&c.to_json());
        assert!(msg.starts_with(name), "{name}: {msg}");
    }
}

#[test]
fn explicit_cutoff_must_cover_the_window() {
    let mut c = reference();
    c.solver.energy_cutoff = Some(1500.0);
    let msg = config_error(&c.to_json());
    assert!(msg.starts_with("solver.energy_cutoff"), "{msg}");
}

#[test]
fn calibration_mode_needs_no_scatterers() {
    let mut c = reference();
    c.scatterers.positions.clear();
    c.scatterers.inverse_strengths.clear();
    parse_config(&c.to_json()).unwrap();
}

#[test]
fn digest_ignores_the_label_only() {
    let base = reference();
    let mut renamed = base.clone();
    renamed.name = "something else".into();
    assert_eq!(base.digest(), renamed.digest());

    let edits: [fn(&mut ExperimentConfig); 7] = [
        |c| c.billiard.mass *= 1.0 + 1e-15,
        |c| c.scatterers.positions[0][1] += 1e-9,
        |c| c.scatterers.inverse_strengths[4] = 5.5,
        |c| c.window = Window::Index { lo: 100, hi: 1099 },
        |c| c.solver.tail_correction = false,
        |c| c.solver.energy_cutoff = Some(9300.0),
        |c| c.stats.bins = 31,
    ];
    for edit in edits {
        let mut c = base.clone();
        edit(&mut c);
        assert_ne!(base.digest(), c.digest());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn json_round_trip(
        v in prop::collection::vec(-30.0f64..30.0, 5),
        lo in 1usize..50,
        span in 0usize..500,
        bins in 1usize..100,
        step in 0.01f64..1.0,
        seed in any::<u64>(),
        cutoff in prop::option::of(5000.0f64..20000.0),
    ) {
        let mut c = reference();
        c.scatterers.inverse_strengths = v;
        c.window = Window::Index { lo, hi: lo + span };
        c.stats.bins = bins;
        c.stats.window_step = step;
        c.seed = seed;
        c.solver.energy_cutoff = cutoff;
        let back = parse_config(&c.to_json()).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.digest(), c.digest());
    }
}
