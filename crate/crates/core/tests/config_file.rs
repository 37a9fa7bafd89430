use std::path::Path;

use crossmag::{load_config, run_sweep, solve_steady_state, ProbeConfig, SystemParams};

fn shipped(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../config").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn shipped_default_matches_built_in_defaults() {
    let cfg = load_config(&shipped("default.toml")).unwrap();
    assert_eq!(cfg.params, SystemParams::default());
    assert_eq!(cfg.probe, ProbeConfig::default());
    let empty = load_config("").unwrap();
    assert_eq!(cfg.sweep, empty.sweep);
}

#[test]
fn shipped_default_runs() {
    let mut cfg = load_config(&shipped("default.toml")).unwrap();
    cfg.sweep.axis1.count = 21;
    let steady = solve_steady_state(&cfg.params).unwrap();
    let result = run_sweep(&cfg.params, &steady, &cfg.sweep).unwrap();
    assert_eq!(result.nodes.len(), 21);
    assert!(result.nodes.iter().all(|n| matches!(n.value, Ok(v) if v.is_finite())));
}
