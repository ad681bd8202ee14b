use dslob_core::config::ScenarioConfig;
use std::path::Path;

fn shipped(name: &str) -> ScenarioConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    ScenarioConfig::load(&path).unwrap()
}

#[test]
fn shipped_configs_match_presets() {
    assert_eq!(shipped("default.toml"), ScenarioConfig::default());
    assert_eq!(shipped("desk.toml"), ScenarioConfig::desk());
}
