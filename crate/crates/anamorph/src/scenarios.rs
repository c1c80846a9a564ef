//! Calibrated network scenarios shipped with the tool.

use anamorph_core::vanet::ScenarioConfig;

pub const BUNDLED: [(&str, &str); 4] = [
    ("benign_60", include_str!("../scenarios/benign_60.json")),
    ("attack_60", include_str!("../scenarios/attack_60.json")),
    ("benign_120", include_str!("../scenarios/benign_120.json")),
    ("attack_120", include_str!("../scenarios/attack_120.json")),
];

/// A bundled scenario by name, with or without the `.json` suffix.
pub fn bundled(name: &str) -> Option<ScenarioConfig> {
    let name = name.strip_suffix(".json").unwrap_or(name);
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| serde_json::from_str(text).expect("bundled scenarios are valid"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_bundled_parse_and_validate() {
        for (name, _) in BUNDLED {
            let cfg = bundled(name).unwrap();
            cfg.validate().unwrap();
            assert_eq!(cfg.attack.enabled, name.starts_with("attack"));
        }
        assert!(bundled("attack_60.json").is_some());
        assert!(bundled("nope").is_none());
    }
}
