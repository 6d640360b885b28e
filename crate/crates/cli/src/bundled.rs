use std::path::Path;

use etconsensus::scenario::ScenarioConfig;

use crate::error::CliError;

pub const BUNDLED: &[(&str, &str)] = &[
    ("fig1", include_str!("../scenarios/fig1.scenario")),
    ("fig2", include_str!("../scenarios/fig2.scenario")),
    ("fig3", include_str!("../scenarios/fig3.scenario")),
    ("switching", include_str!("../scenarios/switching.scenario")),
];

/// Loads `arg` as a file, or as the name of a bundled scenario
/// (`fig2` or `fig2.scenario`) when no such file exists.
pub fn resolve(arg: &str) -> Result<ScenarioConfig, CliError> {
    let path = Path::new(arg);
    if path.exists() {
        return Ok(ScenarioConfig::load(path)?);
    }
    let key = arg.strip_suffix(".scenario").unwrap_or(arg);
    match BUNDLED.iter().find(|(name, _)| *name == key) {
        Some((name, src)) => {
            let mut cfg = ScenarioConfig::from_toml_str(src)?;
            cfg.name.get_or_insert_with(|| name.to_string());
            Ok(cfg)
        }
        None => {
            let names: Vec<&str> = BUNDLED.iter().map(|b| b.0).collect();
            Err(CliError::Runtime(format!(
                "no scenario file {arg} and no bundled scenario of that name (bundled: {})",
                names.join(", ")
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_scenarios_prepare() {
        for (name, _) in BUNDLED {
            let cfg = resolve(name).unwrap();
            assert_eq!(cfg.display_name(), *name);
            cfg.prepare().unwrap();
        }
        assert!(resolve("fig2.scenario").is_ok());
        assert!(matches!(resolve("nope"), Err(CliError::Runtime(_))));
    }
}
