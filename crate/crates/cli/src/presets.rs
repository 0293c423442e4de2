//! Named run configurations shipped with the binary.

use std::path::PathBuf;

use crate::config::RunConfig;
use crate::error::{io_err, CliError, Result};

/// Environment variable naming a directory of `<name>.toml` presets.
pub const PRESET_DIR_VAR: &str = "HYSTEROBEAM_PRESETS";

macro_rules! embedded {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../presets/", $name, ".toml")))),*]
    };
}

pub const EMBEDDED: &[(&str, &str)] = embedded!(
    "fig3",
    "fig4",
    "fig4_nh15",
    "fig5",
    "fig6",
    "fig7a",
    "fig7b",
    "fig8",
    "fig10",
    "fig11",
);

pub fn names() -> Vec<&'static str> {
    EMBEDDED.iter().map(|(n, _)| *n).collect()
}

/// Loads a preset from `$HYSTEROBEAM_PRESETS` when set, otherwise from the embedded set.
pub fn load(name: &str) -> Result<RunConfig> {
    if let Some(dir) = std::env::var_os(PRESET_DIR_VAR) {
        let path = PathBuf::from(dir).join(format!("{name}.toml"));
        if !path.is_file() {
            return Err(CliError::UnknownPreset {
                name: name.to_string(),
                known: format!("files in {}", path.parent().unwrap_or(&path).display()),
            });
        }
        let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
        return RunConfig::parse(&text, &path.display().to_string());
    }
    load_embedded(name)
}

pub fn load_embedded(name: &str) -> Result<RunConfig> {
    let (_, text) =
        EMBEDDED
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| CliError::UnknownPreset {
                name: name.to_string(),
                known: names().join(", "),
            })?;
    RunConfig::parse(text, &format!("preset {name}"))
}
