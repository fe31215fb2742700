//! Built-in configurations reproducing the published experiments.

use crate::config::RunConfig;
use crate::error::CliError;

pub const PRESETS: [(&str, &str); 5] = [
    ("paper-table2", include_str!("../presets/paper-table2.toml")),
    ("paper-appendixB", include_str!("../presets/paper-appendixB.toml")),
    ("paper-fig10-A", include_str!("../presets/paper-fig10-A.toml")),
    ("paper-fig10-B", include_str!("../presets/paper-fig10-B.toml")),
    ("paper-fig10-C", include_str!("../presets/paper-fig10-C.toml")),
];

pub fn load(name: &str) -> Result<RunConfig, CliError> {
    let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
        CliError::config(format!("unknown preset '{name}'; available: {}", names.join(", ")))
    })?;
    RunConfig::parse(text)
}
