//! Config-driven scenario runner producing CSV tables.

pub mod config;
pub mod scenarios;
pub mod table;

pub use config::ScenarioConfig;
pub use scenarios::{catalog, run_scenario, scenario_names, validate, CatalogEntry};
pub use table::ScenarioResult;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("physics error: {0}")]
    Physics(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Physics(_) | CliError::Io(_) => 3,
        }
    }
}

/// Reads and parses a config file; unreadable files count as config errors.
pub fn load_config(path: &std::path::Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    ScenarioConfig::from_json(&text)
}

/// One line per scenario: `name<TAB>figure<TAB>description`.
pub fn list_text() -> String {
    catalog()
        .iter()
        .map(|e| format!("{}\t{}\t{}\n", e.name, e.figure, e.description))
        .collect()
}

/// The catalog as a JSON array of `{name, figure, description, default_config}`.
pub fn catalog_json() -> String {
    let entries: Vec<serde_json::Value> = catalog()
        .iter()
        .map(|e| {
            serde_json::json!({
                "name": e.name,
                "figure": e.figure,
                "description": e.description,
                "default_config": (e.default_config)(),
            })
        })
        .collect();
    serde_json::to_string_pretty(&entries).expect("catalog serializes")
}
