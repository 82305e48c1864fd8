pub mod diagnose;
pub mod experiment;
pub mod fit;
pub mod plot;
pub mod rerun;
pub mod simulate;

use std::path::Path;

use maxstable::ModelSpec;

use crate::error::{CliResult, Failure};
use crate::io::read_text;

/// Reads and validates a model JSON; violated constraints are named.
pub fn read_model(path: &Path) -> CliResult<ModelSpec> {
    let text = read_text(path, "model")?;
    let model: ModelSpec =
        serde_json::from_str(&text).map_err(|e| Failure::config(format!("model {}: {e}", path.display())))?;
    model.validate().map_err(|e| Failure::config(format!("model {}: {e}", path.display())))?;
    Ok(model)
}
