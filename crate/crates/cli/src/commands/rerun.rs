use std::path::Path;

use crate::error::{CliResult, Failure};
use crate::io::sha256_file;
use crate::manifest::RunManifest;
use crate::RerunArgs;

/// Verifies the recorded inputs, replays the arguments and compares every
/// recorded output digest.
pub fn run(a: &RerunArgs) -> CliResult<()> {
    let m = RunManifest::read(&a.manifest)?;
    for (path, digest) in &m.inputs {
        let now = sha256_file(Path::new(path))?;
        if &now != digest {
            return Err(Failure::corrupt(format!("input {path} changed since the recorded run")));
        }
    }
    if m.args.iter().any(|s| s == "rerun") {
        return Err(Failure::corrupt("manifest records a rerun"));
    }
    crate::dispatch(m.args.clone())?;
    let mut mismatched = Vec::new();
    for (path, digest) in &m.outputs {
        if &sha256_file(Path::new(path))? != digest {
            mismatched.push(path.clone());
        }
    }
    if !mismatched.is_empty() {
        return Err(Failure { code: 1, msg: format!("outputs differ from the recorded run: {}", mismatched.join(", ")) });
    }
    println!("reproduced {} outputs", m.outputs.len());
    Ok(())
}
