//! Model loading from a spec string: a `.gcl` or `.graph` path, or
//! `builtin:<name>:K=V[,K=V...]`.

use std::collections::BTreeMap;
use std::path::Path;

use mapcheck_core::gcl::{self, GclModel};
use mapcheck_core::model::{builtin_model, load_graph};
use mapcheck_core::store::fnv1a64;
use mapcheck_core::TransitionSystem;
use mapcheck_dist::tcp::model_fingerprint;

use crate::CliError;

pub(crate) struct LoadedModel {
    pub system: Box<dyn TransitionSystem>,
    /// What the user asked for, echoed in reports.
    pub descriptor: String,
    pub kind: &'static str,
    /// Handshake hash: content hash mixed with a structural fingerprint.
    pub model_hash: u64,
    pub gcl_ast: Option<GclModel>,
}

pub(crate) fn load_model(spec: &str) -> Result<LoadedModel, CliError> {
    if let Some(rest) = spec.strip_prefix("builtin:") {
        return load_builtin(spec, rest);
    }
    let path = Path::new(spec);
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    match ext {
        "gcl" => {
            let text = read(path)?;
            let ast = gcl::parse(&text).map_err(|e| {
                CliError::Config(format!("{}: {e}", path.display()))
            })?;
            let system = Box::new(
                gcl::compile(&ast).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
            );
            Ok(LoadedModel {
                model_hash: content_hash(text.as_bytes(), system.as_ref()),
                system,
                descriptor: spec.to_string(),
                kind: "guarded-command model",
                gcl_ast: Some(ast),
            })
        }
        "graph" => {
            let text = read(path)?;
            let system = Box::new(load_graph(&text).map_err(|e| {
                CliError::Config(format!("{}: {e}", path.display()))
            })?);
            Ok(LoadedModel {
                model_hash: content_hash(text.as_bytes(), system.as_ref()),
                system,
                descriptor: spec.to_string(),
                kind: "explicit graph",
                gcl_ast: None,
            })
        }
        _ => Err(CliError::Config(format!(
            "cannot tell the format of `{spec}` (expected .gcl, .graph or builtin:...)"
        ))),
    }
}

fn load_builtin(spec: &str, rest: &str) -> Result<LoadedModel, CliError> {
    let (name, param_text) = match rest.split_once(':') {
        Some((n, p)) => (n, p),
        None => (rest, ""),
    };
    let mut params: BTreeMap<String, i64> = BTreeMap::new();
    for pair in param_text.split(',').filter(|s| !s.is_empty()) {
        let (key, value) = pair.split_once('=').ok_or_else(|| {
            CliError::Config(format!("builtin parameter `{pair}` is not K=V"))
        })?;
        let value: i64 = value.parse().map_err(|_| {
            CliError::Config(format!("builtin parameter `{pair}` has a non-integer value"))
        })?;
        if params.insert(key.trim().to_string(), value).is_some() {
            return Err(CliError::Config(format!("duplicate builtin parameter `{key}`")));
        }
    }
    let system = builtin_model(name, &params).map_err(|e| CliError::Config(e.to_string()))?;
    // Canonical descriptor: sorted parameters, so every worker of a
    // distributed run hashes identically.
    let canonical = format!(
        "builtin:{name}:{}",
        params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(",")
    );
    Ok(LoadedModel {
        model_hash: content_hash(canonical.as_bytes(), system.as_ref()),
        system,
        descriptor: spec.to_string(),
        kind: "builtin model",
        gcl_ast: None,
    })
}

fn content_hash(content: &[u8], system: &dyn TransitionSystem) -> u64 {
    let mut bytes = content.to_vec();
    bytes.extend_from_slice(&model_fingerprint(system).to_be_bytes());
    fnv1a64(&bytes)
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))
}
