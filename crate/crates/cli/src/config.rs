//! `--config` support: a JSON file whose top-level keys set global flags and
//! whose per-subcommand objects set that subcommand's flags. Values are
//! spliced into argv ahead of the user's own arguments, so anything given on
//! the command line wins.

use std::ffi::OsString;
use std::path::PathBuf;

use serde_json::{Map, Value};

use crate::error::CliError;

pub const GLOBAL_KEYS: [&str; 2] = ["seed", "threads"];
pub const SUBCOMMANDS: [&str; 8] = ["synth", "featurize", "train", "predict", "curve", "eval", "grid", "convergence"];

fn config_path(argv: &[OsString]) -> Result<Option<PathBuf>, CliError> {
    for (i, arg) in argv.iter().enumerate() {
        let Some(s) = arg.to_str() else { continue };
        if s == "--" {
            break;
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Ok(Some(PathBuf::from(v)));
        }
        if s == "--config" {
            return match argv.get(i + 1) {
                Some(v) => Ok(Some(PathBuf::from(v))),
                None => Err(CliError::Usage("--config needs a file".into())),
            };
        }
    }
    Ok(None)
}

fn flag_args(map: &Map<String, Value>, keys: impl Fn(&str) -> bool) -> Result<Vec<OsString>, CliError> {
    let mut out = Vec::new();
    for (key, value) in map.iter().filter(|(k, _)| keys(k)) {
        let flag = format!("--{}", key.replace('_', "-"));
        let text = match value {
            Value::Bool(true) => {
                out.push(flag.into());
                continue;
            }
            Value::Bool(false) | Value::Null => continue,
            Value::Number(n) => n.to_string(),
            Value::String(s) => s.clone(),
            Value::Array(items) => items
                .iter()
                .map(|v| match v {
                    Value::String(s) => Ok(s.clone()),
                    Value::Number(n) => Ok(n.to_string()),
                    _ => Err(CliError::Usage(format!("config key {key}: list items must be scalars"))),
                })
                .collect::<Result<Vec<_>, _>>()?
                .join(","),
            Value::Object(_) => return Err(CliError::Usage(format!("config key {key}: nested objects are not flags"))),
        };
        out.push(flag.into());
        out.push(text.into());
    }
    Ok(out)
}

/// argv with the config file's flags inserted.
pub fn expand(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&argv)? else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let root: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
    let Value::Object(root) = root else {
        return Err(CliError::Usage(format!("config {} must be a JSON object", path.display())));
    };
    for key in root.keys() {
        if !GLOBAL_KEYS.contains(&key.as_str()) && !SUBCOMMANDS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!("config {}: unknown key {key:?}", path.display())));
        }
    }
    let globals = flag_args(&root, |k| GLOBAL_KEYS.contains(&k))?;
    let sub_pos = argv
        .iter()
        .position(|a| a.to_str().is_some_and(|s| SUBCOMMANDS.contains(&s)));
    let mut out = Vec::with_capacity(argv.len() + globals.len());
    out.extend(argv.iter().take(1).cloned());
    out.extend(globals);
    match sub_pos {
        Some(pos) => {
            out.extend(argv[1..=pos].iter().cloned());
            let name = argv[pos].to_str().unwrap_or_default();
            match root.get(name) {
                Some(Value::Object(section)) => out.extend(flag_args(section, |_| true)?),
                Some(_) => return Err(CliError::Usage(format!("config section {name:?} must be an object"))),
                None => {}
            }
            out.extend(argv[pos + 1..].iter().cloned());
        }
        None => out.extend(argv.iter().skip(1).cloned()),
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn splices_globals_and_section() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"seed": 4, "train": {"epochs": 3, "hidden": [8, 4], "no_shuffle": true}}"#).unwrap();
        let p = path.to_str().unwrap();
        let out = expand(args(&["fb", "--config", p, "train", "--epochs", "5"])).unwrap();
        assert_eq!(
            out,
            args(&["fb", "--seed", "4", "--config", p, "train", "--epochs", "3", "--hidden", "8,4", "--no-shuffle", "--epochs", "5"])
        );
    }

    #[test]
    fn unknown_key_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"sed": 4}"#).unwrap();
        assert!(expand(args(&["fb", "--config", path.to_str().unwrap(), "eval"])).is_err());
    }
}
