//! Flat `key = value` configuration files merged under command-line flags.

use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::CommandFactory;

use crate::args::Cli;

/// One `key = value` entry with its source line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigEntry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Blank lines and lines starting with `#` are skipped. Keys may use `_` or `-`.
pub fn parse_config(text: &str, origin: &str) -> Result<Vec<ConfigEntry>> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("{origin}: line {}: expected `key = value`", k + 1);
        };
        let key = key.trim().replace('_', "-");
        if key.is_empty() {
            bail!("{origin}: line {}: empty key", k + 1);
        }
        out.push(ConfigEntry {
            line: k + 1,
            key,
            value: value.trim().to_string(),
        });
    }
    Ok(out)
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = a.to_str().and_then(|s| s.strip_prefix("--config=")) {
            return Some(v.into());
        }
    }
    None
}

/// Inserts config entries right after the subcommand so that later
/// command-line flags override them.
pub fn expand_args(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let Some(sub_name) = args.get(1).and_then(|s| s.to_str()).filter(|s| !s.starts_with('-')) else {
        return Ok(args);
    };
    let cmd = Cli::command();
    let Some(sub) = cmd.find_subcommand(sub_name) else {
        return Ok(args);
    };
    let path = Path::new(&path);
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {origin}"))?;

    let mut injected = Vec::new();
    for e in parse_config(&text, &origin)? {
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(e.key.as_str()) && e.key != "config");
        let Some(arg) = arg else {
            bail!("{origin}: line {}: unknown key `{}` for `{sub_name}`", e.line, e.key);
        };
        let takes_value = arg.get_num_args().is_none_or(|n| n.takes_values());
        if takes_value {
            injected.push(OsString::from(format!("--{}", e.key)));
            injected.push(OsString::from(e.value));
        } else {
            match e.value.as_str() {
                "true" | "1" | "yes" => injected.push(OsString::from(format!("--{}", e.key))),
                "false" | "0" | "no" => {}
                v => bail!("{origin}: line {}: `{}` expects true or false, got `{v}`", e.line, e.key),
            }
        }
    }
    let mut out = args[..2].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[2..]);
    Ok(out)
}
