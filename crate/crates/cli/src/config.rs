use std::ffi::OsString;
use std::fs;
use std::path::Path;

use clap::{ArgAction, Command};

/// Parse `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse(text: &str, source: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(format!("{source}:{}: expected key=value", n + 1));
        };
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(format!("{source}:{}: empty key", n + 1));
        }
        let v = v.trim();
        let v = v
            .strip_prefix('"')
            .and_then(|s| s.strip_suffix('"'))
            .unwrap_or(v);
        out.push((key, v.to_string()));
    }
    Ok(out)
}

/// Find `--config <file>` or `--config=<file>` in raw arguments.
pub fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

fn leaf<'a>(root: &'a Command, args: &[OsString]) -> &'a Command {
    let mut cmd = root;
    let mut skip_value = false;
    for a in args.iter().skip(1) {
        let s = a.to_string_lossy();
        if skip_value {
            skip_value = false;
            continue;
        }
        if s == "--config" {
            skip_value = true;
            continue;
        }
        if s.starts_with('-') {
            continue;
        }
        match cmd.find_subcommand(s.as_ref()) {
            Some(sub) => cmd = sub,
            None => {
                if !cmd.has_subcommands() {
                    break;
                }
            }
        }
        if !cmd.has_subcommands() {
            break;
        }
    }
    cmd
}

fn given(args: &[OsString], long: &str, short: Option<char>) -> bool {
    let flag = format!("--{long}");
    let prefix = format!("--{long}=");
    let short = short.map(|c| format!("-{c}"));
    args.iter().skip(1).any(|a| {
        let s = a.to_string_lossy();
        s == flag || s.starts_with(&prefix) || short.as_deref().is_some_and(|sh| s.starts_with(sh))
    })
}

/// Append config entries as flags for the selected subcommand, skipping
/// any flag already given on the command line.
pub fn merge(root: &Command, args: Vec<OsString>, entries: &[(String, String)]) -> Result<Vec<OsString>, String> {
    let cmd = leaf(root, &args);
    let mut out = args.clone();
    for (key, value) in entries {
        if key == "config" {
            return Err("config files cannot include other config files".into());
        }
        let Some(arg) = cmd.get_arguments().find(|a| a.get_long() == Some(key.as_str())) else {
            log::debug!("config key '{key}' does not apply to '{}'", cmd.get_name());
            continue;
        };
        if given(&args, key, arg.get_short()) {
            continue;
        }
        match arg.get_action() {
            ArgAction::SetTrue => match value.to_ascii_lowercase().as_str() {
                "true" | "yes" | "on" | "1" => out.push(format!("--{key}").into()),
                "false" | "no" | "off" | "0" => {}
                other => return Err(format!("config key '{key}': expected a boolean, found '{other}'")),
            },
            ArgAction::Append => {
                for v in value.split_whitespace() {
                    out.push(format!("--{key}").into());
                    out.push(v.into());
                }
            }
            _ => {
                out.push(format!("--{key}").into());
                out.push(value.into());
            }
        }
    }
    Ok(out)
}

pub fn load_and_merge(root: &Command, args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let path = Path::new(&path);
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let entries = parse(&text, &path.display().to_string())?;
    merge(root, args, &entries)
}
