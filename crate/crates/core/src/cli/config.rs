//! Flat `key = value` config files with `[section]` headers.
//!
//! A section is named after the subcommand path, e.g. `[density]` or
//! `[simulate.trd]`. Keys are long flag names (`_` and `-` are
//! interchangeable). File values are spliced into the argument list ahead of
//! the user's own flags, and clap keeps the last occurrence, so flags win.

use std::collections::BTreeMap;
use std::path::Path;

use clap::Command;

use super::CliError;

/// Sections of a parsed config file, in file order within each section.
pub type ConfigSections = BTreeMap<String, Vec<(String, String)>>;

pub fn parse_config_text(text: &str) -> Result<ConfigSections, CliError> {
    let mut out = ConfigSections::new();
    let mut section = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = name.trim().to_string();
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key = value, got '{raw}'", i + 1)))?;
        let key = k.trim().replace('_', "-");
        out.entry(section.clone()).or_default().push((key, v.trim().to_string()));
    }
    Ok(out)
}

pub fn read_config(path: &Path) -> Result<ConfigSections, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    parse_config_text(&text)
}

/// Root options that take a value and may precede the subcommand.
const ROOT_VALUED: [&str; 2] = ["--config", "--workers"];

/// Splits `args` (without the program name) into the subcommand path and the
/// remaining arguments, and extracts the `--config` path if present.
fn split_args(root: &Command, args: &[String]) -> (Vec<String>, Vec<String>, Option<String>) {
    let mut path = Vec::new();
    let mut rest = Vec::new();
    let mut config = None;
    let mut cmd = Some(root);
    let mut i = 0;
    while i < args.len() {
        let a = &args[i];
        if let Some(v) = a.strip_prefix("--config=") {
            config = Some(v.to_string());
            rest.push(a.clone());
        } else if a == "--config" && i + 1 < args.len() {
            config = Some(args[i + 1].clone());
            rest.push(a.clone());
            rest.push(args[i + 1].clone());
            i += 1;
        } else if ROOT_VALUED.contains(&a.as_str()) && i + 1 < args.len() {
            rest.push(a.clone());
            rest.push(args[i + 1].clone());
            i += 1;
        } else if let Some(sub) = cmd.filter(|_| !a.starts_with('-')).and_then(|c| c.find_subcommand(a)) {
            path.push(a.clone());
            cmd = Some(sub);
        } else {
            rest.push(a.clone());
            if !a.starts_with('-') {
                cmd = None;
            }
        }
        i += 1;
    }
    (path, rest, config)
}

fn known_keys(cmd: &Command) -> Vec<String> {
    cmd.get_arguments().filter_map(|a| a.get_long()).map(str::to_string).collect()
}

/// Rewrites the argument list so that values from the config file (if any)
/// come before the user's flags. Unknown keys are rejected.
pub fn merge_config_args(root: &Command, argv: &[String]) -> Result<Vec<String>, CliError> {
    let (prog, args) = argv.split_first().map_or(("trdsphere".to_string(), &[][..]), |(p, a)| (p.clone(), a));
    let (path, rest, config) = split_args(root, args);
    let Some(config) = config else {
        return Ok(argv.to_vec());
    };
    let sections = read_config(Path::new(&config))?;
    let mut cmd = root.clone();
    for p in &path {
        cmd = cmd.find_subcommand(p).cloned().expect("path found by split_args");
    }
    let name = path.join(".");
    let known = known_keys(&cmd);
    let mut spliced = Vec::new();
    for (section, entries) in &sections {
        if section != &name {
            if section.is_empty() {
                return Err(CliError::Config("keys must appear inside a [subcommand] section".into()));
            }
            if root.find_subcommand(section.split('.').next().unwrap_or("")).is_none() {
                return Err(CliError::Config(format!("unknown config section '[{section}]'")));
            }
            continue;
        }
        for (k, v) in entries {
            if !known.contains(k) || k == "config" {
                return Err(CliError::UnknownKey { key: k.clone(), section: name.clone() });
            }
            spliced.push(format!("--{k}={v}"));
        }
    }
    Ok(std::iter::once(prog).chain(path).chain(spliced).chain(rest).collect())
}
