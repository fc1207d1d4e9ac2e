//! Config files: `key=value` lines naming long flags of the invoked subcommand
//! (`delta_s` and `delta-s` both work). Values become defaults; flags given on the
//! command line win.

use crate::args::Cli;
use crate::error::CliError;
use clap::CommandFactory;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

/// Config path and subcommand chain from a lenient parse, so that flags the file
/// will supply are not reported missing yet.
fn prescan(argv: &[OsString]) -> (Option<PathBuf>, Vec<String>) {
    let Ok(m) = Cli::command().ignore_errors(true).try_get_matches_from(argv) else {
        return (None, Vec::new());
    };
    let mut chain = Vec::new();
    let mut config = m.get_one::<PathBuf>("config").cloned();
    let mut cur = &m;
    while let Some((name, sub)) = cur.subcommand() {
        chain.push(name.to_string());
        if let Ok(Some(p)) = sub.try_get_one::<PathBuf>("config") {
            config = Some(p.clone());
        }
        cur = sub;
    }
    (config, chain)
}

pub fn parse_pairs(text: &str) -> Result<Vec<(usize, String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("config line {}: expected key=value", i + 1)))?;
        out.push((i + 1, k.trim().replace('_', "-"), v.trim().to_string()));
    }
    Ok(out)
}

/// Returns `argv` with the config file's settings spliced in after the subcommand, or
/// `None` when no config file was given.
pub fn merge(argv: &[OsString]) -> Result<Option<Vec<OsString>>, CliError> {
    let (Some(path), chain) = prescan(argv) else {
        return Ok(None);
    };
    if chain.is_empty() {
        return Ok(None);
    }
    let text = read(&path)?;
    let pairs = parse_pairs(&text)?;

    let root = Cli::command();
    let mut leaf = &root;
    for name in &chain {
        leaf = leaf.find_subcommand(name).expect("subcommand exists");
    }
    let mut insert_at = 0;
    for name in &chain {
        insert_at += argv[insert_at..]
            .iter()
            .skip(1)
            .position(|a| a == name.as_str())
            .map(|p| p + 1)
            .ok_or_else(|| CliError::Config(format!("cannot locate subcommand {name}")))?;
    }
    insert_at += 1;

    let given = |flag: &str| {
        argv.iter().any(|a| {
            let a = a.to_string_lossy();
            a == flag || a.starts_with(&format!("{flag}="))
        })
    };

    let mut extra: Vec<OsString> = Vec::new();
    for (line, key, value) in pairs {
        if key == "config" {
            return Err(CliError::Config(format!("config line {line}: config files cannot nest")));
        }
        let arg = leaf
            .get_arguments()
            .chain(root.get_arguments())
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| {
                CliError::Config(format!(
                    "config line {line}: unknown key `{key}` for `{}`",
                    chain.join(" ")
                ))
            })?;
        let flag = format!("--{key}");
        if given(&flag) {
            continue;
        }
        if arg.get_action().takes_values() {
            extra.push(format!("{flag}={value}").into());
        } else {
            match value.as_str() {
                "true" | "1" | "yes" => extra.push(flag.into()),
                "false" | "0" | "no" => {}
                _ => {
                    return Err(CliError::Config(format!(
                        "config line {line}: `{key}` expects true or false, got `{value}`"
                    )))
                }
            }
        }
    }
    let mut merged = argv[..insert_at].to_vec();
    merged.extend(extra);
    merged.extend_from_slice(&argv[insert_at..]);
    Ok(Some(merged))
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
