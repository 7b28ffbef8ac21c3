//! Config files and the resolved parameter set of one invocation.
//!
//! A config is TOML with `schema = 1`, optional top-level `out` and
//! `threads`, and one table per subcommand (`[gadgets.coeffs]` for nested
//! ones) whose keys are the long flag names. Values from the file are turned
//! into flags and only used where the command line is silent.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::parser::ValueSource;
use clap::{ArgMatches, CommandFactory, FromArgMatches};
use sha2::{Digest, Sha256};

use crate::args::Cli;
use crate::error::{CliError, Result};

pub const SCHEMA: i64 = 1;
const GLOBAL_KEYS: [&str; 2] = ["out", "threads"];
const SKIP: [&str; 5] = ["help", "version", "config", "out", "threads"];

#[derive(Debug)]
pub struct Invocation {
    pub cli: Cli,
    /// Subcommand names, outermost first.
    pub path: Vec<String>,
    /// Every parameter of the subcommand with its effective value.
    pub params: Vec<(String, String)>,
    /// Short digest of `path` and `params`.
    pub hash: String,
}

impl Invocation {
    pub fn name(&self) -> String {
        self.path.join("-")
    }

    pub fn param(&self, key: &str) -> Option<&str> {
        self.params
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

fn leaf(matches: &ArgMatches) -> (Vec<String>, &ArgMatches) {
    let mut path = Vec::new();
    let mut m = matches;
    while let Some((name, sub)) = m.subcommand() {
        path.push(name.to_string());
        m = sub;
    }
    (path, m)
}

fn find_command<'a>(root: &'a clap::Command, path: &[String]) -> Option<&'a clap::Command> {
    path.iter()
        .try_fold(root, |c, name| c.find_subcommand(name))
}

fn normalise(key: &str) -> String {
    key.replace('_', "-")
}

fn flag_value(key: &str, value: &toml::Value) -> Result<Vec<String>> {
    let scalar = |v: &toml::Value| -> Result<String> {
        match v {
            toml::Value::String(s) => Ok(s.clone()),
            toml::Value::Integer(i) => Ok(i.to_string()),
            toml::Value::Float(f) => Ok(f.to_string()),
            _ => Err(CliError::Usage(format!(
                "config key `{key}` has an unsupported value"
            ))),
        }
    };
    let flag = normalise(key.rsplit('.').next().unwrap_or(key));
    match value {
        toml::Value::Boolean(true) => Ok(vec![format!("--{flag}")]),
        toml::Value::Boolean(false) => Ok(vec![]),
        toml::Value::Array(items) => {
            let parts = items.iter().map(scalar).collect::<Result<Vec<_>>>()?;
            Ok(vec![format!("--{flag}={}", parts.join(","))])
        }
        v => Ok(vec![format!("--{flag}={}", scalar(v)?)]),
    }
}

fn from_command_line(m: &ArgMatches, id: &str) -> bool {
    matches!(m.value_source(id), Some(ValueSource::CommandLine))
}

/// Checks every section of `table` against the subcommand tree and returns
/// the flags for the active subcommand that the command line left unset.
fn config_flags(
    table: &toml::Table,
    root: &clap::Command,
    active: &[String],
    global: &ArgMatches,
    leaf_matches: &ArgMatches,
) -> Result<Vec<String>> {
    match table.get("schema") {
        Some(toml::Value::Integer(SCHEMA)) => {}
        Some(_) => {
            return Err(CliError::Usage(format!(
                "config key `schema` must be {SCHEMA}"
            )))
        }
        None => {
            return Err(CliError::Usage(format!(
                "config key `schema` is missing (expected {SCHEMA})"
            )))
        }
    }
    let mut flags = Vec::new();
    let mut sections = Vec::new();
    for (key, value) in table {
        if key == "schema" {
            continue;
        }
        if GLOBAL_KEYS.contains(&normalise(key).as_str()) {
            if !from_command_line(global, &normalise(key)) {
                flags.extend(flag_value(key, value)?);
            }
            continue;
        }
        match (value, root.find_subcommand(key)) {
            (toml::Value::Table(t), Some(_)) => sections.push((vec![key.clone()], t)),
            _ => return Err(CliError::Usage(format!("unknown config key `{key}`"))),
        }
    }
    while let Some((path, section)) = sections.pop() {
        let cmd = find_command(root, &path).expect("section paths are checked before pushing");
        let dotted = path.join(".");
        for (key, value) in section {
            let qualified = format!("{dotted}.{key}");
            if let (toml::Value::Table(t), Some(_)) = (value, cmd.find_subcommand(key)) {
                let mut p = path.clone();
                p.push(key.clone());
                sections.push((p, t));
                continue;
            }
            let flag = normalise(key);
            let known = cmd
                .get_arguments()
                .any(|a| a.get_long() == Some(flag.as_str()) && !SKIP.contains(&flag.as_str()));
            if !known {
                return Err(CliError::Usage(format!("unknown config key `{qualified}`")));
            }
            if path == active {
                let id = cmd
                    .get_arguments()
                    .find(|a| a.get_long() == Some(flag.as_str()))
                    .map(|a| a.get_id().to_string())
                    .unwrap_or_default();
                if !from_command_line(leaf_matches, &id) {
                    flags.extend(flag_value(&qualified, value)?);
                }
            }
        }
    }
    Ok(flags)
}

fn digest(path: &[String], params: &[(String, String)]) -> String {
    let mut h = Sha256::new();
    h.update(b"heislim-config\n");
    h.update(path.join(" ").as_bytes());
    for (k, v) in params {
        h.update(b"\n");
        h.update(k.as_bytes());
        h.update(b"=");
        h.update(v.as_bytes());
    }
    h.finalize()
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn parse<I, T>(argv: I) -> Result<Invocation>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let root = Cli::command();
    let first = root.clone().try_get_matches_from(&argv)?;
    if let Some(file) = first.get_one::<PathBuf>("config") {
        let text = std::fs::read_to_string(file).map_err(|source| CliError::Io {
            path: file.clone(),
            source,
        })?;
        let table: toml::Table = text
            .parse()
            .map_err(|e| CliError::Usage(format!("{}: {e}", file.display())))?;
        let (path, leaf_matches) = leaf(&first);
        argv.extend(
            config_flags(&table, &root, &path, &first, leaf_matches)?
                .into_iter()
                .map(OsString::from),
        );
    }
    let matches = root.clone().try_get_matches_from(&argv)?;
    let cli = Cli::from_arg_matches(&matches)?;
    let (path, leaf_matches) = leaf(&matches);
    let cmd = find_command(&root, &path).expect("parsed subcommands exist");
    let params: Vec<(String, String)> = cmd
        .get_arguments()
        .filter_map(|a| {
            let long = a.get_long()?;
            if SKIP.contains(&long) {
                return None;
            }
            let raw = leaf_matches.get_raw(a.get_id().as_str())?;
            let value = raw
                .map(|v| v.to_string_lossy().into_owned())
                .collect::<Vec<_>>()
                .join(",");
            Some((long.to_string(), value))
        })
        .collect();
    let hash = digest(&path, &params);
    Ok(Invocation {
        cli,
        path,
        params,
        hash,
    })
}
