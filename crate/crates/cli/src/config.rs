//! Key-value configuration files.
//!
//! A TOML file holds one table per subcommand, keyed by long flag name:
//!
//! ```toml
//! [train]
//! method = "spo-ls-alt"
//! budget-ls = 60
//! no-bias = true
//! ```
//!
//! Entries are spliced into the argument list ahead of the user's own flags,
//! and since every option lets a later occurrence override an earlier one,
//! flags given on the command line win.

use std::ffi::OsString;
use std::path::Path;

use crate::CliError;

pub const SUBCOMMANDS: [&str; 6] = ["gen", "train", "eval", "zero-regret", "export-qcqp", "bench"];

/// Finds `--config <path>` or `--config=<path>` in `args`.
fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(rest.into());
        }
    }
    None
}

fn table_to_flags(table: &toml::Table, section: &str) -> Result<Vec<OsString>, CliError> {
    let mut flags = Vec::new();
    for (key, value) in table {
        let flag = format!("--{key}");
        match value {
            toml::Value::Boolean(true) => flags.push(flag.into()),
            toml::Value::Boolean(false) => {}
            toml::Value::String(s) => flags.push(format!("{flag}={s}").into()),
            toml::Value::Integer(i) => flags.push(format!("{flag}={i}").into()),
            toml::Value::Float(x) => flags.push(format!("{flag}={x}").into()),
            _ => {
                return Err(CliError::Usage(format!("config key [{section}].{key} must be a scalar")));
            }
        }
    }
    Ok(flags)
}

/// Reads the configuration file named on the command line, if any, and
/// returns the argument list with its entries for the chosen subcommand
/// inserted directly after the subcommand name.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else { return Ok(args) };
    let Some(pos) = args.iter().position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref())) else {
        return Ok(args);
    };
    let section = args[pos].to_string_lossy().into_owned();
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.to_string_lossy())))?;
    let doc: toml::Table =
        text.parse().map_err(|e| CliError::Usage(format!("malformed config {}: {e}", path.to_string_lossy())))?;
    let flags = match doc.get(&section) {
        Some(toml::Value::Table(t)) => table_to_flags(t, &section)?,
        Some(_) => return Err(CliError::Usage(format!("config entry [{section}] must be a table"))),
        None => Vec::new(),
    };
    let mut out = args[..=pos].to_vec();
    out.extend(flags);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn entries_are_inserted_after_the_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "[train]\nmethod = \"spo-ls\"\nbudget-ls = 5\nno-bias = true\nverbose = false\n").unwrap();
        let p = path.to_string_lossy().into_owned();
        let args = os(&["dfl", "--config", &p, "train", "--method", "spo"]);
        let out = expand(args).unwrap();
        let text: Vec<String> = out.iter().map(|a| a.to_string_lossy().into_owned()).collect();
        assert_eq!(&text[..4], &["dfl", "--config", p.as_str(), "train"]);
        assert!(text.contains(&"--budget-ls=5".to_string()));
        assert!(text.contains(&"--no-bias".to_string()));
        assert!(!text.iter().any(|t| t.starts_with("--verbose")));
        let config_method = text.iter().position(|t| t == "--method=spo-ls").unwrap();
        let user_method = text.iter().position(|t| t == "--method").unwrap();
        assert!(config_method < user_method);
    }

    #[test]
    fn missing_config_file_is_an_io_error() {
        let args = os(&["dfl", "train", "--config=/nonexistent/dfl.toml"]);
        assert!(matches!(expand(args), Err(CliError::Io(_))));
    }
}
