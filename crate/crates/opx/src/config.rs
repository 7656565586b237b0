//! Flat `key=value` configuration files.
//!
//! Keys are flag names without the leading dashes; `_` and `-` are
//! interchangeable. Blank lines and lines starting with `#` are skipped.

use std::collections::BTreeMap;
use std::path::Path;

use crate::CliError;

pub const PRECISION_ENV: &str = "OPX_PRECISION_BITS";
pub const DEFAULT_PRECISION_BITS: usize = 256;

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(format!("line {}: expected key=value", i + 1));
        };
        let key = k.trim().trim_start_matches('-').replace('_', "-");
        if key.is_empty() {
            return Err(format!("line {}: empty key", i + 1));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

pub fn load_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config { path: path.display().to_string(), message: e.to_string() })?;
    parse_config(&text).map_err(|message| CliError::Config { path: path.display().to_string(), message })
}

/// Finds `--config PATH` or `--config=PATH` in raw arguments.
pub fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

/// Inserts `--key=value` for every config entry the user did not pass,
/// right after the subcommand token at `at`. Keys the subcommand does not
/// accept are skipped; `accepts` answers that.
pub fn inject(args: &[String], at: usize, entries: &BTreeMap<String, String>, accepts: impl Fn(&str) -> bool) -> Vec<String> {
    let given = |key: &str| {
        let flag = format!("--{key}");
        let eq = format!("--{key}=");
        args.iter().any(|a| *a == flag || a.starts_with(&eq))
    };
    let extra: Vec<String> = entries
        .iter()
        .filter(|(k, _)| k.as_str() != "config" && accepts(k) && !given(k))
        .map(|(k, v)| format!("--{k}={v}"))
        .collect();
    let mut out = args[..=at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[at + 1..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_pairs() {
        let m = parse_config("# comment\nprecision_bits = 512\n\nseed=7\n").unwrap();
        assert_eq!(m["precision-bits"], "512");
        assert_eq!(m["seed"], "7");
        assert!(parse_config("novalue\n").is_err());
    }

    #[test]
    fn user_flags_win() {
        let args: Vec<String> = ["opx", "dp1", "--t", "1"].iter().map(|s| s.to_string()).collect();
        let mut e = BTreeMap::new();
        e.insert("t".to_string(), "2".to_string());
        e.insert("n".to_string(), "9".to_string());
        e.insert("bogus".to_string(), "1".to_string());
        let out = inject(&args, 1, &e, |k| k != "bogus");
        assert_eq!(out, vec!["opx", "dp1", "--n=9", "--t", "1"]);
    }

    proptest::proptest! {
        #[test]
        fn written_pairs_parse_back(m in proptest::collection::btree_map("[a-z][a-z-]{0,8}", "[0-9a-z.,-]{0,10}", 0..6)) {
            let text: String = m.iter().map(|(k, v)| format!("{k} = {v}\n# note\n")).collect();
            proptest::prop_assert_eq!(parse_config(&text).unwrap(), m);
        }
    }
}
