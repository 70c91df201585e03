//! `key = value` configuration files merged underneath command-line flags.

use std::fs;
use std::path::Path;

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key = value", n + 1))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || k.contains(char::is_whitespace) {
            return Err(format!("line {}: bad key {k:?}", n + 1));
        }
        out.push((k.replace('_', "-"), v.to_string()));
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<Vec<(String, String)>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse(&text)
}

/// Rebuild `argv` as `prog sub <config flags> <user args without sub>` so that
/// user flags, coming later, override config values.
pub fn merge(argv: &[String], sub: &str, entries: &[(String, String)]) -> Vec<String> {
    let pos = argv.iter().skip(1).position(|a| a == sub).map(|p| p + 1);
    let mut out = vec![argv[0].clone(), sub.to_string()];
    for (k, v) in entries {
        if k == "config" {
            continue;
        }
        match v.as_str() {
            "true" => out.push(format!("--{k}")),
            "false" => {}
            _ => out.push(format!("--{k}={v}")),
        }
    }
    out.extend(argv.iter().enumerate().skip(1).filter(|(i, _)| Some(*i) != pos).map(|(_, a)| a.clone()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_merges() {
        let e = parse("# comment\nb = 4\nk_min=-2 # trailing\n\nrefine = true\n").unwrap();
        assert_eq!(e, vec![("b".into(), "4".into()), ("k-min".into(), "-2".into()), ("refine".into(), "true".into())]);
        assert!(parse("novalue").is_err());
        let argv: Vec<String> = ["magbar", "--out", "o", "bands", "--b", "2"].iter().map(|s| s.to_string()).collect();
        let m = merge(&argv, "bands", &e);
        assert_eq!(m, ["magbar", "bands", "--b=4", "--k-min=-2", "--refine", "--out", "o", "--b", "2"]);
    }
}
