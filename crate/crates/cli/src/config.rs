//! `--config FILE`: a JSON object using the flag names as keys. Values from
//! the file are inserted right after the subcommand unless the same flag is
//! on the command line.

use std::path::Path;

use serde_json::Value;

pub const SUBCOMMANDS: &[&str] = &["enumerate", "law", "weingarten", "bp", "sample", "model-check", "verify"];

/// Expands `--config` in `args` (which include the program name).
pub fn expand(args: Vec<String>) -> Result<Vec<String>, String> {
    let mut rest = Vec::with_capacity(args.len());
    let mut config = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            config = Some(it.next().ok_or("--config needs a path")?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            config = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = config else { return Ok(rest) };
    let (command, flags) = load(Path::new(&path))?;
    let given = |flag: &str| {
        let name = flag.split('=').next().unwrap_or(flag);
        rest.iter().any(|a| a == name || a.starts_with(&format!("{name}=")))
    };
    let flags: Vec<String> = flags.into_iter().filter(|f| !given(f)).collect();
    let pos = rest.iter().position(|a| SUBCOMMANDS.contains(&a.as_str()));
    match (pos, command) {
        (Some(p), _) => {
            rest.splice(p + 1..p + 1, flags);
        }
        (None, Some(c)) => {
            let mut inserted = vec![c];
            inserted.extend(flags);
            rest.splice(1..1, inserted);
        }
        (None, None) => return Err("no subcommand on the command line or in the config file".into()),
    }
    Ok(rest)
}

fn load(path: &Path) -> Result<(Option<String>, Vec<String>), String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let Value::Object(map) = value else {
        return Err(format!("{}: expected a JSON object", path.display()));
    };
    let mut command = None;
    let mut flags = Vec::new();
    for (key, v) in map {
        if key == "command" {
            command = Some(scalar(&v).ok_or("\"command\" must be a string")?);
            continue;
        }
        match v {
            Value::Bool(true) => flags.push(format!("--{key}")),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                let parts: Option<Vec<_>> = items.iter().map(scalar).collect();
                let parts = parts.ok_or_else(|| format!("\"{key}\": arrays may only hold scalars"))?;
                flags.push(format!("--{key}={}", parts.join(",")));
            }
            other => {
                let s = scalar(&other).ok_or_else(|| format!("\"{key}\": unsupported value"))?;
                flags.push(format!("--{key}={s}"));
            }
        }
    }
    Ok((command, flags))
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn no_config_is_identity() {
        assert_eq!(expand(args("qpi law --N 3")).unwrap(), args("qpi law --N 3"));
    }

    #[test]
    fn file_flags_precede_command_line_flags() {
        let dir = std::env::temp_dir().join(format!("qpi-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.json");
        std::fs::write(&path, r#"{"command": "law", "N": 4, "k": 2, "mode": "compare"}"#).unwrap();
        let out = expand(args(&format!("qpi --config {} --k 3", path.display()))).unwrap();
        assert_eq!(out, args("qpi law --N=4 --mode=compare --k 3"));
        let out = expand(args(&format!("qpi bp --config {}", path.display()))).unwrap();
        assert_eq!(out[1], "bp");
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
