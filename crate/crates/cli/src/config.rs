//! `--config` files: flat `key = value` lines spliced in as `--key=value`.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

/// Reads a config file into flag tokens. Keys may be written with `_` or `-`.
pub fn flag_tokens(path: &Path) -> Result<Vec<OsString>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(format!("{}:{}: expected key = value", path.display(), i + 1));
        };
        let key = k.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(format!("{}:{}: invalid key '{}'", path.display(), i + 1, k.trim()));
        }
        // `Omega` is the one case-sensitive flag
        let key = if key.eq_ignore_ascii_case("omega") {
            k.trim().to_string()
        } else {
            key
        };
        out.push(format!("--{key}={}", v.trim()).into());
    }
    Ok(out)
}

/// Inserts the tokens of any `--config` file right after the subcommand, so
/// that flags given on the command line, which come later, take precedence.
pub fn splice(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = args.get(i + 1).cloned();
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(p.into());
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let tokens = flag_tokens(Path::new(&path))?;
    let Some(sub) = args.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')) else {
        return Ok(args);
    };
    let at = sub + 2;
    let mut out = args[..at].to_vec();
    out.extend(tokens);
    out.extend_from_slice(&args[at..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_and_precedence_order() {
        let dir = std::env::temp_dir().join(format!("rsm-config-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let f = dir.join("c.conf");
        fs::write(
            &f,
            "# comment\nchi = 0.4\nomega_tilde_c = 0.1\nOmega = 1.5\n\ng2bar=0.1:0.5:5\n",
        )
        .unwrap();
        let args: Vec<OsString> = ["rsm", "qfi", "--config", f.to_str().unwrap(), "--chi", "0.0"]
            .iter()
            .map(OsString::from)
            .collect();
        let out = splice(args).unwrap();
        let s: Vec<String> = out.iter().map(|a| a.to_string_lossy().into_owned()).collect();
        assert_eq!(
            &s[2..6],
            &["--chi=0.4", "--omega-tilde-c=0.1", "--Omega=1.5", "--g2bar=0.1:0.5:5"]
        );
        assert_eq!(s.last().unwrap(), "0.0");
        fs::write(&f, "chi 0.4\n").unwrap();
        assert!(flag_tokens(&f).unwrap_err().contains(":1:"));
    }
}
