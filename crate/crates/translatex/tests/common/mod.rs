//! Helpers shared by the integration and acceptance suites.

use std::path::PathBuf;

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

#[allow(dead_code)] // not every suite uses every helper
pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// All fixture documents as (name, source), sorted by name.
pub fn fixtures() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = std::fs::read_dir(fixture_dir())
        .unwrap()
        .filter_map(|e| {
            let path = e.unwrap().path();
            (path.extension().is_some_and(|x| x == "tex")).then(|| {
                (
                    path.file_name().unwrap().to_string_lossy().into_owned(),
                    std::fs::read_to_string(&path).unwrap(),
                )
            })
        })
        .collect();
    out.sort();
    out
}

/// Independent math oracle: bodies of `$..$`, `$$..$$`, `\(..\)`, `\[..\]`
/// outside comments and verbatim-like environments. A flat scanner with no
/// knowledge of the parser's block structure.
pub fn oracle_math_bodies(src: &str) -> Vec<String> {
    const OPAQUE: &[&str] = &["verbatim", "lstlisting", "tikzpicture", "tabular"];
    let bytes = src.as_bytes();
    let mut bodies = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'%' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'\\' => {
                let rest = &src[i..];
                if let Some(body_at) = rest.strip_prefix("\\(") {
                    if let Some(end) = body_at.find("\\)") {
                        bodies.push(body_at[..end].to_string());
                        i += 2 + end + 2;
                        continue;
                    }
                }
                if let Some(body_at) = rest.strip_prefix("\\[") {
                    if let Some(end) = body_at.find("\\]") {
                        bodies.push(body_at[..end].to_string());
                        i += 2 + end + 2;
                        continue;
                    }
                }
                let mut skipped = false;
                for env in OPAQUE {
                    let begin = format!("\\begin{{{env}}}");
                    let end = format!("\\end{{{env}}}");
                    if rest.starts_with(&begin) {
                        if let Some(close) = rest.find(&end) {
                            i += close + end.len();
                            skipped = true;
                            break;
                        }
                    }
                }
                if !skipped {
                    i += 2.min(bytes.len() - i);
                }
            }
            b'$' => {
                let double = bytes.get(i + 1) == Some(&b'$');
                let (open_len, closer) = if double { (2, "$$") } else { (1, "$") };
                let after = &src[i + open_len..];
                let mut j = 0;
                let mut end = None;
                let ab = after.as_bytes();
                while j < ab.len() {
                    if ab[j] == b'\\' {
                        j += 2;
                        continue;
                    }
                    if ab[j..].starts_with(closer.as_bytes()) {
                        end = Some(j);
                        break;
                    }
                    j += 1;
                }
                if let Some(end) = end {
                    bodies.push(after[..end].to_string());
                    i += open_len + end + open_len;
                } else {
                    i += 1;
                }
            }
            _ => i += 1,
        }
    }
    bodies.sort();
    bodies
}
