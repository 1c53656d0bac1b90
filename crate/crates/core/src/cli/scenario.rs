//! Scenario scripts: one command per line, `#` comments, double-quoted
//! arguments allowed.

use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};

use crate::actors::SliceState;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    LoadSubstrate(PathBuf),
    LoadRules(PathBuf),
    SubmitRequest { file: PathBuf, slice: String },
    DeleteSlice(String),
    AdvanceTime(DateTime<Utc>),
    ExpectViolation(String),
    ExpectState { slice: String, state: SliceState },
    DumpManifest { slice: String, file: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("script line {line}: {reason}")]
pub struct ScriptError {
    pub line: usize,
    pub reason: String,
}

fn words(line: &str, n: usize) -> Result<Vec<String>, ScriptError> {
    let mut out = Vec::new();
    let mut chars = line.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '"' {
            chars.next();
            let mut w = String::new();
            loop {
                match chars.next() {
                    Some('"') => break,
                    Some('\\') => w.extend(chars.next()),
                    Some(ch) => w.push(ch),
                    None => return Err(ScriptError { line: n, reason: "unterminated quote".into() }),
                }
            }
            out.push(w);
        } else {
            let mut w = String::new();
            while let Some(&ch) = chars.peek() {
                if ch.is_whitespace() {
                    break;
                }
                w.push(ch);
                chars.next();
            }
            out.push(w);
        }
    }
    Ok(out)
}

/// Parses a script. Relative file arguments resolve against `base`.
pub fn parse_script(text: &str, base: &Path) -> Result<Vec<Command>, ScriptError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let n = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let w = words(line, n)?;
        let bad = |reason: &str| ScriptError { line: n, reason: format!("{reason}: {line}") };
        let file = |s: &str| base.join(s);
        let args: Vec<&str> = w.iter().map(String::as_str).collect();
        let cmd = match args.as_slice() {
            ["load-substrate", f] => Command::LoadSubstrate(file(f)),
            ["load-rules", f] => Command::LoadRules(file(f)),
            ["submit-request", f, "as", id] => Command::SubmitRequest { file: file(f), slice: id.to_string() },
            ["delete-slice", id] => Command::DeleteSlice(id.to_string()),
            ["advance-time", t] => Command::AdvanceTime(
                DateTime::parse_from_rfc3339(t).map_err(|_| bad("expected an ISO 8601 date-time"))?.with_timezone(&Utc),
            ),
            ["expect-violation", msg] => Command::ExpectViolation(msg.to_string()),
            ["expect-state", id, st] => Command::ExpectState {
                slice: id.to_string(),
                state: st.parse().map_err(|e: String| bad(&e))?,
            },
            ["dump-manifest", id, f] => Command::DumpManifest { slice: id.to_string(), file: file(f) },
            _ => return Err(bad("unrecognized command")),
        };
        out.push(cmd);
    }
    Ok(out)
}
