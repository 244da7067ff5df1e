//! The line-oriented command language run from `<script>` elements and
//! mutation files.
//!
//! ```text
//! document.write("<h")
//! write "text"
//! set 0/1 style "width: 10px"
//! append 0/1 element div
//! append 0/1 text "hello"
//! remove 0/1/0
//! ```
//!
//! Paths are child indices from the document node; `/` names the document.

use std::fmt;
use std::str::FromStr;

use crate::dom::{DomTree, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NodePath(pub Vec<usize>);

impl NodePath {
    pub fn resolve(&self, tree: &DomTree) -> Option<NodeId> {
        tree.resolve_path(&self.0)
    }

    /// Path of a live node.
    pub fn of(tree: &DomTree, node: NodeId) -> Option<NodePath> {
        let mut path = Vec::new();
        let mut cur = node;
        while let Some(p) = tree.parent(cur) {
            path.push(tree.children(p).iter().position(|&c| c == cur)?);
            cur = p;
        }
        path.reverse();
        Some(NodePath(path))
    }
}

impl FromStr for NodePath {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim_matches('/');
        if trimmed.is_empty() {
            return if s.starts_with('/') { Ok(NodePath(Vec::new())) } else { Err("empty path".into()) };
        }
        trimmed
            .split('/')
            .map(|part| part.parse::<usize>().map_err(|_| format!("bad path component '{part}'")))
            .collect::<Result<_, _>>()
            .map(NodePath)
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("/");
        }
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        f.write_str(&parts.join("/"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AppendPayload {
    Element(String),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScriptCommand {
    Write { text: String },
    SetAttribute { path: NodePath, name: String, value: String },
    AppendChild { parent: NodePath, payload: AppendPayload },
    RemoveNode { path: NodePath },
}

impl ScriptCommand {
    pub fn is_write(&self) -> bool {
        matches!(self, ScriptCommand::Write { .. })
    }
}

impl fmt::Display for ScriptCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = |s: &str| serde_json::to_string(s).expect("strings always serialize");
        match self {
            ScriptCommand::Write { text } => write!(f, "write {}", q(text)),
            ScriptCommand::SetAttribute { path, name, value } => write!(f, "set {path} {name} {}", q(value)),
            ScriptCommand::AppendChild { parent, payload: AppendPayload::Element(name) } => {
                write!(f, "append {parent} element {name}")
            }
            ScriptCommand::AppendChild { parent, payload: AppendPayload::Text(text) } => {
                write!(f, "append {parent} text {}", q(text))
            }
            ScriptCommand::RemoveNode { path } => write!(f, "remove {path}"),
        }
    }
}

/// A line that was not understood, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptDiagnostic {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ScriptDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// Parses a script body. Blank lines and `//` comments are skipped.
pub fn parse_script(text: &str) -> (Vec<ScriptCommand>, Vec<ScriptDiagnostic>) {
    let mut commands = Vec::new();
    let mut diagnostics = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with("//") {
            continue;
        }
        match parse_line(line) {
            Ok(c) => commands.push(c),
            Err(message) => diagnostics.push(ScriptDiagnostic { line: i + 1, message }),
        }
    }
    (commands, diagnostics)
}

fn parse_line(line: &str) -> Result<ScriptCommand, String> {
    if let Some(rest) = line.strip_prefix("document.write(") {
        let (text, rest) = quoted(rest.trim_start())?;
        let rest = rest.trim_start();
        let rest = rest.strip_prefix(')').ok_or("expected ')'")?.trim();
        if !(rest.is_empty() || rest == ";") {
            return Err(format!("unexpected '{rest}' after document.write"));
        }
        return Ok(ScriptCommand::Write { text });
    }
    let (verb, rest) = word(line);
    let command = match verb {
        "write" => {
            let (text, rest) = quoted(rest)?;
            end(rest)?;
            ScriptCommand::Write { text }
        }
        "set" => {
            let (path, rest) = word(rest);
            let (name, rest) = word(rest);
            if name.is_empty() {
                return Err("set needs an attribute name".into());
            }
            let (value, rest) = quoted(rest)?;
            end(rest)?;
            ScriptCommand::SetAttribute { path: path.parse()?, name: name.to_ascii_lowercase(), value }
        }
        "append" => {
            let (path, rest) = word(rest);
            let (kind, rest) = word(rest);
            let payload = match kind {
                "element" => {
                    let (name, rest) = word(rest);
                    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-') {
                        return Err(format!("bad element name '{name}'"));
                    }
                    end(rest)?;
                    AppendPayload::Element(name.to_ascii_lowercase())
                }
                "text" => {
                    let (text, rest) = quoted(rest)?;
                    end(rest)?;
                    AppendPayload::Text(text)
                }
                other => return Err(format!("append expects 'element' or 'text', got '{other}'")),
            };
            ScriptCommand::AppendChild { parent: path.parse()?, payload }
        }
        "remove" => {
            let (path, rest) = word(rest);
            end(rest)?;
            ScriptCommand::RemoveNode { path: path.parse()? }
        }
        other => return Err(format!("unknown command '{other}'")),
    };
    Ok(command)
}

fn word(s: &str) -> (&str, &str) {
    let s = s.trim_start();
    let end = s.find(char::is_whitespace).unwrap_or(s.len());
    (&s[..end], s[end..].trim_start())
}

fn end(rest: &str) -> Result<(), String> {
    let rest = rest.trim();
    if rest.is_empty() || rest == ";" {
        Ok(())
    } else {
        Err(format!("unexpected trailing '{rest}'"))
    }
}

/// Reads a `"..."` or `'...'` literal with backslash escapes.
fn quoted(s: &str) -> Result<(String, &str), String> {
    let s = s.trim_start();
    let mut chars = s.char_indices();
    let quote = match chars.next() {
        Some((_, q @ ('"' | '\''))) => q,
        _ => return Err("expected a quoted string".into()),
    };
    let mut out = String::new();
    while let Some((i, c)) = chars.next() {
        match c {
            '\\' => match chars.next() {
                Some((_, 'n')) => out.push('\n'),
                Some((_, 't')) => out.push('\t'),
                Some((_, e)) => out.push(e),
                None => break,
            },
            c if c == quote => return Ok((out, &s[i + 1..])),
            c => out.push(c),
        }
    }
    Err("unterminated string".into())
}
