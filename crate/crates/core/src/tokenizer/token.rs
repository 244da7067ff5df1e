use std::fmt;

/// Attribute list in source order. Names are unique.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Attributes(Vec<(String, String)>);

impl Attributes {
    pub fn new() -> Self {
        Attributes(Vec::new())
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.0.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_str())
    }

    /// Adds the attribute unless one with the same name exists. Returns
    /// whether it was added.
    pub fn insert_if_absent(&mut self, name: String, value: String) -> bool {
        if self.get(&name).is_some() {
            return false;
        }
        self.0.push((name, value));
        true
    }

    /// Overwrites in place, or appends.
    pub fn set(&mut self, name: &str, value: &str) {
        match self.0.iter_mut().find(|(n, _)| n == name) {
            Some((_, v)) => *v = value.to_string(),
            None => self.0.push((name.to_string(), value.to_string())),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(n, v)| (n.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>> FromIterator<(S, S)> for Attributes {
    fn from_iter<I: IntoIterator<Item = (S, S)>>(iter: I) -> Self {
        let mut attrs = Attributes::new();
        for (n, v) in iter {
            attrs.insert_if_absent(n.into(), v.into());
        }
        attrs
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    StartTag { name: String, attributes: Attributes, self_closing: bool },
    EndTag { name: String },
    Character(char),
    Comment(String),
    Doctype(String),
    EndOfStream,
}

impl Token {
    pub fn start(name: &str) -> Token {
        Token::StartTag { name: name.to_string(), attributes: Attributes::new(), self_closing: false }
    }

    pub fn end(name: &str) -> Token {
        Token::EndTag { name: name.to_string() }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Token::StartTag { .. } => "StartTag",
            Token::EndTag { .. } => "EndTag",
            Token::Character(_) => "Character",
            Token::Comment(_) => "Comment",
            Token::Doctype(_) => "Doctype",
            Token::EndOfStream => "EndOfStream",
        }
    }
}

/// Backslash-escapes control characters, backslashes, and double quotes.
pub fn escape_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            c if c.is_control() => out.push_str(&format!("\\u{{{:x}}}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

/// `KIND<TAB>payload`, as printed by the token dump.
impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t", self.kind())?;
        match self {
            Token::StartTag { name, attributes, self_closing } => {
                write!(f, "{name}")?;
                for (n, v) in attributes.iter() {
                    write!(f, " {}=\"{}\"", n, escape_text(v))?;
                }
                if *self_closing {
                    write!(f, " /")?;
                }
                Ok(())
            }
            Token::EndTag { name } => write!(f, "{name}"),
            Token::Character(c) => write!(f, "{}", escape_text(&c.to_string())),
            Token::Comment(text) => write!(f, "{}", escape_text(text)),
            Token::Doctype(name) => write!(f, "{}", escape_text(name)),
            Token::EndOfStream => Ok(()),
        }
    }
}
