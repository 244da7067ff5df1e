//! Incremental HTML tokenizer.
//!
//! The machine consumes one character per rule application and suspends
//! whenever the pending input runs dry, so chunk boundaries never change the
//! token stream. Scripts splice text in at the insertion point with
//! [`TokenizerMachine::insert_at_insertion_point`].

mod input;
mod prefetch;
pub mod rules;
mod token;

use std::collections::VecDeque;

use thiserror::Error;

pub use input::InputStream;
pub use prefetch::scan_prefetch;
pub use rules::{CharClass, State};
pub use token::{escape_text, Attributes, Token};

use rules::{classify, table, Action};

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum TokenizerError {
    #[error("input fed after the stream ended")]
    FedAfterEnd,
    #[error("text inserted after the stream ended")]
    InsertAfterEnd,
    #[error("stream already ended")]
    DoubleEnd,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepResult {
    Emitted(Token),
    /// Pending input is exhausted and the stream has not ended.
    NeedMoreInput,
    /// `EndOfStream` has already been returned.
    Finished,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TagKind {
    Start,
    End,
}

#[derive(Debug, Clone)]
struct TagBuilder {
    kind: TagKind,
    name: String,
    attributes: Attributes,
    self_closing: bool,
    attr: Option<(String, String)>,
}

impl TagBuilder {
    fn new(kind: TagKind) -> Self {
        TagBuilder { kind, name: String::new(), attributes: Attributes::new(), self_closing: false, attr: None }
    }

    fn commit_attr(&mut self) {
        if let Some((name, value)) = self.attr.take() {
            self.attributes.insert_if_absent(name, value);
        }
    }
}

/// Suspendable tokenizer. Cloning takes a snapshot that can be resumed.
#[derive(Debug, Clone)]
pub struct TokenizerMachine {
    state: State,
    input: InputStream,
    tag: TagBuilder,
    raw: String,
    decl: String,
    comment: String,
    dashes: usize,
    char_ref: String,
    return_state: State,
    queue: VecDeque<Token>,
    finished: bool,
}

impl Default for TokenizerMachine {
    fn default() -> Self {
        Self::new()
    }
}

impl TokenizerMachine {
    pub fn new() -> Self {
        TokenizerMachine {
            state: State::Data,
            input: InputStream::new(),
            tag: TagBuilder::new(TagKind::Start),
            raw: String::new(),
            decl: String::new(),
            comment: String::new(),
            dashes: 0,
            char_ref: String::new(),
            return_state: State::Data,
            queue: VecDeque::new(),
            finished: false,
        }
    }

    pub fn state(&self) -> State {
        self.state
    }

    pub fn input(&self) -> &InputStream {
        &self.input
    }

    /// Appends a chunk after all pending input. Does not tokenize.
    pub fn feed(&mut self, chunk: &str) -> Result<(), TokenizerError> {
        self.input.feed(chunk)
    }

    /// Splices script output so it is tokenized before any not-yet-consumed
    /// input.
    pub fn insert_at_insertion_point(&mut self, text: &str) -> Result<(), TokenizerError> {
        self.input.insert(text)
    }

    pub fn end_stream(&mut self) -> Result<(), TokenizerError> {
        self.input.end()
    }

    /// Resource URLs referenced by the not-yet-consumed input.
    pub fn prefetch_candidates(&self) -> Vec<String> {
        scan_prefetch(&self.input.pending_text())
    }

    pub fn next_token(&mut self) -> StepResult {
        let table = table();
        loop {
            if let Some(token) = self.queue.pop_front() {
                return StepResult::Emitted(token);
            }
            if self.finished {
                return StepResult::Finished;
            }
            let c = self.input.peek();
            if c.is_none() && !self.input.is_ended() {
                return StepResult::NeedMoreInput;
            }
            let rule = table.rule(self.state, classify(c));
            if rule.consume {
                self.input.advance();
            }
            if let Some(next) = rule.next {
                self.state = next;
            }
            for &action in rule.actions {
                self.apply(action, c);
            }
        }
    }

    fn emit_str(&mut self, s: &str) {
        self.queue.extend(s.chars().map(Token::Character));
    }

    fn apply(&mut self, action: Action, c: Option<char>) {
        let ch = || c.expect("action requires a character");
        match action {
            Action::EmitChar => self.queue.push_back(Token::Character(ch())),
            Action::EmitEof => {
                self.queue.push_back(Token::EndOfStream);
                self.finished = true;
            }
            Action::BeginTag => {
                self.raw.clear();
                self.raw.push('<');
            }
            Action::AppendRaw => self.raw.push(ch()),
            Action::ClearRaw => self.raw.clear(),
            Action::FlushRaw => {
                let raw = std::mem::take(&mut self.raw);
                self.emit_str(&raw);
            }
            Action::CreateStartTag => self.tag = TagBuilder::new(TagKind::Start),
            Action::CreateEndTag => self.tag = TagBuilder::new(TagKind::End),
            Action::AppendTagName => self.tag.name.push(ch().to_ascii_lowercase()),
            Action::StartAttr => {
                self.tag.commit_attr();
                self.tag.attr = Some((String::new(), String::new()));
            }
            Action::AppendAttrName => {
                if let Some((name, _)) = self.tag.attr.as_mut() {
                    name.push(ch().to_ascii_lowercase());
                }
            }
            Action::AppendAttrValue => self.push_attr_value(&ch().to_string()),
            Action::SetSelfClosing => self.tag.self_closing = true,
            Action::EmitTag => self.emit_tag(),
            Action::ClearDecl => self.decl.clear(),
            Action::AppendDecl => {
                self.decl.push(ch());
                if self.decl == "--" {
                    self.comment.clear();
                    self.state = State::CommentStart;
                }
            }
            Action::CloseDecl => {
                let decl = std::mem::take(&mut self.decl);
                self.raw.clear();
                match doctype_name(&decl) {
                    Some(name) => self.queue.push_back(Token::Doctype(name)),
                    None => self.queue.push_back(Token::Comment(decl)),
                }
            }
            Action::DeclEof => {
                let decl = std::mem::take(&mut self.decl);
                match doctype_name(&decl) {
                    Some(name) => {
                        self.raw.clear();
                        self.queue.push_back(Token::Doctype(name));
                    }
                    None => self.apply(Action::FlushRaw, c),
                }
            }
            Action::AppendComment => self.comment.push(ch()),
            Action::EmitComment => {
                let text = std::mem::take(&mut self.comment);
                self.queue.push_back(Token::Comment(text));
            }
            Action::SetDash => self.dashes = 1,
            Action::AddDash => self.dashes += 1,
            Action::FlushDashes => {
                for _ in 0..self.dashes {
                    self.comment.push('-');
                }
                self.dashes = 0;
            }
            Action::CloseComment => {
                if self.dashes >= 2 {
                    for _ in 2..self.dashes {
                        self.comment.push('-');
                    }
                    self.dashes = 0;
                    self.apply(Action::EmitComment, c);
                } else {
                    self.apply(Action::FlushDashes, c);
                    self.comment.push('>');
                    self.state = State::CommentBody;
                }
            }
            Action::BeginCharRef(ret) => {
                self.char_ref.clear();
                self.return_state = ret;
            }
            Action::AppendCharRef => self.char_ref.push(ch()),
            Action::ResolveCharRef => {
                let text = match resolve_char_ref(&self.char_ref) {
                    Some(resolved) => resolved.to_string(),
                    None => format!("&{};", self.char_ref),
                };
                self.char_ref_output(&text);
                self.state = self.return_state;
            }
            Action::AbandonCharRef => {
                let text = format!("&{}", self.char_ref);
                self.char_ref_output(&text);
                self.state = self.return_state;
            }
            Action::ScriptEndCandidate => {
                if self.tag.kind == TagKind::End && self.tag.name == "script" {
                    self.state = State::TagName;
                } else {
                    self.apply(Action::FlushRaw, c);
                    self.state = State::ScriptData;
                }
            }
        }
    }

    fn push_attr_value(&mut self, s: &str) {
        if let Some((_, value)) = self.tag.attr.as_mut() {
            value.push_str(s);
        }
    }

    fn char_ref_output(&mut self, text: &str) {
        self.char_ref.clear();
        if self.return_state == State::Data {
            self.emit_str(text);
        } else {
            self.push_attr_value(text);
        }
    }

    fn emit_tag(&mut self) {
        self.tag.commit_attr();
        self.raw.clear();
        let tag = std::mem::replace(&mut self.tag, TagBuilder::new(TagKind::Start));
        match tag.kind {
            TagKind::Start => {
                if tag.name == "script" {
                    self.state = State::ScriptData;
                }
                self.queue.push_back(Token::StartTag {
                    name: tag.name,
                    attributes: tag.attributes,
                    self_closing: tag.self_closing,
                });
            }
            TagKind::End => self.queue.push_back(Token::EndTag { name: tag.name }),
        }
    }
}

/// `doctype html` (any case) yields `html`; anything else is not a doctype.
fn doctype_name(decl: &str) -> Option<String> {
    let prefix = decl.get(..7)?;
    if !prefix.eq_ignore_ascii_case("doctype") {
        return None;
    }
    let rest = &decl[7..];
    Some(rest.split_whitespace().next().unwrap_or("").to_ascii_lowercase())
}

/// Named subset plus decimal and hex numeric references (without the
/// leading `&` and trailing `;`).
fn resolve_char_ref(body: &str) -> Option<char> {
    match body {
        "amp" => return Some('&'),
        "lt" => return Some('<'),
        "gt" => return Some('>'),
        "quot" => return Some('"'),
        "apos" => return Some('\''),
        _ => {}
    }
    let digits = body.strip_prefix('#')?;
    let value = if let Some(hex) = digits.strip_prefix('x').or_else(|| digits.strip_prefix('X')) {
        if hex.is_empty() || !hex.chars().all(|c| c.is_ascii_hexdigit()) {
            return None;
        }
        u32::from_str_radix(hex, 16).ok()?
    } else {
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        digits.parse::<u32>().ok()?
    };
    if value == 0 {
        return None;
    }
    char::from_u32(value)
}

/// Tokenizes a complete document.
pub fn tokenize(input: &str) -> Vec<Token> {
    let mut machine = TokenizerMachine::new();
    machine.feed(input).expect("fresh stream");
    machine.end_stream().expect("fresh stream");
    drain(&mut machine)
}

/// Collects tokens until the machine suspends or finishes.
pub fn drain(machine: &mut TokenizerMachine) -> Vec<Token> {
    let mut out = Vec::new();
    while let StepResult::Emitted(t) = machine.next_token() {
        out.push(t);
    }
    out
}
