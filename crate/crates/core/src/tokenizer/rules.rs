//! The tokenizer's transition table: (state, character class) to actions and
//! next state. Every pair resolves to exactly one entry; a state's
//! `Otherwise` entry covers the classes it does not list explicitly.

use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum State {
    Data,
    TagOpen,
    EndTagOpen,
    TagName,
    BeforeAttributeName,
    AttributeName,
    AfterAttributeName,
    BeforeAttributeValue,
    AttributeValueDoubleQuoted,
    AttributeValueSingleQuoted,
    AttributeValueUnquoted,
    AfterAttributeValueQuoted,
    SelfClosingStartTag,
    MarkupDeclarationOpen,
    CommentStart,
    CommentBody,
    CommentEnd,
    CharacterReference,
    ScriptData,
    ScriptDataEndTagOpen,
    ScriptDataEndTagName,
}

impl State {
    pub const ALL: [State; 21] = [
        State::Data,
        State::TagOpen,
        State::EndTagOpen,
        State::TagName,
        State::BeforeAttributeName,
        State::AttributeName,
        State::AfterAttributeName,
        State::BeforeAttributeValue,
        State::AttributeValueDoubleQuoted,
        State::AttributeValueSingleQuoted,
        State::AttributeValueUnquoted,
        State::AfterAttributeValueQuoted,
        State::SelfClosingStartTag,
        State::MarkupDeclarationOpen,
        State::CommentStart,
        State::CommentBody,
        State::CommentEnd,
        State::CharacterReference,
        State::ScriptData,
        State::ScriptDataEndTagOpen,
        State::ScriptDataEndTagName,
    ];

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CharClass {
    Whitespace,
    Slash,
    LessThan,
    GreaterThan,
    Ampersand,
    Equals,
    DoubleQuote,
    SingleQuote,
    Bang,
    Hyphen,
    AsciiAlpha,
    Digit,
    Hash,
    Semicolon,
    Null,
    Other,
    /// Input exhausted and the stream has ended.
    Eof,
}

impl CharClass {
    pub const ALL: [CharClass; 17] = [
        CharClass::Whitespace,
        CharClass::Slash,
        CharClass::LessThan,
        CharClass::GreaterThan,
        CharClass::Ampersand,
        CharClass::Equals,
        CharClass::DoubleQuote,
        CharClass::SingleQuote,
        CharClass::Bang,
        CharClass::Hyphen,
        CharClass::AsciiAlpha,
        CharClass::Digit,
        CharClass::Hash,
        CharClass::Semicolon,
        CharClass::Null,
        CharClass::Other,
        CharClass::Eof,
    ];

    fn index(self) -> usize {
        self as usize
    }
}

pub fn classify(c: Option<char>) -> CharClass {
    let Some(c) = c else { return CharClass::Eof };
    match c {
        '\t' | '\n' | '\x0C' | '\r' | ' ' => CharClass::Whitespace,
        '/' => CharClass::Slash,
        '<' => CharClass::LessThan,
        '>' => CharClass::GreaterThan,
        '&' => CharClass::Ampersand,
        '=' => CharClass::Equals,
        '"' => CharClass::DoubleQuote,
        '\'' => CharClass::SingleQuote,
        '!' => CharClass::Bang,
        '-' => CharClass::Hyphen,
        '#' => CharClass::Hash,
        ';' => CharClass::Semicolon,
        '\0' => CharClass::Null,
        c if c.is_ascii_alphabetic() => CharClass::AsciiAlpha,
        c if c.is_ascii_digit() => CharClass::Digit,
        _ => CharClass::Other,
    }
}

/// Steps a rule performs, in order. Some inspect buffered state and pick the
/// next state themselves (noted per variant).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    EmitChar,
    EmitEof,
    /// Starts buffering raw tag text with `<`.
    BeginTag,
    AppendRaw,
    ClearRaw,
    /// Re-emits buffered raw tag text as characters.
    FlushRaw,
    CreateStartTag,
    CreateEndTag,
    AppendTagName,
    StartAttr,
    AppendAttrName,
    AppendAttrValue,
    SetSelfClosing,
    /// Emits the tag; a `script` start tag switches to script data.
    EmitTag,
    ClearDecl,
    /// May switch to `CommentStart` once `--` is seen.
    AppendDecl,
    /// `>` inside a markup declaration: doctype or bogus comment.
    CloseDecl,
    /// End of stream inside a markup declaration.
    DeclEof,
    AppendComment,
    EmitComment,
    SetDash,
    AddDash,
    FlushDashes,
    /// `>` after dashes: closes the comment with two or more, else continues
    /// the body.
    CloseComment,
    BeginCharRef(State),
    AppendCharRef,
    /// `;` terminator. Returns to the saved state.
    ResolveCharRef,
    /// Unterminated reference, output verbatim. Returns to the saved state.
    AbandonCharRef,
    /// Delimiter after `</name` in script data: continue as a tag if the
    /// name is `script`, else re-emit as text.
    ScriptEndCandidate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rule {
    pub actions: &'static [Action],
    /// `None` keeps the current state (unless an action changes it).
    pub next: Option<State>,
    /// `false` reprocesses the same character in the next state.
    pub consume: bool,
}

#[derive(Debug, Clone, Copy)]
pub enum Classes {
    Only(&'static [CharClass]),
    Otherwise,
}

#[derive(Debug, Clone, Copy)]
pub struct Entry {
    pub state: State,
    pub classes: Classes,
    pub rule: Rule,
}

const fn on(
    state: State,
    classes: &'static [CharClass],
    actions: &'static [Action],
    next: Option<State>,
    consume: bool,
) -> Entry {
    Entry { state, classes: Classes::Only(classes), rule: Rule { actions, next, consume } }
}

const fn otherwise(state: State, actions: &'static [Action], next: Option<State>, consume: bool) -> Entry {
    Entry { state, classes: Classes::Otherwise, rule: Rule { actions, next, consume } }
}

use Action::*;
use CharClass::*;
use State::*;

const C: bool = true;
const R: bool = false;

pub const ENTRIES: &[Entry] = &[
    on(Data, &[Ampersand], &[BeginCharRef(Data)], Some(CharacterReference), C),
    on(Data, &[LessThan], &[BeginTag], Some(TagOpen), C),
    on(Data, &[Eof], &[EmitEof], None, R),
    otherwise(Data, &[EmitChar], None, C),
    //
    on(TagOpen, &[Bang], &[AppendRaw, ClearDecl], Some(MarkupDeclarationOpen), C),
    on(TagOpen, &[Slash], &[AppendRaw], Some(EndTagOpen), C),
    on(TagOpen, &[AsciiAlpha], &[AppendRaw, CreateStartTag, AppendTagName], Some(TagName), C),
    on(TagOpen, &[Eof], &[FlushRaw], Some(Data), R),
    otherwise(TagOpen, &[FlushRaw], Some(Data), R),
    //
    on(EndTagOpen, &[AsciiAlpha], &[AppendRaw, CreateEndTag, AppendTagName], Some(TagName), C),
    on(EndTagOpen, &[GreaterThan], &[ClearRaw], Some(Data), C),
    on(EndTagOpen, &[Eof], &[FlushRaw], Some(Data), R),
    otherwise(EndTagOpen, &[FlushRaw], Some(Data), R),
    //
    on(TagName, &[Whitespace], &[AppendRaw], Some(BeforeAttributeName), C),
    on(TagName, &[Slash], &[AppendRaw], Some(SelfClosingStartTag), C),
    on(TagName, &[GreaterThan], &[EmitTag], Some(Data), C),
    on(TagName, &[Eof], &[FlushRaw], Some(Data), R),
    otherwise(TagName, &[AppendRaw, AppendTagName], None, C),
    //
    on(BeforeAttributeName, &[Whitespace], &[AppendRaw], None, C),
    on(BeforeAttributeName, &[Slash], &[AppendRaw], Some(SelfClosingStartTag), C),
    on(BeforeAttributeName, &[GreaterThan], &[EmitTag], Some(Data), C),
    on(BeforeAttributeName, &[Eof], &[FlushRaw], Some(Data), R),
    otherwise(BeforeAttributeName, &[AppendRaw, StartAttr, AppendAttrName], Some(AttributeName), C),
    //
    on(AttributeName, &[Whitespace], &[AppendRaw], Some(AfterAttributeName), C),
    on(AttributeName, &[Slash], &[AppendRaw], Some(SelfClosingStartTag), C),
    on(AttributeName, &[Equals], &[AppendRaw], Some(BeforeAttributeValue), C),
    on(AttributeName, &[GreaterThan], &[EmitTag], Some(Data), C),
    on(AttributeName, &[Eof], &[FlushRaw], Some(Data), R),
    otherwise(AttributeName, &[AppendRaw, AppendAttrName], None, C),
    //
    on(AfterAttributeName, &[Whitespace], &[AppendRaw], None, C),
    on(AfterAttributeName, &[Slash], &[AppendRaw], Some(SelfClosingStartTag), C),
    on(AfterAttributeName, &[Equals], &[AppendRaw], Some(BeforeAttributeValue), C),
    on(AfterAttributeName, &[GreaterThan], &[EmitTag], Some(Data), C),
    on(AfterAttributeName, &[Eof], &[FlushRaw], Some(Data), R),
    otherwise(AfterAttributeName, &[AppendRaw, StartAttr, AppendAttrName], Some(AttributeName), C),
    //
    on(BeforeAttributeValue, &[Whitespace], &[AppendRaw], None, C),
    on(BeforeAttributeValue, &[DoubleQuote], &[AppendRaw], Some(AttributeValueDoubleQuoted), C),
    on(BeforeAttributeValue, &[SingleQuote], &[AppendRaw], Some(AttributeValueSingleQuoted), C),
    on(BeforeAttributeValue, &[GreaterThan], &[EmitTag], Some(Data), C),
    on(BeforeAttributeValue, &[Eof], &[FlushRaw], Some(Data), R),
    otherwise(BeforeAttributeValue, &[], Some(AttributeValueUnquoted), R),
    //
    on(AttributeValueDoubleQuoted, &[DoubleQuote], &[AppendRaw], Some(AfterAttributeValueQuoted), C),
    on(
        AttributeValueDoubleQuoted,
        &[Ampersand],
        &[AppendRaw, BeginCharRef(AttributeValueDoubleQuoted)],
        Some(CharacterReference),
        C,
    ),
    on(AttributeValueDoubleQuoted, &[Eof], &[FlushRaw], Some(Data), R),
    otherwise(AttributeValueDoubleQuoted, &[AppendRaw, AppendAttrValue], None, C),
    //
    on(AttributeValueSingleQuoted, &[SingleQuote], &[AppendRaw], Some(AfterAttributeValueQuoted), C),
    on(
        AttributeValueSingleQuoted,
        &[Ampersand],
        &[AppendRaw, BeginCharRef(AttributeValueSingleQuoted)],
        Some(CharacterReference),
        C,
    ),
    on(AttributeValueSingleQuoted, &[Eof], &[FlushRaw], Some(Data), R),
    otherwise(AttributeValueSingleQuoted, &[AppendRaw, AppendAttrValue], None, C),
    //
    on(AttributeValueUnquoted, &[Whitespace], &[AppendRaw], Some(BeforeAttributeName), C),
    on(
        AttributeValueUnquoted,
        &[Ampersand],
        &[AppendRaw, BeginCharRef(AttributeValueUnquoted)],
        Some(CharacterReference),
        C,
    ),
    on(AttributeValueUnquoted, &[GreaterThan], &[EmitTag], Some(Data), C),
    on(AttributeValueUnquoted, &[Eof], &[FlushRaw], Some(Data), R),
    otherwise(AttributeValueUnquoted, &[AppendRaw, AppendAttrValue], None, C),
    //
    on(AfterAttributeValueQuoted, &[Whitespace], &[AppendRaw], Some(BeforeAttributeName), C),
    on(AfterAttributeValueQuoted, &[Slash], &[AppendRaw], Some(SelfClosingStartTag), C),
    on(AfterAttributeValueQuoted, &[GreaterThan], &[EmitTag], Some(Data), C),
    on(AfterAttributeValueQuoted, &[Eof], &[FlushRaw], Some(Data), R),
    otherwise(AfterAttributeValueQuoted, &[], Some(BeforeAttributeName), R),
    //
    on(SelfClosingStartTag, &[GreaterThan], &[SetSelfClosing, EmitTag], Some(Data), C),
    on(SelfClosingStartTag, &[Eof], &[FlushRaw], Some(Data), R),
    otherwise(SelfClosingStartTag, &[], Some(BeforeAttributeName), R),
    //
    on(MarkupDeclarationOpen, &[GreaterThan], &[CloseDecl], Some(Data), C),
    on(MarkupDeclarationOpen, &[Eof], &[DeclEof], Some(Data), R),
    otherwise(MarkupDeclarationOpen, &[AppendRaw, AppendDecl], None, C),
    //
    on(CommentStart, &[Hyphen], &[SetDash], Some(CommentEnd), C),
    on(CommentStart, &[GreaterThan], &[EmitComment], Some(Data), C),
    on(CommentStart, &[Eof], &[EmitComment], Some(Data), R),
    otherwise(CommentStart, &[], Some(CommentBody), R),
    //
    on(CommentBody, &[Hyphen], &[SetDash], Some(CommentEnd), C),
    on(CommentBody, &[Eof], &[EmitComment], Some(Data), R),
    otherwise(CommentBody, &[AppendComment], None, C),
    //
    on(CommentEnd, &[Hyphen], &[AddDash], None, C),
    on(CommentEnd, &[GreaterThan], &[CloseComment], Some(Data), C),
    on(CommentEnd, &[Eof], &[FlushDashes, EmitComment], Some(Data), R),
    otherwise(CommentEnd, &[FlushDashes], Some(CommentBody), R),
    //
    on(CharacterReference, &[AsciiAlpha, Digit, Hash], &[AppendRaw, AppendCharRef], None, C),
    on(CharacterReference, &[Semicolon], &[AppendRaw, ResolveCharRef], None, C),
    on(CharacterReference, &[Eof], &[AbandonCharRef], None, R),
    otherwise(CharacterReference, &[AbandonCharRef], None, R),
    //
    on(ScriptData, &[LessThan], &[BeginTag], Some(ScriptDataEndTagOpen), C),
    on(ScriptData, &[Eof], &[EmitEof], None, R),
    otherwise(ScriptData, &[EmitChar], None, C),
    //
    on(ScriptDataEndTagOpen, &[Slash], &[AppendRaw, CreateEndTag], Some(ScriptDataEndTagName), C),
    on(ScriptDataEndTagOpen, &[Eof], &[FlushRaw], Some(ScriptData), R),
    otherwise(ScriptDataEndTagOpen, &[FlushRaw], Some(ScriptData), R),
    //
    on(ScriptDataEndTagName, &[AsciiAlpha], &[AppendRaw, AppendTagName], None, C),
    on(ScriptDataEndTagName, &[Whitespace, Slash, GreaterThan], &[ScriptEndCandidate], None, R),
    on(ScriptDataEndTagName, &[Eof], &[FlushRaw], Some(ScriptData), R),
    otherwise(ScriptDataEndTagName, &[FlushRaw], Some(ScriptData), R),
];

/// Dense lookup compiled from [`ENTRIES`].
pub struct RuleTable {
    cells: Vec<Option<Rule>>,
}

/// Problems found while compiling the entry list.
#[derive(Debug, Default, PartialEq, Eq)]
pub struct TableReport {
    pub gaps: Vec<(State, CharClass)>,
    pub duplicates: Vec<(State, CharClass)>,
}

impl RuleTable {
    pub fn compile(entries: &[Entry]) -> (RuleTable, TableReport) {
        let width = CharClass::ALL.len();
        let mut explicit: Vec<Option<Rule>> = vec![None; State::ALL.len() * width];
        let mut fallback: Vec<Option<Rule>> = vec![None; State::ALL.len()];
        let mut report = TableReport::default();
        for e in entries {
            match e.classes {
                Classes::Only(classes) => {
                    for &class in classes {
                        let cell = &mut explicit[e.state.index() * width + class.index()];
                        if cell.is_some() {
                            report.duplicates.push((e.state, class));
                        }
                        *cell = Some(e.rule);
                    }
                }
                Classes::Otherwise => {
                    let cell = &mut fallback[e.state.index()];
                    if cell.is_some() {
                        report.duplicates.push((e.state, CharClass::Other));
                    }
                    *cell = Some(e.rule);
                }
            }
        }
        let mut cells = explicit;
        for state in State::ALL {
            for class in CharClass::ALL {
                let cell = &mut cells[state.index() * width + class.index()];
                if cell.is_none() {
                    *cell = fallback[state.index()];
                }
                if cell.is_none() {
                    report.gaps.push((state, class));
                }
            }
        }
        (RuleTable { cells }, report)
    }

    pub fn get(&self, state: State, class: CharClass) -> Option<&Rule> {
        self.cells[state.index() * CharClass::ALL.len() + class.index()].as_ref()
    }

    pub fn rule(&self, state: State, class: CharClass) -> &Rule {
        self.get(state, class).expect("rule table is total")
    }
}

pub fn table() -> &'static RuleTable {
    static TABLE: OnceLock<RuleTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let (table, report) = RuleTable::compile(ENTRIES);
        assert_eq!(report, TableReport::default(), "tokenizer rule table is malformed");
        table
    })
}
