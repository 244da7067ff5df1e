//! Forgiving parser for the supported CSS subset. Anything it does not
//! understand is skipped and reported as a diagnostic.

use std::fmt;

use super::selector::Selector;
use super::values::{Color, Display};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Property {
    Display,
    Width,
    Height,
    MarginTop,
    MarginRight,
    MarginBottom,
    MarginLeft,
    PaddingTop,
    PaddingRight,
    PaddingBottom,
    PaddingLeft,
    Color,
    BackgroundColor,
    FontSize,
}

impl Property {
    pub fn name(self) -> &'static str {
        match self {
            Property::Display => "display",
            Property::Width => "width",
            Property::Height => "height",
            Property::MarginTop => "margin-top",
            Property::MarginRight => "margin-right",
            Property::MarginBottom => "margin-bottom",
            Property::MarginLeft => "margin-left",
            Property::PaddingTop => "padding-top",
            Property::PaddingRight => "padding-right",
            Property::PaddingBottom => "padding-bottom",
            Property::PaddingLeft => "padding-left",
            Property::Color => "color",
            Property::BackgroundColor => "background-color",
            Property::FontSize => "font-size",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Display(Display),
    Auto,
    Px(f64),
    Em(f64),
    Color(Color),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Display(d) => d.fmt(f),
            Value::Auto => f.write_str("auto"),
            Value::Px(v) => write!(f, "{v}px"),
            Value::Em(v) => write!(f, "{v}em"),
            Value::Color(c) => c.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Declaration {
    pub property: Property,
    pub value: Value,
}

impl fmt::Display for Declaration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.property.name(), self.value)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub selector: Selector,
    pub declarations: Vec<Declaration>,
    /// Unique across every sheet in a cascade.
    pub source_order: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedSheet {
    pub rules: Vec<Rule>,
    pub diagnostics: Vec<Diagnostic>,
}

pub fn parse_stylesheet(text: &str) -> ParsedSheet {
    parse_stylesheet_from(text, 0)
}

/// Like [`parse_stylesheet`], numbering rules from `first_order` so several
/// sheets can share one cascade.
pub fn parse_stylesheet_from(text: &str, first_order: usize) -> ParsedSheet {
    let text = strip_comments(text);
    let mut sheet = ParsedSheet::default();
    let mut diag = |m: String| sheet.diagnostics.push(Diagnostic { message: m });
    let mut rules = Vec::new();
    let mut order = first_order;
    let mut rest = text.as_str();
    loop {
        rest = rest.trim_start();
        if rest.is_empty() {
            break;
        }
        if rest.starts_with('@') {
            diag(format!("unsupported at-rule: {}", rest.split_whitespace().next().unwrap_or("@")));
            rest = skip_at_rule(rest);
            continue;
        }
        let Some(open) = rest.find('{') else {
            diag(format!("expected '{{' after '{}'", rest.trim()));
            break;
        };
        let prelude = &rest[..open];
        let (body, after) = match matching_close(&rest[open..]) {
            Some(close) => (&rest[open + 1..open + close], &rest[open + close + 1..]),
            None => {
                diag("unterminated rule block".into());
                (&rest[open + 1..], "")
            }
        };
        rest = after;
        let mut selectors = Vec::new();
        let mut bad = None;
        for part in prelude.split(',') {
            match Selector::parse(part) {
                Ok(s) => selectors.push(s),
                Err(e) => bad = Some(format!("dropped rule '{}': {e}", prelude.trim())),
            }
        }
        if let Some(msg) = bad {
            diag(msg);
            continue;
        }
        let declarations = parse_declarations_into(body, &mut diag);
        for selector in selectors {
            rules.push(Rule { selector, declarations: declarations.clone(), source_order: order });
            order += 1;
        }
    }
    sheet.rules = rules;
    sheet
}

/// Parses the body of a `style` attribute or rule block.
pub fn parse_declarations(body: &str) -> (Vec<Declaration>, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    let decls = parse_declarations_into(&strip_comments(body), &mut |m| diags.push(Diagnostic { message: m }));
    (decls, diags)
}

fn parse_declarations_into(body: &str, diag: &mut impl FnMut(String)) -> Vec<Declaration> {
    let mut out = Vec::new();
    for raw in body.split(';') {
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let Some((name, value)) = raw.split_once(':') else {
            diag(format!("declaration without ':': '{raw}'"));
            continue;
        };
        let name = name.trim().to_ascii_lowercase();
        let value = value.trim().to_ascii_lowercase();
        match parse_property(&name, &value) {
            Ok(decls) => out.extend(decls),
            Err(e) => diag(e),
        }
    }
    out
}

fn parse_property(name: &str, value: &str) -> Result<Vec<Declaration>, String> {
    let one = |property, value| Ok(vec![Declaration { property, value }]);
    let invalid = || format!("invalid value for {name}: '{value}'");
    match name {
        "display" => one(Property::Display, Value::Display(Display::parse(value).ok_or_else(invalid)?)),
        "width" | "height" => {
            let v = if value == "auto" { Value::Auto } else { parse_length(value).ok_or_else(invalid)? };
            one(if name == "width" { Property::Width } else { Property::Height }, v)
        }
        "font-size" => match parse_length(value) {
            Some(Value::Px(v)) | Some(Value::Em(v)) if v == 0.0 => Err(invalid()),
            Some(v) => one(Property::FontSize, v),
            None => Err(invalid()),
        },
        "color" => one(Property::Color, Value::Color(Color::parse(value).ok_or_else(invalid)?)),
        "background-color" | "background" => {
            one(Property::BackgroundColor, Value::Color(Color::parse(value).ok_or_else(invalid)?))
        }
        "margin" | "padding" => {
            let parts: Option<Vec<Value>> = value.split_whitespace().map(parse_length).collect();
            let parts = parts.ok_or_else(invalid)?;
            let [top, right, bottom, left] = match parts.as_slice() {
                [a] => [*a, *a, *a, *a],
                [a, b] => [*a, *b, *a, *b],
                [a, b, c] => [*a, *b, *c, *b],
                [a, b, c, d] => [*a, *b, *c, *d],
                _ => return Err(invalid()),
            };
            let props = if name == "margin" {
                [Property::MarginTop, Property::MarginRight, Property::MarginBottom, Property::MarginLeft]
            } else {
                [Property::PaddingTop, Property::PaddingRight, Property::PaddingBottom, Property::PaddingLeft]
            };
            Ok(props
                .into_iter()
                .zip([top, right, bottom, left])
                .map(|(property, value)| Declaration { property, value })
                .collect())
        }
        _ => {
            let property = match name {
                "margin-top" => Property::MarginTop,
                "margin-right" => Property::MarginRight,
                "margin-bottom" => Property::MarginBottom,
                "margin-left" => Property::MarginLeft,
                "padding-top" => Property::PaddingTop,
                "padding-right" => Property::PaddingRight,
                "padding-bottom" => Property::PaddingBottom,
                "padding-left" => Property::PaddingLeft,
                _ => return Err(format!("unknown property '{name}'")),
            };
            one(property, parse_length(value).ok_or_else(invalid)?)
        }
    }
}

/// Non-negative `px`/`em` length, or unitless zero.
fn parse_length(value: &str) -> Option<Value> {
    let number = |s: &str| -> Option<f64> {
        let v: f64 = s.parse().ok()?;
        (v.is_finite() && v >= 0.0).then_some(v)
    };
    if value == "0" {
        return Some(Value::Px(0.0));
    }
    if let Some(n) = value.strip_suffix("px") {
        return number(n).map(Value::Px);
    }
    if let Some(n) = value.strip_suffix("em") {
        return number(n).map(Value::Em);
    }
    None
}

fn strip_comments(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(start) = rest.find("/*") {
        out.push_str(&rest[..start]);
        match rest[start + 2..].find("*/") {
            Some(end) => rest = &rest[start + 2 + end + 2..],
            None => return out,
        }
        out.push(' ');
    }
    out.push_str(rest);
    out
}

/// Byte offset of the `}` closing the block that opens at offset 0.
fn matching_close(s: &str) -> Option<usize> {
    let mut depth = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

fn skip_at_rule(s: &str) -> &str {
    let semi = s.find(';');
    let brace = s.find('{');
    match (semi, brace) {
        (Some(sc), Some(b)) if sc < b => &s[sc + 1..],
        (_, Some(b)) => match matching_close(&s[b..]) {
            Some(close) => &s[b + close + 1..],
            None => "",
        },
        (Some(sc), None) => &s[sc + 1..],
        (None, None) => "",
    }
}
