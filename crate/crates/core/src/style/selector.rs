use std::fmt;
use std::ops::Add;

use crate::dom::{DomTree, NodeId};

use super::StyleError;

/// `(ids, classes, types)`, compared lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Specificity(pub u32, pub u32, pub u32);

impl Add for Specificity {
    type Output = Specificity;

    fn add(self, rhs: Specificity) -> Specificity {
        Specificity(self.0 + rhs.0, self.1 + rhs.1, self.2 + rhs.2)
    }
}

impl fmt::Display for Specificity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.0, self.1, self.2)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Compound {
    /// Lowercase type name; `None` for `*` or an omitted type.
    pub tag: Option<String>,
    pub id: Option<String>,
    pub classes: Vec<String>,
}

impl Compound {
    pub fn specificity(&self) -> Specificity {
        Specificity(self.id.is_some() as u32, self.classes.len() as u32, self.tag.is_some() as u32)
    }

    pub fn matches(&self, tree: &DomTree, node: NodeId) -> bool {
        let Some(n) = tree.get(node) else { return false };
        let Some(name) = n.element_name() else { return false };
        if self.tag.as_deref().is_some_and(|t| t != name) {
            return false;
        }
        if let Some(id) = &self.id {
            if n.attr("id") != Some(id.as_str()) {
                return false;
            }
        }
        if !self.classes.is_empty() {
            let have = n.attr("class").unwrap_or("");
            if !self.classes.iter().all(|c| have.split_ascii_whitespace().any(|h| h == c)) {
                return false;
            }
        }
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combinator {
    Descendant,
    Child,
}

/// Compounds joined by combinators; the last compound is the subject.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selector {
    compounds: Vec<Compound>,
    /// `combinators[i]` joins `compounds[i]` and `compounds[i + 1]`.
    combinators: Vec<Combinator>,
}

impl Selector {
    pub fn new(compounds: Vec<Compound>, combinators: Vec<Combinator>) -> Option<Selector> {
        if compounds.is_empty() || combinators.len() + 1 != compounds.len() {
            return None;
        }
        Some(Selector { compounds, combinators })
    }

    pub fn compounds(&self) -> &[Compound] {
        &self.compounds
    }

    pub fn combinators(&self) -> &[Combinator] {
        &self.combinators
    }

    pub fn specificity(&self) -> Specificity {
        self.compounds.iter().map(Compound::specificity).fold(Specificity::default(), Add::add)
    }

    /// Right-to-left match of the subject against `node` and the remaining
    /// compounds against its ancestors.
    pub fn matches(&self, tree: &DomTree, node: NodeId) -> Result<bool, StyleError> {
        if tree.element_name(node).is_none() {
            return Err(StyleError::NotAnElement(node));
        }
        Ok(self.match_at(tree, self.compounds.len() - 1, node))
    }

    fn match_at(&self, tree: &DomTree, index: usize, node: NodeId) -> bool {
        if !self.compounds[index].matches(tree, node) {
            return false;
        }
        if index == 0 {
            return true;
        }
        match self.combinators[index - 1] {
            Combinator::Child => element_parent(tree, node).is_some_and(|p| self.match_at(tree, index - 1, p)),
            Combinator::Descendant => {
                let mut cur = element_parent(tree, node);
                while let Some(a) = cur {
                    if self.match_at(tree, index - 1, a) {
                        return true;
                    }
                    cur = element_parent(tree, a);
                }
                false
            }
        }
    }

    /// Parses one complex selector (no commas).
    pub fn parse(text: &str) -> Result<Selector, String> {
        let chars: Vec<char> = text.trim().chars().collect();
        if chars.is_empty() {
            return Err("empty selector".into());
        }
        let mut compounds = Vec::new();
        let mut combinators = Vec::new();
        let mut i = 0;
        loop {
            let (compound, next) = parse_compound(&chars, i)?;
            compounds.push(compound);
            i = next;
            let mut saw_space = false;
            while i < chars.len() && chars[i].is_whitespace() {
                saw_space = true;
                i += 1;
            }
            if i >= chars.len() {
                break;
            }
            if chars[i] == '>' {
                i += 1;
                while i < chars.len() && chars[i].is_whitespace() {
                    i += 1;
                }
                combinators.push(Combinator::Child);
            } else if saw_space {
                combinators.push(Combinator::Descendant);
            } else {
                return Err(format!("unsupported selector syntax at '{}'", chars[i]));
            }
            if i >= chars.len() {
                return Err("dangling combinator".into());
            }
        }
        Ok(Selector { compounds, combinators })
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '-' || c == '_' || !c.is_ascii()
}

fn parse_ident(chars: &[char], mut i: usize) -> (String, usize) {
    let start = i;
    while i < chars.len() && is_ident_char(chars[i]) {
        i += 1;
    }
    (chars[start..i].iter().collect(), i)
}

fn parse_compound(chars: &[char], mut i: usize) -> Result<(Compound, usize), String> {
    let mut compound = Compound::default();
    let start = i;
    if i < chars.len() && chars[i] == '*' {
        i += 1;
    } else if i < chars.len() && is_ident_char(chars[i]) {
        let (name, next) = parse_ident(chars, i);
        compound.tag = Some(name.to_ascii_lowercase());
        i = next;
    }
    while i < chars.len() && (chars[i] == '.' || chars[i] == '#') {
        let marker = chars[i];
        let (name, next) = parse_ident(chars, i + 1);
        if name.is_empty() {
            return Err(format!("missing name after '{marker}'"));
        }
        i = next;
        if marker == '.' {
            compound.classes.push(name);
        } else if compound.id.replace(name).is_some() {
            return Err("more than one id in a compound selector".into());
        }
    }
    if i == start {
        return Err(match chars.get(i) {
            Some(c) => format!("unsupported selector syntax at '{c}'"),
            None => "empty compound selector".into(),
        });
    }
    Ok((compound, i))
}

fn element_parent(tree: &DomTree, node: NodeId) -> Option<NodeId> {
    let p = tree.parent(node)?;
    tree.element_name(p).map(|_| p)
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.compounds.iter().enumerate() {
            if i > 0 {
                f.write_str(match self.combinators[i - 1] {
                    Combinator::Descendant => " ",
                    Combinator::Child => " > ",
                })?;
            }
            match &c.tag {
                Some(t) => f.write_str(t)?,
                None if c.id.is_none() && c.classes.is_empty() => f.write_str("*")?,
                None => {}
            }
            if let Some(id) = &c.id {
                write!(f, "#{id}")?;
            }
            for class in &c.classes {
                write!(f, ".{class}")?;
            }
        }
        Ok(())
    }
}
