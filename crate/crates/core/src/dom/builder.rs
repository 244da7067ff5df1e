//! Token-to-tree construction with a small, fixed set of recovery rules:
//!
//! - at end of stream every open element is closed;
//! - an end tag with no matching open element is ignored;
//! - an end tag matching a non-innermost open element closes everything
//!   above it as well;
//! - content before `<html>`/`<body>` synthesizes both.
//!
//! `</html>` and `</body>` never close anything, so trailing content still
//! lands in the body.

use super::{DomTree, NodeId, NodeKind};
use crate::tokenizer::Token;

const VOID_ELEMENTS: &[&str] =
    &["area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "source", "track", "wbr"];

const HEAD_CONTENT: &[&str] = &["title", "style", "link", "meta", "script", "base"];

pub struct TreeBuilder {
    tree: DomTree,
    open: Vec<NodeId>,
    html: Option<NodeId>,
    head: Option<NodeId>,
    body: Option<NodeId>,
    finished: bool,
}

impl Default for TreeBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl TreeBuilder {
    pub fn new() -> Self {
        TreeBuilder { tree: DomTree::new(), open: Vec::new(), html: None, head: None, body: None, finished: false }
    }

    pub fn tree(&self) -> &DomTree {
        &self.tree
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    fn current(&self) -> NodeId {
        self.open.last().copied().unwrap_or(self.tree.root)
    }

    fn insert(&mut self, parent: NodeId, kind: NodeKind) -> NodeId {
        self.tree.append_child(parent, kind).expect("builder only inserts under elements or the document")
    }

    fn ensure_html(&mut self) -> NodeId {
        if let Some(html) = self.html {
            return html;
        }
        let html = self.insert(self.tree.root, NodeKind::element("html"));
        self.open.push(html);
        self.html = Some(html);
        html
    }

    fn close_head(&mut self) {
        if let Some(head) = self.head {
            if let Some(pos) = self.open.iter().position(|&n| n == head) {
                self.open.truncate(pos);
            }
        }
    }

    fn ensure_body(&mut self) {
        if self.body.is_some() {
            return;
        }
        let html = self.ensure_html();
        self.close_head();
        let body = self.insert(html, NodeKind::element("body"));
        self.open.push(body);
        self.body = Some(body);
    }

    fn in_head(&self) -> bool {
        self.head.is_some() && self.head == self.open.last().copied()
    }

    fn at_top_level(&self) -> bool {
        let cur = self.current();
        cur == self.tree.root || Some(cur) == self.html
    }

    /// Feeds one token. Returns the script element when a `</script>` closes
    /// one, so the caller can run it before tokenizing further.
    pub fn process(&mut self, token: Token) -> Option<NodeId> {
        if self.finished {
            return None;
        }
        match token {
            Token::Doctype(_) => None,
            Token::Comment(text) => {
                let cur = self.current();
                self.insert(cur, NodeKind::Comment(text));
                None
            }
            Token::Character(c) => {
                self.character(c);
                None
            }
            Token::StartTag { name, attributes, self_closing } => {
                self.start_tag(name, attributes, self_closing);
                None
            }
            Token::EndTag { name } => self.end_tag(&name),
            Token::EndOfStream => {
                self.open.clear();
                self.finished = true;
                None
            }
        }
    }

    fn character(&mut self, c: char) {
        if self.body.is_none() && (self.at_top_level() || self.in_head()) {
            if c.is_ascii_whitespace() {
                return;
            }
            self.ensure_body();
        }
        let cur = self.current();
        if let Some(&last) = self.tree.children(cur).last() {
            if let Some(Some(node)) = self.tree.nodes.get_mut(last.index()) {
                if let NodeKind::Text(data) = &mut node.kind {
                    data.push(c);
                    return;
                }
            }
        }
        self.insert(cur, NodeKind::Text(c.to_string()));
    }

    fn start_tag(&mut self, name: String, attributes: super::Attributes, self_closing: bool) {
        match name.as_str() {
            "html" => {
                let html = self.ensure_html();
                self.merge_attributes(html, &attributes);
                return;
            }
            "head" => {
                if self.body.is_none() && self.head.is_none() {
                    let html = self.ensure_html();
                    let head = self.insert(html, NodeKind::element("head"));
                    self.open.push(head);
                    self.head = Some(head);
                }
                return;
            }
            "body" => {
                self.ensure_body();
                if let Some(body) = self.body {
                    self.merge_attributes(body, &attributes);
                }
                return;
            }
            _ => {}
        }
        if self.body.is_none() && !(self.in_head() && HEAD_CONTENT.contains(&name.as_str())) {
            let in_open_head_content = self.head.is_some_and(|h| self.open.contains(&h)) && !self.in_head();
            if !in_open_head_content {
                self.ensure_body();
            }
        }
        let cur = self.current();
        let void = VOID_ELEMENTS.contains(&name.as_str());
        let id = self.insert(cur, NodeKind::Element { name, attributes });
        if !void && !self_closing {
            self.open.push(id);
        }
    }

    /// Adds attributes the element does not already have.
    fn merge_attributes(&mut self, node: NodeId, attributes: &super::Attributes) {
        for (k, v) in attributes.iter() {
            if self.tree.attr(node, k).is_none() {
                self.tree.set_attribute(node, k, v).expect("html and body are elements");
            }
        }
    }

    fn end_tag(&mut self, name: &str) -> Option<NodeId> {
        match name {
            "html" | "body" => return None,
            "head" => {
                self.close_head();
                return None;
            }
            _ => {}
        }
        let pos = self.open.iter().rposition(|&n| self.tree.element_name(n) == Some(name))?;
        if Some(self.open[pos]) == self.html || Some(self.open[pos]) == self.body {
            return None;
        }
        let closed = self.open[pos];
        self.open.truncate(pos);
        (name == "script").then_some(closed)
    }

    pub fn finish(mut self) -> DomTree {
        self.open.clear();
        self.tree
    }
}

/// Builds a tree from a complete token stream. Total: every token sequence
/// produces a tree.
pub fn build(tokens: impl IntoIterator<Item = Token>) -> DomTree {
    let mut builder = TreeBuilder::new();
    for t in tokens {
        builder.process(t);
    }
    builder.finish()
}
