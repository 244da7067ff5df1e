//! Document tree with stable node handles and the mutation primitives used by
//! script commands.

mod builder;
mod serialize;

use std::fmt::Write as _;

use thiserror::Error;

pub use crate::tokenizer::Attributes;
pub use builder::{build, TreeBuilder};
pub use serialize::serialize;

use crate::tokenizer::escape_text;

/// Handle to a node. Never reused within one tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(usize);

impl NodeId {
    /// Handle for a raw index; it may not name a live node.
    pub fn from_index(index: usize) -> NodeId {
        NodeId(index)
    }

    pub fn index(self) -> usize {
        self.0
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Document,
    Element { name: String, attributes: Attributes },
    Text(String),
    Comment(String),
}

impl NodeKind {
    pub fn element(name: &str) -> NodeKind {
        NodeKind::Element { name: name.to_string(), attributes: Attributes::new() }
    }

    pub fn text(data: &str) -> NodeKind {
        NodeKind::Text(data.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomNode {
    pub id: NodeId,
    pub kind: NodeKind,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
}

impl DomNode {
    pub fn element_name(&self) -> Option<&str> {
        match &self.kind {
            NodeKind::Element { name, .. } => Some(name),
            _ => None,
        }
    }

    pub fn attributes(&self) -> Option<&Attributes> {
        match &self.kind {
            NodeKind::Element { attributes, .. } => Some(attributes),
            _ => None,
        }
    }

    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attributes().and_then(|a| a.get(name))
    }

    pub fn is_element(&self) -> bool {
        matches!(self.kind, NodeKind::Element { .. })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DomError {
    #[error("no such node: {0}")]
    NoSuchNode(NodeId),
    #[error("node {0} is not an element")]
    NotAnElement(NodeId),
    #[error("node {0} cannot have children")]
    InvalidParent(NodeId),
    #[error("the document root cannot be removed")]
    CannotRemoveRoot,
}

#[derive(Debug, Clone)]
pub struct DomTree {
    nodes: Vec<Option<DomNode>>,
    root: NodeId,
    generation: u64,
}

impl Default for DomTree {
    fn default() -> Self {
        Self::new()
    }
}

impl DomTree {
    /// A tree holding only the document node.
    pub fn new() -> Self {
        let root = NodeId(0);
        DomTree {
            nodes: vec![Some(DomNode { id: root, kind: NodeKind::Document, parent: None, children: Vec::new() })],
            root,
            generation: 0,
        }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    /// One past the largest id ever handed out.
    pub fn capacity(&self) -> usize {
        self.nodes.len()
    }

    pub fn live_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_some()).count()
    }

    pub fn get(&self, id: NodeId) -> Option<&DomNode> {
        self.nodes.get(id.0).and_then(|n| n.as_ref())
    }

    pub fn node(&self, id: NodeId) -> Result<&DomNode, DomError> {
        self.get(id).ok_or(DomError::NoSuchNode(id))
    }

    fn node_mut(&mut self, id: NodeId) -> Result<&mut DomNode, DomError> {
        self.nodes.get_mut(id.0).and_then(|n| n.as_mut()).ok_or(DomError::NoSuchNode(id))
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.get(id).is_some()
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        self.get(id).map_or(&[], |n| &n.children)
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.get(id).and_then(|n| n.parent)
    }

    pub fn element_name(&self, id: NodeId) -> Option<&str> {
        self.get(id).and_then(|n| n.element_name())
    }

    pub fn attr(&self, id: NodeId, name: &str) -> Option<&str> {
        self.get(id).and_then(|n| n.attr(name))
    }

    pub fn set_attribute(&mut self, node: NodeId, name: &str, value: &str) -> Result<(), DomError> {
        match &mut self.node_mut(node)?.kind {
            NodeKind::Element { attributes, .. } => attributes.set(&name.to_ascii_lowercase(), value),
            _ => return Err(DomError::NotAnElement(node)),
        }
        self.generation += 1;
        Ok(())
    }

    /// Appends a new last child. `Document` payloads are rejected.
    pub fn append_child(&mut self, parent: NodeId, kind: NodeKind) -> Result<NodeId, DomError> {
        match self.node(parent)?.kind {
            NodeKind::Text(_) | NodeKind::Comment(_) => return Err(DomError::InvalidParent(parent)),
            _ => {}
        }
        if kind == NodeKind::Document {
            return Err(DomError::InvalidParent(parent));
        }
        let id = NodeId(self.nodes.len());
        self.nodes.push(Some(DomNode { id, kind, parent: Some(parent), children: Vec::new() }));
        self.node_mut(parent)?.children.push(id);
        self.generation += 1;
        Ok(id)
    }

    /// Detaches `node` and invalidates it and all of its descendants.
    pub fn remove_node(&mut self, node: NodeId) -> Result<(), DomError> {
        if node == self.root {
            return Err(DomError::CannotRemoveRoot);
        }
        let parent = self.node(node)?.parent;
        if let Some(p) = parent {
            self.node_mut(p)?.children.retain(|&c| c != node);
        }
        let mut stack = vec![node];
        while let Some(n) = stack.pop() {
            if let Some(removed) = self.nodes[n.0].take() {
                stack.extend(removed.children);
            }
        }
        self.generation += 1;
        Ok(())
    }

    /// Pre-order ids of the subtree at `from`.
    pub fn descendants(&self, from: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![from];
        while let Some(n) = stack.pop() {
            if let Some(node) = self.get(n) {
                out.push(n);
                stack.extend(node.children.iter().rev());
            }
        }
        out
    }

    pub fn elements_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = NodeId> + 'a {
        self.descendants(self.root).into_iter().filter(move |&n| self.element_name(n) == Some(name))
    }

    /// Concatenated text of all descendant text nodes.
    pub fn text_content(&self, id: NodeId) -> String {
        self.descendants(id)
            .into_iter()
            .filter_map(|n| match &self.get(n)?.kind {
                NodeKind::Text(t) => Some(t.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Follows child indices from the root.
    pub fn resolve_path(&self, path: &[usize]) -> Option<NodeId> {
        let mut cur = self.root;
        for &i in path {
            cur = *self.children(cur).get(i)?;
        }
        Some(cur)
    }

    /// Checks parent/child consistency, acyclicity, and that text and
    /// comments are leaves.
    pub fn audit(&self) -> Result<(), String> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![self.root];
        if self.node(self.root).map_err(|e| e.to_string())?.parent.is_some() {
            return Err("root has a parent".into());
        }
        while let Some(n) = stack.pop() {
            if std::mem::replace(&mut seen[n.0], true) {
                return Err(format!("node {n} reached twice"));
            }
            let node = self.get(n).ok_or_else(|| format!("dangling child {n}"))?;
            if node.id != n {
                return Err(format!("node {n} stores id {}", node.id));
            }
            if matches!(node.kind, NodeKind::Text(_) | NodeKind::Comment(_)) && !node.children.is_empty() {
                return Err(format!("leaf node {n} has children"));
            }
            if n != self.root && node.kind == NodeKind::Document {
                return Err(format!("second document node {n}"));
            }
            for &c in &node.children {
                let child = self.get(c).ok_or_else(|| format!("dangling child {c} of {n}"))?;
                if child.parent != Some(n) {
                    return Err(format!("child {c} does not point back to {n}"));
                }
                stack.push(c);
            }
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if node.is_some() && !seen[i] {
                return Err(format!("live node {i} is unreachable"));
            }
        }
        Ok(())
    }

    /// Indented dump: two spaces per level.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let mut stack = vec![(self.root, 0usize)];
        while let Some((n, depth)) = stack.pop() {
            let Some(node) = self.get(n) else { continue };
            let pad = "  ".repeat(depth);
            match &node.kind {
                NodeKind::Document => writeln!(out, "{pad}document"),
                NodeKind::Element { name, attributes } => {
                    if attributes.is_empty() {
                        writeln!(out, "{pad}element {name}")
                    } else {
                        let attrs: Vec<String> =
                            attributes.iter().map(|(k, v)| format!("{k}=\"{}\"", escape_text(v))).collect();
                        writeln!(out, "{pad}element {name} [{}]", attrs.join(" "))
                    }
                }
                NodeKind::Text(t) => writeln!(out, "{pad}text \"{}\"", escape_text(t)),
                NodeKind::Comment(t) => writeln!(out, "{pad}comment \"{}\"", escape_text(t)),
            }
            .unwrap();
            for &c in node.children.iter().rev() {
                stack.push((c, depth + 1));
            }
        }
        out
    }
}
