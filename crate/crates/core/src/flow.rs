//! Flow tree: block and inline containers built from the styled DOM.
//!
//! Flows live in an arena addressed by `usize`. Rebuilding a subtree after a
//! mutation reuses the subtree root's index and appends any new descendants,
//! so indices held elsewhere stay valid until the node dies.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::dom::{DomTree, NodeId, NodeKind};
use crate::layout::LayoutMetrics;
use crate::scheduler::{SmallBuffer, TraversalTree};
use crate::style::{ComputedStyle, Display, StyleMap};
use crate::tokenizer::escape_text;

/// Generated content placed before a list item's content.
pub const MARKER_GLYPH: &str = "\u{2022} ";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlowError {
    #[error("no computed style for element {node}")]
    MissingStyle { node: NodeId },
    #[error("node {0} is not in the document")]
    NoSuchNode(NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowKind {
    Block,
    Inline,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Fragment {
    Text { text: String, style: ComputedStyle, dom_origin: NodeId },
    Marker { glyph: String, style: ComputedStyle, dom_origin: NodeId },
}

impl Fragment {
    pub fn style(&self) -> &ComputedStyle {
        match self {
            Fragment::Text { style, .. } | Fragment::Marker { style, .. } => style,
        }
    }

    pub fn text(&self) -> &str {
        match self {
            Fragment::Text { text, .. } => text,
            Fragment::Marker { glyph, .. } => glyph,
        }
    }

    pub fn dom_origin(&self) -> NodeId {
        match self {
            Fragment::Text { dom_origin, .. } | Fragment::Marker { dom_origin, .. } => *dom_origin,
        }
    }

    pub fn is_marker(&self) -> bool {
        matches!(self, Fragment::Marker { .. })
    }

    fn same_shape(&self, other: &Fragment) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
            && self.dom_origin() == other.dom_origin()
            && self.text() == other.text()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Flow {
    pub kind: FlowKind,
    pub style: ComputedStyle,
    /// `None` for anonymous flows.
    pub dom_origin: Option<NodeId>,
    pub children: SmallBuffer<usize>,
    pub fragments: Vec<Fragment>,
    pub parent: Option<usize>,
}

impl Flow {
    fn new(kind: FlowKind, style: ComputedStyle, dom_origin: Option<NodeId>, parent: Option<usize>) -> Flow {
        Flow { kind, style, dom_origin, children: SmallBuffer::new(), fragments: Vec::new(), parent }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DirtyBits {
    pub self_dirty: bool,
    pub descendant_dirty: bool,
}

#[derive(Debug, Clone)]
pub struct FlowTree {
    flows: Vec<Flow>,
    alive: Vec<bool>,
    sizes: Vec<usize>,
    root: usize,
    pub(crate) metrics: Vec<LayoutMetrics>,
    dirty: Vec<DirtyBits>,
    by_origin: HashMap<NodeId, usize>,
}

/// Builds the flow tree for the whole document.
pub fn build_flow_tree(tree: &DomTree, styles: &StyleMap) -> Result<FlowTree, FlowError> {
    let root_style = styles.get(tree.root()).cloned().unwrap_or_else(ComputedStyle::initial);
    let flows = build_block(tree, styles, tree.root(), root_style)?;
    let n = flows.len();
    let mut ft = FlowTree {
        alive: vec![true; n],
        sizes: vec![0; n],
        root: 0,
        metrics: vec![LayoutMetrics::default(); n],
        dirty: vec![DirtyBits::default(); n],
        by_origin: HashMap::new(),
        flows,
    };
    for (i, f) in ft.flows.iter().enumerate() {
        if let Some(o) = f.dom_origin {
            ft.by_origin.insert(o, i);
        }
    }
    ft.recompute_sizes();
    Ok(ft)
}

/// Builds the flows for block-level `node` into a fresh arena rooted at 0.
fn build_block(tree: &DomTree, styles: &StyleMap, node: NodeId, style: ComputedStyle) -> Result<Vec<Flow>, FlowError> {
    let mut flows = Vec::new();
    push_block(tree, styles, node, style, None, &mut flows)?;
    Ok(flows)
}

enum Item {
    Fragment(Fragment),
    Block(NodeId, ComputedStyle),
}

fn push_block(
    tree: &DomTree,
    styles: &StyleMap,
    node: NodeId,
    style: ComputedStyle,
    parent: Option<usize>,
    flows: &mut Vec<Flow>,
) -> Result<usize, FlowError> {
    let index = flows.len();
    flows.push(Flow::new(FlowKind::Block, style.clone(), Some(node), parent));
    let mut items = Vec::new();
    if style.display == Display::ListItem {
        items.push(Item::Fragment(Fragment::Marker {
            glyph: MARKER_GLYPH.to_string(),
            style: style.anonymous_inline(),
            dom_origin: node,
        }));
    }
    collect_content(tree, styles, node, &style, &mut items)?;

    let mut run: Vec<Fragment> = Vec::new();
    let flush = |run: &mut Vec<Fragment>, flows: &mut Vec<Flow>| {
        if run.is_empty() {
            return;
        }
        let i = flows.len();
        let mut f = Flow::new(FlowKind::Inline, style.anonymous_inline(), None, Some(index));
        f.fragments = std::mem::take(run);
        flows.push(f);
        flows[index].children.push(i);
    };
    for item in items {
        match item {
            Item::Fragment(f) => run.push(f),
            Item::Block(child, child_style) => {
                flush(&mut run, flows);
                let c = push_block(tree, styles, child, child_style, Some(index), flows)?;
                flows[index].children.push(c);
            }
        }
    }
    flush(&mut run, flows);
    Ok(index)
}

/// Inline content of `node` in document order, with block descendants of
/// inline elements hoisted into the same list.
fn collect_content(
    tree: &DomTree,
    styles: &StyleMap,
    node: NodeId,
    style: &ComputedStyle,
    items: &mut Vec<Item>,
) -> Result<(), FlowError> {
    for &child in tree.children(node) {
        let Some(n) = tree.get(child) else { continue };
        match &n.kind {
            NodeKind::Text(t) => {
                let text = collapse_whitespace(t);
                if !text.is_empty() {
                    items.push(Item::Fragment(Fragment::Text {
                        text,
                        style: style.anonymous_inline(),
                        dom_origin: child,
                    }));
                }
            }
            NodeKind::Element { .. } => {
                let s = styles.get(child).ok_or(FlowError::MissingStyle { node: child })?;
                match s.display {
                    Display::None => {}
                    Display::Block | Display::ListItem => items.push(Item::Block(child, s.clone())),
                    Display::Inline => collect_content(tree, styles, child, s, items)?,
                }
            }
            NodeKind::Comment(_) | NodeKind::Document => {}
        }
    }
    Ok(())
}

/// Whitespace runs become one space; leading and trailing space is dropped.
pub fn collapse_whitespace(text: &str) -> String {
    text.split_ascii_whitespace().collect::<Vec<_>>().join(" ")
}

impl FlowTree {
    pub fn root(&self) -> usize {
        self.root
    }

    pub fn capacity(&self) -> usize {
        self.flows.len()
    }

    /// Number of live flows.
    pub fn len(&self) -> usize {
        self.sizes[self.root]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_alive(&self, flow: usize) -> bool {
        self.alive.get(flow).copied().unwrap_or(false)
    }

    pub fn flow(&self, flow: usize) -> &Flow {
        &self.flows[flow]
    }

    pub fn metrics(&self, flow: usize) -> &LayoutMetrics {
        &self.metrics[flow]
    }

    pub fn dirty(&self, flow: usize) -> DirtyBits {
        self.dirty[flow]
    }

    /// The flow generated by element `node`, if it is block-level and displayed.
    pub fn flow_for(&self, node: NodeId) -> Option<usize> {
        self.by_origin.get(&node).copied()
    }

    /// Live flows in depth-first pre-order.
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = vec![self.root];
        while let Some(f) = stack.pop() {
            out.push(f);
            stack.extend(self.flows[f].children.iter().rev());
        }
        out
    }

    /// Depth of every live flow, root at 0.
    pub fn depth(&self, flow: usize) -> usize {
        let mut d = 0;
        let mut cur = self.flows[flow].parent;
        while let Some(p) = cur {
            d += 1;
            cur = self.flows[p].parent;
        }
        d
    }

    /// Absolute top-left of a flow's border box. Layout stores positions
    /// relative to the parent flow.
    pub fn absolute_position(&self, flow: usize) -> (f64, f64) {
        let (mut x, mut y) = (0.0, 0.0);
        let mut cur = Some(flow);
        while let Some(f) = cur {
            x += self.metrics[f].x;
            y += self.metrics[f].y;
            cur = self.flows[f].parent;
        }
        (x, y)
    }

    pub fn mark_self_dirty(&mut self, flow: usize) {
        self.dirty[flow].self_dirty = true;
        let mut cur = self.flows[flow].parent;
        while let Some(p) = cur {
            if self.dirty[p].descendant_dirty {
                break;
            }
            self.dirty[p].descendant_dirty = true;
            cur = self.flows[p].parent;
        }
    }

    pub fn mark_all_dirty(&mut self) {
        for f in self.preorder() {
            self.mark_self_dirty(f);
        }
    }

    pub fn clear_dirty(&mut self) {
        self.dirty.iter_mut().for_each(|d| *d = DirtyBits::default());
    }

    /// Live flows with `self_dirty` set, in pre-order.
    pub fn self_dirty_flows(&self) -> Vec<usize> {
        self.preorder().into_iter().filter(|&f| self.dirty[f].self_dirty).collect()
    }

    /// Checks the dirty invariant: every ancestor of a dirty flow has
    /// `descendant_dirty` set.
    pub fn dirty_consistent(&self) -> bool {
        self.preorder().into_iter().all(|f| {
            let d = self.dirty[f];
            !(d.self_dirty || d.descendant_dirty) || self.flows[f].parent.is_none_or(|p| self.dirty[p].descendant_dirty)
        })
    }

    /// Rebuilds the flows affected by a change at DOM node `changed`, whose
    /// styles must already be current. Returns the flows marked self-dirty.
    pub fn rebuild_for(&mut self, tree: &DomTree, styles: &StyleMap, changed: NodeId) -> Result<Vec<usize>, FlowError> {
        let (origin, target) = self.rebuild_target(tree, styles, changed)?;
        let style = if origin == tree.root() {
            styles.get(origin).cloned().unwrap_or_else(ComputedStyle::initial)
        } else {
            styles.get(origin).cloned().ok_or(FlowError::MissingStyle { node: origin })?
        };
        let fresh = build_block(tree, styles, origin, style)?;
        let old = self.subtree_preorder(target);
        let fresh_order = local_preorder(&fresh);
        let same_shape = old.len() == fresh_order.len()
            && old.iter().zip(&fresh_order).all(|(&a, &b)| {
                let (x, y) = (&self.flows[a], &fresh[b]);
                x.kind == y.kind
                    && x.dom_origin == y.dom_origin
                    && x.children.len() == y.children.len()
                    && x.fragments.len() == y.fragments.len()
                    && x.fragments.iter().zip(&y.fragments).all(|(p, q)| p.same_shape(q))
            });
        let mut dirtied = Vec::new();
        if same_shape {
            for (&a, &b) in old.iter().zip(&fresh_order) {
                let x = &mut self.flows[a];
                if x.style != fresh[b].style || x.fragments != fresh[b].fragments {
                    x.style = fresh[b].style.clone();
                    x.fragments = fresh[b].fragments.clone();
                    dirtied.push(a);
                }
            }
        } else {
            for &f in &old {
                self.alive[f] = false;
                if let Some(o) = self.flows[f].dom_origin {
                    if self.by_origin.get(&o) == Some(&f) {
                        self.by_origin.remove(&o);
                    }
                }
            }
            let parent = self.flows[target].parent;
            let base = self.flows.len();
            // fresh index 0 reuses `target`; the rest are appended.
            let map = |i: usize| if i == 0 { target } else { base + i - 1 };
            for (i, mut f) in fresh.into_iter().enumerate() {
                f.parent = if i == 0 { parent } else { f.parent.map(map) };
                f.children = f.children.iter().map(|&c| map(c)).collect();
                let at = map(i);
                if let Some(o) = f.dom_origin {
                    self.by_origin.insert(o, at);
                }
                if i == 0 {
                    self.flows[at] = f;
                    self.alive[at] = true;
                    self.metrics[at] = LayoutMetrics::default();
                } else {
                    self.flows.push(f);
                    self.alive.push(true);
                    self.sizes.push(0);
                    self.metrics.push(LayoutMetrics::default());
                    self.dirty.push(DirtyBits::default());
                }
                dirtied.push(at);
            }
            self.recompute_sizes();
        }
        for &f in &dirtied {
            self.mark_self_dirty(f);
        }
        Ok(dirtied)
    }

    /// Nearest node at or above `changed` that owns a block flow and is
    /// still block-level.
    fn rebuild_target(&self, tree: &DomTree, styles: &StyleMap, changed: NodeId) -> Result<(NodeId, usize), FlowError> {
        if !tree.contains(changed) {
            return Err(FlowError::NoSuchNode(changed));
        }
        let mut cur = Some(changed);
        while let Some(n) = cur {
            if let Some(f) = self.flow_for(n) {
                let block = n == tree.root() || styles.get(n).is_some_and(|s| s.display.is_block_level());
                let attached = tree.parent(n).is_none_or(|p| self.displayed(tree, styles, p));
                if block && attached {
                    return Ok((n, f));
                }
            }
            cur = tree.parent(n);
        }
        Ok((tree.root(), self.root))
    }

    /// True if `node` and all its ancestors are displayed.
    fn displayed(&self, tree: &DomTree, styles: &StyleMap, node: NodeId) -> bool {
        let mut cur = Some(node);
        while let Some(n) = cur {
            if n != tree.root() && styles.get(n).is_none_or(|s| s.display == Display::None) {
                return false;
            }
            cur = tree.parent(n);
        }
        true
    }

    fn subtree_preorder(&self, from: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![from];
        while let Some(f) = stack.pop() {
            out.push(f);
            stack.extend(self.flows[f].children.iter().rev());
        }
        out
    }

    fn recompute_sizes(&mut self) {
        for f in self.preorder().into_iter().rev() {
            self.sizes[f] = 1 + self.flows[f].children.iter().map(|&c| self.sizes[c]).sum::<usize>();
        }
    }

    /// One line per flow: `block|inline origin|anon [fragments]`, two
    /// spaces of indent per level.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let mut stack = vec![(self.root, 0usize)];
        while let Some((f, depth)) = stack.pop() {
            let flow = &self.flows[f];
            let kind = match flow.kind {
                FlowKind::Block => "block",
                FlowKind::Inline => "inline",
            };
            let origin = flow.dom_origin.map_or("anon".to_string(), |o| o.to_string());
            let _ = write!(out, "{}{kind} {origin}", "  ".repeat(depth));
            if flow.kind == FlowKind::Inline {
                let frags: Vec<String> = flow
                    .fragments
                    .iter()
                    .map(|fr| {
                        let tag = if fr.is_marker() { "marker" } else { "text" };
                        format!("{tag} \"{}\"", escape_text(fr.text()))
                    })
                    .collect();
                let _ = write!(out, " [{}]", frags.join(", "));
            }
            out.push('\n');
            for &c in flow.children.iter().rev() {
                stack.push((c, depth + 1));
            }
        }
        out
    }
}

fn local_preorder(flows: &[Flow]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut stack = vec![0];
    while let Some(f) = stack.pop() {
        out.push(f);
        stack.extend(flows[f].children.iter().rev());
    }
    out
}

impl TraversalTree for FlowTree {
    fn root(&self) -> usize {
        self.root
    }

    fn node_capacity(&self) -> usize {
        self.flows.len()
    }

    fn children(&self, node: usize) -> &[usize] {
        &self.flows[node].children
    }

    fn parent(&self, node: usize) -> Option<usize> {
        self.flows[node].parent
    }

    fn subtree_size(&self, node: usize) -> usize {
        self.sizes[node]
    }
}
