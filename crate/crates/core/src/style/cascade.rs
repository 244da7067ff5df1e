use crate::dom::{DomTree, NodeId, NodeKind};
use crate::scheduler::{traverse_top_down, NodeSlots, Scope, TraversalError, TraversalOptions, TreeShape};

use super::parser::{parse_declarations, Declaration, Property, Rule, Value};
use super::selector::Specificity;
use super::values::{ComputedStyle, Display, Size};
use super::StyleError;

/// Specificity given to declarations from a `style` attribute.
pub const INLINE_SPECIFICITY: Specificity = Specificity(2, 0, 0);

/// UA default for `display` by element name.
pub fn default_display(name: &str) -> Display {
    match name {
        "html" | "body" | "div" | "p" | "h1" | "h2" | "h3" | "h4" | "h5" | "h6" | "ul" => Display::Block,
        "li" => Display::ListItem,
        "head" | "script" | "style" | "title" | "meta" | "link" => Display::None,
        _ => Display::Inline,
    }
}

/// Computes the style of element `node`. Without `parent_style` the node
/// inherits from the initial style.
pub fn cascade(
    node: NodeId,
    tree: &DomTree,
    rules: &[Rule],
    parent_style: Option<&ComputedStyle>,
) -> Result<ComputedStyle, StyleError> {
    let name = tree.element_name(node).ok_or(StyleError::NotAnElement(node))?;
    let mut matched: Vec<(Specificity, usize, &[Declaration])> = Vec::new();
    for rule in rules {
        if rule.selector.matches(tree, node)? {
            matched.push((rule.selector.specificity(), rule.source_order, &rule.declarations));
        }
    }
    let inline = tree.attr(node, "style").map(|s| parse_declarations(s).0);
    if let Some(decls) = &inline {
        matched.push((INLINE_SPECIFICITY, usize::MAX, decls));
    }
    matched.sort_by_key(|&(spec, order, _)| (spec, order));

    let mut winners: [Option<Value>; PROPERTY_COUNT] = [None; PROPERTY_COUNT];
    for (_, _, decls) in &matched {
        for d in decls.iter() {
            winners[d.property as usize] = Some(d.value);
        }
    }
    let initial = ComputedStyle::initial();
    let parent = parent_style.unwrap_or(&initial);
    let get = |p: Property| winners[p as usize];

    let font_size = match get(Property::FontSize) {
        Some(Value::Px(v)) => v,
        Some(Value::Em(v)) => v * parent.font_size,
        _ => parent.font_size,
    };
    let length = |p: Property| match get(p) {
        Some(Value::Px(v)) => v,
        Some(Value::Em(v)) => v * font_size,
        _ => 0.0,
    };
    let size = |p: Property| match get(p) {
        Some(Value::Px(v)) => Size::Px(v),
        Some(Value::Em(v)) => Size::Px(v * font_size),
        _ => Size::Auto,
    };
    let color = |p: Property, fallback| match get(p) {
        Some(Value::Color(c)) => c,
        _ => fallback,
    };
    let mut style = ComputedStyle {
        display: match get(Property::Display) {
            Some(Value::Display(d)) => d,
            _ => default_display(name),
        },
        width: size(Property::Width),
        height: size(Property::Height),
        font_size,
        color: color(Property::Color, parent.color),
        background_color: color(Property::BackgroundColor, initial.background_color),
        ..initial
    };
    style.margin.top = length(Property::MarginTop);
    style.margin.right = length(Property::MarginRight);
    style.margin.bottom = length(Property::MarginBottom);
    style.margin.left = length(Property::MarginLeft);
    style.padding.top = length(Property::PaddingTop);
    style.padding.right = length(Property::PaddingRight);
    style.padding.bottom = length(Property::PaddingBottom);
    style.padding.left = length(Property::PaddingLeft);
    Ok(style)
}

const PROPERTY_COUNT: usize = Property::FontSize as usize + 1;

/// Computed styles indexed by DOM node index. Elements have a style; the
/// document node carries the initial style; other nodes have none.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StyleMap {
    styles: Vec<Option<ComputedStyle>>,
}

impl StyleMap {
    pub fn get(&self, node: NodeId) -> Option<&ComputedStyle> {
        self.styles.get(node.index()).and_then(Option::as_ref)
    }

    pub fn insert(&mut self, node: NodeId, style: ComputedStyle) {
        if self.styles.len() <= node.index() {
            self.styles.resize(node.index() + 1, None);
        }
        self.styles[node.index()] = Some(style);
    }

    pub fn remove(&mut self, node: NodeId) {
        if let Some(slot) = self.styles.get_mut(node.index()) {
            *slot = None;
        }
    }

    pub fn len(&self) -> usize {
        self.styles.iter().flatten().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `id: property=value` lines for every element in document order.
    pub fn dump(&self, tree: &DomTree) -> String {
        let mut out = String::new();
        for id in tree.descendants(tree.root()) {
            if tree.element_name(id).is_none() {
                continue;
            }
            if let Some(style) = self.get(id) {
                for (name, value) in style.properties() {
                    out.push_str(&format!("{id}: {name}={value}\n"));
                }
            }
        }
        out
    }
}

fn styled_shape(tree: &DomTree, from: NodeId) -> TreeShape {
    TreeShape::build(from.index(), tree.capacity(), |n| {
        tree.children(NodeId::from_index(n))
            .iter()
            .filter(|&&c| tree.element_name(c).is_some())
            .map(|c| c.index())
            .collect::<Vec<_>>()
    })
}

/// Styles every element with a parallel top-down traversal.
pub fn compute_styles(tree: &DomTree, rules: &[Rule], options: TraversalOptions) -> Result<StyleMap, StyleError> {
    let mut map = StyleMap::default();
    map.insert(tree.root(), ComputedStyle::initial());
    restyle_subtree(tree, rules, tree.root(), &mut map, options)?;
    Ok(map)
}

/// Recomputes styles for `from` and its element descendants, inheriting from
/// the style already stored for `from`'s parent.
pub fn restyle_subtree(
    tree: &DomTree,
    rules: &[Rule],
    from: NodeId,
    map: &mut StyleMap,
    options: TraversalOptions,
) -> Result<(), StyleError> {
    tree.node(from).map_err(|_| StyleError::NoSuchNode(from))?;
    let shape = styled_shape(tree, from);
    let is_document = matches!(tree.node(from).map(|n| &n.kind), Ok(NodeKind::Document));
    let inherited = tree.parent(from).and_then(|p| map.get(p)).cloned();
    let mut slots: NodeSlots<Option<ComputedStyle>> = NodeSlots::with_len(tree.capacity());
    if is_document {
        *slots.get_mut(from.index()) = Some(ComputedStyle::initial());
    }
    let failure = std::sync::Mutex::new(None);
    traverse_top_down(&shape, &mut slots, Scope::Full, options, |n, slot, parent| {
        if n == from.index() && is_document {
            return true;
        }
        let parent_style = if n == from.index() { inherited.as_ref() } else { parent.and_then(Option::as_ref) };
        match cascade(NodeId::from_index(n), tree, rules, parent_style) {
            Ok(style) => {
                *slot = Some(style);
                true
            }
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
                false
            }
        }
    })?;
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    for (i, style) in slots.into_vec().into_iter().enumerate() {
        if let Some(style) = style {
            map.insert(NodeId::from_index(i), style);
        }
    }
    Ok(())
}

impl From<TraversalError> for StyleError {
    fn from(e: TraversalError) -> Self {
        StyleError::Traversal(e)
    }
}
